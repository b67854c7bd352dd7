#pragma once

#include "offspec/gauss_legendre.hpp"
#include "offspec/jordan.hpp"
#include "offspec/potential.hpp"

namespace offspec {

struct GridSpec {
    cplx center{0.0, 0.0};
    double half_width = 1.2;
    int resolution = 256;  // points per side
    double outer_radius = 1.0;

    void validate() const {
        if (resolution < 64) throw validation_error("grid: resolution must be >= 64");
        if (outer_radius <= 0 || outer_radius > half_width * std::sqrt(2.0))
            throw validation_error("grid: outer radius outside the box");
    }
    double h() const { return 2.0 * half_width / (resolution - 1); }
    cplx node(int i, int j) const {
        return center + cplx(-half_width + i * h(), -half_width + j * h());
    }
};

// Discrete solution of the obstacle problem for hat-Q_{tau,w0}. u holds the
// regular part hat-Q - tau*log|z-w0|, which is subharmonic across w0, so the
// five-point stencil never sees the logarithmic singularity.
struct ObstacleSolution {
    GridSpec grid;
    std::vector<double> u;          // row-major [j*n + i]
    std::vector<std::uint8_t> contact;
    double tau = 0.0;
    cplx w0{0.0, 0.0};
    Potential potential;
    double contact_c = 5.0;         // contact where Q - hatQ <= contact_c * h^2
    int iterations = 0;
    double final_change = 0.0;
    std::string note;

    double obstacle_value(cplx z) const {
        double f = potential.eval(z);
        if (tau != 0.0) {
            double d = std::abs(z - w0);
            if (d == 0.0) return std::numeric_limits<double>::infinity();
            f -= tau * std::log(d);
        }
        return f;
    }

    // bilinear interpolation of the regular part
    double u_at(cplx z) const {
        int n = grid.resolution;
        double h = grid.h();
        double x = (z.real() - grid.center.real() + grid.half_width) / h;
        double y = (z.imag() - grid.center.imag() + grid.half_width) / h;
        int i = std::clamp(static_cast<int>(std::floor(x)), 0, n - 2);
        int j = std::clamp(static_cast<int>(std::floor(y)), 0, n - 2);
        double fx = x - i, fy = y - j;
        return (1 - fx) * (1 - fy) * u[j * n + i] + fx * (1 - fy) * u[j * n + i + 1] +
               (1 - fx) * fy * u[(j + 1) * n + i] + fx * fy * u[(j + 1) * n + i + 1];
    }
    double hatQ_at(cplx z) const {
        double v = u_at(z);
        if (tau != 0.0) v += tau * std::log(std::abs(z - w0));
        return v;
    }
    // Q - hatQ, nonnegative, zero on the droplet
    double gap_at(cplx z) const { return potential.eval(z) - hatQ_at(z); }
};

// Projected SOR sweeps (red-black) for u <- min(obstacle, relaxed neighbor mean);
// omega = 1 is the plain projected neighbor-mean iteration.
inline ObstacleSolution solve_obstacle(const Potential& p, double tau, cplx w0, GridSpec grid,
                                       double tol = 1e-10, int max_sweeps = 200000,
                                       double omega = 0.0) {
    grid.validate();
    if (tau < 0) throw validation_error("solve_obstacle: tau must be >= 0");
    if (tau > 0 && tau >= p.tau_growth())
        throw validation_error("solve_obstacle: tau >= tau_Q");
    ObstacleSolution sol;
    sol.grid = grid;
    sol.tau = tau;
    sol.potential = p;

    int n = grid.resolution;
    double h = grid.h();
    // root point on a node: offset by half a cell
    if (tau != 0.0) {
        double x = (w0.real() - grid.center.real() + grid.half_width) / h;
        double y = (w0.imag() - grid.center.imag() + grid.half_width) / h;
        if (std::abs(x - std::round(x)) < 1e-12 && std::abs(y - std::round(y)) < 1e-12) {
            w0 += cplx(0.5 * h, 0.5 * h);
            sol.note = "w0 moved off a grid node by half a cell";
        }
    }
    sol.w0 = w0;
    if (std::abs(w0 - grid.center) > grid.outer_radius)
        throw validation_error("solve_obstacle: w0 outside the Dirichlet ring");

    std::vector<double> F(n * n);
    std::vector<std::uint8_t> fixed(n * n, 0);
    parallel_for(n, [&](int j) {
        for (int i = 0; i < n; ++i) {
            cplx z = grid.node(i, j);
            double f = p.eval(z);
            if (tau != 0.0) {
                double d = std::abs(z - w0);
                f = (d == 0.0) ? std::numeric_limits<double>::infinity()
                               : f - tau * std::log(d);
            }
            F[j * n + i] = f;
            if (std::abs(z - grid.center) >= grid.outer_radius || i == 0 || j == 0 ||
                i == n - 1 || j == n - 1)
                fixed[j * n + i] = 1;  // Dirichlet: u = obstacle in the bulk ring
        }
    });
    sol.u = F;  // start at the obstacle (it majorizes the solution)
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            if (!std::isfinite(sol.u[j * n + i])) sol.u[j * n + i] = 1e30;

    if (omega <= 0.0) omega = 2.0 / (1.0 + std::sin(kPi / n));
    auto& u = sol.u;
    double change = 0.0;
    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        change = 0.0;
        for (int color = 0; color < 2; ++color) {
            std::vector<double> row_change(n, 0.0);
            parallel_for(n - 2, [&](int jj) {
                int j = jj + 1;
                double local = 0.0;
                for (int i = 1 + ((j + color) & 1); i < n - 1; i += 2) {
                    int id = j * n + i;
                    if (fixed[id]) continue;
                    double mean = 0.25 * (u[id - 1] + u[id + 1] + u[id - n] + u[id + n]);
                    double cand = u[id] + omega * (mean - u[id]);
                    double nv = std::min(F[id], cand);
                    local = std::max(local, std::abs(nv - u[id]));
                    u[id] = nv;
                }
                row_change[j] = local;
            });
            for (double c : row_change) change = std::max(change, c);
        }
        if (change < tol) break;
    }
    sol.iterations = sweep;
    sol.final_change = change;
    if (change >= tol)
        throw tolerance_error("solve_obstacle: no convergence within the iteration cap (" +
                              fmt_g(change) + ")");

    double cth = sol.contact_c * h * h;
    sol.contact.assign(n * n, 0);
    parallel_for(n, [&](int j) {
        for (int i = 0; i < n; ++i) {
            int id = j * n + i;
            double gap = F[id] - u[id];
            sol.contact[id] = (gap <= cth) ? 1 : 0;
        }
    });
    return sol;
}

namespace detail {

// connected component of the non-contact set containing w0 (4-neighborhood)
inline std::vector<std::uint8_t> offspectral_component(const ObstacleSolution& sol) {
    int n = sol.grid.resolution;
    double h = sol.grid.h();
    int i0 = static_cast<int>(std::round(
        (sol.w0.real() - sol.grid.center.real() + sol.grid.half_width) / h));
    int j0 = static_cast<int>(std::round(
        (sol.w0.imag() - sol.grid.center.imag() + sol.grid.half_width) / h));
    if (i0 < 0 || j0 < 0 || i0 >= n || j0 >= n)
        throw validation_error("extract_boundary: w0 outside grid");
    if (sol.contact[j0 * n + i0])
        throw validation_error("w0 is not off-spectral");
    std::vector<std::uint8_t> comp(n * n, 0);
    std::vector<int> stack{j0 * n + i0};
    comp[j0 * n + i0] = 1;
    while (!stack.empty()) {
        int id = stack.back();
        stack.pop_back();
        int i = id % n, j = id / n;
        if (i == 0 || j == 0 || i == n - 1 || j == n - 1)
            throw validation_error("extract_boundary: off-spectral component touches grid edge");
        for (int d : {id - 1, id + 1, id - n, id + n}) {
            if (!comp[d] && !sol.contact[d]) {
                comp[d] = 1;
                stack.push_back(d);
            }
        }
    }
    return comp;
}

// last crossing of gap(z) = level along the outward ray from origin `w`
inline double ray_level_crossing(const ObstacleSolution& sol, cplx w, double alpha,
                                 double level, double rmax) {
    double h = sol.grid.h();
    double step = 0.25 * h;
    cplx dir = std::polar(1.0, alpha);
    double prev_r = 1e-3 * h;
    double prev_g = sol.gap_at(w + prev_r * dir);
    double lo = -1, hi = -1;
    for (double r = step; r < rmax; r += step) {
        double g = sol.gap_at(w + r * dir);
        if (prev_g > level && g <= level) {
            lo = prev_r;
            hi = r;
            break;
        }
        prev_r = r;
        prev_g = g;
    }
    if (lo < 0) throw validation_error("extract_boundary: no level crossing along a ray");
    for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        if (sol.gap_at(w + mid * dir) > level)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-15) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

// Off-spectral boundary via leveled contour extraction. The gap Q - hatQ vanishes
// quadratically at the free boundary, so crossings of levels c_k h^2 sit at
// distance ~ sqrt(level / (2 Delta Q)) inside the component; a per-angle fit
// rho(level) = x0 + a sqrt(level) + b level removes both the offset and the cubic
// model bias, leaving the zero-level position x0.
inline JordanBoundary extract_offspectral_boundary(const ObstacleSolution& sol, int n_modes = 32,
                                                   int n_rays = 512) {
    auto comp = detail::offspectral_component(sol);
    int n = sol.grid.resolution;
    double h = sol.grid.h();

    // provisional centroid from a single-level pass about w0
    const std::vector<double> levels_c{6.0, 10.0, 16.0, 26.0, 42.0};
    double rmax = sol.grid.outer_radius;
    int coarse = 64;
    cplx centroid(0.0);
    for (int a = 0; a < coarse; ++a) {
        double th = 2.0 * kPi * a / coarse;
        double r = detail::ray_level_crossing(sol, sol.w0, th, 10.0 * h * h, rmax);
        centroid += (sol.w0 + std::polar(r, th)) / static_cast<double>(coarse);
    }

    std::vector<double> rho(n_rays);
    parallel_for(n_rays, [&](int a) {
        double th = 2.0 * kPi * a / n_rays;
        std::vector<double> sq, lv, rr;
        for (double c : levels_c) {
            double level = c * h * h;
            double r = detail::ray_level_crossing(sol, centroid, th, level, rmax);
            rr.push_back(r);
            sq.push_back(std::sqrt(level));
            lv.push_back(level);
        }
        // least squares for [x0, alpha, beta] against 1, sqrt(l), l
        double S[3][3] = {};
        double b[3] = {};
        for (std::size_t i = 0; i < rr.size(); ++i) {
            double row[3] = {1.0, sq[i], lv[i]};
            for (int p = 0; p < 3; ++p) {
                b[p] += row[p] * rr[i];
                for (int q = 0; q < 3; ++q) S[p][q] += row[p] * row[q];
            }
        }
        // 3x3 solve
        double det = S[0][0] * (S[1][1] * S[2][2] - S[1][2] * S[2][1]) -
                     S[0][1] * (S[1][0] * S[2][2] - S[1][2] * S[2][0]) +
                     S[0][2] * (S[1][0] * S[2][1] - S[1][1] * S[2][0]);
        if (det == 0) throw tolerance_error("extract_boundary: singular level fit");
        auto det3 = [&](int col) {
            double M[3][3];
            for (int r2 = 0; r2 < 3; ++r2)
                for (int c2 = 0; c2 < 3; ++c2) M[r2][c2] = (c2 == col) ? b[r2] : S[r2][c2];
            return M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1]) -
                   M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0]) +
                   M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0]);
        };
        rho[a] = det3(0) / det;
    });

    double residual = 0.0;
    JordanBoundary b = fit_boundary(centroid, rho, n_modes, &residual);
    b.interior_point = sol.w0;
    if (b.winding_number(sol.w0) != 1)
        throw tolerance_error("extract_boundary: winding number about w0 is not 1");
    (void)comp;
    return b;
}

// Weighted Laplacian growth balance (Hele-Shaw): returns
// | int_{Omega_tau \ Omega_tau'} h 2 DeltaQ dA - (tau - tau') h(w0) |.
inline double verify_hele_shaw(const Potential& p, const JordanBoundary& btau,
                               const JordanBoundary& btau_prime, double tau, double tau_prime,
                               cplx w0, const std::function<double(cplx)>& hfun,
                               int n_theta = 512, int n_r = 96) {
    if (tau_prime >= tau) throw validation_error("verify_hele_shaw: need tau' < tau");
    // nesting check (masks nest iff radii nest for these star-like domains)
    for (int a = 0; a < 256; ++a) {
        double th = 2.0 * kPi * a / 256;
        double r1 = std::abs(btau.point(th) - w0);
        double r0 = btau_prime.radius_about(w0, std::arg(btau.point(th) - w0));
        if (r0 >= r1 + 1e-9) throw validation_error("verify_hele_shaw: domains not nested");
    }
    auto disk_integral = [&](const JordanBoundary& b) {
        // polar quadrature about w0 with analytic radius function
        std::vector<double> gl_x(n_r), gl_w(n_r);
        gauss_legendre_01(n_r, gl_x, gl_w);
        double acc = 0.0;
        for (int a = 0; a < n_theta; ++a) {
            double th = 2.0 * kPi * a / n_theta;
            double R = b.radius_about(w0, th);
            for (int q = 0; q < n_r; ++q) {
                double r = R * gl_x[q];
                cplx z = w0 + std::polar(r, th);
                acc += gl_w[q] * R * r * hfun(z) * 2.0 * p.lap(z);
            }
        }
        // dA = r dr dtheta / pi
        return acc * (2.0 * kPi / n_theta) / kPi;
    };
    double lhs = disk_integral(btau) - disk_integral(btau_prime);
    double rhs = (tau - tau_prime) * hfun(w0);
    return std::abs(lhs - rhs);
}

// Free-boundary velocity along the inward normal against dtau |phi'| / (4 DeltaQ).
// phi_prime_abs gives |phi'_{tau,w0}| at boundary points.
inline double boundary_velocity_check(const Potential& p, const JordanBoundary& btau,
                                      const JordanBoundary& btau_minus, double dtau, cplx w0,
                                      const std::function<double(cplx)>& phi_prime_abs,
                                      int n_samples = 128) {
    if (dtau == 0.0) return 0.0;
    if (dtau < 0) throw validation_error("boundary_velocity_check: dtau must be >= 0");
    double worst = 0.0;
    for (int a = 0; a < n_samples; ++a) {
        double th = 2.0 * kPi * a / n_samples;
        cplx zeta = btau.point(th);
        cplx nu = btau.inward_normal(th);
        // measured displacement: nearest intersection of the normal ray with the
        // inner boundary, via Newton on |cross product|
        double t_lo = 0.0, t_hi = 8.0 * dtau * phi_prime_abs(zeta) / (4.0 * p.lap(zeta)) + 1e-12;
        auto inside = [&](double t) {
            cplx z = zeta + t * nu;
            double rb = btau_minus.radius_about(w0, std::arg(z - w0));
            return std::abs(z - w0) < rb;
        };
        if (inside(t_lo)) throw validation_error("boundary_velocity_check: dtau too large");
        bool bracket = false;
        for (int it = 0; it < 64; ++it) {
            if (inside(t_hi)) {
                bracket = true;
                break;
            }
            t_hi *= 1.5;
            if (t_hi > 1.0) break;
        }
        if (!bracket) throw validation_error("boundary_velocity_check: boundaries not close");
        for (int it = 0; it < 60; ++it) {
            double mid = 0.5 * (t_lo + t_hi);
            (inside(mid) ? t_hi : t_lo) = mid;
        }
        double measured = 0.5 * (t_lo + t_hi);
        double predicted = dtau * phi_prime_abs(zeta) / (4.0 * p.lap(zeta));
        worst = std::max(worst, std::abs(measured - predicted));
    }
    return worst;
}

// Off-spectral growth bound |f| <= C0 m^{1/2} e^{m hatQ} ||f||: returns the fitted
// C0 over the samples and counts violations against a given cap.
struct GrowthBoundReport {
    double fitted_C0 = 0.0;
    int violations = 0;
};
// log_abs_f returns log|f(z)| (log-form avoids overflow of e^{m hatQ}).
inline GrowthBoundReport growth_bound_check(const std::function<double(cplx)>& log_abs_f,
                                            double f_norm, const ObstacleSolution& sol, int m,
                                            const std::vector<cplx>& sample_points,
                                            double C0_cap = 0.0) {
    GrowthBoundReport rep;
    if (f_norm <= 0) return rep;
    for (cplx z : sample_points) {
        double log_bound_unit = 0.5 * std::log(static_cast<double>(m)) + m * sol.hatQ_at(z) +
                                std::log(f_norm);
        double ratio = std::exp(log_abs_f(z) - log_bound_unit);
        rep.fitted_C0 = std::max(rep.fitted_C0, ratio);
        if (C0_cap > 0 && ratio > C0_cap) ++rep.violations;
    }
    return rep;
}

}  // namespace offspec
