#pragma once

#include "offspec/circle_fun.hpp"

namespace offspec {

// Closed analytic curve gamma(theta) = sum_k c_k e^{ik theta}, counterclockwise,
// with a designated interior point. Mode 0 is the centroid of the parametrization.
struct JordanBoundary {
    std::vector<cplx> coefs;  // index k + Kb
    int Kb = 0;
    cplx interior_point{0.0, 0.0};
    double fit_residual = 0.0;

    cplx coef(int k) const {
        return (std::abs(k) <= Kb) ? coefs[k + Kb] : cplx(0.0);
    }
    void set_coef(int k, cplx v) { coefs[k + Kb] = v; }

    static JordanBoundary circle(cplx center, double radius, int Kb = 8) {
        JordanBoundary b;
        b.Kb = Kb;
        b.coefs.assign(2 * Kb + 1, cplx(0.0));
        b.set_coef(0, center);
        b.set_coef(1, cplx(radius, 0.0));
        b.interior_point = center;
        return b;
    }
    static JordanBoundary ellipse(cplx center, double ax, double ay, int Kb = 8) {
        // x = ax cos, y = ay sin: c_1 = (ax+ay)/2, c_{-1} = (ax-ay)/2
        JordanBoundary b;
        b.Kb = Kb;
        b.coefs.assign(2 * Kb + 1, cplx(0.0));
        b.set_coef(0, center);
        b.set_coef(1, cplx(0.5 * (ax + ay), 0.0));
        b.set_coef(-1, cplx(0.5 * (ax - ay), 0.0));
        b.interior_point = center;
        return b;
    }

    cplx point(double theta) const {
        cplx z(0.0);
        for (int k = -Kb; k <= Kb; ++k) z += coef(k) * std::polar(1.0, k * theta);
        return z;
    }
    // d gamma / d theta
    cplx tangent(double theta) const {
        cplx z(0.0);
        for (int k = -Kb; k <= Kb; ++k)
            z += coef(k) * cplx(0.0, static_cast<double>(k)) * std::polar(1.0, k * theta);
        return z;
    }
    cplx outward_normal(double theta) const {
        cplx t = tangent(theta);
        double a = std::abs(t);
        if (a == 0) throw validation_error("JordanBoundary: degenerate tangent");
        return cplx(0.0, -1.0) * t / a;  // ccw curve: rotate tangent by -90 degrees
    }
    cplx inward_normal(double theta) const { return -outward_normal(theta); }

    cplx centroid() const { return coef(0); }

    int winding_number(cplx z, int n = 2048) const {
        double total = 0.0;
        cplx prev = point(0.0) - z;
        for (int i = 1; i <= n; ++i) {
            cplx cur = point(2.0 * kPi * i / n) - z;
            total += std::arg(cur / prev);
            prev = cur;
        }
        return static_cast<int>(std::lround(total / (2.0 * kPi)));
    }

    // star-likeness about a point; required by the mapping method
    bool star_like_about(cplx w, int n = 1024) const {
        double prev = std::arg(point(0.0) - w);
        double total = 0;
        for (int i = 1; i <= n; ++i) {
            double a = std::arg(point(2.0 * kPi * i / n) - w);
            double d = a - prev;
            while (d > kPi) d -= 2 * kPi;
            while (d < -kPi) d += 2 * kPi;
            if (d <= 0) return false;
            total += d;
            prev = a;
        }
        return std::abs(total - 2 * kPi) < 1e-6;
    }

    // dense-sample self-intersection test (cheap segment sweep)
    bool simple_curve(int n = 512) const {
        std::vector<cplx> p(n);
        for (int i = 0; i < n; ++i) p[i] = point(2.0 * kPi * i / n);
        auto seg_cross = [](cplx a, cplx b, cplx c, cplx d) {
            auto orient = [](cplx p0, cplx p1, cplx p2) {
                double v = ((p1 - p0) * std::conj(p2 - p0)).imag();
                return (v > 0) - (v < 0);
            };
            return orient(a, b, c) != orient(a, b, d) && orient(c, d, a) != orient(c, d, b);
        };
        for (int i = 0; i < n; ++i) {
            for (int j = i + 2; j < n; ++j) {
                if (i == 0 && j == n - 1) continue;
                if (seg_cross(p[i], p[(i + 1) % n], p[j], p[(j + 1) % n])) return false;
            }
        }
        return true;
    }

    // radius function about a point along direction e^{i alpha}; Newton on the
    // curve parameter (the curve must be star-like about w)
    double radius_about(cplx w, double alpha) const {
        double th = alpha;  // near-identity parametrizations in this pipeline
        for (int it = 0; it < 60; ++it) {
            cplx d = point(th) - w;
            double f = std::arg(d * std::polar(1.0, -alpha));
            cplx t = tangent(th);
            double df = (t / d).imag();
            if (df == 0) break;
            double step = f / df;
            th -= step;
            if (std::abs(step) < 1e-14) break;
        }
        return std::abs(point(th) - w);
    }

    // spectral decay diagnostic: analytic boundaries have exponentially small tails
    double coef_tail_ratio() const {
        double peak = 0, tail = 0;
        for (int k = -Kb; k <= Kb; ++k) {
            if (k == 0) continue;
            peak = std::max(peak, std::abs(coef(k)));
            if (std::abs(k) > (3 * Kb) / 4) tail = std::max(tail, std::abs(coef(k)));
        }
        return peak > 0 ? tail / peak : 0.0;
    }
};

// Least-squares/FFT fit of a star-like curve w + rho(theta) e^{i theta} into
// Fourier modes; rho sampled on a uniform angle grid about w.
inline JordanBoundary fit_boundary(cplx w, const std::vector<double>& rho, int n_modes,
                                   double* residual = nullptr) {
    int n = static_cast<int>(rho.size());
    std::vector<cplx> vals(n);
    for (int i = 0; i < n; ++i)
        vals[i] = w + rho[i] * std::polar(1.0, 2.0 * kPi * i / n);
    auto c = dft_forward(std::move(vals));
    JordanBoundary b;
    b.Kb = n_modes;
    b.coefs.assign(2 * n_modes + 1, cplx(0.0));
    for (int k = -n_modes; k <= n_modes; ++k) b.set_coef(k, c[(k % n + n) % n]);
    b.interior_point = w;
    if (residual) {
        double r = 0;
        for (int i = 0; i < n; ++i) {
            double th = 2.0 * kPi * i / n;
            r = std::max(r, std::abs(b.point(th) - (w + rho[i] * std::polar(1.0, th))));
        }
        *residual = r;
        b.fit_residual = r;
    }
    return b;
}

}  // namespace offspec
