#pragma once

#include "offspec/gauss_legendre.hpp"
#include "offspec/multiprec.hpp"

namespace offspec {

// Double-precision polar tensor quadrature about a center (Gauss-Legendre radial
// x uniform angular), for O(1) integrands such as log-normalized densities.
struct PlaneQuadrature {
    cplx center{0.0, 0.0};
    double radius = 1.0;
    std::vector<double> r, w;  // radial nodes/weights on [0, radius]
    int M = 64;

    static PlaneQuadrature make(cplx center, double radius, int n_r = 96, int M = 256) {
        PlaneQuadrature q;
        q.center = center;
        q.radius = radius;
        q.M = M;
        std::vector<double> x, wt;
        gauss_legendre_01(n_r, x, wt);
        q.r.resize(n_r);
        q.w.resize(n_r);
        for (int i = 0; i < n_r; ++i) {
            q.r[i] = radius * x[i];
            q.w[i] = radius * wt[i];
        }
        return q;
    }

    // integral of f against dA (Lebesgue/pi)
    cplx integrate(const std::function<cplx(cplx)>& f) const {
        std::vector<cplx> partial(r.size(), cplx(0.0));
        parallel_for(static_cast<int>(r.size()), [&](int i) {
            cplx acc(0.0);
            for (int a = 0; a < M; ++a) {
                cplx z = center + std::polar(r[i], 2.0 * kPi * a / M);
                acc += f(z);
            }
            partial[i] = acc * (w[i] * r[i]);
        });
        cplx total(0.0);
        for (auto& p : partial) total += p;
        return total * (2.0 * kPi / M) / kPi;
    }
    double integrate_real(const std::function<double(cplx)>& f) const {
        return integrate([&](cplx z) { return cplx(f(z), 0.0); }).real();
    }
};

// Extended-precision polar scheme for the oracle's weighted inner products.
// The domain radius is chosen so the worst basis-weighted integrand at the rim
// is below the precision target; Gauss-Legendre nodes are polished in mp.
template <class R>
struct OracleQuadrature {
    cplx center{0.0, 0.0};
    int m = 1;
    int n_max = 0;
    int digits = 40;
    R rim{1};
    std::vector<R> r, w;          // radial nodes/weights on [0, rim]
    int M = 256;                  // angular count
    std::vector<MpC<R>> unit;     // e^{i theta_a}
    double log_rim_integrand = 0; // certified tail estimate (natural log)

    static R pi_mp() { return boost::math::constants::pi<R>(); }

    // Legendre polish: a few mp Newton steps from double seeds
    static void nodes_mp(int n, std::vector<R>& x, std::vector<R>& w) {
        std::vector<double> xd, wd;
        gauss_legendre_01(n, xd, wd);
        x.resize(n);
        w.resize(n);
        for (int i = 0; i < n; ++i) {
            R t = R(1) - 2 * R(xd[i]);  // back to (-1,1)
            for (int it = 0; it < 6; ++it) {
                R p0(1), p1(0);
                for (int k = 0; k < n; ++k) {
                    R p2 = p1;
                    p1 = p0;
                    p0 = ((2 * R(k) + 1) * t * p1 - R(k) * p2) / R(k + 1);
                }
                R dp = R(n) * (t * p0 - p1) / (t * t - 1);
                t -= p0 / dp;
            }
            R p0(1), p1(0);
            for (int k = 0; k < n; ++k) {
                R p2 = p1;
                p1 = p0;
                p0 = ((2 * R(k) + 1) * t * p1 - R(k) * p2) / R(k + 1);
            }
            R dp = R(n) * (t * p0 - p1) / (t * t - 1);
            x[i] = (R(1) - t) / 2;
            w[i] = R(1) / ((1 - t * t) * dp * dp);
        }
    }

    static OracleQuadrature build(const Potential& p, const ConformalFactor& V, int m, cplx w0,
                                  int n_max, int digits, int n_r = 0, int M = 0) {
        OracleQuadrature q;
        q.center = w0;
        q.m = m;
        q.n_max = n_max;
        q.digits = digits;

        // rim scan in double: peak of (2 n_max + 1) log r - 2 m min_theta Q
        auto min_max_Q = [&](double r) {
            double mn = std::numeric_limits<double>::infinity(), mx = -mn;
            for (int a = 0; a < 64; ++a) {
                double v = p.eval(w0 + std::polar(r, 2.0 * kPi * a / 64));
                mn = std::min(mn, v);
                mx = std::max(mx, v);
            }
            return std::pair<double, double>(mn, mx);
        };
        double need = (digits + 12) * std::log(10.0);
        double peak = -std::numeric_limits<double>::infinity();
        double rim = 0;
        double ang_var = 0;
        bool found = false;
        for (double r = 0.05; r < 64.0; r *= 1.05) {
            auto [mn, mx] = min_max_Q(r);
            double val = (2.0 * n_max + 1.0) * std::log(r) - 2.0 * m * mn;
            peak = std::max(peak, val);
            ang_var = std::max(ang_var, mx - mn);
            if (val < peak - need) {
                rim = r;
                found = true;
                break;
            }
        }
        if (!found)
            throw validation_error(
                "oracle quadrature: no domain radius certifies the tail (n_max too large for "
                "the potential's growth)");
        q.rim = R(rim);
        q.log_rim_integrand = -need;

        if (n_r == 0) n_r = n_max + 48 + static_cast<int>(4.0 * std::sqrt(2.0 * m) * rim);
        if (M == 0)
            M = next_pow2(2 * (n_max + static_cast<int>(m * ang_var) + 24));
        q.M = M;

        nodes_mp(n_r, q.r, q.w);
        for (int i = 0; i < n_r; ++i) {
            q.r[i] *= q.rim;
            q.w[i] *= q.rim;
        }
        q.unit.resize(M);
        R twopi = 2 * pi_mp();
        for (int a = 0; a < M; ++a) {
            R th = twopi * R(a) / R(M);
            q.unit[a] = MpC<R>(cos(th), sin(th));
        }
        return q;
    }
};

}  // namespace offspec
