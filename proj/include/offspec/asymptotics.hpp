#pragma once

#include <random>

#include <boost/math/special_functions/gamma.hpp>

#include "offspec/conformal.hpp"
#include "offspec/flow.hpp"
#include "offspec/oracle.hpp"

namespace offspec {

// Assembled right-hand side of the root-function expansion
//   k_{m,n,w0}(z) ~ m^{1/4} phi'(z) phi(z)^n e^{m Qcal(z)} sum_j m^{-j} B_j(phi(z)),
// evaluated in log form (the e^{m Qcal} factor spans hundreds of orders).
struct PredictionBundle {
    DiskMap map;
    HoloFun qcal;   // Qcal: Re = Q on the interface, real at w0
    HoloFun hfun;   // H: Re = 1/4 log(2 DeltaQ) - 1/2 log V on the interface, real at w0
    FlowExpansion expansion;
    Potential pot;
    ConformalFactor V;
    int m = 0, n = 0, kappa = 0;
    double tau = 0.0;
    double A = 1.0;  // interface collar width multiplier

    cplx predicted_root_log(cplx z) const {
        cplx u = map.phi(z);
        double r = std::abs(u);
        if (r > map.r_out) throw validation_error("predicted_root: outside continuation region");
        if (r == 0.0 && n > 0) return cplx(-std::numeric_limits<double>::infinity(), 0.0);
        cplx lg = 0.25 * std::log(static_cast<double>(m));
        lg += std::log(map.phi_prime_at_u(u));
        if (n > 0) lg += static_cast<double>(n) * std::log(u);
        lg += static_cast<double>(m) * qcal.eval(u);
        lg += std::log(expansion.B_sum(1.0 / m, u));
        return lg;
    }
    cplx predicted_root(cplx z) const {
        cplx lg = predicted_root_log(z);
        if (lg.real() == -std::numeric_limits<double>::infinity()) return cplx(0.0);
        return std::exp(lg);
    }

    // leading-order Berezin density of the single root function,
    // (2 pi)^{-1/2} m^{1/2} |phi'| e^{-2m(Q - breveQ)} e^{2 Re H}
    double predicted_density(cplx z) const {
        cplx u = map.phi(z);
        double r = std::abs(u);
        if (r > map.r_out)
            throw validation_error("predicted_density: outside continuation region");
        double breve = qcal.eval(u).real() + (tau != 0.0 ? tau * std::log(r) : 0.0);
        double ex = -2.0 * m * (pot.eval(z) - breve) + 2.0 * hfun.eval(u).real();
        return std::sqrt(static_cast<double>(m) / (2.0 * kPi)) *
               std::abs(map.phi_prime_at_u(u)) * std::exp(ex);
    }

    // Omega_m: the off-spectral component fattened outward by A (log m / m)^{1/2}
    bool in_omega_m(cplx z) const {
        cplx u;
        try {
            u = map.phi(z);
        } catch (const validation_error&) {
            return false;
        }
        double r = std::abs(u);
        if (r <= 1.0) return true;
        if (r > map.r_out) return false;
        double width = A * std::sqrt(std::log(static_cast<double>(m)) / m);
        double plane_dist = (r - 1.0) * std::abs(map.psi_prime(u / r));
        return plane_dist <= width;
    }
    double collar_width() const {
        return A * std::sqrt(std::log(static_cast<double>(m)) / m);
    }
};

struct BundleParams {
    int kappa = 1;
    int K = 64;
    double A = 1.0;
    int qcal_modes = 0;  // 0: derive from K
    InducedWeightParams weight{};
};

inline PredictionBundle make_prediction_bundle(const Potential& pot, const ConformalFactor& V,
                                               const JordanBoundary& boundary, cplx w0, double tau,
                                               int m, BundleParams prm = BundleParams{}) {
    double nd = tau * m;
    if (std::abs(nd - std::round(nd)) > 1e-9)
        throw validation_error("prediction bundle: n = tau*m must be an integer");
    PredictionBundle b;
    b.pot = pot;
    b.V = V;
    b.m = m;
    b.n = static_cast<int>(std::lround(nd));
    b.tau = tau;
    b.kappa = prm.kappa;
    b.A = prm.A;
    b.map = riemann_map(boundary, w0);
    int Kq = prm.qcal_modes ? prm.qcal_modes : std::max(64, prm.K);
    b.qcal = holo_from_boundary_re(b.map, [&](cplx z) { return pot.eval(z); }, Kq);
    b.hfun = holo_from_boundary_re(
        b.map,
        [&](cplx z) {
            double v = 0.25 * std::log(2.0 * pot.lap(z));
            if (!V.is_unit()) v -= 0.5 * V.log_eval(z);
            return v;
        },
        Kq);
    prm.weight.K = prm.K;
    AnnulusFun R = induced_R(pot, b.map, b.qcal, tau, prm.weight);
    if (V.is_unit()) {
        b.expansion = flow_iterate(R, nullptr, prm.kappa, prm.K);
    } else {
        AnnulusFun W = induced_W(V, b.map, prm.weight);
        b.expansion = flow_iterate(R, &W, prm.kappa, prm.K);
    }
    return b;
}

// L^2 mass of a (log-evaluated) function over a region, against e^{-2mQ} V dA.
inline double mass_on_domain(const std::function<cplx(cplx)>& log_f,
                             const std::function<bool(cplx)>& region, const Potential& pot,
                             const ConformalFactor& V, int m, const PlaneQuadrature& quad) {
    return quad.integrate_real([&](cplx z) {
        if (!region(z)) return 0.0;
        double ex = 2.0 * log_f(z).real() - 2.0 * m * pot.eval(z) + std::log(V.eval(z));
        return (ex < -700.0) ? 0.0 : std::exp(ex);
    });
}

// The paper's erf convention: a complementary Gaussian tail, 1/2 at 0.
inline double erf_tail(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

struct InterfaceProfile {
    cplx z0;                  // base boundary point
    cplx nu;                  // inward unit normal at z0
    std::vector<double> xi;
    std::vector<double> rho;      // rescaled density samples
    std::vector<double> erf_ref;  // erf(2 xi)
    double sup_deviation = 0.0;
};

// rho_m(xi) = K_{m,n,w0}(z_m, z_m) e^{-2mQ} / (2m DeltaQ(z0)),
// z_m(xi) = z0 + nu xi / sqrt(2m DeltaQ(z0)).
inline InterfaceProfile interface_profile(const Potential& pot, cplx z0, cplx nu, int m, int n,
                                          const std::vector<double>& xi_grid,
                                          const std::function<double(int, cplx)>& density) {
    InterfaceProfile out;
    out.z0 = z0;
    out.nu = nu;
    double dq = pot.lap(z0);
    if (dq <= 0) throw validation_error("interface_profile: DeltaQ(z0) must be positive");
    double scale = std::sqrt(2.0 * m * dq);
    for (double xi : xi_grid) {
        cplx z = z0 + nu * (xi / scale);
        // density() returns m^{-1} K e^{-2mQ}; rho_m = K e^{-2mQ} / (2m DeltaQ)
        out.xi.push_back(xi);
        out.rho.push_back(density(n, z) / (2.0 * dq));
        out.erf_ref.push_back(erf_tail(2.0 * xi));
        out.sup_deviation = std::max(out.sup_deviation, std::abs(out.rho.back() - out.erf_ref.back()));
    }
    return out;
}

// Exact radial-Gaussian partial-kernel density through regularized incomplete
// gamma sums: rho_{m,n,0}(z) = 2 P(n, 2m|z|^2) for Q = |z|^2 (so that the density
// closure matches the oracle's m^{-1} K e^{-2mQ} normalization).
inline std::function<double(int, cplx)> radial_gaussian_density(int m) {
    return [m](int n, cplx z) {
        double lam = 2.0 * m * std::norm(z);
        if (n <= 0) return 2.0;
        return 2.0 * boost::math::gamma_p(static_cast<double>(n), lam);
    };
}

// Comparison of a prediction against the oracle on a stratified sample cloud.
struct CompareStats {
    double max_rel_mod_err = 0.0;
    double mean_rel_mod_err = 0.0;
    double max_phase_err = 0.0;
    int n_samples = 0;
};

inline std::vector<cplx> omega_sample_cloud(const PredictionBundle& b, int count,
                                            std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    auto unif = [&](double a, double c) {
        return a + (c - a) * (gen() >> 11) * 0x1.0p-53;
    };
    std::vector<cplx> pts;
    double wplane = b.collar_width();
    int guard = 0;
    while (static_cast<int>(pts.size()) < count && guard++ < 100 * count) {
        double band = unif(0.0, 3.0);
        double rr;
        if (band < 1.0)
            rr = unif(0.10, 0.80);  // bulk of Omega
        else if (band < 2.0)
            rr = unif(0.80, 1.0);   // inner collar
        else {
            cplx u0 = std::polar(1.0, unif(0.0, 2.0 * kPi));
            double stretch = std::abs(b.map.psi_prime(u0));
            rr = 1.0 + unif(0.0, wplane / std::max(1e-9, stretch));
        }
        cplx u = std::polar(rr, unif(0.0, 2.0 * kPi));
        if (std::abs(u) >= b.map.r_out) continue;
        cplx z = b.map.psi(u);
        if (!b.in_omega_m(z)) continue;
        if (b.n > 0 && std::abs(u) < 0.05) continue;  // prediction and oracle both vanish
        pts.push_back(z);
    }
    return pts;
}

inline CompareStats compare_root(const PredictionBundle& b, const OracleHandle& oracle,
                                 const std::vector<cplx>& pts) {
    CompareStats st;
    for (cplx z : pts) {
        cplx lp = b.predicted_root_log(z);
        cplx lo = oracle.log_root(b.n, z);
        if (!std::isfinite(lp.real()) || !std::isfinite(lo.real())) continue;
        double rel = std::abs(std::exp(lp.real() - lo.real()) - 1.0);
        double ph = std::remainder(lp.imag() - lo.imag(), 2.0 * kPi);
        st.max_rel_mod_err = std::max(st.max_rel_mod_err, rel);
        st.mean_rel_mod_err += rel;
        st.max_phase_err = std::max(st.max_phase_err, std::abs(ph));
        ++st.n_samples;
    }
    if (st.n_samples) st.mean_rel_mod_err /= st.n_samples;
    return st;
}

// smooth cutoff in map coordinates: 1 inside |phi| <= r1, 0 outside r2
inline std::function<double(cplx)> make_cutoff(const DiskMap& map, double r1, double r2) {
    return [map, r1, r2](cplx z) {
        double r;
        try {
            r = std::abs(map.phi(z));
        } catch (const validation_error&) {
            return 0.0;
        }
        if (r <= r1) return 1.0;
        if (r >= r2) return 0.0;
        double x = (r - r1) / (r2 - r1);
        double s = x * x * x * (x * (x * 6.0 - 15.0) + 10.0);  // quintic smoothstep
        return 1.0 - s;
    };
}

}  // namespace offspec
