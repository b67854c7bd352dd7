#pragma once

#include "offspec/annulus_fun.hpp"
#include "offspec/jordan.hpp"
#include "offspec/potential.hpp"

namespace offspec {

// Numerical Riemann map of a star-like analytic Jordan domain onto the unit disk,
// normalized phi(w0) = 0, phi'(w0) > 0. Built by a Theodorsen-style boundary
// correspondence iteration; phi is evaluated by Newton inversion of the
// boundary-FFT power series of psi = phi^{-1}, which extends across T.
struct DiskMap {
    enum class Kind { interior, exterior };
    Kind kind = Kind::interior;

    JordanBoundary boundary;
    cplx w0{0.0, 0.0};
    std::vector<double> corr;        // boundary correspondence S(theta_j)
    std::vector<cplx> inv_coefs;     // psi(u) = c0 + sum_{k>=1} d_k u^k
    std::vector<cplx> taylor_at_w0;  // Taylor coefficients of phi about w0
    double r_in = 0.9, r_out = 1.1;  // univalent continuation annulus
    double boundary_residual = 0.0;  // achieved | |phi| - 1 | on samples

    cplx psi(cplx u) const {
        cplx acc(0.0);
        for (std::size_t k = inv_coefs.size(); k-- > 0;) acc = acc * u + inv_coefs[k];
        return acc;
    }
    cplx psi_prime(cplx u) const {
        cplx acc(0.0);
        for (std::size_t k = inv_coefs.size(); k-- > 1;)
            acc = acc * u + static_cast<double>(k) * inv_coefs[k];
        return acc;
    }

    cplx phi(cplx z) const {
        // initial guess from the reverted Taylor series, then Newton on psi(u) = z
        cplx u = taylor_eval(z);
        if (!std::isfinite(u.real()) || std::abs(u) > r_out) u = (z - inv_coefs[0]) / inv_coefs[1];
        for (int it = 0; it < 64; ++it) {
            cplx f = psi(u) - z;
            cplx dp = psi_prime(u);
            if (std::abs(dp) == 0.0) throw validation_error("DiskMap::phi: vanishing derivative");
            cplx step = f / dp;
            u -= step;
            if (std::abs(u) > r_out * 1.10)
                throw validation_error("DiskMap::phi: point outside continuation region");
            if (std::abs(step) < 1e-15) break;
        }
        return u;
    }
    cplx phi_prime_at_u(cplx u) const { return 1.0 / psi_prime(u); }
    cplx phi_prime(cplx z) const { return phi_prime_at_u(phi(z)); }

    bool in_continuation(cplx z) const {
        try {
            double r = std::abs(phi(z));
            return r > r_in && r < r_out;
        } catch (const validation_error&) {
            return false;
        }
    }

private:
    cplx taylor_eval(cplx z) const {
        if (taylor_at_w0.empty()) return cplx(std::numeric_limits<double>::quiet_NaN(), 0.0);
        cplx d = z - w0;
        if (std::abs(d) > 0.75 * std::abs(inv_coefs[1]))
            return cplx(std::numeric_limits<double>::quiet_NaN(), 0.0);
        cplx acc(0.0);
        for (std::size_t k = taylor_at_w0.size(); k-- > 0;) acc = acc * d + taylor_at_w0[k];
        return acc;
    }
};

namespace detail {

// conjugate function on the circle: v_k = -i sgn(k) u_k
inline std::vector<double> conjugate_function(const std::vector<double>& u) {
    int n = static_cast<int>(u.size());
    std::vector<cplx> a(n);
    for (int i = 0; i < n; ++i) a[i] = cplx(u[i], 0.0);
    fft_pow2(a, -1);
    for (int k = 1; k < n / 2; ++k) {
        a[k] *= cplx(0.0, -1.0);
        a[n - k] *= cplx(0.0, 1.0);
    }
    a[0] = cplx(0.0);
    a[n / 2] = cplx(0.0);
    fft_pow2(a, +1);
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = a[i].real() / n;
    return v;
}

// power series reversion: given f(u) = sum_{k>=1} d_k u^k with d_1 != 0, returns g
// with g(f(u)) = u through order P
inline std::vector<cplx> revert_series(const std::vector<cplx>& d, int P) {
    std::vector<cplx> g(P + 1, cplx(0.0));
    g[1] = 1.0 / d[1];
    for (int p = 2; p <= P; ++p) {
        // z^p coefficient of g(f) is comp[p] + g_p d_1^p and must vanish
        std::vector<cplx> comp(P + 1, cplx(0.0));
        std::vector<cplx> fpow(P + 1, cplx(0.0));
        fpow[0] = 1.0;
        for (int q = 1; q < p; ++q) {
            std::vector<cplx> nf(P + 1, cplx(0.0));
            for (int a = 0; a <= P; ++a) {
                if (fpow[a] == cplx(0.0)) continue;
                for (int b = 1; a + b <= P && b < static_cast<int>(d.size()); ++b)
                    nf[a + b] += fpow[a] * d[b];
            }
            fpow = nf;
            for (int k = 0; k <= P; ++k) comp[k] += g[q] * fpow[k];
        }
        g[p] = -comp[p] * std::pow(g[1], p);
    }
    return g;
}

}  // namespace detail

struct RiemannMapParams {
    int n_samples = 512;      // boundary sample count (power of two)
    double fp_tol = 1e-13;    // Theodorsen fixed-point tolerance
    int max_iters = 4000;
    double accuracy = 1e-8;   // required | |phi|-1 | on boundary samples
    double r_out_cap = 1.30;
};

inline DiskMap riemann_map(const JordanBoundary& b, cplx w0,
                           RiemannMapParams prm = RiemannMapParams{}) {
    if (b.winding_number(w0) != 1)
        throw validation_error("riemann_map: w0 not interior to the boundary");
    if (!b.star_like_about(w0))
        throw validation_error("riemann_map: boundary not star-like about w0");
    int N = next_pow2(std::max(prm.n_samples, 8 * b.Kb));

    // radius function about w0 as a trigonometric series
    int n_fine = 2 * N;
    std::vector<double> rho_fine(n_fine);
    parallel_for(n_fine, [&](int i) {
        rho_fine[i] = b.radius_about(w0, 2.0 * kPi * i / n_fine);
    });
    std::vector<cplx> logrho_samp(n_fine);
    for (int i = 0; i < n_fine; ++i) logrho_samp[i] = cplx(std::log(rho_fine[i]), 0.0);
    CircleFun logrho =
        CircleFun::from_samples(logrho_samp, std::min(n_fine / 2 - 1, 4 * b.Kb + 32));

    // Theodorsen iteration S(theta) = theta + K[log rho o S]
    std::vector<double> S(N);
    for (int j = 0; j < N; ++j) S[j] = 2.0 * kPi * j / N;
    double damping = 1.0;
    double prev_change = std::numeric_limits<double>::infinity();
    for (int it = 0; it < prm.max_iters; ++it) {
        std::vector<double> u(N);
        parallel_for(N, [&](int j) { u[j] = logrho.eval_angle(S[j]).real(); });
        auto v = detail::conjugate_function(u);
        double change = 0.0;
        for (int j = 0; j < N; ++j) {
            double target = 2.0 * kPi * j / N + v[j];
            double nv = S[j] + damping * (target - S[j]);
            change = std::max(change, std::abs(nv - S[j]));
            S[j] = nv;
        }
        if (change < prm.fp_tol) break;
        if (change > prev_change * 1.5) damping = std::max(0.25, damping * 0.7);
        prev_change = change;
        if (it + 1 == prm.max_iters)
            throw tolerance_error("riemann_map: correspondence iteration stalled at " +
                                  fmt_g(change));
    }
    // monotone correspondence check
    for (int j = 0; j + 1 < N; ++j)
        if (S[j + 1] - S[j] <= 0.0)
            throw validation_error("riemann_map: boundary correspondence not monotone");

    DiskMap map;
    map.kind = DiskMap::Kind::interior;
    map.boundary = b;
    map.w0 = w0;
    map.corr = S;

    std::vector<cplx> bdry(N);
    for (int j = 0; j < N; ++j) bdry[j] = w0 + std::polar(std::exp(logrho.eval_angle(S[j]).real()), S[j]);
    auto coefs = dft_forward(std::move(bdry));
    // analytic content: modes 0..N/2-1; negative modes measure the residual
    double neg = 0.0;
    for (int k = 1; k < N / 2; ++k) neg = std::max(neg, std::abs(coefs[N - k]));
    map.inv_coefs.assign(N / 2, cplx(0.0));
    for (int k = 0; k < N / 2; ++k) map.inv_coefs[k] = coefs[k];
    map.inv_coefs[0] = w0;  // psi(0) = w0 exactly
    if (map.inv_coefs[1].real() <= 0 || std::abs(map.inv_coefs[1].imag()) >
            1e-8 * std::abs(map.inv_coefs[1]))
        throw tolerance_error("riemann_map: derivative normalization failed");
    map.inv_coefs[1] = cplx(std::abs(map.inv_coefs[1]), 0.0);
    // truncate at the FFT noise floor: roundoff modes at k ~ N/2 otherwise blow
    // up under analytic continuation past T
    {
        double scale_d = std::abs(map.inv_coefs[1]);
        int keep = 1;
        for (int k = 2; k < N / 2; ++k)
            if (std::abs(map.inv_coefs[k]) > 1e-13 * scale_d) keep = k;
        map.inv_coefs.resize(keep + 1);
    }

    // continuation annulus from coefficient decay
    double scale = std::abs(map.inv_coefs[1]);
    double eta = 4.0;
    {
        std::vector<double> xs, ys;
        for (int k = 2; k < N / 2; ++k) {
            double a = std::abs(map.inv_coefs[k]);
            if (a > 1e-13 * scale) {
                xs.push_back(k);
                ys.push_back(std::log(a));
            }
        }
        if (xs.size() >= 4) eta = std::exp(-fit_slope(xs, ys));
    }
    map.r_out = std::min(prm.r_out_cap, 1.0 + 0.6 * (std::max(eta, 1.02) - 1.0));
    map.r_in = 1.0 / map.r_out;

    // forward Taylor at w0 by series reversion
    {
        std::vector<cplx> d(map.inv_coefs.size());
        d[0] = 0.0;
        for (std::size_t k = 1; k < d.size(); ++k) d[k] = map.inv_coefs[k];
        map.taylor_at_w0 = detail::revert_series(d, 16);
        map.taylor_at_w0[0] = 0.0;
    }

    // accuracy audit: |phi| = 1 on independent boundary samples
    double worst = 0.0;
    int n_chk = 64;
    for (int a = 0; a < n_chk; ++a) {
        cplx z = b.point(2.0 * kPi * (a + 0.37) / n_chk);
        worst = std::max(worst, std::abs(std::abs(map.phi(z)) - 1.0));
    }
    map.boundary_residual = std::max(worst, neg / std::max(1.0, scale));
    if (map.boundary_residual > prm.accuracy)
        throw tolerance_error("riemann_map: accuracy target missed, residual " +
                              fmt_g(map.boundary_residual));

    // univalence on the continuation annulus: nonvanishing derivative on samples
    for (double r : {map.r_in, 1.0, map.r_out}) {
        for (int a = 0; a < 64; ++a) {
            cplx u = std::polar(r, 2.0 * kPi * a / 64);
            if (std::abs(map.psi_prime(u)) < 1e-12)
                throw tolerance_error("riemann_map: derivative vanishes on annulus sample");
        }
    }
    return map;
}

// Bounded holomorphic function on the disk with prescribed real part on T and
// real value at the origin (pullback of the plane-side normalization point w0).
struct HoloFun {
    CircleFun series;  // analytic modes only
    cplx normalization_point{0.0, 0.0};

    cplx eval(cplx u) const { return series.eval(u); }
    cplx deriv(cplx u) const { return series.derivative().eval(u); }
};

// g is real boundary data sampled as g(psi(e^{i theta})).
inline HoloFun holo_from_boundary_re(const DiskMap& map, const std::function<double(cplx)>& g,
                                     int K, double tail_tol = 1e-9) {
    int n = next_pow2(std::max(4 * K + 4, 256));
    std::vector<cplx> vals(n);
    parallel_for(n, [&](int j) {
        cplx z = map.psi(std::polar(1.0, 2.0 * kPi * j / n));
        vals[j] = cplx(g(z), 0.0);
    });
    CircleFun data = CircleFun::from_samples(vals, K);
    if (data.tail_ratio() > tail_tol)
        throw tolerance_error("holo_from_boundary_re: boundary data under-resolved at K=" +
                              std::to_string(K));
    HoloFun h;
    h.series = herglotz(data.denoised());
    h.normalization_point = map.w0;
    return h;
}

// breve-Q: harmonic continuation of hat-Q across the interface,
// breve-Q = tau log|phi| + Re Qcal.
struct BreveQ {
    DiskMap map;
    HoloFun qcal;
    double tau = 0.0;

    double eval(cplx z) const {
        cplx u = map.phi(z);
        double r = std::abs(u);
        if (r > map.r_out)
            throw validation_error("breve_Q: outside continuation region");
        double v = qcal.eval(u).real();
        if (tau != 0.0) v += tau * std::log(r);
        return v;
    }
    double eval_disk(cplx u) const {
        double v = qcal.eval(u).real();
        if (tau != 0.0) v += tau * std::log(std::abs(u));
        return v;
    }
};

struct InducedWeightParams {
    int P = 18;        // radial offset order
    int K = 64;        // angular modes
    double width = 0.0;  // half-width of the fitting annulus; 0 = auto
    double flat_tol = 5e-6;
};

// R = (Q - breve-Q) o psi on the annulus; quadratically flat on T with
// DeltaR|_T > 0 for admissible data.
inline AnnulusFun induced_R(const Potential& p, const DiskMap& map, const HoloFun& qcal,
                            double tau, InducedWeightParams prm = InducedWeightParams{}) {
    double w = prm.width > 0 ? prm.width : std::min(0.30, 0.9 * (map.r_out - 1.0));
    std::vector<double> radii;
    int nr = prm.P + 6;
    for (int i = 0; i < nr; ++i) {
        double c = std::cos(kPi * (i + 0.5) / nr);
        radii.push_back(1.0 + w * c);
    }
    auto F = [&](cplx u) {
        double v = p.eval(map.psi(u)) - qcal.eval(u).real();
        if (tau != 0.0) v -= tau * std::log(std::abs(u));
        return v;
    };
    AnnulusFun R = AnnulusFun::fit(F, radii, prm.P, prm.K);
    double flat = R.flatness_residual();
    if (flat > prm.flat_tol)
        throw tolerance_error("induced_R: flatness violated (" + fmt_g(flat) +
                              "); boundary/map inconsistent upstream");
    R.enforce_flat();
    CircleFun dR = R.quarter_laplacian_on_circle();
    if (dR.min_real() <= 0)
        throw tolerance_error("induced_R: DeltaR on T not positive");
    return R;
}

// W = V o psi on the annulus.
inline AnnulusFun induced_W(const ConformalFactor& V, const DiskMap& map,
                            InducedWeightParams prm = InducedWeightParams{}) {
    double w = prm.width > 0 ? prm.width : std::min(0.30, 0.9 * (map.r_out - 1.0));
    std::vector<double> radii;
    int nr = prm.P + 6;
    for (int i = 0; i < nr; ++i) {
        double c = std::cos(kPi * (i + 0.5) / nr);
        radii.push_back(1.0 + w * c);
    }
    auto F = [&](cplx u) { return V.eval(map.psi(u)); };
    AnnulusFun W = AnnulusFun::fit(F, radii, prm.P, prm.K);
    if (W.A(0).min_real() <= 0)
        throw tolerance_error("induced_W: conformal factor not positive near T");
    return W;
}

// Canonical positioning operator: Lambda[v](z) = phi' phi^n e^{m Qcal} (v o phi),
// an isometry L^2(e^{-2mR}, D) -> L^2(e^{-2mQ}, Omega). The log form keeps the
// huge e^{m Qcal} factor harmless.
inline cplx canonical_positioning_log(const DiskMap& map, const HoloFun& qcal, int m, int n,
                                      const std::function<cplx(cplx)>& v, cplx z) {
    cplx u = map.phi(z);
    cplx vp = v(u);
    if (vp == cplx(0.0)) return cplx(-std::numeric_limits<double>::infinity(), 0.0);
    cplx logphi = std::log(u);
    return std::log(map.phi_prime_at_u(u)) + static_cast<double>(n) * logphi +
           static_cast<double>(m) * qcal.eval(u) + std::log(vp);
}
inline cplx canonical_positioning(const DiskMap& map, const HoloFun& qcal, int m, int n,
                                  const std::function<cplx(cplx)>& v, cplx z) {
    cplx u = map.phi(z);
    if (std::abs(u) == 0.0 && n > 0) return cplx(0.0);
    return std::exp(canonical_positioning_log(map, qcal, m, n, v, z));
}

struct RefineParams {
    int max_iters = 40;
    double tol = 1e-11;      // on the normal derivative defect
    int n_samples = 512;
    int out_modes = 48;
    RiemannMapParams map_params{};
};

struct RefineResult {
    JordanBoundary boundary;
    double defect = 0.0;
    int iterations = 0;
};

// Newton polish of the free boundary: the obstacle solution is C^{1,1}, so the
// interface satisfies Q = breve-Q and grad(Q - breve-Q) = 0 on it. A grid-extracted
// boundary only carries O(h)-scale accuracy; this drives the gradient defect to
// spectral accuracy, moving each sample along the outward normal with step
// defect / (4 DeltaQ).
inline RefineResult refine_free_boundary(const Potential& p, double tau, cplx w0,
                                         const JordanBoundary& b0,
                                         RefineParams prm = RefineParams{}) {
    JordanBoundary b = b0;
    RefineResult out;
    int N = next_pow2(prm.n_samples);
    prm.map_params.n_samples = N;
    double prev_defect = std::numeric_limits<double>::infinity();
    double damping = 1.0;
    for (int it = 0; it < prm.max_iters; ++it) {
        DiskMap map = riemann_map(b, w0, prm.map_params);
        HoloFun qcal = holo_from_boundary_re(
            map, [&](cplx z) { return p.eval(z); }, N / 4, 1e-6);
        std::vector<cplx> pts(N);
        double worst = 0.0;
        std::vector<double> defect(N);
        for (int j = 0; j < N; ++j) {
            cplx u = std::polar(1.0, 2.0 * kPi * j / N);
            cplx z = map.psi(u);
            cplx dpsi = map.psi_prime(u);
            cplx dz_breve = 0.5 * qcal.deriv(u) / dpsi;
            if (tau != 0.0) dz_breve += 0.5 * tau / (u * dpsi) * 1.0;  // d/dz tau log|phi|
            cplx grad = 2.0 * std::conj(p.dz(z) - dz_breve);
            cplx n_out = dpsi * u / std::abs(dpsi * u);
            double D = (std::conj(grad) * n_out).real();
            defect[j] = D;
            worst = std::max(worst, std::abs(D));
            pts[j] = z;
        }
        out.defect = worst;
        out.iterations = it;
        if (worst < prm.tol) {
            out.boundary = b;
            return out;
        }
        if (worst > prev_defect * 0.9) damping = std::max(0.3, damping * 0.6);
        prev_defect = worst;
        for (int j = 0; j < N; ++j) {
            cplx u = std::polar(1.0, 2.0 * kPi * j / N);
            cplx z = pts[j];
            cplx dpsi = map.psi_prime(u);
            cplx n_out = dpsi * u / std::abs(dpsi * u);
            pts[j] = z - damping * (defect[j] / (4.0 * p.lap(z))) * n_out;
        }
        auto coefs = dft_forward(std::move(pts));
        int Kb = std::min(prm.out_modes, N / 2 - 1);
        b.Kb = Kb;
        b.coefs.assign(2 * Kb + 1, cplx(0.0));
        for (int k = -Kb; k <= Kb; ++k) b.set_coef(k, coefs[(k % N + N) % N]);
        b.interior_point = w0;
    }
    out.boundary = b;
    return out;
}

// Boundary of the inverted domain {1/z : z in Omega}, counterclockwise about 0.
inline JordanBoundary invert_boundary(const JordanBoundary& b, int n_modes = 48) {
    int n = next_pow2(std::max(16 * b.Kb, 256));
    std::vector<cplx> pts(n);
    for (int j = 0; j < n; ++j) {
        cplx z = b.point(-2.0 * kPi * j / n);  // reverse to keep ccw after inversion
        if (std::abs(z) == 0.0) throw validation_error("invert_boundary: curve passes through 0");
        pts[j] = 1.0 / z;
    }
    auto coefs = dft_forward(std::move(pts));
    JordanBoundary r;
    r.Kb = std::min(n_modes, n / 2 - 1);
    r.coefs.assign(2 * r.Kb + 1, cplx(0.0));
    for (int k = -r.Kb; k <= r.Kb; ++k) r.set_coef(k, coefs[(k % n + n) % n]);
    r.interior_point = cplx(0.0);
    return r;
}

// Exterior map phi_tau : Omega_e -> D_e fixing infinity with positive derivative,
// realized through inversion and the interior machinery (one code path).
struct ExteriorMap {
    DiskMap inner;  // interior map of the inverted domain, w0 = 0

    cplx phi(cplx z) const { return 1.0 / inner.phi(1.0 / z); }
    cplx psi(cplx u) const { return 1.0 / inner.psi(1.0 / u); }
    cplx phi_prime(cplx z) const {
        cplx v = 1.0 / z;
        cplx w = inner.phi(v);
        cplx din = inner.phi_prime_at_u(w);
        return din * v * v / (w * w);
    }
};

inline ExteriorMap exterior_map(const JordanBoundary& b,
                                RiemannMapParams prm = RiemannMapParams{}) {
    ExteriorMap m;
    m.inner = riemann_map(invert_boundary(b), cplx(0.0), prm);
    return m;
}

}  // namespace offspec
