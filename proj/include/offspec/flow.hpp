#pragma once

#include "offspec/annulus_fun.hpp"

namespace offspec {

// Orthogonal foliation flow: conformal loop family psi_{s,t} and log-coefficients
// b_j solving the flow equation
//   |f_s o psi|^2 e^{-2R o psi / s} Re(conj(zeta) dt psi conj(psi')) W o psi
//      = e^{-t^2/s} { (4 pi)^{-1/2} + O(|s|^{kappa+1/2} + |t|^{2 kappa+1}) },
// with f_s = exp(sum s^j b_j). Unknowns are determined in the lexicographic
// order of the index set {2j + l <= 2 kappa + 1}; each enters its equation
// linearly, so the known remainder T_{j,l} is evaluated by zeroing the unknown.
class FlowWork {
public:
    FlowWork(AnnulusFun R, const AnnulusFun* W, int kappa, int K)
        : R_(std::move(R)), with_W_(W != nullptr), kappa_(kappa), K_(K), N_(2 * kappa + 2) {
        if (kappa < 0 || kappa > 4) throw validation_error("flow: kappa out of range [0,4]");
        if (W) W_ = *W;
        dR_ = R_.quarter_laplacian_on_circle().resized(K_);
        if (dR_.min_real() <= 0.0)
            throw tolerance_error("flow: DeltaR on T must be positive");
        CircleFun fourdR = dR_ * cplx(4.0);
        s4_ = fourdR.pow_real_positive(0.5);   // (4 DeltaR)^{1/2}
        is4_ = fourdR.pow_real_positive(-0.5); // (4 DeltaR)^{-1/2}
        psi0_.assign(2 * kappa_ + 2, CircleFun(K_));
        psi0_[0] = CircleFun::identity(K_);
        b_.assign(kappa_ + 1, CircleFun(K_));
        psi_hat_.assign(kappa_ + 1, {});
        for (int j = 1; j <= kappa_; ++j)
            psi_hat_[j].assign(std::max(0, 2 * kappa_ + 2 - 2 * j), CircleFun(K_));
        if (with_W_ && W_.A(0).min_real() <= 0.0)
            throw tolerance_error("flow: W on T must be positive");
    }

    int kappa() const { return kappa_; }
    int K() const { return K_; }
    const CircleFun& dR() const { return dR_; }
    const CircleFun& b(int j) const { return b_[j]; }
    CircleFun& b(int j) { return b_[j]; }
    const CircleFun& psi0(int l) const { return psi0_[l]; }
    const CircleFun& psi_hat(int j, int l) const { return psi_hat_[j][l]; }

    // Step 1: level curves 2 R o psi_{0,t} = t^2, outside branch for t > 0,
    // origin-preserving with positive derivative.
    void build_level_family() {
        psi0_[1] = CircleFun::mul(CircleFun::identity(K_), herglotz(is4_), K_);
        for (int l = 2; l <= 2 * kappa_ + 1; ++l) {
            int ord = l + 1;
            BiJet psi(ord, K_);
            for (int q = 0; q <= std::min(l - 1, ord); ++q) psi.at(0, q) = psi0_[q];
            BiJet E = R_.compose_jet(psi);
            E *= cplx(2.0);
            E -= BiJet::monomial(0, 2, CircleFun::constant(1.0, K_), ord);
            CircleFun T = E.at(0, l + 1).real_part();
            // unknown enters linearly: 2 (4 DeltaR)^{1/2} Re(conj(zeta) psi0_l)
            CircleFun rhs = CircleFun::mul(T, is4_, K_) * cplx(-0.5);
            psi0_[l] = CircleFun::mul(CircleFun::identity(K_), herglotz(rhs.real_part()), K_);
        }
    }

    // Step 2: b0 = -1/4 log(4 pi) + 1/4 H[log(4 DeltaR) - 2 log W].
    void solve_b0() {
        CircleFun data = (dR_ * cplx(4.0)).log_real_positive();
        if (with_W_) data -= W_.A(0).resized(K_).log_real_positive() * cplx(2.0);
        b_[0] = herglotz(data) * cplx(0.25);
        b_[0] += CircleFun::constant(-0.25 * std::log(4.0 * kPi), K_);
    }

    // Taylor coefficient varpi_hat_{j,l} of the log flow equation with the current
    // (partially determined) data.
    BiJet varpi() const {
        BiJet psi = assemble_psi_jet(N_);
        // 2 Re h_s o psi
        BiJet acc(N_, K_);
        for (int j = 0; j <= kappa_; ++j) {
            if (b_[j].max_abs_coef() == 0.0) continue;
            BiJet comp = compose_holo(b_[j], psi);
            acc += shift_s(comp, j);
        }
        acc = acc.real_part();
        acc *= cplx(2.0);
        // -(2/s) (R o psi - t^2/2)
        BiJet Rc = R_.compose_jet(psi);
        Rc -= BiJet::monomial(0, 2, CircleFun::constant(0.5, K_), N_);
        double res0 = 0.0;
        BiJet Rdiv = Rc.div_s(&res0);
        if (res0 > 1e-7)
            throw tolerance_error("flow: level family residual too large (" + fmt_g(res0) + ")");
        acc -= Rdiv * cplx(2.0);
        // log Re(conj(zeta) dt psi conj(psi'))
        BiJet jac = jet_mul(jet_mul(BiJet::constant(CircleFun::mode(-1, 1.0, K_), N_), psi.d_t()),
                            psi.d_zeta().conj_circle())
                        .real_part();
        acc += jet_log(jac);
        // log W o psi
        if (with_W_) acc += jet_log(W_.compose_jet(psi));
        return acc;
    }

    // Known remainder T_{j,l,W}: varpi coefficient with the unknown of equation
    // (j,l) zeroed. Callers must respect the lexicographic determination order.
    CircleFun compute_T(int j, int l) const {
        if (!BiJet::in_set(j, l, 2 * kappa_)) throw validation_error("compute_T: index outside grading");
        return varpi().at(j, l).real_part();
    }

    // Step 3 for one unknown: psi_hat_{j0,l0} from equation (j0-1, l0+1).
    void solve_psi_hat(int j0, int l0) {
        if (j0 < 1 || !BiJet::in_set(j0, l0, 2 * kappa_ + 1))
            throw validation_error("solve_psi_hat: index outside grading");
        if (psi_hat_[j0][l0].max_abs_coef() != 0.0)
            throw validation_error("solve_psi_hat: already determined");
        CircleFun T = compute_T(j0 - 1, l0 + 1);
        CircleFun rhs = CircleFun::mul(T, is4_, K_) * cplx(0.5);
        psi_hat_[j0][l0] =
            CircleFun::mul(CircleFun::identity(K_), herglotz(rhs.real_part()), K_);
    }

    // Step 4: b_{j0} = -1/2 H[T_{j0,0}].
    void solve_b(int j0) {
        if (j0 < 1 || j0 > kappa_) throw validation_error("solve_b: index out of range");
        CircleFun T = compute_T(j0, 0);
        b_[j0] = herglotz(T.real_part()) * cplx(-0.5);
    }

    // Residual of the full system on the index set {2j+l <= 2 kappa}.
    double system_residual() const {
        BiJet v = varpi();
        double worst = 0.0;
        for (int j = 0; 2 * j <= 2 * kappa_; ++j)
            for (int l = 0; 2 * j + l <= 2 * kappa_; ++l) {
                CircleFun c = v.at(j, l);
                if (j == 0 && l == 0) c -= CircleFun::constant(-0.5 * std::log(4.0 * kPi), K_);
                worst = std::max(worst, c.max_abs_coef());
            }
        return worst;
    }

    BiJet assemble_psi_jet(int order) const {
        BiJet psi(order, K_);
        psi.at(0, 0) = CircleFun::identity(K_);
        for (int l = 1; l <= std::min(order, 2 * kappa_ + 1); ++l)
            if (psi.has(0, l)) psi.at(0, l) = psi0_[l];
        for (int j = 1; j <= kappa_; ++j)
            for (int l = 0; l < static_cast<int>(psi_hat_[j].size()); ++l)
                if (psi.has(j, l)) psi.at(j, l) = psi_hat_[j][l];
        return psi;
    }

    const AnnulusFun& R() const { return R_; }
    const AnnulusFun* W() const { return with_W_ ? &W_ : nullptr; }

private:
    static BiJet shift_s(const BiJet& a, int j) {
        if (j == 0) return a;
        BiJet r(a.order(), a.K());
        a.for_each([&](int p, int q, const CircleFun& c) {
            if (r.has(p + j, q)) r.at(p + j, q) = c;
        });
        return r;
    }

    AnnulusFun R_, W_;
    bool with_W_;
    int kappa_, K_, N_;
    CircleFun dR_, s4_, is4_;
    std::vector<CircleFun> psi0_;
    std::vector<CircleFun> b_;
    std::vector<std::vector<CircleFun>> psi_hat_;
};

// Completed expansion: the artifact's central output.
struct FlowExpansion {
    int kappa = 0;
    int K = 0;
    std::vector<CircleFun> b;                     // b_0..b_kappa
    std::vector<CircleFun> psi0;                  // psi-hat_{0,l}, l = 0..2kappa+1
    std::vector<std::vector<CircleFun>> psi_hat;  // [j][l], j >= 1
    std::vector<CircleFun> B;                     // B_j = [s^j] exp(sum s^j b_j)
    CircleFun dR;                                 // DeltaR restricted to T
    bool with_W = false;
    double system_residual = 0.0;

    // psi_{s,t}(zeta) and its partial derivatives at a point of T
    cplx psi(double s, double t, cplx zeta) const {
        cplx acc(0.0);
        double tl = 1.0;
        for (std::size_t l = 0; l < psi0.size(); ++l) {
            acc += tl * psi0[l].eval(zeta);
            tl *= t;
        }
        double sj = s;
        for (std::size_t j = 1; j < psi_hat.size(); ++j) {
            double tl2 = 1.0;
            for (std::size_t l = 0; l < psi_hat[j].size(); ++l) {
                acc += sj * tl2 * psi_hat[j][l].eval(zeta);
                tl2 *= t;
            }
            sj *= s;
        }
        return acc;
    }
    cplx dt_psi(double s, double t, cplx zeta) const {
        cplx acc(0.0);
        double tl = 1.0;
        for (std::size_t l = 1; l < psi0.size(); ++l) {
            acc += static_cast<double>(l) * tl * psi0[l].eval(zeta);
            tl *= t;
        }
        double sj = s;
        for (std::size_t j = 1; j < psi_hat.size(); ++j) {
            double tl2 = 1.0;
            for (std::size_t l = 1; l < psi_hat[j].size(); ++l) {
                acc += sj * static_cast<double>(l) * tl2 * psi_hat[j][l].eval(zeta);
                tl2 *= t;
            }
            sj *= s;
        }
        return acc;
    }
    cplx dzeta_psi(double s, double t, cplx zeta) const {
        cplx acc(0.0);
        double tl = 1.0;
        for (std::size_t l = 0; l < psi0.size(); ++l) {
            acc += tl * psi0[l].derivative().eval(zeta);
            tl *= t;
        }
        double sj = s;
        for (std::size_t j = 1; j < psi_hat.size(); ++j) {
            double tl2 = 1.0;
            for (std::size_t l = 0; l < psi_hat[j].size(); ++l) {
                acc += sj * tl2 * psi_hat[j][l].derivative().eval(zeta);
                tl2 *= t;
            }
            sj *= s;
        }
        return acc;
    }

    // log f_s at a disk point: sum s^j b_j(u)
    cplx log_fs(double s, cplx u) const {
        cplx acc(0.0);
        double sj = 1.0;
        for (const auto& bj : b) {
            acc += sj * bj.eval(u);
            sj *= s;
        }
        return acc;
    }
    // sum_{j<=kappa} m^{-j} B_j(u)
    cplx B_sum(double inv_m, cplx u) const {
        cplx acc(0.0);
        double w = 1.0;
        for (const auto& Bj : B) {
            acc += w * Bj.eval(u);
            w *= inv_m;
        }
        return acc;
    }
};

inline FlowExpansion flow_iterate(const AnnulusFun& R, const AnnulusFun* W, int kappa, int K = 64,
                                  double eq_tol = 1e-8) {
    FlowWork work(R, W, kappa, K);
    work.build_level_family();
    work.solve_b0();
    for (int j0 = 1; j0 <= kappa; ++j0) {
        for (int l0 = 0; 2 * j0 + l0 <= 2 * kappa + 1; ++l0) {
            try {
                work.solve_psi_hat(j0, l0);
            } catch (const std::exception& e) {
                throw tolerance_error("flow step3 (" + std::to_string(j0) + "," +
                                      std::to_string(l0) + "): " + e.what());
            }
        }
        try {
            work.solve_b(j0);
        } catch (const std::exception& e) {
            throw tolerance_error("flow step4 (" + std::to_string(j0) + ",0): " + e.what());
        }
    }
    FlowExpansion out;
    out.kappa = kappa;
    out.K = K;
    out.dR = work.dR();
    out.with_W = (W != nullptr);
    out.system_residual = work.system_residual();
    if (out.system_residual > eq_tol)
        throw tolerance_error("flow: system residual " + fmt_g(out.system_residual) +
                              " exceeds tolerance; raise the Fourier truncation");
    out.b.resize(kappa + 1);
    for (int j = 0; j <= kappa; ++j) out.b[j] = work.b(j);
    out.psi0.resize(2 * kappa + 2);
    for (int l = 0; l <= 2 * kappa + 1; ++l) out.psi0[l] = work.psi0(l);
    out.psi_hat.assign(kappa + 1, {});
    for (int j = 1; j <= kappa; ++j) {
        out.psi_hat[j].resize(std::max(0, 2 * kappa + 2 - 2 * j));
        for (int l = 0; l < static_cast<int>(out.psi_hat[j].size()); ++l)
            out.psi_hat[j][l] = work.psi_hat(j, l);
    }
    // B_j as multivariate polynomials in b_0..b_j via the s-only jet exponential
    {
        BiJet hs(2 * kappa, K);
        for (int j = 0; j <= kappa; ++j)
            if (hs.has(j, 0)) hs.at(j, 0) = out.b[j];
        BiJet fs = jet_exp(hs);
        out.B.resize(kappa + 1);
        for (int j = 0; j <= kappa; ++j) out.B[j] = fs.at(j, 0);
    }
    return out;
}

// Adaptive wrapper: doubles the Fourier truncation until the determined
// coefficients are stable to tail_tol.
inline FlowExpansion flow_iterate_adaptive(const AnnulusFun& R, const AnnulusFun* W, int kappa,
                                           int K0 = 64, double tail_tol = 1e-10,
                                           int max_doublings = 2) {
    FlowExpansion prev = flow_iterate(R, W, kappa, K0);
    for (int d = 1; d <= max_doublings; ++d) {
        int K2 = K0 << d;
        if (2 * K2 + 1 > 4 * R.K() + 64) return prev;  // source data exhausted
        FlowExpansion next = flow_iterate(R, W, kappa, K2);
        double diff = 0.0;
        for (int j = 0; j <= kappa; ++j) {
            CircleFun c = next.b[j].resized(prev.b[j].K()) - prev.b[j];
            diff = std::max(diff, c.max_abs_coef());
        }
        if (diff <= tail_tol) return next;
        prev = std::move(next);
    }
    return prev;
}

struct FlowSample {
    double s, t;
    cplx zeta;
    double value = 0.0;  // flow-equation residual against (4 pi)^{-1/2}
    bool valid = true;   // false when the loop leaves the weight's annulus
};

struct FlowResidual {
    std::vector<FlowSample> samples;
    double fitted_s_exponent = 0.0;        // at t = 0
    bool s_residuals_at_floor = false;     // all t=0 residuals at numerical noise
    double max_t0_residual = 0.0;
    double fitted_t_exponent = 0.0;        // at fixed s
    double limit_value = 0.0;              // s,t -> 0 value of the flow product
    double limit_deviation = 0.0;          // |limit - (4 pi)^{-1/2}|
    double beta(double s) const { return std::sqrt(s) * std::log(1.0 / s); }
};

// Direct numerical evaluation of the flow product against e^{-t^2/s}(4 pi)^{-1/2}.
inline FlowResidual flow_residual(const FlowExpansion& fe, const AnnulusFun& R,
                                  const AnnulusFun* W, const std::vector<double>& s_list,
                                  int n_t = 21, int n_zeta = 64, double s_for_t_fit = 1e-3) {
    FlowResidual out;
    const double target = 1.0 / std::sqrt(4.0 * kPi);
    auto eval_residual = [&](double s, double t, cplx zeta, bool& valid) {
        cplx pv = fe.psi(s, t, zeta);
        double r = std::abs(pv);
        if (!R.in_validity(r)) {
            valid = false;
            return 0.0;
        }
        double D = 2.0 * R.eval(pv) - t * t;
        cplx dt = fe.dt_psi(s, t, zeta);
        cplx dz = fe.dzeta_psi(s, t, zeta);
        double jac = (std::conj(zeta) * dt * std::conj(dz)).real();
        if (jac <= 0.0) throw tolerance_error("flow_residual: Jacobian not positive (univalence)");
        double fs2 = std::exp(2.0 * fe.log_fs(s, pv).real());
        double w = W ? W->eval(pv) : 1.0;
        valid = true;
        return fs2 * std::exp(-D / s) * jac * w - target;
    };

    for (double s : s_list) {
        double beta = out.beta(s);
        for (int it = 0; it < n_t; ++it) {
            double t = (n_t == 1) ? 0.0 : -beta + 2.0 * beta * it / (n_t - 1);
            if (n_t % 2 == 1 && it == n_t / 2) t = 0.0;
            for (int a = 0; a < n_zeta; ++a) {
                FlowSample smp;
                smp.s = s;
                smp.t = t;
                smp.zeta = std::polar(1.0, 2.0 * kPi * a / n_zeta);
                smp.value = eval_residual(s, t, smp.zeta, smp.valid);
                out.samples.push_back(smp);
            }
        }
    }

    // s-exponent at t = 0; at kappa = 0 the product closes exactly there
    // (psi_{s,0} = zeta), leaving only numerical noise
    {
        std::vector<double> xs, ys;
        for (double s : s_list) {
            double worst = 0.0;
            bool any = false;
            for (const auto& smp : out.samples)
                if (smp.valid && smp.s == s && smp.t == 0.0) {
                    worst = std::max(worst, std::abs(smp.value));
                    any = true;
                }
            if (any) out.max_t0_residual = std::max(out.max_t0_residual, worst);
            if (any && worst > 1e-13) {
                xs.push_back(std::log(s));
                ys.push_back(std::log(worst));
            }
        }
        if (xs.size() >= 2)
            out.fitted_s_exponent = fit_slope(xs, ys);
        else
            out.s_residuals_at_floor = true;
        if (out.max_t0_residual <= 1e-11) out.s_residuals_at_floor = true;
    }
    // t-exponent at fixed s: use |t| large enough to clear the s-floor
    {
        double floor_val = 0.0;
        for (const auto& smp : out.samples)
            if (smp.valid && smp.s == s_for_t_fit && smp.t == 0.0)
                floor_val = std::max(floor_val, std::abs(smp.value));
        std::vector<double> xs, ys;
        std::vector<double> t_seen;
        for (const auto& smp : out.samples) {
            if (!smp.valid || smp.s != s_for_t_fit || smp.t == 0.0) continue;
            bool seen = false;
            for (double tv : t_seen)
                if (tv == smp.t) seen = true;
            if (seen) continue;
            double worst = 0.0;
            for (const auto& o : out.samples)
                if (o.valid && o.s == smp.s && o.t == smp.t)
                    worst = std::max(worst, std::abs(o.value));
            if (worst > std::max(3.0 * floor_val, 1e-13)) {
                t_seen.push_back(smp.t);
                xs.push_back(std::log(std::abs(smp.t)));
                ys.push_back(std::log(worst));
            }
        }
        if (xs.size() >= 2) out.fitted_t_exponent = fit_slope(xs, ys);
    }
    // s,t -> 0 limit: |B_0|^2 Re(conj(zeta) psi01) W on T
    {
        double worst = 0.0;
        double val0 = 0.0;
        for (int a = 0; a < n_zeta; ++a) {
            cplx zeta = std::polar(1.0, 2.0 * kPi * a / n_zeta);
            double v = std::norm(std::exp(fe.b[0].eval(zeta))) *
                       (std::conj(zeta) * fe.psi0[1].eval(zeta)).real() *
                       (W ? W->A(0).eval(zeta).real() : 1.0);
            if (a == 0) val0 = v;
            worst = std::max(worst, std::abs(v - target));
        }
        out.limit_value = val0;
        out.limit_deviation = worst;
    }
    return out;
}

}  // namespace offspec
