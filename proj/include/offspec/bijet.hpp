#pragma once

#include "offspec/circle_fun.hpp"

namespace offspec {

// Truncated bivariate power series in (s,t) with CircleFun coefficients,
// indexed over {(j,l) : j,l >= 0, 2j + l <= order}. The grading 2j+l matches
// the flow's error budget, so products truncate back into the same index set.
class BiJet {
public:
    BiJet() : order_(0), K_(0) {}
    BiJet(int order, int K) : order_(order), K_(K) {
        if (order < 0) throw validation_error("BiJet: negative order");
        coefs_.assign(index_count(order), CircleFun(K));
    }

    static int grade(int j, int l) { return 2 * j + l; }
    static bool in_set(int j, int l, int order) {
        return j >= 0 && l >= 0 && grade(j, l) <= order;
    }
    static int index_count(int order) {
        int n = 0;
        for (int j = 0; 2 * j <= order; ++j) n += order - 2 * j + 1;
        return n;
    }

    int order() const { return order_; }
    int K() const { return K_; }

    const CircleFun& at(int j, int l) const { return coefs_[slot(j, l)]; }
    CircleFun& at(int j, int l) { return coefs_[slot(j, l)]; }

    bool has(int j, int l) const { return in_set(j, l, order_); }

    template <typename F>
    void for_each(F&& fn) const {
        for (int j = 0; 2 * j <= order_; ++j)
            for (int l = 0; 2 * j + l <= order_; ++l) fn(j, l, at(j, l));
    }

    static BiJet constant(const CircleFun& f, int order) {
        BiJet J(order, f.K());
        J.at(0, 0) = f;
        return J;
    }
    static BiJet constant(cplx v, int order, int K) {
        return constant(CircleFun::constant(v, K), order);
    }
    // the monomial s^j t^l * f
    static BiJet monomial(int j, int l, const CircleFun& f, int order) {
        BiJet J(order, f.K());
        if (J.has(j, l)) J.at(j, l) = f;
        return J;
    }

    BiJet& operator+=(const BiJet& o) {
        check_compat(o);
        for (std::size_t i = 0; i < coefs_.size(); ++i) coefs_[i] += o.coefs_[i];
        return *this;
    }
    BiJet& operator-=(const BiJet& o) {
        check_compat(o);
        for (std::size_t i = 0; i < coefs_.size(); ++i) coefs_[i] -= o.coefs_[i];
        return *this;
    }
    BiJet& operator*=(cplx sc) {
        for (auto& c : coefs_) c *= sc;
        return *this;
    }
    friend BiJet operator+(BiJet a, const BiJet& b) { return a += b; }
    friend BiJet operator-(BiJet a, const BiJet& b) { return a -= b; }
    friend BiJet operator*(BiJet a, cplx sc) { return a *= sc; }
    friend BiJet operator*(cplx sc, BiJet a) { return a *= sc; }

    bool is_zero(double tol = 0.0) const {
        for (auto& c : coefs_)
            if (c.max_abs_coef() > tol) return false;
        return true;
    }

    double max_abs() const {
        double m = 0;
        for (auto& c : coefs_) m = std::max(m, c.max_abs_coef());
        return m;
    }

    // Cauchy product within the grading.
    friend BiJet jet_mul(const BiJet& a, const BiJet& b, double* tail = nullptr) {
        a.check_compat(b);
        BiJet r(a.order_, a.K_);
        for (int ja = 0; 2 * ja <= a.order_; ++ja)
            for (int la = 0; 2 * ja + la <= a.order_; ++la) {
                if (a.at(ja, la).max_abs_coef() == 0.0) continue;
                for (int jb = 0; 2 * (ja + jb) <= a.order_; ++jb)
                    for (int lb = 0; BiJet::grade(ja + jb, la + lb) <= a.order_; ++lb) {
                        if (b.at(jb, lb).max_abs_coef() == 0.0) continue;
                        r.at(ja + jb, la + lb) +=
                            CircleFun::mul(a.at(ja, la), b.at(jb, lb), a.K_, tail);
                    }
            }
        return r;
    }

    BiJet conj_circle() const {
        BiJet r(order_, K_);
        for_each([&](int j, int l, const CircleFun& c) { r.at(j, l) = c.conj_circle(); });
        return r;
    }
    BiJet real_part() const {
        BiJet r = conj_circle();
        r += *this;
        return r *= 0.5;
    }

    // d/dt within the grading: t^l -> l t^{l-1}.
    BiJet d_t() const {
        BiJet r(order_, K_);
        for (int j = 0; 2 * j <= order_; ++j)
            for (int l = 1; 2 * j + l <= order_; ++l)
                r.at(j, l - 1) = static_cast<double>(l) * at(j, l);
        return r;
    }

    // d/dzeta applied to every coefficient.
    BiJet d_zeta() const {
        BiJet r(order_, K_);
        for_each([&](int j, int l, const CircleFun& c) { r.at(j, l) = c.derivative(); });
        return r;
    }

    // Division by s: requires the j=0 row to vanish (returns its max magnitude).
    BiJet div_s(double* j0_residual = nullptr) const {
        BiJet r(order_, K_);
        double res = 0;
        for (int l = 0; l <= order_; ++l) res = std::max(res, at(0, l).max_abs_coef());
        if (j0_residual) *j0_residual = res;
        for (int j = 1; 2 * j <= order_; ++j)
            for (int l = 0; 2 * j + l <= order_; ++l)
                if (in_set(j - 1, l, order_)) r.at(j - 1, l) = at(j, l);
        return r;
    }

private:
    void check_compat(const BiJet& o) const {
        if (order_ != o.order_ || K_ != o.K_) throw validation_error("BiJet: incompatible shapes");
    }
    int slot(int j, int l) const {
        if (!in_set(j, l, order_)) throw validation_error("BiJet: index outside grading");
        int base = 0;
        for (int p = 0; p < j; ++p) base += order_ - 2 * p + 1;
        return base + l;
    }

    int order_;
    int K_;
    std::vector<CircleFun> coefs_;
};

// exp of a jet. Splits off the (0,0) part (exponentiated by sampling) and uses
// the nilpotency of the rest under the grading.
inline BiJet jet_exp(const BiJet& a, double* tail = nullptr) {
    BiJet n = a;
    CircleFun head = a.at(0, 0);
    n.at(0, 0) = CircleFun(a.K());
    BiJet r = BiJet::constant(cplx(1.0), a.order(), a.K());
    BiJet term = r;
    for (int p = 1; p <= a.order(); ++p) {
        term = jet_mul(term, n, tail);
        term *= cplx(1.0 / p);
        r += term;
    }
    if (head.max_abs_coef() > 0) {
        BiJet eh = BiJet::constant(head.exp_samples(), a.order());
        r = jet_mul(eh, r, tail);
    }
    return r;
}

// log of a jet with invertible leading coefficient.
inline BiJet jet_log(const BiJet& a, double* tail = nullptr) {
    CircleFun head = a.at(0, 0);
    if (head.max_abs_coef() == 0.0) throw validation_error("jet_log: zero leading term");
    CircleFun inv_head = head.inv_samples();
    BiJet x = jet_mul(a, BiJet::constant(inv_head, a.order()), tail);
    x -= BiJet::constant(cplx(1.0), a.order(), a.K());
    // x has vanishing (0,0) term: log(1+x) by series
    BiJet r(a.order(), a.K());
    BiJet term = BiJet::constant(cplx(1.0), a.order(), a.K());
    for (int p = 1; p <= a.order(); ++p) {
        term = jet_mul(term, x, tail);
        BiJet contrib = term;
        contrib *= cplx((p % 2 == 1 ? 1.0 : -1.0) / p);
        r += contrib;
    }
    CircleFun log_head = head.is_real(1e-9 * std::max(1.0, head.max_abs_coef()))
                             ? head.log_real_positive()
                             : head.map_samples([](cplx v) { return std::log(v); });
    r += BiJet::constant(log_head, a.order());
    return r;
}

// (1 + x)^alpha for a jet x with vanishing (0,0) part.
inline BiJet jet_binomial(const BiJet& x, double alpha, double* tail = nullptr) {
    if (x.at(0, 0).max_abs_coef() > 1e-13 * std::max(1.0, x.max_abs()))
        throw validation_error("jet_binomial: leading term must vanish");
    BiJet r = BiJet::constant(cplx(1.0), x.order(), x.K());
    BiJet term = r;
    double coef = 1.0;
    for (int p = 1; p <= x.order(); ++p) {
        coef *= (alpha - (p - 1)) / p;
        term = jet_mul(term, x, tail);
        BiJet contrib = term;
        contrib *= cplx(coef);
        r += contrib;
    }
    return r;
}

// Reciprocal of a jet with invertible leading coefficient.
inline BiJet jet_inv(const BiJet& a, double* tail = nullptr) {
    CircleFun head = a.at(0, 0);
    if (head.max_abs_coef() == 0.0) throw validation_error("jet_inv: zero leading term");
    CircleFun inv_head = head.inv_samples();
    BiJet x = jet_mul(a, BiJet::constant(inv_head, a.order()), tail);
    x -= BiJet::constant(cplx(1.0), a.order(), a.K());
    BiJet r = BiJet::constant(cplx(1.0), a.order(), a.K());
    BiJet term = r;
    for (int p = 1; p <= a.order(); ++p) {
        term = jet_mul(term, x, tail);
        BiJet contrib = term;
        contrib *= cplx(p % 2 == 1 ? -1.0 : 1.0);
        r += contrib;
    }
    return jet_mul(r, BiJet::constant(inv_head, a.order()), tail);
}

// Composition h(psi_{s,t}(zeta)) of an analytic function h (Laurent coefficients
// on a neighborhood of T) with a jet whose (0,0) coefficient is the identity zeta.
// Taylor expansion about zeta: sum_p h^(p)(zeta) (psi - zeta)^p / p!.
inline BiJet compose_holo(const CircleFun& h, const BiJet& psi, double* tail = nullptr) {
    BiJet delta = psi;
    delta.at(0, 0) -= CircleFun::identity(psi.K());
    if (delta.at(0, 0).max_abs_coef() > 1e-12 * std::max(1.0, psi.max_abs()))
        throw validation_error("compose_holo: jet base point must be the identity");
    delta.at(0, 0) = CircleFun(psi.K());
    BiJet r = BiJet::constant(h, psi.order());
    BiJet dpow = BiJet::constant(cplx(1.0), psi.order(), psi.K());
    CircleFun hp = h;
    double fact = 1.0;
    for (int p = 1; p <= psi.order(); ++p) {
        dpow = jet_mul(dpow, delta, tail);
        hp = hp.derivative();
        fact *= p;
        r += jet_mul(BiJet::constant(hp, psi.order()), dpow, tail) * cplx(1.0 / fact);
    }
    return r;
}

}  // namespace offspec
