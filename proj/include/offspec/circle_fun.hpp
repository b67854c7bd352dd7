#pragma once

#include "offspec/fft.hpp"

namespace offspec {

// Trigonometric polynomial f(zeta) = sum_{k=-K}^{K} c_k zeta^k on the unit circle.
// Products and real-part extraction are done coefficient-wise (convolution), never by
// sampling; sampling is used only for scalar transcendental maps (log, exp, powers).
class CircleFun {
public:
    CircleFun() : K_(0), c_(1, cplx(0.0)) {}
    explicit CircleFun(int K) : K_(K), c_(2 * K + 1, cplx(0.0)) {
        if (K < 0) throw validation_error("CircleFun: negative mode bound");
    }

    static CircleFun constant(cplx v, int K) {
        CircleFun f(K);
        f.set(0, v);
        return f;
    }
    // zeta^k scaled by v
    static CircleFun mode(int k, cplx v, int K) {
        CircleFun f(K);
        f.set(k, v);
        return f;
    }
    static CircleFun identity(int K) { return mode(1, cplx(1.0), K); }

    int K() const { return K_; }
    cplx coef(int k) const { return (std::abs(k) <= K_) ? c_[k + K_] : cplx(0.0); }
    void set(int k, cplx v) {
        if (std::abs(k) > K_) throw validation_error("CircleFun::set: mode out of range");
        c_[k + K_] = v;
    }
    void add_to(int k, cplx v) {
        if (std::abs(k) <= K_) c_[k + K_] += v;
    }

    CircleFun resized(int K2) const {
        CircleFun g(K2);
        int km = std::min(K_, K2);
        for (int k = -km; k <= km; ++k) g.set(k, coef(k));
        return g;
    }

    CircleFun& operator+=(const CircleFun& o) {
        if (o.K_ > K_) throw validation_error("CircleFun +=: mode bound mismatch");
        for (int k = -o.K_; k <= o.K_; ++k) c_[k + K_] += o.c_[k + o.K_];
        return *this;
    }
    CircleFun& operator-=(const CircleFun& o) {
        if (o.K_ > K_) throw validation_error("CircleFun -=: mode bound mismatch");
        for (int k = -o.K_; k <= o.K_; ++k) c_[k + K_] -= o.c_[k + o.K_];
        return *this;
    }
    CircleFun& operator*=(cplx s) {
        for (auto& v : c_) v *= s;
        return *this;
    }
    friend CircleFun operator+(CircleFun a, const CircleFun& b) { return a += b; }
    friend CircleFun operator-(CircleFun a, const CircleFun& b) { return a -= b; }
    friend CircleFun operator*(CircleFun a, cplx s) { return a *= s; }
    friend CircleFun operator*(cplx s, CircleFun a) { return a *= s; }

    // nonzero support band [lo, hi]; returns false for the zero function
    bool band(int& lo, int& hi) const {
        lo = K_ + 1;
        hi = -K_ - 1;
        for (int k = -K_; k <= K_; ++k)
            if (c_[k + K_] != cplx(0.0)) {
                if (k < lo) lo = k;
                hi = k;
            }
        return hi >= lo;
    }

    // Convolution product truncated to mode bound K_out; the largest discarded
    // coefficient magnitude is reported through *tail when requested.
    static CircleFun mul(const CircleFun& a, const CircleFun& b, int K_out, double* tail = nullptr) {
        CircleFun r(K_out);
        int la, ha, lb, hb;
        if (!a.band(la, ha) || !b.band(lb, hb)) return r;
        double dropped = 0.0;
        for (int k = la + lb; k <= ha + hb; ++k) {
            cplx acc(0.0);
            int lo = std::max(la, k - hb);
            int hi = std::min(ha, k - lb);
            for (int p = lo; p <= hi; ++p) acc += a.coef(p) * b.coef(k - p);
            if (std::abs(k) <= K_out)
                r.set(k, acc);
            else
                dropped = std::max(dropped, std::abs(acc));
        }
        if (tail) *tail = std::max(*tail, dropped);
        return r;
    }

    // conj(f(zeta)) on |zeta| = 1: c_k -> conj(c_{-k}).
    CircleFun conj_circle() const {
        CircleFun g(K_);
        for (int k = -K_; k <= K_; ++k) g.set(k, std::conj(coef(-k)));
        return g;
    }
    CircleFun real_part() const {
        CircleFun g = conj_circle();
        g += *this;
        return g *= 0.5;
    }

    bool is_real(double tol = 1e-10) const {
        for (int k = 0; k <= K_; ++k)
            if (std::abs(coef(-k) - std::conj(coef(k))) > tol) return false;
        return true;
    }

    // Evaluation as a Laurent polynomial; valid off the circle inside the
    // annulus of analyticity implied by coefficient decay.
    cplx eval(cplx u) const {
        cplx pos(0.0);
        for (int k = K_; k >= 1; --k) pos = (pos + coef(k)) * u;
        cplx neg(0.0);
        if (std::abs(u) > 0) {
            cplx iu = 1.0 / u;
            for (int k = K_; k >= 1; --k) neg = (neg + coef(-k)) * iu;
        }
        return pos + neg + coef(0);
    }
    cplx eval_angle(double theta) const { return eval(std::polar(1.0, theta)); }

    // d/dzeta, mode-wise.
    CircleFun derivative() const {
        CircleFun g(K_);
        for (int k = -K_; k <= K_; ++k) {
            if (k - 1 >= -K_ && k != 0) g.add_to(k - 1, static_cast<double>(k) * coef(k));
        }
        // the k=-K mode would shift out of range; analytic inputs make it negligible
        return g;
    }

    double max_abs_coef() const {
        double m = 0;
        for (auto& v : c_) m = std::max(m, std::abs(v));
        return m;
    }
    // Largest coefficient magnitude in the top (1-frac) band, relative to the peak.
    double tail_ratio(double frac = 0.75) const {
        double peak = max_abs_coef();
        if (peak == 0) return 0.0;
        int k0 = static_cast<int>(frac * K_);
        double t = 0;
        for (int k = k0; k <= K_; ++k) t = std::max(t, std::max(std::abs(coef(k)), std::abs(coef(-k))));
        return t / peak;
    }

    std::vector<cplx> samples(int n) const {
        std::vector<cplx> a(n, cplx(0.0));
        if (n < 2 * K_ + 1) throw validation_error("CircleFun::samples: grid under-resolves modes");
        for (int k = -K_; k <= K_; ++k) a[(k % n + n) % n] = coef(k);
        return dft_inverse(std::move(a));
    }

    static CircleFun from_samples(const std::vector<cplx>& vals, int K) {
        int n = static_cast<int>(vals.size());
        auto c = dft_forward(std::vector<cplx>(vals));
        if (n < 2 * K + 1) throw validation_error("CircleFun::from_samples: too few samples");
        CircleFun f(K);
        for (int k = -K; k <= K; ++k) f.set(k, c[(k % n + n) % n]);
        return f;
    }

    // Pointwise scalar map through a sampling grid (log, powers, ...). Only for
    // functions analytic on the circle; resampling aliasing is below coefficient tail.
    CircleFun map_samples(const std::function<cplx(cplx)>& fn) const {
        int n = next_pow2(std::max(4 * K_ + 4, 32));
        auto v = samples(n);
        for (auto& x : v) x = fn(x);
        return from_samples(v, K_);
    }

    // log of a strictly positive real function on the circle.
    CircleFun log_real_positive() const {
        if (!is_real(1e-8 * std::max(1.0, max_abs_coef())))
            throw validation_error("CircleFun::log: input not real on the circle");
        return map_samples([](cplx v) {
            if (v.real() <= 0.0) throw validation_error("CircleFun::log: non-positive value");
            return cplx(std::log(v.real()), 0.0);
        });
    }
    // real power of a strictly positive real function.
    CircleFun pow_real_positive(double alpha) const {
        return map_samples([alpha](cplx v) {
            if (v.real() <= 0.0) throw validation_error("CircleFun::pow: non-positive value");
            return cplx(std::pow(v.real(), alpha), 0.0);
        });
    }
    CircleFun exp_samples() const {
        return map_samples([](cplx v) { return std::exp(v); });
    }
    CircleFun inv_samples() const {
        return map_samples([](cplx v) {
            if (std::abs(v) == 0.0) throw validation_error("CircleFun::inv: zero value");
            return 1.0 / v;
        });
    }

    double sup_norm(int n = 0) const {
        if (n == 0) n = next_pow2(std::max(4 * K_ + 4, 64));
        auto v = samples(n);
        double m = 0;
        for (auto& x : v) m = std::max(m, std::abs(x));
        return m;
    }
    double min_real(int n = 0) const {
        if (n == 0) n = next_pow2(std::max(4 * K_ + 4, 64));
        auto v = samples(n);
        double m = v[0].real();
        for (auto& x : v) m = std::min(m, x.real());
        return m;
    }

    // zero trailing modes at the sampling noise floor; keeps analytic
    // continuation off the circle from amplifying roundoff
    CircleFun denoised(double rel = 1e-13) const {
        double peak = max_abs_coef();
        if (peak == 0) return *this;
        int keep_pos = 0, keep_neg = 0;
        for (int k = 1; k <= K_; ++k) {
            if (std::abs(coef(k)) > rel * peak) keep_pos = k;
            if (std::abs(coef(-k)) > rel * peak) keep_neg = k;
        }
        CircleFun g(K_);
        g.set(0, coef(0));
        for (int k = 1; k <= keep_pos; ++k) g.set(k, coef(k));
        for (int k = 1; k <= keep_neg; ++k) g.set(-k, coef(-k));
        return g;
    }

private:
    int K_;
    std::vector<cplx> c_;  // c_[k + K_] is the coefficient of zeta^k
};

// Herglotz operator H_D: real data f on T -> holomorphic F with Re F|_T = f,
// Im F(0) = 0. In Fourier terms F = f_0 + 2 sum_{k>=1} f_k z^k.
inline CircleFun herglotz(const CircleFun& f, double tol = 1e-8) {
    if (!f.is_real(tol * std::max(1.0, f.max_abs_coef())))
        throw validation_error("herglotz: boundary data must be real-valued");
    CircleFun g(f.K());
    g.set(0, cplx(f.coef(0).real(), 0.0));
    for (int k = 1; k <= f.K(); ++k) g.set(k, 2.0 * f.coef(k));
    return g;
}

// Hardy projection P_{H^2_0}: keep analytic modes k >= 1.
inline CircleFun hardy_project_0(const CircleFun& f) {
    CircleFun g(f.K());
    for (int k = 1; k <= f.K(); ++k) g.set(k, f.coef(k));
    return g;
}

// L^2(T) inner product <f,g> = sum_k f_k conj(g_k).
inline cplx circle_inner(const CircleFun& f, const CircleFun& g) {
    cplx s(0.0);
    int K = std::max(f.K(), g.K());
    for (int k = -K; k <= K; ++k) s += f.coef(k) * std::conj(g.coef(k));
    return s;
}

}  // namespace offspec
