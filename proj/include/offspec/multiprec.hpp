#pragma once

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "offspec/potential.hpp"

namespace offspec {

// Extended-precision scalars for the brute-force oracle. Shifted-monomial Gram
// matrices are exponentially ill-conditioned, so double precision fails well
// below the acceptance m-range. Two compile-time levels are exposed; a requested
// digit count selects the smallest sufficient level.
using mp40 = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<40>,
                                           boost::multiprecision::et_off>;
using mp100 = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<100>,
                                            boost::multiprecision::et_off>;

template <class R>
struct MpC {
    R re{0}, im{0};

    MpC() = default;
    MpC(R r) : re(std::move(r)) {}
    MpC(R r, R i) : re(std::move(r)), im(std::move(i)) {}
    explicit MpC(cplx z) : re(z.real()), im(z.imag()) {}

    friend MpC operator+(const MpC& a, const MpC& b) { return {a.re + b.re, a.im + b.im}; }
    friend MpC operator-(const MpC& a, const MpC& b) { return {a.re - b.re, a.im - b.im}; }
    friend MpC operator*(const MpC& a, const MpC& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend MpC operator*(const R& s, const MpC& a) { return {s * a.re, s * a.im}; }
    friend MpC operator/(const MpC& a, const R& s) { return {a.re / s, a.im / s}; }
    friend MpC operator/(const MpC& a, const MpC& b) {
        R n = b.re * b.re + b.im * b.im;
        MpC num = a * conj(b);
        return {num.re / n, num.im / n};
    }
    MpC& operator+=(const MpC& o) {
        re += o.re;
        im += o.im;
        return *this;
    }
    MpC& operator-=(const MpC& o) {
        re -= o.re;
        im -= o.im;
        return *this;
    }

    friend MpC conj(const MpC& a) { return {a.re, -a.im}; }
    friend R norm2(const MpC& a) { return a.re * a.re + a.im * a.im; }
    friend R abs_mp(const MpC& a) { return sqrt(norm2(a)); }

    cplx to_cplx() const { return cplx(static_cast<double>(re), static_cast<double>(im)); }
    // log of the value as a double complex (log-modulus, argument)
    cplx log_to_cplx() const {
        R la = log(norm2(*this)) / 2;
        R ar = atan2(im, re);
        return cplx(static_cast<double>(la), static_cast<double>(ar));
    }
};

// Q at extended precision, mirroring Potential::eval kind by kind.
template <class R>
R eval_Q_mp(const Potential& p, const MpC<R>& z) {
    switch (p.kind()) {
        case PotentialKind::gaussian: return norm2(z);
        case PotentialKind::gaussian_log: {
            R a(p.params()[0]), c(p.params()[1]);
            return norm2(z) - c * log(a + norm2(z));
        }
        case PotentialKind::perturbed_gaussian: {
            R eps(p.params()[0]);
            return norm2(z) + eps * (z.re * z.re - z.im * z.im);
        }
        case PotentialKind::singular: {
            R n2 = norm2(z);
            if (n2 == 0) throw validation_error("potential: singularity hit at 0");
            R re_inv2 = (z.re * z.re - z.im * z.im) / (n2 * n2);
            return R(0.5) / n2 - R(0.125) * re_inv2 + log(n2) / 2;
        }
        case PotentialKind::perturbed_wrapper: {
            MpC<R> d = z - MpC<R>(p.wrapper_w0());
            R n2 = norm2(d);
            if (n2 == 0) throw validation_error("potential: singularity hit at the root point");
            return eval_Q_mp(*p.base(), z) - R(p.wrapper_tau()) * log(n2) / 2;
        }
        case PotentialKind::inverted_wrapper: {
            R n2 = norm2(z);
            if (n2 == 0) throw validation_error("potential: singularity hit at 0");
            MpC<R> zi = conj(z) / n2;
            return eval_Q_mp(*p.base(), zi) + R(p.wrapper_tau()) * log(n2) / 2;
        }
        case PotentialKind::custom_table:
            throw validation_error("oracle: tabulated potentials carry no extended precision");
    }
    throw validation_error("potential: bad kind");
}

template <class R>
R eval_V_mp(const ConformalFactor& V, const MpC<R>& z) {
    switch (V.kind()) {
        case FactorKind::unit: return R(1);
        case FactorKind::spherical: {
            R d = 1 + norm2(z);
            return R(1) / (d * d);
        }
        case FactorKind::exponential: {
            MpC<R> acc;
            for (std::size_t k = V.params().size(); k-- > 0;)
                acc = acc * z + MpC<R>(R(V.params()[k]), R(0));
            return exp(2 * acc.re);
        }
        case FactorKind::inverted: {
            R n2 = norm2(z);
            if (n2 == 0) throw validation_error("factor: singularity hit at 0");
            MpC<R> zi = conj(z) / n2;
            return eval_V_mp(*V.base(), zi) / (n2 * n2);
        }
    }
    throw validation_error("factor: bad kind");
}

}  // namespace offspec
