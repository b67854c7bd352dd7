#pragma once

#include "offspec/common.hpp"

namespace offspec {

// In-place radix-2 FFT. sign=-1: forward (e^{-i...}), sign=+1: inverse (unscaled).
inline void fft_pow2(std::vector<cplx>& a, int sign) {
    const int n = static_cast<int>(a.size());
    if (n == 0 || (n & (n - 1)) != 0) throw validation_error("fft: size must be a power of two");
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (int len = 2; len <= n; len <<= 1) {
        double ang = sign * 2.0 * kPi / len;
        cplx wl(std::cos(ang), std::sin(ang));
        for (int i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (int k = 0; k < len / 2; ++k) {
                cplx u = a[i + k], v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

// Fourier coefficients c_k = (1/n) sum_j f_j e^{-ik theta_j} for k = -n/2..n/2-1,
// returned in natural FFT order (index k mod n).
inline std::vector<cplx> dft_forward(std::vector<cplx> samples) {
    int n = static_cast<int>(samples.size());
    fft_pow2(samples, -1);
    for (auto& v : samples) v /= static_cast<double>(n);
    return samples;
}

inline std::vector<cplx> dft_inverse(std::vector<cplx> coeffs) {
    fft_pow2(coeffs, +1);
    return coeffs;
}

}  // namespace offspec
