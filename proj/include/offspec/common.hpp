#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace offspec {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Error taxonomy: validation errors map to CLI exit code 2,
// tolerance errors to exit code 3.
struct validation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct tolerance_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double sqr(double x) { return x * x; }

// Uniform angles theta_j = 2*pi*j/n.
inline std::vector<double> uniform_angles(int n) {
    std::vector<double> th(n);
    for (int j = 0; j < n; ++j) th[j] = 2.0 * kPi * j / n;
    return th;
}

inline int next_pow2(int n) {
    int p = 1;
    while (p < n) p <<= 1;
    return p;
}

// Static-partition parallel loop; deterministic regardless of thread count.
inline void parallel_for(int n, const std::function<void(int)>& body) {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    int nthreads = std::max(1, std::min(hw, n));
    if (nthreads <= 1 || n < 4) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int t = 0; t < nthreads; ++t) {
        pool.emplace_back([=, &body] {
            for (int i = t; i < n; i += nthreads) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

// FNV-1a, used for content-addressed cache keys and manifests.
inline std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 1469598103934665603ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}
inline std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 1469598103934665603ull) {
    return fnv1a(s.data(), s.size(), h);
}
inline std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

// Fixed-format float printing so emitted CSV/JSON artifacts are byte-stable.
inline std::string fmt_g(double x, int digits = 12) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return std::string(buf);
}

// Least-squares slope of y against x.
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw validation_error("fit_slope: need >= 2 points");
    double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double den = n * sxx - sx * sx;
    if (den == 0) throw validation_error("fit_slope: degenerate abscissae");
    return (n * sxy - sx * sy) / den;
}

// Fitted decay exponent p of values v(m) ~ C m^{-p}.
inline double fit_decay_exponent(const std::vector<double>& m, const std::vector<double>& v) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (v[i] > 0 && m[i] > 0) {
            lx.push_back(std::log(m[i]));
            ly.push_back(std::log(v[i]));
        }
    }
    if (lx.size() < 2) throw tolerance_error("fit_decay_exponent: too few positive samples");
    return -fit_slope(lx, ly);
}

}  // namespace offspec
