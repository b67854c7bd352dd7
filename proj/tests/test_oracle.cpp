#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "offspec/oracle.hpp"

using namespace offspec;

namespace {
// exact radial Gaussian: k_{m,n,0} = z^n sqrt((2m)^{n+1}/n!)
double log_radial_coef(int m, int n) {
    return 0.5 * ((n + 1) * std::log(2.0 * m) - std::lgamma(n + 1.0));
}
}  // namespace

TEST_CASE("weighted inner products against Gaussian closed forms", "[oracle]") {
    auto o = OracleSet<mp40>::build(Potential::gaussian(), ConformalFactor::unit(), 1, cplx(0, 0),
                                    12, 40);
    // <z^n, z^n> = n! / (2m)^{n+1}
    for (int n = 0; n <= 10; ++n) {
        mp40 want(1);
        for (int k = 2; k <= n; ++k) want *= k;
        mp40 denom = pow(mp40(2), n + 1);
        want /= denom;
        double rel = static_cast<double>((o->gram_[n][n].re - want) / want);
        REQUIRE(std::abs(rel) < 1e-35);
        REQUIRE(std::abs(static_cast<double>(o->gram_[n][n].im)) < 1e-40);
    }
    // angular orthogonality for the radial weight
    for (int j = 0; j <= 10; ++j)
        for (int k = 0; k < j; ++k)
            REQUIRE(static_cast<double>(abs_mp(o->gram_[j][k])) < 1e-38);
    // <1,1> at m=1 is 1/2
    REQUIRE(static_cast<double>(o->gram_[0][0].re) == Catch::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("quadrature self-test and rim certificate", "[oracle]") {
    auto q = OracleQuadrature<mp40>::build(Potential::gaussian(), ConformalFactor::unit(), 4,
                                           cplx(0, 0), 16, 40);
    REQUIRE(q.log_rim_integrand < -40.0 * std::log(10.0));
    // radial rule integrates r^{2k+1} e^{-2mr^2} to the certified tolerance
    // against the incomplete-gamma-free closed form (full Gaussian moments)
    for (int k : {0, 5, 16}) {
        mp40 acc(0);
        for (std::size_t i = 0; i < q.r.size(); ++i)
            acc += q.w[i] * pow(q.r[i], 2 * k + 1) * exp(-8 * q.r[i] * q.r[i]);
        acc *= 2;
        mp40 want(1);
        for (int p = 2; p <= k; ++p) want *= p;
        want /= pow(mp40(8), k + 1);
        REQUIRE(std::abs(static_cast<double>((acc - want) / want)) < 1e-36);
    }
    // a potential with logarithmic growth cannot certify large n_max
    REQUIRE_THROWS_AS(OracleQuadrature<mp40>::build(Potential::singular(),
                                                    ConformalFactor::unit(), 8, cplx(0, 0), 40,
                                                    40),
                      validation_error);
}

TEST_CASE("root functions of the radial Gaussian are monomials", "[oracle]") {
    int m = 8, n_max = 20;
    auto o = OracleSet<mp40>::build(Potential::gaussian(), ConformalFactor::unit(), m, cplx(0, 0),
                                    n_max, 40);
    for (int n = 0; n <= n_max; n += 4) {
        cplx lead = o->roots_[n][n].to_cplx();
        REQUIRE(lead.real() > 0);
        REQUIRE(std::abs(lead.imag()) < 1e-30);
        REQUIRE(std::log(lead.real()) == Catch::Approx(log_radial_coef(m, n)).epsilon(1e-12));
        for (int k = 0; k <= n_max; ++k)
            if (k != n) REQUIRE(static_cast<double>(abs_mp(o->roots_[n][k])) < 1e-30);
    }
    // orthonormality via an independent finer quadrature
    REQUIRE(o->certify() < 1e-30);
}

TEST_CASE("partial kernel: exponential resummation and monotonicity", "[oracle]") {
    int m = 8, n_max = 36;
    auto o = OracleSet<mp40>::build(Potential::gaussian(), ConformalFactor::unit(), m, cplx(0, 0),
                                    n_max, 40);
    std::mt19937_64 rng(5);
    auto urand = [&](double a, double b) { return a + (b - a) * (rng() >> 11) * 0x1.0p-53; };
    for (int rep = 0; rep < 8; ++rep) {
        cplx z = std::polar(urand(0, 0.5), urand(0, 2 * kPi));
        cplx w = std::polar(urand(0, 0.5), urand(0, 2 * kPi));
        cplx got = o->partial_kernel(0, z, w).to_cplx();
        cplx want = 2.0 * m * std::exp(2.0 * m * z * std::conj(w));
        REQUIRE(std::abs(got - want) / std::abs(want) < 1e-8);
    }
    // n >= 1 terms vanish at the base point
    REQUIRE(std::abs(o->partial_kernel(1, cplx(0, 0), cplx(0, 0)).to_cplx()) < 1e-60);
    // diagonal partial sums are monotone nondecreasing with a Cauchy tail
    cplx z(0.31, -0.12);
    double prev = 0.0;
    for (int n = n_max; n >= 0; --n) {
        double cur = static_cast<double>(o->partial_kernel(n, z, z, 1e-10, false).re);
        REQUIRE(cur >= prev - 1e-25);
        prev = cur;
    }
    // the Cauchy tail at n = 0 is certified by the geometric estimate
    REQUIRE_NOTHROW(o->partial_kernel(0, z, z));
    // reproducing property through the stored Gram: <f, K(.,w)> = f(w)
    std::vector<MpC<mp40>> f(n_max + 1);
    for (int k = 0; k <= 8; ++k) f[k] = MpC<mp40>(cplx(urand(-1, 1), urand(-1, 1)));
    cplx w(0.22, 0.17);
    MpC<mp40> lhs;
    for (int n = 0; n <= n_max; ++n) {
        MpC<mp40> proj = o->inner(f, o->roots_[n]);
        lhs += proj * o->eval_root(n, w);
    }
    MpC<mp40> mw{mp40(w.real()), mp40(w.imag())};
    MpC<mp40> direct;
    for (int k = n_max; k >= 0; --k) direct = direct * mw + f[k];
    REQUIRE(static_cast<double>(abs_mp(lhs - direct)) < 1e-8);
}

TEST_CASE("density: bulk value, forbidden-region decay, base point", "[oracle]") {
    // gaussian n=0: rho = 2 = 2 DeltaQ everywhere in the certified domain
    auto o8 = OracleSet<mp40>::build(Potential::gaussian(), ConformalFactor::unit(), 8, cplx(0, 0),
                                     36, 40);
    for (double r : {0.1, 0.5, 0.9})
        REQUIRE(o8->density(0, std::polar(r, 0.3)) == Catch::Approx(2.0).epsilon(1e-6));
    // rho at the base point with n >= 1 vanishes
    REQUIRE(o8->density(2, cplx(0, 0)) == 0.0);
    // exponential decay deep inside the forbidden region at n = m/2
    std::vector<double> ms{8, 16, 24}, vals;
    for (int m : {8, 16, 24}) {
        auto o = OracleSet<mp40>::build(Potential::gaussian(), ConformalFactor::unit(), m,
                                        cplx(0, 0), 2 * m + 24, 40);
        vals.push_back(o->density(m / 2, cplx(0.25, 0.0)));
    }
    // log-linear in m: fitted decay rate c with rho ~ e^{-cm}
    double c1 = -(std::log(vals[1]) - std::log(vals[0])) / 8.0;
    double c2 = -(std::log(vals[2]) - std::log(vals[1])) / 8.0;
    REQUIRE(c1 > 0.05);
    REQUIRE(c2 == Catch::Approx(c1).epsilon(0.35));
}

TEST_CASE("extremal characterization of root functions", "[oracle]") {
    int m = 8, n_max = 18, n = 5;
    auto o = OracleSet<mp40>::build(Potential::perturbed_gaussian(0.1), ConformalFactor::unit(),
                                    m, cplx(0, 0), n_max, 40);
    double champion = static_cast<double>(o->roots_[n][n].re);
    std::mt19937_64 rng(17);
    auto urand = [&](double a, double b) { return a + (b - a) * (rng() >> 11) * 0x1.0p-53; };
    for (int rep = 0; rep < 20; ++rep) {
        // random competitor in the truncated A^2_n, normalized via the Gram
        std::vector<MpC<mp40>> c(n_max + 1);
        for (int k = n; k <= n_max; ++k) c[k] = MpC<mp40>(cplx(urand(-1, 1), urand(-1, 1)));
        mp40 nrm = o->inner(c, c).re;
        mp40 scl = sqrt(nrm);
        double re_cn = static_cast<double>(c[n].re / scl);
        REQUIRE(re_cn <= champion + 1e-12);
    }
}

TEST_CASE("orthogonal polynomials", "[oracle]") {
    // radial weight: P_{m,n} coincides with the root function at 0
    int m = 6, n_max = 14;
    auto o = OracleSet<mp40>::build(Potential::gaussian(), ConformalFactor::unit(), m, cplx(0, 0),
                                    n_max, 40);
    for (int n = 0; n <= n_max; n += 3)
        for (int k = 0; k <= n_max; ++k)
            REQUIRE(static_cast<double>(abs_mp(o->opolys_[n][k] - o->roots_[n][k])) < 1e-28);

    // spherical conformal factor: orthogonality residual at the 40-digit scale
    auto os = OracleSet<mp40>::build(Potential::gaussian(), ConformalFactor::spherical(), m,
                                     cplx(0, 0), 12, 40);
    for (int a = 0; a <= 12; ++a)
        for (int b = 0; b < a; ++b) {
            MpC<mp40> ip = os->inner(os->opolys_[a], os->opolys_[b]);
            REQUIRE(static_cast<double>(abs_mp(ip)) < 1e-25);
        }
    // perturbed weight: exact degree with positive leading coefficient
    auto op = OracleSet<mp40>::build(Potential::perturbed_gaussian(0.1), ConformalFactor::unit(),
                                     m, cplx(0, 0), 12, 40);
    for (int n = 0; n <= 12; ++n) {
        REQUIRE(op->opolys_[n][n].re > 0);
        for (int k = n + 1; k <= 12; ++k)
            REQUIRE(static_cast<double>(abs_mp(op->opolys_[n][k])) < 1e-35);
    }
}

TEST_CASE("precision scaling and the oracle handle", "[oracle]") {
    int m = 8, n_max = 24;
    Potential p = Potential::perturbed_gaussian(0.1);
    auto h40 = make_oracle(p, ConformalFactor::unit(), m, cplx(0, 0), n_max, 40, true);
    REQUIRE(h40.ortho_certificate < 1e-25);
    auto h100 = make_oracle(p, ConformalFactor::unit(), m, cplx(0, 0), n_max, 100);
    // doubling the working precision moves the reported values below the
    // 40-digit quadrature tail certificate
    for (int n : {0, 7, 15}) {
        cplx z(0.4, 0.2);
        cplx a = h40.log_root(n, z), b = h100.log_root(n, z);
        REQUIRE(std::abs(a - b) < 1e-12);
    }
    REQUIRE_THROWS_AS(make_oracle(p, ConformalFactor::unit(), m, cplx(0, 0), n_max, 200),
                      validation_error);
}
