#pragma once

#include <memory>

#include "offspec/quadrature.hpp"

namespace offspec {

// Ground truth by brute force: Gram matrices of shifted monomials (z-w0)^k under
// e^{-2mQ} V dA in extended precision, Cholesky orthonormalization, and the
// resulting root functions / partial kernels / orthogonal polynomials.
template <class R>
class OracleSet {
public:
    Potential pot;
    ConformalFactor V;
    int m = 1;
    cplx w0{0.0, 0.0};
    int n_max = 0;
    int digits = 40;
    OracleQuadrature<R> quad;

    // coefficient rows: roots_[n][k] = coefficient of (z-w0)^k in k_{m,n,w0}
    std::vector<std::vector<MpC<R>>> roots_;
    // ascending (orthogonal polynomial) rows, built together with the roots
    std::vector<std::vector<MpC<R>>> opolys_;
    std::vector<std::vector<MpC<R>>> gram_;
    double ortho_certificate = 0.0;  // self-test residual, see certify()

    static std::shared_ptr<OracleSet> build(const Potential& p, const ConformalFactor& V, int m,
                                            cplx w0, int n_max, int digits) {
        auto o = std::make_shared<OracleSet>();
        o->pot = p;
        o->V = V;
        o->m = m;
        o->w0 = w0;
        o->n_max = n_max;
        o->digits = digits;
        o->quad = OracleQuadrature<R>::build(p, V, m, w0, n_max, digits);
        o->gram_ = o->gram(o->quad);
        o->factor(o->gram_);
        return o;
    }

    // weighted inner product of coefficient vectors against the stored Gram
    MpC<R> inner(const std::vector<MpC<R>>& f, const std::vector<MpC<R>>& g) const {
        return inner(f, g, gram_);
    }

    // Gram matrix of (z-w0)^j against (z-w0)^k via the polar scheme:
    // G_{jk} = 2 sum_i w_i r_i^{j+k+1} A_i(j-k),  A_i(d) = (1/M) sum_a g(i,a) e^{i d theta_a}.
    std::vector<std::vector<MpC<R>>> gram(const OracleQuadrature<R>& q) const {
        int nr = static_cast<int>(q.r.size());
        int D = n_max;
        MpC<R> w0mp{R(w0.real()), R(w0.imag())};
        // angular transforms per radius
        std::vector<std::vector<MpC<R>>> A(nr, std::vector<MpC<R>>(D + 1));
        parallel_for(nr, [&](int i) {
            std::vector<R> g(q.M);
            for (int a = 0; a < q.M; ++a) {
                MpC<R> z = w0mp + q.r[i] * q.unit[a];
                R e = -2 * R(m) * eval_Q_mp<R>(pot, z);
                R gv;
                if (e < R(-3000000))
                    gv = R(0);
                else
                    gv = exp(e) * eval_V_mp<R>(V, z);
                g[a] = gv;
            }
            // A_i(d) for d = 0..D by phase recursion
            std::vector<MpC<R>> ph(q.M, MpC<R>(R(1), R(0)));
            for (int d = 0; d <= D; ++d) {
                MpC<R> acc;
                for (int a = 0; a < q.M; ++a) {
                    acc += g[a] * ph[a];
                    if (d < D) ph[a] = ph[a] * q.unit[a];
                }
                A[i][d] = acc / R(q.M);
            }
        });
        // radial power table
        std::vector<std::vector<R>> rp(nr, std::vector<R>(2 * n_max + 2));
        for (int i = 0; i < nr; ++i) {
            rp[i][0] = R(1);
            for (int p2 = 1; p2 <= 2 * n_max + 1; ++p2) rp[i][p2] = rp[i][p2 - 1] * q.r[i];
        }
        // <e_j, e_k> = 2 sum_i w_i r_i^{j+k+1} A_i(j-k) for j >= k
        std::vector<std::vector<MpC<R>>> G(n_max + 1, std::vector<MpC<R>>(n_max + 1));
        parallel_for(n_max + 1, [&](int j) {
            for (int k = 0; k <= j; ++k) {
                MpC<R> acc;
                for (int i = 0; i < nr; ++i) acc += (q.w[i] * rp[i][j + k + 1]) * A[i][j - k];
                acc = R(2) * acc;
                G[j][k] = acc;
                G[k][j] = conj(acc);
            }
        });
        return G;
    }

    // weighted inner product of coefficient vectors (in the shifted-monomial basis)
    MpC<R> inner(const std::vector<MpC<R>>& f, const std::vector<MpC<R>>& g,
                 const std::vector<std::vector<MpC<R>>>& G) const {
        MpC<R> acc;
        for (std::size_t j = 0; j < f.size(); ++j)
            for (std::size_t k = 0; k < g.size(); ++k) acc += f[j] * conj(g[k]) * G[j][k];
        return acc;
    }

    // Cholesky in descending order gives the root functions (unit vectors of
    // A^2_n ominus A^2_{n+1} with positive leading coefficient); ascending order
    // gives the orthogonal polynomials.
    void factor(const std::vector<std::vector<MpC<R>>>& G) {
        int N = n_max + 1;
        auto run = [&](bool descending) {
            std::vector<std::vector<MpC<R>>> L(N, std::vector<MpC<R>>(N));
            auto g = [&](int a, int b) -> const MpC<R>& {
                return descending ? G[n_max - a][n_max - b] : G[a][b];
            };
            for (int a = 0; a < N; ++a) {
                for (int b = 0; b <= a; ++b) {
                    MpC<R> s = g(a, b);
                    for (int k = 0; k < b; ++k) s -= L[a][k] * conj(L[b][k]);
                    if (a == b) {
                        if (s.re <= 0)
                            throw tolerance_error(
                                "oracle: Gram not numerically positive definite; increase the "
                                "working precision");
                        L[a][a] = MpC<R>(sqrt(s.re), R(0));
                    } else {
                        L[a][b] = s / L[b][b];
                    }
                }
            }
            // rows of L^{-1} by forward substitution
            std::vector<std::vector<MpC<R>>> Li(N, std::vector<MpC<R>>(N));
            for (int a = 0; a < N; ++a) {
                Li[a][a] = MpC<R>(R(1), R(0)) / L[a][a];
                for (int b = a - 1; b >= 0; --b) {
                    MpC<R> s;
                    for (int k = b + 1; k <= a; ++k) s -= Li[a][k] * L[k][b];
                    Li[a][b] = s / L[b][b];
                }
            }
            std::vector<std::vector<MpC<R>>> rows(N, std::vector<MpC<R>>(N));
            for (int a = 0; a < N; ++a)
                for (int b = 0; b <= a; ++b) {
                    int orig = descending ? n_max - b : b;
                    rows[descending ? n_max - a : a][orig] = Li[a][b];
                }
            return rows;
        };
        roots_ = run(true);
        opolys_ = run(false);
    }

    // Orthonormality certificate from an independent, finer quadrature on probe pairs.
    double certify() {
        OracleQuadrature<R> fine = OracleQuadrature<R>::build(
            pot, V, m, w0, n_max, digits, static_cast<int>(quad.r.size() * 7 / 5), quad.M * 2);
        auto Gf = gram(fine);
        double worst = 0.0;
        std::vector<std::pair<int, int>> probes = {
            {0, 0}, {n_max, n_max}, {0, 1}, {n_max / 2, n_max / 2}, {n_max / 2, n_max / 2 + 1}};
        for (auto [a, b] : probes) {
            MpC<R> v = inner(roots_[a], roots_[b], Gf);
            double expect = (a == b) ? 1.0 : 0.0;
            worst = std::max(worst,
                             std::abs(static_cast<double>(v.re) - expect) +
                                 std::abs(static_cast<double>(v.im)));
        }
        ortho_certificate = worst;
        return worst;
    }

    // k_{m,n,w0}(z) in extended precision
    MpC<R> eval_root(int n, cplx z) const {
        MpC<R> d{R(z.real() - w0.real()), R(z.imag() - w0.imag())};
        MpC<R> acc;
        for (int k = n_max; k >= 0; --k) acc = acc * d + roots_[n][k];
        return acc;
    }
    MpC<R> eval_opoly(int n, cplx z) const {
        MpC<R> zz{R(z.real()), R(z.imag())};
        MpC<R> acc;
        for (int k = n_max; k >= 0; --k) acc = acc * zz + opolys_[n][k];
        return acc;
    }

    // partial Bergman kernel K_{m,n,w0}(z,w) = sum_{n'>=n} k_{n'}(z) conj(k_{n'}(w));
    // requires a certified truncation tail.
    MpC<R> partial_kernel(int n, cplx z, cplx w, double tail_tol = 1e-10,
                          bool certify_tail = true) const {
        MpC<R> acc;
        R last{0}, prev{0};
        for (int np = n; np <= n_max; ++np) {
            MpC<R> t = eval_root(np, z) * conj(eval_root(np, w));
            acc += t;
            prev = last;
            last = abs_mp(t);
        }
        // geometric tail estimate from the top two terms
        R scale = abs_mp(acc);
        if (certify_tail && scale > 0 && last > 0 && n < n_max) {
            double ratio = (prev > 0) ? static_cast<double>(last / prev)
                                      : 1.0;
            if (ratio >= 0.9)
                throw tolerance_error("partial_kernel: terms not decaying at n_max; raise n_max");
            double tail = static_cast<double>(last / scale) * ratio / (1.0 - ratio);
            if (tail > tail_tol)
                throw tolerance_error(
                    "partial_kernel: truncation tail above tolerance; raise n_max");
        }
        return acc;
    }

    // rho_{m,n,w0}(z) = m^{-1} K(z,z) e^{-2mQ(z)}
    double density(int n, cplx z) const {
        MpC<R> zz{R(z.real()), R(z.imag())};
        R acc{0};
        for (int np = n; np <= n_max; ++np) acc += norm2(eval_root(np, z));
        if (acc == 0) return 0.0;
        R lg = log(acc) - 2 * R(m) * eval_Q_mp<R>(pot, zz) - log(R(m));
        return static_cast<double>(exp(lg));
    }

    // log k_{m,n,w0}(z) as double complex
    cplx log_root(int n, cplx z) const { return eval_root(n, z).log_to_cplx(); }
    cplx log_opoly(int n, cplx z) const { return eval_opoly(n, z).log_to_cplx(); }

    // leading coefficient (the n-th Taylor coefficient at w0)
    cplx leading(int n) const { return roots_[n][n].to_cplx(); }
    cplx leading_log(int n) const { return roots_[n][n].log_to_cplx(); }
};

// Type-erased handle for the comparison layer (double log-values only).
struct OracleHandle {
    int m = 0;
    int n_max = 0;
    int digits = 40;
    cplx w0{0.0, 0.0};
    double ortho_certificate = 0.0;
    std::function<cplx(int, cplx)> log_root;       // log k_{m,n,w0}(z)
    std::function<cplx(int, cplx)> log_opoly;      // log P_{m,n}(z)
    std::function<cplx(int, cplx, cplx)> kernel;   // K_{m,n,w0}(z,w) as double
    std::function<double(int, cplx)> density;      // rho_{m,n,w0}(z)
    std::function<cplx(int)> leading_log;          // log of the n-th derivative base
};

inline OracleHandle make_oracle(const Potential& p, const ConformalFactor& V, int m, cplx w0,
                                int n_max, int digits, bool certify = false) {
    OracleHandle h;
    h.m = m;
    h.n_max = n_max;
    h.w0 = w0;
    auto wire = [&](auto set) {
        if (certify) set->certify();
        h.digits = set->digits;
        h.ortho_certificate = set->ortho_certificate;
        h.log_root = [set](int n, cplx z) { return set->log_root(n, z); };
        h.log_opoly = [set](int n, cplx z) { return set->log_opoly(n, z); };
        h.kernel = [set](int n, cplx z, cplx w) { return set->partial_kernel(n, z, w).to_cplx(); };
        h.density = [set](int n, cplx z) { return set->density(n, z); };
        h.leading_log = [set](int n) { return set->leading_log(n); };
    };
    if (digits <= 40)
        wire(OracleSet<mp40>::build(p, V, m, w0, n_max, 40));
    else if (digits <= 100)
        wire(OracleSet<mp100>::build(p, V, m, w0, n_max, 100));
    else
        throw validation_error("oracle: precision levels available are 40 and 100 digits");
    return h;
}

// Defect report of Def. q-pol-orth for a candidate family member.
struct ApproxRootReport {
    double orth_defect = 0.0;   // (i)  max_{n'>n} |<chi0 F, k_{n'}>|
    double norm_defect = 0.0;   // (ii) | ||chi0 F||^2 - 1 |
    double phase_defect = 0.0;  // (iii) |Im a / Re a|
};

// candidate_log(z) = log F(z); chi0 smooth cutoff; leading = a_{m,n,w0}.
inline ApproxRootReport verify_approx_root(const std::function<cplx(cplx)>& candidate_log,
                                           const std::function<double(cplx)>& chi0,
                                           const OracleHandle& oracle, const Potential& pot,
                                           const ConformalFactor& V, int m, int n, cplx leading,
                                           const PlaneQuadrature& quad, int n_probe = 24) {
    ApproxRootReport rep;
    int hi = std::min(oracle.n_max, n + n_probe);
    for (int np = n + 1; np <= hi; ++np) {
        cplx val = quad.integrate([&](cplx z) {
            double c = chi0(z);
            if (c == 0.0) return cplx(0.0);
            cplx lf = candidate_log(z);
            cplx lg = oracle.log_root(np, z);
            double ex = lf.real() + lg.real() - 2.0 * m * pot.eval(z) + std::log(V.eval(z));
            if (ex < -700.0) return cplx(0.0);
            return c * std::exp(ex) * std::exp(cplx(0.0, lf.imag() - lg.imag()));
        });
        rep.orth_defect = std::max(rep.orth_defect, std::abs(val));
    }
    double nrm = quad.integrate_real([&](cplx z) {
        double c = chi0(z);
        if (c == 0.0) return 0.0;
        cplx lf = candidate_log(z);
        double ex = 2.0 * lf.real() - 2.0 * m * pot.eval(z) + std::log(V.eval(z));
        if (ex < -700.0) return 0.0;
        return c * c * std::exp(ex);
    });
    rep.norm_defect = std::abs(nrm - 1.0);
    rep.phase_defect = std::abs(leading.imag() / leading.real());
    return rep;
}

}  // namespace offspec
