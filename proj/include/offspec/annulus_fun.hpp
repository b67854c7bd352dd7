#pragma once

#include "offspec/bijet.hpp"

namespace offspec {

// Real-valued function on an annulus around T in radial-offset form
//   F(r e^{i theta}) = sum_{p=0}^{P} (r-1)^p A_p(e^{i theta}),
// with trigonometric-polynomial angular coefficients A_p. This is the jet of the
// weight at the circle that the foliation flow consumes.
class AnnulusFun {
public:
    AnnulusFun() = default;
    AnnulusFun(int P, int K) : radial_(P + 1, CircleFun(K)) {}

    int P() const { return static_cast<int>(radial_.size()) - 1; }
    int K() const { return radial_.empty() ? 0 : radial_[0].K(); }
    const CircleFun& A(int p) const { return radial_[p]; }
    CircleFun& A(int p) { return radial_[p]; }

    double r_lo = 0.0, r_hi = 0.0;  // validity window of the radial expansion

    bool in_validity(double r) const { return r > r_lo && r < r_hi; }

    double eval(cplx u) const {
        double r = std::abs(u);
        if (!in_validity(r)) throw validation_error("AnnulusFun::eval: outside validity annulus");
        cplx dir = u / r;
        double dr = r - 1.0;
        double acc = 0.0, pw = 1.0;
        for (int p = 0; p <= P(); ++p) {
            acc += pw * radial_[p].eval(dir).real();
            pw *= dr;
        }
        return acc;
    }

    // Fit from point samples F(r_i e^{i theta_a}) on concentric circles: angular FFT
    // per radius, then a least-squares radial-offset Vandermonde solve per mode
    // (scaled variable + Householder QR; the raw monomial normal equations lose
    // half the digits at P ~ 12).
    static AnnulusFun fit(const std::function<double(cplx)>& F, const std::vector<double>& radii,
                          int P, int K, int n_angles = 0) {
        int nr = static_cast<int>(radii.size());
        if (nr < P + 1) throw validation_error("AnnulusFun::fit: need at least P+1 radii");
        int M = n_angles ? n_angles : next_pow2(std::max(4 * K + 4, 64));
        std::vector<std::vector<cplx>> modes(nr);
        parallel_for(nr, [&](int i) {
            std::vector<cplx> vals(M);
            for (int a = 0; a < M; ++a) {
                double th = 2.0 * kPi * a / M;
                vals[a] = cplx(F(std::polar(radii[i], th)), 0.0);
            }
            auto c = dft_forward(std::move(vals));
            modes[i].resize(2 * K + 1);
            for (int k = -K; k <= K; ++k) modes[i][k + K] = c[(k % M + M) % M];
        });
        double scale = 0.0;
        for (double r : radii) scale = std::max(scale, std::abs(r - 1.0));
        if (scale == 0.0) throw validation_error("AnnulusFun::fit: radii coincide with T");
        std::vector<std::vector<double>> V(nr, std::vector<double>(P + 1));
        for (int i = 0; i < nr; ++i) {
            double x = (radii[i] - 1.0) / scale, pw = 1.0;
            for (int p = 0; p <= P; ++p) {
                V[i][p] = pw;
                pw *= x;
            }
        }
        // Householder QR of V, reflectors stored in-place
        std::vector<double> beta(P + 1, 0.0);
        for (int c = 0; c <= P; ++c) {
            double nrm = 0;
            for (int i = c; i < nr; ++i) nrm += V[i][c] * V[i][c];
            nrm = std::sqrt(nrm);
            if (nrm == 0) throw validation_error("AnnulusFun::fit: rank-deficient Vandermonde");
            double alpha = (V[c][c] >= 0) ? -nrm : nrm;
            double v0 = V[c][c] - alpha;
            V[c][c] = alpha;
            std::vector<double> hv(nr - c);
            hv[0] = v0;
            for (int i = c + 1; i < nr; ++i) hv[i - c] = V[i][c];
            double hn = v0 * v0;
            for (int i = c + 1; i < nr; ++i) hn += V[i][c] * V[i][c];
            beta[c] = (hn == 0) ? 0.0 : 2.0 / hn;
            for (int j = c + 1; j <= P; ++j) {
                double dot = v0 * V[c][j];
                for (int i = c + 1; i < nr; ++i) dot += V[i][c] * V[i][j];
                dot *= beta[c];
                V[c][j] -= dot * v0;
                for (int i = c + 1; i < nr; ++i) V[i][j] -= dot * V[i][c];
            }
            for (int i = c + 1; i < nr; ++i) {
                // keep the reflector below the diagonal, scaled by v0
                V[i][c] = hv[i - c] / (v0 == 0 ? 1.0 : v0);
            }
            beta[c] *= v0 * v0;  // adjusted for the normalized reflector
        }
        auto qr_solve = [&](std::vector<cplx> rhs) {
            for (int c = 0; c <= P; ++c) {
                cplx dot = rhs[c];
                for (int i = c + 1; i < nr; ++i) dot += V[i][c] * rhs[i];
                dot *= beta[c];
                rhs[c] -= dot;
                for (int i = c + 1; i < nr; ++i) rhs[i] -= dot * V[i][c];
            }
            std::vector<cplx> x(P + 1);
            for (int c = P; c >= 0; --c) {
                cplx s = rhs[c];
                for (int j = c + 1; j <= P; ++j) s -= V[c][j] * x[j];
                x[c] = s / V[c][c];
            }
            return x;
        };
        AnnulusFun out(P, K);
        for (int k = -K; k <= K; ++k) {
            std::vector<cplx> rhs(nr);
            for (int i = 0; i < nr; ++i) rhs[i] = modes[i][k + K];
            auto sol = qr_solve(std::move(rhs));
            double pw = 1.0;
            for (int p = 0; p <= P; ++p) {
                out.radial_[p].set(k, sol[p] / pw);
                pw *= scale;
            }
        }
        out.r_lo = radii.front();
        out.r_hi = radii.back();
        for (double r : radii) {
            out.r_lo = std::min(out.r_lo, r);
            out.r_hi = std::max(out.r_hi, r);
        }
        return out;
    }

    // Quarter-Laplacian on T for a quadratically flat function: A_2 = 2*Delta F there.
    CircleFun quarter_laplacian_on_circle() const {
        if (P() < 2) throw validation_error("AnnulusFun: radial order too low for curvature");
        CircleFun d = radial_[2];
        d *= 0.5;
        return d.real_part();
    }

    double flatness_residual() const {
        return std::max(radial_[0].max_abs_coef(), P() >= 1 ? radial_[1].max_abs_coef() : 0.0);
    }
    void enforce_flat() {
        radial_[0] = CircleFun(K());
        if (P() >= 1) radial_[1] = CircleFun(K());
    }

    // Jet of F(psi_{s,t}(zeta)) for a map jet psi based at the identity.
    // Expands along |psi| - 1 and the angular direction psi/|psi|.
    BiJet compose_jet(const BiJet& psi, double* tail = nullptr) const {
        int N = psi.order(), K2 = psi.K();
        BiJet mod2 = jet_mul(psi, psi.conj_circle(), tail);  // |psi|^2, leading term 1
        BiJet x = mod2 - BiJet::constant(cplx(1.0), N, K2);
        BiJet rjet = jet_binomial(x, 0.5, tail);             // |psi|
        BiJet rm1 = rjet - BiJet::constant(cplx(1.0), N, K2);
        BiJet dir = jet_mul(psi, jet_inv(rjet, tail), tail); // psi/|psi|, base point zeta
        BiJet acc(N, K2);
        BiJet pw = BiJet::constant(cplx(1.0), N, K2);
        for (int p = 0; p <= std::min(P(), N); ++p) {
            if (p > 0) pw = jet_mul(pw, rm1, tail);
            acc += jet_mul(compose_holo(radial_[p].resized(K2), dir, tail), pw, tail);
        }
        return acc;
    }

private:
    std::vector<CircleFun> radial_;
};

}  // namespace offspec
