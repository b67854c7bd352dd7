#pragma once

#include <memory>
#include <optional>

#include "offspec/common.hpp"

namespace offspec {

// Convention used throughout: Delta = d/dz d/dzbar (one quarter of the classical
// Laplacian) and dA is normalized so the unit disk has unit area.
enum class PotentialKind {
    gaussian,            // |z|^2
    gaussian_log,        // |z|^2 - c*log(a + |z|^2), params {a, c}
    perturbed_gaussian,  // |z|^2 + eps*Re z^2, params {eps}
    singular,            // 1/2 |z|^-2 - 1/8 Re z^-2 + log|z|
    custom_table,        // tabulated values, finite differences, no analyticity
    perturbed_wrapper,   // base - tau*log|z - w0|
    inverted_wrapper,    // base(1/z) + tau*log|z|
};

inline const char* to_string(PotentialKind k) {
    switch (k) {
        case PotentialKind::gaussian: return "gaussian";
        case PotentialKind::gaussian_log: return "gaussian-log";
        case PotentialKind::perturbed_gaussian: return "perturbed-gaussian";
        case PotentialKind::singular: return "singular";
        case PotentialKind::custom_table: return "custom";
        case PotentialKind::perturbed_wrapper: return "perturbed";
        case PotentialKind::inverted_wrapper: return "inverted";
    }
    return "?";
}

struct CustomTable {
    cplx center;
    double half_width = 0;
    int n = 0;                  // points per side
    std::vector<double> values; // row-major
    double smooth_radius = 0;   // declared smoothness radius about center
};

// Admissible potential with analytic derivative data. Derivatives are supplied
// in closed form per kind; finite differences appear only in the test oracles.
class Potential {
public:
    Potential() : kind_(PotentialKind::gaussian) {}

    static Potential gaussian() { return Potential(PotentialKind::gaussian, {}); }
    static Potential gaussian_log(double a, double c = 1.0) {
        if (a <= 0) throw validation_error("gaussian-log: parameter a must be positive");
        return Potential(PotentialKind::gaussian_log, {a, c});
    }
    static Potential perturbed_gaussian(double eps) {
        return Potential(PotentialKind::perturbed_gaussian, {eps});
    }
    static Potential singular() { return Potential(PotentialKind::singular, {}); }
    static Potential custom(CustomTable t) {
        Potential p(PotentialKind::custom_table, {});
        p.table_ = std::make_shared<CustomTable>(std::move(t));
        return p;
    }
    static Potential from_name(const std::string& name, const std::vector<double>& params) {
        if (name == "gaussian") return gaussian();
        if (name == "gaussian-log")
            return gaussian_log(params.size() > 0 ? params[0] : 0.04,
                                params.size() > 1 ? params[1] : 1.0);
        if (name == "perturbed-gaussian")
            return perturbed_gaussian(params.empty() ? 0.1 : params[0]);
        if (name == "singular") return singular();
        throw validation_error("unknown potential kind: " + name);
    }

    PotentialKind kind() const { return kind_; }
    const std::vector<double>& params() const { return params_; }
    bool analytic() const { return kind_ != PotentialKind::custom_table; }
    // wrapper internals, used by the extended-precision evaluator
    const Potential* base() const { return base_.get(); }
    double wrapper_tau() const { return tau_; }
    cplx wrapper_w0() const { return w0_; }

    // Q(z); singularity hits raise a domain error.
    double eval(cplx z) const {
        switch (kind_) {
            case PotentialKind::gaussian: return std::norm(z);
            case PotentialKind::gaussian_log:
                return std::norm(z) - params_[1] * std::log(params_[0] + std::norm(z));
            case PotentialKind::perturbed_gaussian:
                return std::norm(z) + params_[0] * (z * z).real();
            case PotentialKind::singular: {
                check_nonzero(z);
                cplx iz2 = 1.0 / (z * z);
                return 0.5 / std::norm(z) - 0.125 * iz2.real() + std::log(std::abs(z));
            }
            case PotentialKind::custom_table: return table_eval(z);
            case PotentialKind::perturbed_wrapper: {
                cplx d = z - w0_;
                if (std::abs(d) == 0.0)
                    throw validation_error("potential: singularity hit at the root point");
                return base_->eval(z) - tau_ * std::log(std::abs(d));
            }
            case PotentialKind::inverted_wrapper: {
                check_nonzero(z);
                return base_->eval(1.0 / z) + tau_ * std::log(std::abs(z));
            }
        }
        throw validation_error("potential: bad kind");
    }

    // dQ/dz (Wirtinger derivative).
    cplx dz(cplx z) const {
        switch (kind_) {
            case PotentialKind::gaussian: return std::conj(z);
            case PotentialKind::gaussian_log: {
                double a = params_[0], c = params_[1];
                return std::conj(z) * (1.0 - c / (a + std::norm(z)));
            }
            case PotentialKind::perturbed_gaussian: return std::conj(z) + params_[0] * z;
            case PotentialKind::singular: {
                check_nonzero(z);
                cplx z2 = z * z;
                return -0.5 / (z2 * std::conj(z)) + 0.125 / (z2 * z) + 0.5 / z;
            }
            case PotentialKind::custom_table: return table_dz(z);
            case PotentialKind::perturbed_wrapper: {
                cplx d = z - w0_;
                if (std::abs(d) == 0.0) throw validation_error("potential: singularity hit");
                return base_->dz(z) - 0.5 * tau_ / d;
            }
            case PotentialKind::inverted_wrapper: {
                check_nonzero(z);
                return -base_->dz(1.0 / z) / (z * z) + 0.5 * tau_ / z;
            }
        }
        throw validation_error("potential: bad kind");
    }

    // Delta Q = d/dz d/dzbar Q.
    double lap(cplx z) const {
        switch (kind_) {
            case PotentialKind::gaussian: return 1.0;
            case PotentialKind::gaussian_log: {
                double a = params_[0], c = params_[1];
                return 1.0 - c * a / sqr(a + std::norm(z));
            }
            case PotentialKind::perturbed_gaussian: return 1.0;
            case PotentialKind::singular: {
                check_nonzero(z);
                return 0.5 / sqr(std::norm(z));
            }
            case PotentialKind::custom_table: return table_lap(z);
            case PotentialKind::perturbed_wrapper: return base_->lap(z);
            case PotentialKind::inverted_wrapper: {
                check_nonzero(z);
                return base_->lap(1.0 / z) / sqr(std::norm(z));
            }
        }
        throw validation_error("potential: bad kind");
    }

    std::vector<cplx> singularities() const {
        switch (kind_) {
            case PotentialKind::singular: return {cplx(0.0)};
            case PotentialKind::perturbed_wrapper: {
                auto s = base_->singularities();
                s.push_back(w0_);
                return s;
            }
            case PotentialKind::inverted_wrapper: {
                std::vector<cplx> s{cplx(0.0)};
                for (cplx p : base_->singularities())
                    if (std::abs(p) > 0) s.push_back(1.0 / p);
                return s;
            }
            default: return {};
        }
    }

    // Growth constant liminf Q/log|z| estimated on rings of large radii.
    double tau_growth() const {
        double t = std::numeric_limits<double>::infinity();
        for (double R : {1.0e3, 1.0e4}) {
            for (int a = 0; a < 64; ++a) {
                cplx z = std::polar(R, 2.0 * kPi * a / 64.0);
                t = std::min(t, eval(z) / std::log(R));
            }
        }
        return t;
    }

    // Q - tau*log|z - w0|; the full droplet of the result is S_{tau,w0}.
    Potential perturbed(double tau, cplx w0) const {
        if (tau < 0) throw validation_error("perturbed potential: tau must be >= 0");
        if (tau > 0 && tau >= tau_growth())
            throw validation_error("perturbed potential: tau >= tau_Q violates growth");
        if (tau == 0.0) return *this;
        Potential p(PotentialKind::perturbed_wrapper, {});
        p.base_ = std::make_shared<Potential>(*this);
        p.tau_ = tau;
        p.w0_ = w0;
        return p;
    }

    // Q(1/z) + tau*log|z|; carries the orthogonal-polynomial problem of degree
    // n = tau*m to a depth-0 root-function problem at the origin.
    Potential inverted(double tau) const {
        Potential p(PotentialKind::inverted_wrapper, {});
        p.base_ = std::make_shared<Potential>(*this);
        p.tau_ = tau;
        return p;
    }

    std::string describe() const {
        std::string s = to_string(kind_);
        for (double v : params_) s += " " + fmt_g(v);
        if (base_) s += " [base: " + base_->describe() + " tau=" + fmt_g(tau_) +
                        " w0=" + fmt_g(w0_.real()) + "+" + fmt_g(w0_.imag()) + "i]";
        return s;
    }

private:
    Potential(PotentialKind k, std::vector<double> p) : kind_(k), params_(std::move(p)) {}

    static void check_nonzero(cplx z) {
        if (std::abs(z) == 0.0) throw validation_error("potential: singularity hit at 0");
    }

    double table_eval(cplx z) const {
        const auto& t = *table_;
        double x = (z.real() - t.center.real() + t.half_width) / (2 * t.half_width) * (t.n - 1);
        double y = (z.imag() - t.center.imag() + t.half_width) / (2 * t.half_width) * (t.n - 1);
        int i = static_cast<int>(std::floor(x)), j = static_cast<int>(std::floor(y));
        if (i < 0 || j < 0 || i + 1 >= t.n || j + 1 >= t.n)
            throw validation_error("custom potential: point outside table");
        double fx = x - i, fy = y - j;
        auto v = [&](int a, int b) { return t.values[b * t.n + a]; };
        return (1 - fx) * (1 - fy) * v(i, j) + fx * (1 - fy) * v(i + 1, j) +
               (1 - fx) * fy * v(i, j + 1) + fx * fy * v(i + 1, j + 1);
    }
    cplx table_dz(cplx z) const {
        double h = table_->half_width / table_->n;
        double qx = (table_eval(z + h) - table_eval(z - h)) / (2 * h);
        double qy = (table_eval(z + cplx(0, h)) - table_eval(z - cplx(0, h))) / (2 * h);
        return 0.5 * cplx(qx, -qy);
    }
    double table_lap(cplx z) const {
        double h = table_->half_width / table_->n;
        double s = table_eval(z + h) + table_eval(z - h) + table_eval(z + cplx(0, h)) +
                   table_eval(z - cplx(0, h)) - 4.0 * table_eval(z);
        return 0.25 * s / (h * h);
    }

    PotentialKind kind_;
    std::vector<double> params_;
    std::shared_ptr<const Potential> base_;
    std::shared_ptr<const CustomTable> table_;
    double tau_ = 0.0;
    cplx w0_{0.0, 0.0};
};

enum class FactorKind {
    unit,         // V == 1
    spherical,    // (1+|z|^2)^{-2}
    exponential,  // e^{2 Re p(z)}, p a polynomial with real coefficients (harmonic exponent)
    inverted,     // V(1/z) |z|^{-4}
};

// Conformal factor V for the general area form e^{-2mQ} V dA.
class ConformalFactor {
public:
    ConformalFactor() : kind_(FactorKind::unit) {}

    static ConformalFactor unit() { return ConformalFactor(); }
    static ConformalFactor spherical() {
        ConformalFactor f;
        f.kind_ = FactorKind::spherical;
        return f;
    }
    static ConformalFactor exponential(std::vector<double> poly_coefs) {
        ConformalFactor f;
        f.kind_ = FactorKind::exponential;
        f.params_ = std::move(poly_coefs);
        return f;
    }
    static ConformalFactor from_name(const std::string& name, const std::vector<double>& params) {
        if (name == "unit") return unit();
        if (name == "spherical") return spherical();
        if (name == "exponential") return exponential(params);
        throw validation_error("unknown conformal factor kind: " + name);
    }

    FactorKind kind() const { return kind_; }
    bool is_unit() const { return kind_ == FactorKind::unit; }
    const std::vector<double>& params() const { return params_; }
    const ConformalFactor* base() const { return base_.get(); }

    double eval(cplx z) const {
        switch (kind_) {
            case FactorKind::unit: return 1.0;
            case FactorKind::spherical: return 1.0 / sqr(1.0 + std::norm(z));
            case FactorKind::exponential: return std::exp(2.0 * re_poly(z));
            case FactorKind::inverted: {
                if (std::abs(z) == 0.0) throw validation_error("factor: singularity hit at 0");
                return base_->eval(1.0 / z) / sqr(std::norm(z));
            }
        }
        throw validation_error("factor: bad kind");
    }
    double log_eval(cplx z) const { return std::log(eval(z)); }
    double lap_log(cplx z) const {
        switch (kind_) {
            case FactorKind::unit: return 0.0;
            case FactorKind::spherical: return -2.0 / sqr(1.0 + std::norm(z));
            case FactorKind::exponential: return 0.0;  // harmonic exponent
            case FactorKind::inverted: return base_->lap_log(1.0 / z) / sqr(std::norm(z));
        }
        throw validation_error("factor: bad kind");
    }

    // polynomial growth/decay exponent N of eq-polgrowthV
    int growth_exponent() const {
        switch (kind_) {
            case FactorKind::unit: return 0;
            case FactorKind::spherical: return 2;
            case FactorKind::exponential: return 0;  // harmonic polynomial exponent: no power bound; N unused
            case FactorKind::inverted: return base_->growth_exponent() + 2;
        }
        return 0;
    }

    ConformalFactor inverted_factor() const {
        ConformalFactor f;
        f.kind_ = FactorKind::inverted;
        f.base_ = std::make_shared<ConformalFactor>(*this);
        return f;
    }

    std::string describe() const {
        switch (kind_) {
            case FactorKind::unit: return "unit";
            case FactorKind::spherical: return "spherical";
            case FactorKind::exponential: {
                std::string s = "exponential";
                for (double v : params_) s += " " + fmt_g(v);
                return s;
            }
            case FactorKind::inverted: return "inverted[" + base_->describe() + "]";
        }
        return "?";
    }

private:
    double re_poly(cplx z) const {
        cplx acc(0.0);
        for (int k = static_cast<int>(params_.size()) - 1; k >= 0; --k)
            acc = acc * z + params_[k];
        return acc.real();
    }

    FactorKind kind_;
    std::vector<double> params_;
    std::shared_ptr<const ConformalFactor> base_;
};

}  // namespace offspec
