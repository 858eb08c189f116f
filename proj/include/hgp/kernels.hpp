#pragma once

// Stationary isotropic covariance functions and their spectral densities.
//
// A KernelSpec holds model structure only (families, Matern smoothness);
// all tunable numbers live in Hyperparams. A sum kernel carries one
// (magnitude, lengthscale) pair per term and a single shared noise variance.

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hgp/error.hpp"

namespace hgp {

enum class Family { SquaredExponential, Matern };

struct KernelTerm {
    Family family = Family::SquaredExponential;
    double nu = 0.0;  // Matern smoothness; unused for SE

    [[nodiscard]] std::string name() const {
        if (family == Family::SquaredExponential) return "se";
        if (nu == 0.5) return "matern12";
        if (nu == 1.5) return "matern32";
        return "matern52";
    }
    bool operator==(const KernelTerm&) const = default;
};

class KernelSpec {
public:
    KernelSpec() : terms_{KernelTerm{}} {}

    static KernelSpec squared_exponential() { return KernelSpec(std::vector<KernelTerm>{KernelTerm{}}); }

    /// Only the half-integer orders with closed-form kernels are accepted.
    static KernelSpec matern(double nu) {
        if (!(nu == 0.5 || nu == 1.5 || nu == 2.5)) {
            throw UnsupportedKernel("unsupported Matern smoothness nu=" + std::to_string(nu) +
                                    " (closed forms exist for 0.5, 1.5, 2.5)");
        }
        return KernelSpec(std::vector<KernelTerm>{KernelTerm{Family::Matern, nu}});
    }

    /// Nested sums are flattened.
    static KernelSpec sum(const std::vector<KernelSpec>& parts) {
        if (parts.empty()) throw InvalidArgument("sum kernel needs at least one term");
        std::vector<KernelTerm> flat;
        for (const auto& p : parts) flat.insert(flat.end(), p.terms_.begin(), p.terms_.end());
        return KernelSpec(std::move(flat));
    }

    [[nodiscard]] std::span<const KernelTerm> terms() const { return terms_; }
    [[nodiscard]] std::size_t size() const { return terms_.size(); }
    [[nodiscard]] bool is_sum() const { return terms_.size() > 1; }

    [[nodiscard]] std::string name() const {
        if (!is_sum()) return terms_.front().name();
        std::string out = "sum(";
        for (std::size_t i = 0; i < terms_.size(); ++i) {
            if (i) out += ",";
            out += terms_[i].name();
        }
        return out + ")";
    }

    bool operator==(const KernelSpec&) const = default;

private:
    explicit KernelSpec(std::vector<KernelTerm> terms) : terms_(std::move(terms)) {}
    std::vector<KernelTerm> terms_;
};

struct TermParams {
    double magnitude = 1.0;    // sigma^2
    double lengthscale = 1.0;  // ell
    bool operator==(const TermParams&) const = default;
};

struct Hyperparams {
    std::vector<TermParams> terms{TermParams{}};
    double noise = 1.0;  // sigma_n^2

    static Hyperparams single(double magnitude, double lengthscale, double noise) {
        return Hyperparams{{TermParams{magnitude, lengthscale}}, noise};
    }

    [[nodiscard]] double magnitude() const { return terms.front().magnitude; }
    [[nodiscard]] double lengthscale() const { return terms.front().lengthscale; }

    /// Number of optimised coordinates: two per term plus the noise.
    [[nodiscard]] Eigen::Index dim() const { return static_cast<Eigen::Index>(2 * terms.size() + 1); }

    /// Layout: [log s2_0, log l_0, log s2_1, log l_1, ..., log noise].
    [[nodiscard]] Eigen::VectorXd to_log() const {
        Eigen::VectorXd v(dim());
        for (std::size_t t = 0; t < terms.size(); ++t) {
            v(2 * t) = std::log(terms[t].magnitude);
            v(2 * t + 1) = std::log(terms[t].lengthscale);
        }
        v(dim() - 1) = std::log(noise);
        return v;
    }

    static Hyperparams from_log(const Eigen::Ref<const Eigen::VectorXd>& v) {
        if (v.size() < 3 || v.size() % 2 == 0) throw InvalidArgument("log-hyperparameter vector has wrong length");
        Hyperparams h;
        h.terms.resize(static_cast<std::size_t>((v.size() - 1) / 2));
        for (std::size_t t = 0; t < h.terms.size(); ++t) {
            h.terms[t].magnitude = std::exp(v(2 * t));
            h.terms[t].lengthscale = std::exp(v(2 * t + 1));
        }
        h.noise = std::exp(v(v.size() - 1));
        return h;
    }

    /// Strict positivity everywhere; magnitudes may be zero only when allow_zero_magnitude is set.
    void validate(const KernelSpec& spec, bool allow_zero_magnitude = false) const {
        if (terms.size() != spec.size()) {
            throw InvalidArgument("hyperparameters have " + std::to_string(terms.size()) +
                                  " terms but the kernel has " + std::to_string(spec.size()));
        }
        for (const auto& t : terms) {
            const bool mag_ok = allow_zero_magnitude ? t.magnitude >= 0.0 : t.magnitude > 0.0;
            if (!std::isfinite(t.magnitude) || !mag_ok) throw InvalidArgument("magnitude must be finite and > 0");
            if (!std::isfinite(t.lengthscale) || !(t.lengthscale > 0.0))
                throw InvalidArgument("lengthscale must be finite and > 0");
        }
        if (!std::isfinite(noise) || !(noise > 0.0)) throw InvalidArgument("noise variance must be finite and > 0");
    }

    bool operator==(const Hyperparams&) const = default;
};

// ---------------------------------------------------------------------------
// Single-term closed forms

namespace detail {

inline void check_distance(double r) {
    if (!std::isfinite(r) || r < 0.0) throw InvalidArgument("distance must be finite and >= 0");
}

inline void check_frequency(int d, double w) {
    if (d < 1) throw InvalidArgument("input dimension must be >= 1");
    if (!std::isfinite(w) || w < 0.0) throw InvalidArgument("radial frequency must be finite and >= 0");
}

}  // namespace detail

inline double term_kernel(const KernelTerm& term, const TermParams& p, double r) {
    const double s2 = p.magnitude;
    const double q = r / p.lengthscale;
    if (term.family == Family::SquaredExponential) return s2 * std::exp(-0.5 * q * q);
    if (term.nu == 0.5) return s2 * std::exp(-q);
    if (term.nu == 1.5) {
        const double a = std::numbers::sqrt3 * q;
        return s2 * (1.0 + a) * std::exp(-a);
    }
    const double a = std::sqrt(5.0) * q;
    return s2 * (1.0 + a + a * a / 3.0) * std::exp(-a);
}

/// d k / d ell for one term.
inline double term_kernel_dlengthscale(const KernelTerm& term, const TermParams& p, double r) {
    const double s2 = p.magnitude;
    const double ell = p.lengthscale;
    const double q = r / ell;
    if (term.family == Family::SquaredExponential) return s2 * std::exp(-0.5 * q * q) * q * q / ell;
    if (term.nu == 0.5) return s2 * std::exp(-q) * q / ell;
    if (term.nu == 1.5) {
        const double a = std::numbers::sqrt3 * q;
        return s2 * a * a * std::exp(-a) / ell;
    }
    const double a = std::sqrt(5.0) * q;
    return s2 * a * a * (1.0 + a) * std::exp(-a) / (3.0 * ell);
}

/// log S(w) for one term in d dimensions. Computed in log space so that
/// far-tail values underflow gracefully instead of producing NaN.
inline double term_log_spectral_density(const KernelTerm& term, const TermParams& p, int d, double w) {
    const double ell = p.lengthscale;
    const double dd = static_cast<double>(d);
    const double log2pi = std::log(2.0 * std::numbers::pi);
    if (term.family == Family::SquaredExponential) {
        return std::log(p.magnitude) + 0.5 * dd * log2pi + dd * std::log(ell) - 0.5 * w * w * ell * ell;
    }
    const double nu = term.nu;
    const double log_c = std::log(p.magnitude) + dd * std::numbers::ln2 + 0.5 * dd * std::log(std::numbers::pi) +
                         std::lgamma(nu + 0.5 * dd) + nu * std::log(2.0 * nu) - std::lgamma(nu) -
                         2.0 * nu * std::log(ell);
    return log_c - (nu + 0.5 * dd) * std::log(2.0 * nu / (ell * ell) + w * w);
}

inline double term_spectral_density(const KernelTerm& term, const TermParams& p, int d, double w) {
    if (p.magnitude == 0.0) return 0.0;
    return std::exp(term_log_spectral_density(term, p, d, w));
}

/// d log S / d ell for one term.
inline double term_dlogS_dlengthscale(const KernelTerm& term, const TermParams& p, int d, double w) {
    const double ell = p.lengthscale;
    const double dd = static_cast<double>(d);
    if (term.family == Family::SquaredExponential) return dd / ell - w * w * ell;
    const double nu = term.nu;
    const double base = 2.0 * nu / (ell * ell) + w * w;
    return -2.0 * nu / ell + (nu + 0.5 * dd) * (4.0 * nu / (ell * ell * ell)) / base;
}

// ---------------------------------------------------------------------------
// Whole-spec operations

/// k(r); for a sum kernel the term covariances add.
inline double kernel_eval(const KernelSpec& spec, const Hyperparams& theta, double r) {
    detail::check_distance(r);
    theta.validate(spec, true);
    double k = 0.0;
    for (std::size_t t = 0; t < spec.size(); ++t) k += term_kernel(spec.terms()[t], theta.terms[t], r);
    return k;
}

/// Spectral density S(w) of the isotropic kernel in d input dimensions.
inline double spectral_density(const KernelSpec& spec, const Hyperparams& theta, int d, double w) {
    detail::check_frequency(d, w);
    theta.validate(spec, true);
    double s = 0.0;
    for (std::size_t t = 0; t < spec.size(); ++t) s += term_spectral_density(spec.terms()[t], theta.terms[t], d, w);
    return s;
}

/// Partials of S(w) with respect to each term's (magnitude, lengthscale),
/// laid out as [dS/ds2_0, dS/dl_0, dS/ds2_1, dS/dl_1, ...].
inline Eigen::VectorXd spectral_density_grad(const KernelSpec& spec, const Hyperparams& theta, int d, double w) {
    detail::check_frequency(d, w);
    theta.validate(spec);
    Eigen::VectorXd g(static_cast<Eigen::Index>(2 * spec.size()));
    for (std::size_t t = 0; t < spec.size(); ++t) {
        const auto& term = spec.terms()[t];
        const auto& p = theta.terms[t];
        const double s = term_spectral_density(term, p, d, w);
        g(2 * t) = s / p.magnitude;
        g(2 * t + 1) = s * term_dlogS_dlengthscale(term, p, d, w);
    }
    return g;
}

}  // namespace hgp
