#pragma once

// Baselines and oracles: the exact dense GP and the sparse-spectrum GP (SSGP).

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>

#include <Eigen/Core>

#include "hgp/error.hpp"
#include "hgp/kernels.hpp"
#include "hgp/linalg.hpp"
#include "hgp/log.hpp"
#include "hgp/model.hpp"

namespace hgp {

inline constexpr Eigen::Index kDenseHardLimit = 10'000;
inline constexpr Eigen::Index kDenseWarnLimit = 3'000;

/// K(i, j) = k(|a_i - b_j|).
inline Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const Hyperparams& theta,
                                     const Eigen::Ref<const Eigen::MatrixXd>& A,
                                     const Eigen::Ref<const Eigen::MatrixXd>& B) {
    theta.validate(spec, true);
    if (A.cols() != B.cols()) throw InvalidArgument("kernel_matrix: dimension mismatch");
    Eigen::MatrixXd K(A.rows(), B.rows());
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < B.rows(); ++j) {
            const double r = (A.row(i) - B.row(j)).norm();
            double k = 0.0;
            for (std::size_t t = 0; t < spec.size(); ++t) k += term_kernel(spec.terms()[t], theta.terms[t], r);
            K(i, j) = k;
        }
    }
    return K;
}

// ---------------------------------------------------------------------------
// Dense GP algebra on explicit matrices

/// 1/2 log|K + vI| + 1/2 y^T (K + vI)^-1 y + n/2 log 2 pi.
inline double dense_nlml(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, double noise) {
    Eigen::MatrixXd q = K;
    q.diagonal().array() += noise;
    const CholeskyFactor c = robust_cholesky(q, "dense K + noise I");
    const Eigen::VectorXd a = c.solve(y);
    return 0.5 * c.log_det() + 0.5 * y.dot(a) + 0.5 * static_cast<double>(y.size()) * std::log(2.0 * std::numbers::pi);
}

/// Dense posterior given K (train), Ks (test x train) and the prior test variances.
inline Prediction dense_predict(const Eigen::MatrixXd& K, const Eigen::MatrixXd& Ks, const Eigen::VectorXd& kss,
                                const Eigen::VectorXd& y, double noise) {
    Eigen::MatrixXd q = K;
    q.diagonal().array() += noise;
    const CholeskyFactor c = robust_cholesky(q, "dense K + noise I");
    Prediction out;
    out.mean = Ks * c.solve(y);
    Eigen::MatrixXd w = Ks.transpose();
    c.lower.triangularView<Eigen::Lower>().solveInPlace(w);
    out.var_latent = (kss - w.colwise().squaredNorm().transpose()).cwiseMax(0.0);
    out.var_observation = out.var_latent.array() + noise;
    return out;
}

namespace detail {
inline void check_dense_size(Eigen::Index n) {
    if (n < 1) throw InvalidArgument("full GP: need at least one training point");
    if (n > kDenseHardLimit) throw ResourceError("full GP: n=" + std::to_string(n) + " exceeds the dense limit 10000");
    if (n > kDenseWarnLimit) warn("full GP with n=" + std::to_string(n) + " is O(n^3); this will be slow");
}
}  // namespace detail

/// Exact GP predictive mean and variances.
inline Prediction full_gp_predict(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                                  const KernelSpec& spec, const Hyperparams& theta,
                                  const Eigen::Ref<const Eigen::MatrixXd>& Xstar) {
    detail::check_dense_size(X.rows());
    theta.validate(spec);
    const Eigen::MatrixXd K = kernel_matrix(spec, theta, X, X);
    const Eigen::MatrixXd Ks = kernel_matrix(spec, theta, Xstar, X);
    const Eigen::VectorXd kss = Eigen::VectorXd::Constant(Xstar.rows(), kernel_eval(spec, theta, 0.0));
    return dense_predict(K, Ks, kss, y, theta.noise);
}

inline double full_gp_nlml(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                           const KernelSpec& spec, const Hyperparams& theta) {
    detail::check_dense_size(X.rows());
    theta.validate(spec);
    return dense_nlml(kernel_matrix(spec, theta, X, X), y, theta.noise);
}

/// Exact NLML with its log-space gradient: dL/dp = 1/2 tr((Q^-1 - a a^T) dQ/dp).
inline double full_gp_nlml_with_grad(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                     const Eigen::Ref<const Eigen::VectorXd>& y, const KernelSpec& spec,
                                     const Hyperparams& theta, Eigen::VectorXd& grad) {
    detail::check_dense_size(X.rows());
    theta.validate(spec);
    const Eigen::Index n = X.rows();
    const std::size_t terms = spec.size();
    std::vector<Eigen::MatrixXd> dk_mag(terms, Eigen::MatrixXd(n, n)), dk_len(terms, Eigen::MatrixXd(n, n));
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double r = (X.row(i) - X.row(j)).norm();
            for (std::size_t t = 0; t < terms; ++t) {
                const auto& term = spec.terms()[t];
                const auto& p = theta.terms[t];
                const double k = term_kernel(term, p, r);
                const double dl = term_kernel_dlengthscale(term, p, r) * p.lengthscale;
                q(i, j) += k;
                dk_mag[t](i, j) = dk_mag[t](j, i) = k;
                dk_len[t](i, j) = dk_len[t](j, i) = dl;
            }
            q(j, i) = q(i, j);
        }
    }
    q.diagonal().array() += theta.noise;
    const CholeskyFactor c = robust_cholesky(q, "dense K + noise I");
    const Eigen::VectorXd a = c.solve(y);
    Eigen::MatrixXd w = c.inverse();
    w -= a * a.transpose();  // Q^-1 - a a^T
    grad.resize(theta.dim());
    for (std::size_t t = 0; t < terms; ++t) {
        grad(2 * t) = 0.5 * (w.array() * dk_mag[t].array()).sum();
        grad(2 * t + 1) = 0.5 * (w.array() * dk_len[t].array()).sum();
    }
    grad(theta.dim() - 1) = 0.5 * theta.noise * w.trace();
    return 0.5 * c.log_det() + 0.5 * y.dot(a) + 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

// ---------------------------------------------------------------------------
// Sparse-spectrum GP

/// Frequencies drawn once in standardized form; the physical spectral points
/// are s_r = z_r / (2 pi ell), so that 2 pi s_r ~ S(omega) / normaliser.
struct SpectralPoints {
    Eigen::MatrixXd standard;  // h x d
    std::uint64_t seed = 0;

    [[nodiscard]] Eigen::Index count() const { return standard.rows(); }
    [[nodiscard]] Eigen::MatrixXd frequencies(double lengthscale) const {
        return standard / (2.0 * std::numbers::pi * lengthscale);
    }
};

/// Draw h standardized spectral points for a single kernel term:
/// Gaussian for SE, multivariate Student-t with 2 nu dof for Matern.
inline SpectralPoints draw_spectral_points(const KernelTerm& term, int d, Eigen::Index h, std::uint64_t seed) {
    if (h < 1) throw InvalidArgument("SSGP needs at least one spectral point");
    if (d < 1) throw InvalidArgument("SSGP input dimension must be >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    SpectralPoints sp{Eigen::MatrixXd(h, d), seed};
    for (Eigen::Index r = 0; r < h; ++r) {
        for (int k = 0; k < d; ++k) sp.standard(r, k) = normal(rng);
        if (term.family == Family::Matern) {
            std::chi_squared_distribution<double> chi2(2.0 * term.nu);
            const double scale = std::sqrt(chi2(rng) / (2.0 * term.nu));
            sp.standard.row(r) /= scale;
        }
    }
    return sp;
}

namespace detail {
inline void check_ssgp(const KernelSpec& spec) {
    if (spec.is_sum()) throw InvalidArgument("SSGP baseline supports single-term kernels only");
}
}  // namespace detail

/// k_SSGP(x, x') = sigma^2 / h * sum_r cos(2 pi s_r . (x - x')).
inline double ssgp_kernel_eval(const SpectralPoints& sp, const Hyperparams& theta,
                               const Eigen::Ref<const Eigen::RowVectorXd>& x,
                               const Eigen::Ref<const Eigen::RowVectorXd>& xp) {
    const Eigen::MatrixXd s = sp.frequencies(theta.lengthscale());
    const Eigen::VectorXd phase = 2.0 * std::numbers::pi * (s * (x - xp).transpose());
    return theta.magnitude() / static_cast<double>(sp.count()) * phase.array().cos().sum();
}

/// Feature matrix [cos(2 pi s_1.x), sin(2 pi s_1.x), ..., cos(2 pi s_h.x), sin(2 pi s_h.x)].
inline Eigen::MatrixXd ssgp_features(const SpectralPoints& sp, double lengthscale,
                                     const Eigen::Ref<const Eigen::MatrixXd>& X) {
    const Eigen::MatrixXd phase = 2.0 * std::numbers::pi * X * sp.frequencies(lengthscale).transpose();
    Eigen::MatrixXd phi(X.rows(), 2 * sp.count());
    for (Eigen::Index r = 0; r < sp.count(); ++r) {
        phi.col(2 * r) = phase.col(r).array().cos();
        phi.col(2 * r + 1) = phase.col(r).array().sin();
    }
    return phi;
}

/// Prior spectrum for the SSGP features: sigma^2 / h on every feature.
inline Eigen::VectorXd ssgp_spectrum(const SpectralPoints& sp, const Hyperparams& theta) {
    return Eigen::VectorXd::Constant(2 * sp.count(), theta.magnitude() / static_cast<double>(sp.count()));
}

inline PosteriorState ssgp_posterior(const SpectralPoints& sp, const Eigen::Ref<const Eigen::MatrixXd>& X,
                                     const Eigen::Ref<const Eigen::VectorXd>& y, const KernelSpec& spec,
                                     const Hyperparams& theta) {
    detail::check_ssgp(spec);
    theta.validate(spec);
    const Eigen::MatrixXd phi = ssgp_features(sp, theta.lengthscale(), X);
    const Eigen::MatrixXd gram = phi.transpose() * phi;
    const Eigen::VectorXd proj = phi.transpose() * y;
    return detail::factor_woodbury(gram, proj, ssgp_spectrum(sp, theta), theta);
}

/// SSGP prediction through the same Woodbury path as the reduced-rank model.
inline Prediction ssgp_predict(const SpectralPoints& sp, const Eigen::Ref<const Eigen::MatrixXd>& X,
                               const Eigen::Ref<const Eigen::VectorXd>& y, const KernelSpec& spec,
                               const Hyperparams& theta, const Eigen::Ref<const Eigen::MatrixXd>& Xstar) {
    const PosteriorState post = ssgp_posterior(sp, X, y, spec, theta);
    return predict_from_features(post, ssgp_features(sp, theta.lengthscale(), Xstar));
}

/// SSGP NLML with log-space gradient. The features depend on ell, so each
/// call costs O(n m^2); the ell-derivative is tr(Z^-1 Phi^T Phi') - r^T Phi' a
/// with r = (y - Phi a) / noise.
inline double ssgp_nlml_with_grad(const SpectralPoints& sp, const Eigen::Ref<const Eigen::MatrixXd>& X,
                                  const Eigen::Ref<const Eigen::VectorXd>& y, const KernelSpec& spec,
                                  const Hyperparams& theta, Eigen::VectorXd& grad) {
    detail::check_ssgp(spec);
    theta.validate(spec);
    const double ell = theta.lengthscale();
    const Eigen::MatrixXd s = sp.frequencies(ell);
    const Eigen::MatrixXd phase = 2.0 * std::numbers::pi * X * s.transpose();  // n x h, equals u = z.x / ell
    const Eigen::Index h = sp.count();
    Eigen::MatrixXd phi(X.rows(), 2 * h), dphi(X.rows(), 2 * h);
    for (Eigen::Index r = 0; r < h; ++r) {
        const Eigen::ArrayXd u = phase.col(r).array();
        phi.col(2 * r) = u.cos();
        phi.col(2 * r + 1) = u.sin();
        dphi.col(2 * r) = u * u.sin();
        dphi.col(2 * r + 1) = -u * u.cos();
    }
    const Eigen::MatrixXd gram = phi.transpose() * phi;
    const Eigen::VectorXd proj = phi.transpose() * y;
    const double yty = y.squaredNorm();
    Eigen::VectorXd spectrum = ssgp_spectrum(sp, theta);
    Eigen::MatrixXd dspec = spectrum;  // d Lambda / d log sigma^2 = Lambda
    const PosteriorState post = detail::factor_woodbury(gram, proj, spectrum, theta);
    const Eigen::VectorXd g = detail::woodbury_nlml_grad(post, dspec, proj, yty, X.rows());

    const Eigen::MatrixXd zinv = post.chol_z.inverse();
    const Eigen::MatrixXd cross = phi.transpose() * dphi;
    const Eigen::VectorXd resid = (y - phi * post.alpha) / theta.noise;
    const double d_ell = (zinv.array() * cross.transpose().array()).sum() - resid.dot(dphi * post.alpha);

    grad.resize(3);
    grad << g(0), d_ell, g(1);
    return detail::woodbury_nlml(post, proj, yty, X.rows());
}

}  // namespace hgp
