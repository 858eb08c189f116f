#pragma once

// Reduced-rank GP regression on a fixed Laplacian eigenbasis.
//
// With Lambda = diag(S(sqrt(lambda_j))) and Z = sigma_n^2 Lambda^-1 + Phi^T Phi,
// everything after precompute() is O(m^3) and independent of n:
//
//   log|Q| = (n - m) log sigma_n^2 + log|Z| + sum_j log Lambda_jj
//   y^T Q^-1 y = (y^T y - b^T Z^-1 b) / sigma_n^2,   b = Phi^T y
//   E[f*] = phi*^T Z^-1 b,   V[f*] = sigma_n^2 phi*^T Z^-1 phi*

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <future>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Core>

#include "hgp/basis.hpp"
#include "hgp/error.hpp"
#include "hgp/kernels.hpp"
#include "hgp/linalg.hpp"

namespace hgp {

/// Hyperparameter-independent sufficient statistics of the training data.
struct FitState {
    Basis basis;
    Eigen::MatrixXd gram;  // Phi^T Phi
    Eigen::VectorXd proj;  // Phi^T y
    double yty = 0.0;
    Eigen::Index n = 0;
};

/// Per-theta factorisation backing prediction.
struct PosteriorState {
    Hyperparams theta;
    Eigen::VectorXd spectrum;  // Lambda diagonal (after underflow clamp)
    CholeskyFactor chol_z;
    Eigen::VectorXd alpha;  // Z^-1 Phi^T y
};

struct Prediction {
    Eigen::VectorXd mean;
    Eigen::VectorXd var_latent;
    Eigen::VectorXd var_observation;
};

inline constexpr double kSpectrumFloor = 1e-300;

/// Thread count from HILBERT_GP_THREADS, else hardware concurrency.
inline unsigned default_threads() {
    if (const char* env = std::getenv("HILBERT_GP_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

struct PrecomputeOptions {
    Eigen::Index block_size = 4096;
    unsigned threads = 0;  // 0: default_threads()
};

/// Accumulate Phi^T Phi and Phi^T y over row blocks. Blocks are reduced in
/// index order so the result does not depend on the thread count.
inline FitState precompute(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                           const Basis& basis, PrecomputeOptions opts = {}) {
    const Eigen::Index n = X.rows();
    const Eigen::Index m = basis.size();
    if (n < 1) throw InvalidArgument("precompute: need at least one training point");
    if (y.size() != n) throw InvalidArgument("precompute: X and y row counts differ");
    if (!y.allFinite()) throw InvalidArgument("precompute: non-finite target value");
    if (opts.block_size < 1) throw InvalidArgument("precompute: block size must be >= 1");
    const unsigned threads = opts.threads ? opts.threads : default_threads();

    FitState fit{basis, Eigen::MatrixXd::Zero(m, m), Eigen::VectorXd::Zero(m), y.squaredNorm(), n};
    struct Partial {
        Eigen::MatrixXd gram;
        Eigen::VectorXd proj;
    };
    auto work = [&](Eigen::Index start) {
        const Eigen::Index rows = std::min(opts.block_size, n - start);
        const Eigen::MatrixXd phi = eigenfunction_matrix(basis, X.middleRows(start, rows), static_cast<long>(start));
        Partial p;
        p.gram = Eigen::MatrixXd::Zero(m, m);
        p.gram.selfadjointView<Eigen::Lower>().rankUpdate(phi.transpose());
        p.gram.triangularView<Eigen::StrictlyUpper>() = p.gram.transpose();
        p.proj = phi.transpose() * y.segment(start, rows);
        return p;
    };
    const Eigen::Index blocks = (n + opts.block_size - 1) / opts.block_size;
    for (Eigen::Index wave = 0; wave < blocks; wave += threads) {
        const Eigen::Index wave_end = std::min<Eigen::Index>(blocks, wave + threads);
        std::vector<Partial> parts;
        if (wave_end - wave == 1) {
            parts.push_back(work(wave * opts.block_size));
        } else {
            std::vector<std::future<Partial>> futs;
            for (Eigen::Index b = wave; b < wave_end; ++b)
                futs.push_back(std::async(std::launch::async, work, b * opts.block_size));
            for (auto& f : futs) parts.push_back(f.get());
        }
        for (const auto& p : parts) {
            fit.gram += p.gram;
            fit.proj += p.proj;
        }
    }
    return fit;
}

namespace detail {

inline void check_spectrum_floor(Eigen::VectorXd& s, Eigen::MatrixXd* ds) {
    for (Eigen::Index j = 0; j < s.size(); ++j) {
        if (!(s(j) >= kSpectrumFloor)) {
            s(j) = kSpectrumFloor;
            if (ds) ds->row(j).setZero();
        }
    }
}

/// Factor Z for a given prior spectrum and noise (shared with the SSGP baseline).
inline PosteriorState factor_woodbury(const Eigen::MatrixXd& gram, const Eigen::VectorXd& proj,
                                      Eigen::VectorXd spectrum, const Hyperparams& theta) {
    check_spectrum_floor(spectrum, nullptr);
    Eigen::MatrixXd z = gram;
    z.diagonal().array() += theta.noise / spectrum.array();
    std::string ctx = "Z = noise/Lambda + Phi^T Phi at log-theta [";
    const Eigen::VectorXd lt = theta.to_log();
    for (Eigen::Index i = 0; i < lt.size(); ++i) ctx += (i ? ", " : "") + std::to_string(lt(i));
    ctx += "]";
    // Jitter relative to the data term: the noise/Lambda entries for high frequencies can be astronomically large.
    const double scale = gram.size() > 0 ? gram.diagonal().mean() + theta.noise / spectrum.maxCoeff() : 0.0;
    PosteriorState post{theta, std::move(spectrum), robust_cholesky(z, ctx, scale), {}};
    post.alpha = post.chol_z.solve(proj);
    return post;
}

inline double woodbury_nlml(const PosteriorState& post, const Eigen::VectorXd& proj, double yty, Eigen::Index n) {
    const double v = post.theta.noise;
    const auto m = static_cast<double>(post.spectrum.size());
    const double nn = static_cast<double>(n);
    const double log_det_q = (nn - m) * std::log(v) + post.chol_z.log_det() + post.spectrum.array().log().sum();
    const double quad = (yty - proj.dot(post.alpha)) / v;
    return 0.5 * log_det_q + 0.5 * quad + 0.5 * nn * std::log(2.0 * std::numbers::pi);
}

/// Gradient of the Woodbury NLML. Column p of dspec holds d Lambda_jj / d param_p
/// (Phi fixed); the last returned entry is d/d log(noise).
inline Eigen::VectorXd woodbury_nlml_grad(const PosteriorState& post, const Eigen::MatrixXd& dspec,
                                          const Eigen::VectorXd& proj, double yty, Eigen::Index n) {
    const double v = post.theta.noise;
    const Eigen::VectorXd& s = post.spectrum;
    const Eigen::VectorXd& a = post.alpha;
    const Eigen::VectorXd zinv_diag = post.chol_z.inverse_diagonal();
    const auto m = static_cast<double>(s.size());
    Eigen::VectorXd g(dspec.cols() + 1);
    // dL/dp = 1/2 sum_j (s'_j / s_j) [1 - (v Zinv_jj + a_j^2) / s_j]
    const Eigen::ArrayXd weight = (1.0 - (v * zinv_diag.array() + a.array().square()) / s.array()) / s.array();
    for (Eigen::Index p = 0; p < dspec.cols(); ++p) g(p) = 0.5 * (dspec.col(p).array() * weight).sum();
    // dL/dv = 1/2 [(n-m)/v + tr(Zinv Lambda^-1)] + 1/2 [a^T Lambda^-1 a / v - (yty - b^T a) / v^2]
    const double tr_term = (zinv_diag.array() / s.array()).sum();
    const double a_term = (a.array().square() / s.array()).sum();
    const double resid = yty - proj.dot(a);
    const double dv = 0.5 * ((static_cast<double>(n) - m) / v + tr_term) + 0.5 * (a_term / v - resid / (v * v));
    g(dspec.cols()) = v * dv;
    return g;
}

/// d Lambda_jj / d log(theta) for every term's (magnitude, lengthscale).
inline Eigen::MatrixXd basis_spectrum_log_grad(const Basis& basis, const KernelSpec& spec, const Hyperparams& theta) {
    const Eigen::Index m = basis.size();
    Eigen::MatrixXd ds(m, static_cast<Eigen::Index>(2 * spec.size()));
    const int d = basis.spectral_dim();
    for (Eigen::Index j = 0; j < m; ++j) {
        const Eigen::VectorXd g = spectral_density_grad(spec, theta, d, std::sqrt(basis.eigenvalues(j)));
        for (std::size_t t = 0; t < spec.size(); ++t) {
            ds(j, 2 * t) = g(2 * t) * theta.terms[t].magnitude;
            ds(j, 2 * t + 1) = g(2 * t + 1) * theta.terms[t].lengthscale;
        }
    }
    return ds;
}

}  // namespace detail

/// Factor Z for theta; throws ConditioningError if Z is numerically singular.
inline PosteriorState posterior(const FitState& fit, const KernelSpec& spec, const Hyperparams& theta) {
    theta.validate(spec);
    return detail::factor_woodbury(fit.gram, fit.proj, basis_spectrum(fit.basis, spec, theta), theta);
}

/// Negative log marginal likelihood of the reduced-rank model.
inline double nlml(const FitState& fit, const KernelSpec& spec, const Hyperparams& theta) {
    return detail::woodbury_nlml(posterior(fit, spec, theta), fit.proj, fit.yty, fit.n);
}

/// NLML and its gradient in log-parameter space, same layout as Hyperparams::to_log().
inline double nlml_with_grad(const FitState& fit, const KernelSpec& spec, const Hyperparams& theta,
                             Eigen::VectorXd& grad) {
    theta.validate(spec);
    Eigen::VectorXd s = basis_spectrum(fit.basis, spec, theta);
    Eigen::MatrixXd ds = detail::basis_spectrum_log_grad(fit.basis, spec, theta);
    detail::check_spectrum_floor(s, &ds);
    const PosteriorState post = detail::factor_woodbury(fit.gram, fit.proj, std::move(s), theta);
    grad = detail::woodbury_nlml_grad(post, ds, fit.proj, fit.yty, fit.n);
    return detail::woodbury_nlml(post, fit.proj, fit.yty, fit.n);
}

inline Eigen::VectorXd nlml_grad(const FitState& fit, const KernelSpec& spec, const Hyperparams& theta) {
    Eigen::VectorXd g;
    nlml_with_grad(fit, spec, theta, g);
    return g;
}

/// Predict from an existing factorisation and a test feature matrix.
inline Prediction predict_from_features(const PosteriorState& post, const Eigen::Ref<const Eigen::MatrixXd>& phi_star) {
    Prediction out;
    out.mean = phi_star * post.alpha;
    Eigen::MatrixXd w = phi_star.transpose();
    post.chol_z.lower.triangularView<Eigen::Lower>().solveInPlace(w);
    out.var_latent = post.theta.noise * w.colwise().squaredNorm().transpose();
    out.var_observation = out.var_latent.array() + post.theta.noise;
    return out;
}

inline Prediction predict(const PosteriorState& post, const Basis& basis, const Eigen::Ref<const Eigen::MatrixXd>& Xstar) {
    return predict_from_features(post, eigenfunction_matrix(basis, Xstar));
}

/// Predictive mean and latent/observation variances at X*.
inline Prediction predict(const FitState& fit, const KernelSpec& spec, const Hyperparams& theta,
                          const Eigen::Ref<const Eigen::MatrixXd>& Xstar) {
    return predict(posterior(fit, spec, theta), fit.basis, Xstar);
}

}  // namespace hgp
