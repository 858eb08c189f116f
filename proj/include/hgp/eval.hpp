#pragma once

// Evaluation: SMSE/MSLL metrics, seeded k-fold cross-validation over the three
// regression methods, and numeric convergence diagnostics (tail terms of the
// kernel-approximation error bound, grid sup errors, learning curves).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hgp/basis.hpp"
#include "hgp/error.hpp"
#include "hgp/kernels.hpp"
#include "hgp/model.hpp"
#include "hgp/quadrature.hpp"
#include "hgp/reference.hpp"
#include "hgp/train.hpp"

namespace hgp {

// ---------------------------------------------------------------------------
// Metrics

/// Standardized mean squared error sum (y - mu)^2 / (n* Var[y_train]).
/// With `verbatim` the 1/n* normalisation is dropped.
inline double smse(const Eigen::Ref<const Eigen::VectorXd>& y_true, const Eigen::Ref<const Eigen::VectorXd>& mean,
                   double var_y_train, bool verbatim = false) {
    if (y_true.size() < 1 || y_true.size() != mean.size()) throw InvalidArgument("smse: size mismatch or empty");
    if (!(var_y_train > 0.0)) throw InvalidArgument("smse: training variance must be > 0");
    const double sse = (y_true - mean).squaredNorm();
    return verbatim ? sse / var_y_train : sse / (static_cast<double>(y_true.size()) * var_y_train);
}

/// Mean standardized log loss 1/(2n*) sum [(y - mu)^2 / s2 + log(2 pi s2)], no baseline subtraction.
inline double msll(const Eigen::Ref<const Eigen::VectorXd>& y_true, const Eigen::Ref<const Eigen::VectorXd>& mean,
                   const Eigen::Ref<const Eigen::VectorXd>& var_observation) {
    if (y_true.size() < 1 || y_true.size() != mean.size() || mean.size() != var_observation.size())
        throw InvalidArgument("msll: size mismatch or empty");
    if (!(var_observation.array() > 0.0).all()) throw InvalidArgument("msll: predictive variances must be > 0");
    const Eigen::ArrayXd r2 = (y_true - mean).array().square();
    const Eigen::ArrayXd v = var_observation.array();
    return (r2 / v + (2.0 * std::numbers::pi * v).log()).sum() / (2.0 * static_cast<double>(y_true.size()));
}

/// Population variance (1/n).
inline double population_variance(const Eigen::Ref<const Eigen::VectorXd>& y) {
    return (y.array() - y.mean()).square().mean();
}

// ---------------------------------------------------------------------------
// Cross-validation

enum class Method { ReducedRank, Full, SSGP };

inline const char* to_string(Method m) {
    switch (m) {
        case Method::ReducedRank: return "reduced-rank";
        case Method::Full: return "full";
        case Method::SSGP: return "ssgp";
    }
    return "unknown";
}

inline Method parse_method(const std::string& s) {
    if (s == "reduced-rank") return Method::ReducedRank;
    if (s == "full") return Method::Full;
    if (s == "ssgp") return Method::SSGP;
    throw InvalidArgument("unknown method '" + s + "' (expected reduced-rank, full or ssgp)");
}

struct MethodConfig {
    Method method = Method::ReducedRank;
    KernelSpec spec;
    Eigen::Index m = 32;  // basis size; SSGP uses h = m / 2 spectral points
    SelectionMode mode = SelectionMode::Sorted;
    double extension = 0.1;
    bool sphere = false;
    int sphere_spectral_dim = 2;
    std::optional<Hyperparams> theta0;
    bool optimize = true;
    bool center_y = false;
    OptimizerOptions optimizer;
};

struct FoldResult {
    int fold = 0;
    Eigen::Index n_train = 0;
    Eigen::Index n_test = 0;
    double smse = 0.0;
    double msll = 0.0;
    double seconds_precompute = 0.0;
    double seconds_train = 0.0;
    double seconds_predict = 0.0;
    Hyperparams theta;
};

struct MetricsReport {
    std::string method;
    Eigen::Index m = 0;
    std::uint64_t seed = 0;
    int k = 0;
    std::vector<FoldResult> folds;
    double smse_mean = 0.0, smse_std = 0.0;
    double msll_mean = 0.0, msll_std = 0.0;
};

struct FitOutcome {
    Prediction prediction;
    Hyperparams theta;
    double seconds_precompute = 0.0;
    double seconds_train = 0.0;
    double seconds_predict = 0.0;
};

namespace detail {

using Clock = std::chrono::steady_clock;
inline double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

inline Domain method_domain(const MethodConfig& cfg, const Eigen::Ref<const Eigen::MatrixXd>& X) {
    return cfg.sphere ? Domain::sphere(cfg.sphere_spectral_dim) : domain_from_data(X, cfg.extension);
}

}  // namespace detail

/// Train one method on (X, y) and predict at X*; the building block of CV.
inline FitOutcome fit_and_predict(const MethodConfig& cfg, const Eigen::Ref<const Eigen::MatrixXd>& X,
                                  const Eigen::Ref<const Eigen::VectorXd>& y_in,
                                  const Eigen::Ref<const Eigen::MatrixXd>& Xstar, std::uint64_t seed) {
    using detail::Clock;
    const double offset = cfg.center_y ? y_in.mean() : 0.0;
    const Eigen::VectorXd y = y_in.array() - offset;
    const Hyperparams theta0 = cfg.theta0 ? *cfg.theta0 : default_initial_hyperparams(cfg.spec, X, y);
    FitOutcome out;
    out.theta = theta0;

    switch (cfg.method) {
        case Method::ReducedRank: {
            auto t0 = Clock::now();
            const Basis basis = build_basis(detail::method_domain(cfg, X), cfg.m, cfg.mode);
            const FitState fit = precompute(X, y, basis);
            out.seconds_precompute = detail::seconds_since(t0);
            t0 = Clock::now();
            if (cfg.optimize) out.theta = optimize(fit, cfg.spec, theta0, cfg.optimizer).theta;
            out.seconds_train = detail::seconds_since(t0);
            t0 = Clock::now();
            out.prediction = predict(fit, cfg.spec, out.theta, Xstar);
            out.seconds_predict = detail::seconds_since(t0);
            break;
        }
        case Method::Full: {
            auto t0 = Clock::now();
            if (cfg.optimize) {
                const Objective f = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
                    return full_gp_nlml_with_grad(X, y, cfg.spec, Hyperparams::from_log(x), g);
                };
                out.theta = Hyperparams::from_log(minimize_with_restarts(f, theta0.to_log(), cfg.optimizer).x);
            }
            out.seconds_train = detail::seconds_since(t0);
            t0 = Clock::now();
            out.prediction = full_gp_predict(X, y, cfg.spec, out.theta, Xstar);
            out.seconds_predict = detail::seconds_since(t0);
            break;
        }
        case Method::SSGP: {
            if (cfg.m < 2) throw InvalidArgument("SSGP needs m >= 2 (h = m/2 spectral points)");
            auto t0 = Clock::now();
            const SpectralPoints sp = draw_spectral_points(cfg.spec.terms().front(), static_cast<int>(X.cols()), cfg.m / 2, seed);
            out.seconds_precompute = detail::seconds_since(t0);
            t0 = Clock::now();
            if (cfg.optimize) {
                const Objective f = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
                    return ssgp_nlml_with_grad(sp, X, y, cfg.spec, Hyperparams::from_log(x), g);
                };
                out.theta = Hyperparams::from_log(minimize_with_restarts(f, theta0.to_log(), cfg.optimizer).x);
            }
            out.seconds_train = detail::seconds_since(t0);
            t0 = Clock::now();
            out.prediction = ssgp_predict(sp, X, y, cfg.spec, out.theta, Xstar);
            out.seconds_predict = detail::seconds_since(t0);
            break;
        }
    }
    out.prediction.mean.array() += offset;
    return out;
}

/// Seeded fold labels: a shuffled 0..n-1 with point perm[i] in fold i mod k.
inline std::vector<int> fold_assignment(Eigen::Index n, int k, std::uint64_t seed) {
    if (k < 2) throw InvalidArgument("k-fold CV needs k >= 2");
    if (n < k) throw InvalidArgument("k-fold CV needs n >= k");
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    std::mt19937_64 rng(seed);
    // Fisher-Yates with an explicit uniform draw so the permutation is the same on every standard library.
    for (std::size_t i = perm.size() - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(rng() % (i + 1));
        std::swap(perm[i], perm[j]);
    }
    std::vector<int> label(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < perm.size(); ++i) label[static_cast<std::size_t>(perm[i])] = static_cast<int>(i % static_cast<std::size_t>(k));
    return label;
}

/// k-fold CV; each fold rebuilds its domain from its own training inputs.
inline MetricsReport kfold_cv(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                              const MethodConfig& cfg, int k = 10, std::uint64_t seed = 1,
                              bool smse_verbatim = false) {
    if (X.rows() != y.size()) throw InvalidArgument("kfold_cv: X and y row counts differ");
    const std::vector<int> label = fold_assignment(X.rows(), k, seed);
    MetricsReport rep;
    rep.method = to_string(cfg.method);
    rep.m = cfg.method == Method::Full ? X.rows() : cfg.m;
    rep.seed = seed;
    rep.k = k;
    for (int f = 0; f < k; ++f) {
        std::vector<Eigen::Index> tr, te;
        for (Eigen::Index i = 0; i < X.rows(); ++i) (label[static_cast<std::size_t>(i)] == f ? te : tr).push_back(i);
        if (tr.size() < 2) throw InvalidArgument("fold " + std::to_string(f) + " leaves fewer than 2 training points");
        const Eigen::MatrixXd Xtr = X(tr, Eigen::all);
        const Eigen::VectorXd ytr = y(tr);
        const Eigen::MatrixXd Xte = X(te, Eigen::all);
        const Eigen::VectorXd yte = y(te);
        const FitOutcome o = fit_and_predict(cfg, Xtr, ytr, Xte, seed + static_cast<std::uint64_t>(f));
        FoldResult fr;
        fr.fold = f;
        fr.n_train = static_cast<Eigen::Index>(tr.size());
        fr.n_test = static_cast<Eigen::Index>(te.size());
        fr.smse = smse(yte, o.prediction.mean, population_variance(ytr), smse_verbatim);
        fr.msll = msll(yte, o.prediction.mean, o.prediction.var_observation);
        fr.seconds_precompute = o.seconds_precompute;
        fr.seconds_train = o.seconds_train;
        fr.seconds_predict = o.seconds_predict;
        fr.theta = o.theta;
        rep.folds.push_back(std::move(fr));
    }
    auto stats = [&](auto get, double& mean, double& sd) {
        mean = 0.0;
        for (const auto& f : rep.folds) mean += get(f);
        mean /= static_cast<double>(rep.folds.size());
        double ss = 0.0;
        for (const auto& f : rep.folds) ss += (get(f) - mean) * (get(f) - mean);
        sd = rep.folds.size() > 1 ? std::sqrt(ss / static_cast<double>(rep.folds.size() - 1)) : 0.0;
    };
    stats([](const FoldResult& f) { return f.smse; }, rep.smse_mean, rep.smse_std);
    stats([](const FoldResult& f) { return f.msll; }, rep.msll_mean, rep.msll_std);
    return rep;
}

// ---------------------------------------------------------------------------
// Convergence diagnostics

/// Spectral mass outside the radius pi*mhat/(2L):
///   (1/pi^d) * integral_{|w| >= R} S(w) dw = (|S^{d-1}| / pi^d) * int_R^inf S(rho) rho^{d-1} drho.
/// For d = 1 this is (2/pi) int_R^inf S. Pure quadrature, no closed-form shortcut.
inline double tail_term_quadrature(const KernelSpec& spec, const Hyperparams& theta, int d, std::int64_t mhat, double L,
                                   double rel_tol = 1e-10) {
    if (mhat < 1) throw InvalidArgument("tail term needs m >= 1");
    if (!(L > 0.0)) throw InvalidArgument("tail term needs L > 0");
    if (d < 1) throw InvalidArgument("tail term needs d >= 1");
    const double R = std::numbers::pi * static_cast<double>(mhat) / (2.0 * L);
    const double dd = static_cast<double>(d);
    const double sphere_area = 2.0 * std::pow(std::numbers::pi, 0.5 * dd) / std::tgamma(0.5 * dd);
    double min_ell = theta.terms.front().lengthscale;
    for (const auto& t : theta.terms) min_ell = std::min(min_ell, t.lengthscale);
    auto integrand = [&](double rho) { return spectral_density(spec, theta, d, rho) * std::pow(rho, dd - 1.0); };
    quad::Options opts;
    opts.rel_tol = rel_tol;
    const auto res = quad::integrate_to_infinity(integrand, R, opts, 1.0 / min_ell);
    return sphere_area / std::pow(std::numbers::pi, dd) * res.value;
}

/// Tail term with the closed form 2 sigma^2 erfc(R ell / sqrt 2) for SE in d = 1.
inline double theorem_tail(const KernelSpec& spec, const Hyperparams& theta, int d, std::int64_t mhat, double L) {
    theta.validate(spec, true);
    bool all_se = true;
    for (const auto& t : spec.terms()) all_se = all_se && t.family == Family::SquaredExponential;
    if (d == 1 && all_se && mhat >= 1 && L > 0.0) {
        const double R = std::numbers::pi * static_cast<double>(mhat) / (2.0 * L);
        double tail = 0.0;
        for (const auto& p : theta.terms) tail += 2.0 * p.magnitude * std::erfc(R * p.lengthscale / std::numbers::sqrt2);
        return tail;
    }
    return tail_term_quadrature(spec, theta, d, mhat, L);
}

struct GridSpec {
    int points_per_dim = 50;
    double fraction = 0.8;    // grid covers center +- fraction * L_k in each dimension
    double half_width = 0.0;  // if > 0, covers center +- half_width instead
};

struct SupError {
    double value = 0.0;
    Eigen::RowVectorXd x;
    Eigen::RowVectorXd x_prime;
};

/// Regular grid over the central fraction of a rectangular domain.
inline Eigen::MatrixXd domain_grid(const Domain& domain, const GridSpec& grid) {
    if (domain.is_sphere()) throw InvalidArgument("grid diagnostics need a rectangular domain");
    if (grid.points_per_dim < 1 || !(grid.fraction > 0.0) || grid.fraction > 1.0)
        throw InvalidArgument("grid needs >= 1 point per dimension and fraction in (0, 1]");
    const auto& r = domain.rect();
    const auto d = static_cast<int>(r.center.size());
    if (grid.half_width > 0.0 && grid.half_width > r.half_widths.minCoeff())
        throw InvalidArgument("grid half-width exceeds the domain");
    const int p = grid.points_per_dim;
    Eigen::Index total = 1;
    for (int k = 0; k < d; ++k) total *= p;
    Eigen::MatrixXd pts(total, d);
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    for (Eigen::Index i = 0; i < total; ++i) {
        for (int k = 0; k < d; ++k) {
            const double w = grid.half_width > 0.0 ? grid.half_width : grid.fraction * r.half_widths(k);
            const double lo = r.center(k) - w;
            const double hi = r.center(k) + w;
            pts(i, k) = p == 1 ? r.center(k) : lo + (hi - lo) * idx[static_cast<std::size_t>(k)] / (p - 1);
        }
        for (int k = d - 1; k >= 0; --k) {
            if (++idx[static_cast<std::size_t>(k)] < p) break;
            idx[static_cast<std::size_t>(k)] = 0;
        }
    }
    // Snap the extreme grid lines onto the boundary exactly when the grid spans the whole domain.
    if (grid.half_width <= 0.0 && grid.fraction == 1.0) {
        for (int k = 0; k < d; ++k) {
            for (Eigen::Index i = 0; i < total; ++i) {
                if (pts(i, k) < r.center(k) - r.half_widths(k)) pts(i, k) = r.center(k) - r.half_widths(k);
                if (pts(i, k) > r.center(k) + r.half_widths(k)) pts(i, k) = r.center(k) + r.half_widths(k);
            }
        }
    }
    return pts;
}

/// max over grid pairs of |k(|x - x'|) - k~(x, x')|.
inline SupError kernel_sup_error(const Basis& basis, const KernelSpec& spec, const Hyperparams& theta,
                                 const GridSpec& grid = {}) {
    const Eigen::MatrixXd pts = domain_grid(basis.domain, grid);
    const Eigen::MatrixXd phi = eigenfunction_matrix(basis, pts);
    const Eigen::VectorXd s = basis_spectrum(basis, spec, theta);
    const Eigen::MatrixXd approx = phi * s.asDiagonal() * phi.transpose();
    const Eigen::MatrixXd exact = kernel_matrix(spec, theta, pts, pts);
    Eigen::Index i = 0, j = 0;
    SupError out;
    out.value = (exact - approx).cwiseAbs().maxCoeff(&i, &j);
    out.x = pts.row(i);
    out.x_prime = pts.row(j);
    return out;
}

/// Opper-Vivarelli learning-curve approximation
///   eps(n) = noise * sum_j S_j / (noise + n S_j).
inline double learning_curve_ov(const Basis& basis, const KernelSpec& spec, const Hyperparams& theta, double n) {
    if (!(n >= 0.0)) throw InvalidArgument("learning curve needs n >= 0");
    const Eigen::VectorXd s = basis_spectrum(basis, spec, theta);
    const double v = theta.noise;
    return v * (s.array() / (v + n * s.array())).sum();
}

struct SweepEntry {
    std::int64_t m = 0;  // for grid mode this is mhat; the basis has mhat^d terms
    double L = 0.0;
    double sup_error = 0.0;
    double tail = 0.0;
};

/// Sup error and tail term over an (m, L) sweep on [-L, L]^d.
inline std::vector<SweepEntry> convergence_sweep(const KernelSpec& spec, const Hyperparams& theta, int d,
                                                 const std::vector<std::int64_t>& ms, const std::vector<double>& Ls,
                                                 SelectionMode mode, const GridSpec& grid) {
    std::vector<SweepEntry> out;
    for (double L : Ls) {
        for (std::int64_t m : ms) {
            std::int64_t size = m;
            if (mode == SelectionMode::Grid)
                for (int k = 1; k < d; ++k) size *= m;
            const Basis basis = build_basis(Domain::symmetric(d, L), size, mode);
            out.push_back({m, L, kernel_sup_error(basis, spec, theta, grid).value, theorem_tail(spec, theta, d, m, L)});
        }
    }
    return out;
}

/// Boundary constant C = L0 * sup_error0 from a reference sweep entry, crediting
/// the whole measured error to the C/L term.
inline double fit_bound_constant(const SweepEntry& reference) { return reference.L * reference.sup_error; }

}  // namespace hgp
