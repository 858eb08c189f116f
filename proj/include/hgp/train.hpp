#pragma once

// Hyperparameter learning: quasi-Newton (BFGS) minimisation of the NLML in
// log-parameter space, plus a finite-difference gradient checker.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "hgp/error.hpp"
#include "hgp/kernels.hpp"
#include "hgp/model.hpp"

namespace hgp {

enum class TerminalStatus { ConvergedF, ConvergedX, MaxIters, LineSearchFailure };

inline const char* to_string(TerminalStatus s) {
    switch (s) {
        case TerminalStatus::ConvergedF: return "converged_f";
        case TerminalStatus::ConvergedX: return "converged_x";
        case TerminalStatus::MaxIters: return "max_iters";
        case TerminalStatus::LineSearchFailure: return "line_search_failure";
    }
    return "unknown";
}

struct OptimizerOptions {
    int max_iters = 200;
    double tol_f = 1e-5;
    double tol_x = 1e-5;
    int restarts = 1;
    std::uint64_t seed = 0;

    void validate() const {
        if (max_iters < 1) throw InvalidArgument("max_iters must be >= 1");
        if (!(tol_f > 0.0) || !(tol_x > 0.0)) throw InvalidArgument("optimizer tolerances must be > 0");
        if (restarts < 1) throw InvalidArgument("restarts must be >= 1");
    }
};

struct TraceStep {
    Eigen::VectorXd x;  // log-parameters
    double value = 0.0;
    double grad_norm = 0.0;
    double step = 0.0;  // accepted line-search step length (0 for the start point)
};

struct OptimizationTrace {
    std::vector<TraceStep> steps;
    TerminalStatus status = TerminalStatus::MaxIters;
    int restart = 0;

    /// Accepted steps, excluding the starting point.
    [[nodiscard]] int iterations() const { return steps.empty() ? 0 : static_cast<int>(steps.size()) - 1; }
};

/// f(x) returning the value and writing the gradient. May throw hgp::Error
/// (e.g. ConditioningError) at infeasible points; the line search backs off.
using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct MinimizeResult {
    Eigen::VectorXd x;
    double value = 0.0;
    OptimizationTrace trace;
};

namespace detail {

inline constexpr double kArmijo = 1e-4;
inline constexpr int kMaxHalvings = 50;
inline constexpr double kMaxStep = 3.0;  // infinity-norm cap on a trial step in log space

inline bool try_eval(const Objective& f, const Eigen::VectorXd& x, double& value, Eigen::VectorXd& grad) {
    try {
        value = f(x, grad);
    } catch (const Error&) {
        return false;
    }
    return std::isfinite(value) && grad.allFinite();
}

/// Shared driver; `quasi_newton` false gives steepest descent with the same line search.
inline MinimizeResult minimize(const Objective& f, Eigen::VectorXd x, const OptimizerOptions& opts, bool quasi_newton) {
    opts.validate();
    const Eigen::Index p = x.size();
    MinimizeResult res;
    Eigen::VectorXd g;
    double fx = 0.0;
    if (!try_eval(f, x, fx, g)) {
        res.x = x;
        res.value = std::numeric_limits<double>::infinity();
        res.trace.status = TerminalStatus::LineSearchFailure;
        return res;
    }
    res.trace.steps.push_back({x, fx, g.norm(), 0.0});
    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(p, p);
    bool first = true;

    for (int iter = 0;; ++iter) {
        if (iter >= opts.max_iters) {
            res.trace.status = TerminalStatus::MaxIters;
            break;
        }
        Eigen::VectorXd dir = quasi_newton ? Eigen::VectorXd(-H * g) : Eigen::VectorXd(-g);
        if (g.dot(dir) >= 0.0) {  // lost descent: reset curvature
            H.setIdentity();
            dir = -g;
        }
        const double cap = dir.cwiseAbs().maxCoeff();
        if (cap > kMaxStep) dir *= kMaxStep / cap;
        const double slope = g.dot(dir);

        double t = 1.0;
        double f_new = 0.0;
        Eigen::VectorXd g_new, x_new;
        bool accepted = false;
        for (int h = 0; h < kMaxHalvings; ++h, t *= 0.5) {
            x_new = x + t * dir;
            if (try_eval(f, x_new, f_new, g_new) && f_new <= fx + kArmijo * t * slope) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            // A predicted decrease below the function tolerance means we are already stationary.
            res.trace.status = std::abs(slope) <= opts.tol_f * (1.0 + std::abs(fx)) ? TerminalStatus::ConvergedF
                                                                                   : TerminalStatus::LineSearchFailure;
            break;
        }
        const Eigen::VectorXd s = x_new - x;
        const Eigen::VectorXd yv = g_new - g;
        const double f_old = fx;
        x = std::move(x_new);
        fx = f_new;
        g = std::move(g_new);
        res.trace.steps.push_back({x, fx, g.norm(), t});

        if (std::abs(f_old - fx) <= opts.tol_f * (1.0 + std::abs(fx))) {
            res.trace.status = TerminalStatus::ConvergedF;
            break;
        }
        if (s.cwiseAbs().maxCoeff() <= opts.tol_x) {
            res.trace.status = TerminalStatus::ConvergedX;
            break;
        }
        if (quasi_newton) {
            const double sy = s.dot(yv);
            if (sy > 1e-12 * s.norm() * yv.norm()) {
                if (first) {
                    H = Eigen::MatrixXd::Identity(p, p) * (sy / yv.squaredNorm());
                    first = false;
                }
                const double rho = 1.0 / sy;
                const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(p, p);
                H = (I - rho * s * yv.transpose()) * H * (I - rho * yv * s.transpose()) + rho * s * s.transpose();
            }
        }
    }
    res.x = x;
    res.value = fx;
    return res;
}

}  // namespace detail

/// BFGS with backtracking (Armijo) line search.
inline MinimizeResult minimize_bfgs(const Objective& f, Eigen::VectorXd x0, const OptimizerOptions& opts = {}) {
    return detail::minimize(f, std::move(x0), opts, true);
}

/// Steepest descent with the same line search and stopping rules.
inline MinimizeResult minimize_gradient_descent(const Objective& f, Eigen::VectorXd x0, const OptimizerOptions& opts = {}) {
    return detail::minimize(f, std::move(x0), opts, false);
}

/// Multi-start wrapper: restart 0 starts at x0, later ones at x0 + N(0, 0.5^2)
/// jitter. Returns the best terminal value. Throws if every restart failed at
/// its first iteration.
inline MinimizeResult minimize_with_restarts(const Objective& f, const Eigen::VectorXd& x0, const OptimizerOptions& opts,
                                             bool quasi_newton = true) {
    opts.validate();
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> jitter(0.0, 0.5);
    MinimizeResult best;
    bool have = false;
    OptimizationTrace last;
    for (int r = 0; r < opts.restarts; ++r) {
        Eigen::VectorXd start = x0;
        if (r > 0)
            for (Eigen::Index i = 0; i < start.size(); ++i) start(i) += jitter(rng);
        MinimizeResult res = detail::minimize(f, start, opts, quasi_newton);
        res.trace.restart = r;
        const bool failed_at_start =
            res.trace.status == TerminalStatus::LineSearchFailure && res.trace.iterations() == 0;
        last = res.trace;
        if (failed_at_start) continue;
        if (!have || res.value < best.value) {
            best = std::move(res);
            have = true;
        }
    }
    if (!have) {
        std::string msg = "optimization failed: every restart failed at iteration 0";
        if (!last.steps.empty()) msg += " (last start value " + std::to_string(last.steps.front().value) + ")";
        throw OptimizationError(msg);
    }
    return best;
}

// ---------------------------------------------------------------------------

/// Default starting point from the data scale: sigma^2 = Var[y] (split across
/// sum terms), ell = 20% of the largest input range (halved per extra term),
/// noise = 10% of Var[y].
inline Hyperparams default_initial_hyperparams(const KernelSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& X,
                                               const Eigen::Ref<const Eigen::VectorXd>& y) {
    const double mean = y.mean();
    double var = y.size() > 1 ? (y.array() - mean).square().sum() / static_cast<double>(y.size() - 1) : 0.0;
    if (!(var > 0.0)) var = 1.0;
    double range = (X.colwise().maxCoeff() - X.colwise().minCoeff()).maxCoeff();
    if (!(range > 0.0)) range = 1.0;
    Hyperparams h;
    h.terms.clear();
    for (std::size_t t = 0; t < spec.size(); ++t)
        h.terms.push_back({var / static_cast<double>(spec.size()), 0.2 * range * std::pow(0.5, static_cast<double>(t))});
    h.noise = 0.1 * var;
    return h;
}

struct TrainResult {
    Hyperparams theta;
    double value = 0.0;
    OptimizationTrace trace;
};

/// Fit hyperparameters of the reduced-rank model from theta0.
inline TrainResult optimize(const FitState& fit, const KernelSpec& spec, const Hyperparams& theta0,
                            const OptimizerOptions& opts = {}) {
    theta0.validate(spec);
    const Objective f = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        return nlml_with_grad(fit, spec, Hyperparams::from_log(x), g);
    };
    MinimizeResult r = minimize_with_restarts(f, theta0.to_log(), opts);
    return {Hyperparams::from_log(r.x), r.value, std::move(r.trace)};
}

struct GradCheck {
    double max_rel_error = 0.0;
    Eigen::Index worst = -1;
    Eigen::VectorXd analytic;
    Eigen::VectorXd numeric;
};

/// Relative error |a - b| / max(|a|, |b|, floor).
inline double relative_error(double a, double b, double floor = 1e-6) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Central finite differences of `f` in each coordinate with step `step`.
inline GradCheck grad_check(const Objective& f, const Eigen::VectorXd& x, double step = 1e-6) {
    GradCheck out;
    f(x, out.analytic);
    out.numeric.resize(x.size());
    Eigen::VectorXd scratch;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Eigen::VectorXd xp = x, xm = x;
        xp(i) += step;
        xm(i) -= step;
        double fp = 0.0, fm = 0.0;
        try {
            fp = f(xp, scratch);
            fm = f(xm, scratch);
        } catch (const Error& e) {
            throw Error("grad_check: objective failed when perturbing component " + std::to_string(i) + ": " + e.what());
        }
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw Error("grad_check: non-finite objective when perturbing component " + std::to_string(i) +
                        (std::isfinite(fp) ? " downwards" : " upwards"));
        out.numeric(i) = (fp - fm) / (2.0 * step);
        const double e = relative_error(out.analytic(i), out.numeric(i));
        if (e > out.max_rel_error || out.worst < 0) {
            out.max_rel_error = std::max(out.max_rel_error, e);
            out.worst = i;
        }
    }
    return out;
}

/// Gradient check of the reduced-rank NLML in log-parameter space.
inline GradCheck grad_check(const FitState& fit, const KernelSpec& spec, const Hyperparams& theta, double step = 1e-6) {
    const Objective f = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        return nlml_with_grad(fit, spec, Hyperparams::from_log(x), g);
    };
    return grad_check(f, theta.to_log(), step);
}

}  // namespace hgp
