#pragma once

// fit / predict / cv / sample / diagnose workflows behind the hilbert-gp tool.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hgp/basis.hpp"
#include "hgp/cli/artifact.hpp"
#include "hgp/cli/config.hpp"
#include "hgp/cli/csv.hpp"
#include "hgp/eval.hpp"
#include "hgp/model.hpp"
#include "hgp/train.hpp"

namespace hgp::cli {

enum ExitCode { kOk = 0, kUsage = 2, kRuntime = 3 };

/// Command-line values that override the config file when set.
struct Overrides {
    std::optional<std::int64_t> m;
    std::optional<std::string> mode;
    std::optional<double> extension;
    std::optional<std::string> target;
    std::optional<std::string> method;
    std::vector<std::string> methods;
    std::optional<int> max_iters;
    std::optional<int> restarts;
    std::optional<std::uint64_t> seed;
    bool center_y = false;
    bool no_optimize = false;
};

inline Config load_config(const std::string& path, const Overrides& o) {
    Config c = path.empty() ? parse_config(json::object()) : read_config(path);
    if (o.m) c.basis.m = *o.m;
    if (o.mode) c.basis.mode = parse_mode(*o.mode);
    if (o.extension) c.basis.extension = *o.extension;
    if (o.target) c.data.target = *o.target;
    try {
        if (o.method) c.methods = {parse_method(*o.method)};
        if (!o.methods.empty()) {
            c.methods.clear();
            for (const auto& s : o.methods) c.methods.push_back(parse_method(s));
        }
    } catch (const InvalidArgument& e) {
        throw ParseError(e.what());
    }
    if (o.max_iters) c.optimizer.max_iters = *o.max_iters;
    if (o.restarts) c.optimizer.restarts = *o.restarts;
    if (o.seed) c.optimizer.seed = *o.seed;
    if (o.center_y) c.data.center_y = true;
    if (o.no_optimize) c.optimize = false;
    try {
        c.optimizer.validate();
    } catch (const InvalidArgument& e) {
        throw ParseError(std::string("config optimizer: ") + e.what());
    }
    if (c.basis.m < 1) throw ParseError("config basis.m must be >= 1");
    return c;
}

namespace detail {

using Clock = std::chrono::steady_clock;

inline void write_json(const json& j, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << j.dump(2) << '\n';
        return;
    }
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    return out;
}

inline std::string sibling(const std::string& path, const std::string& suffix) {
    const auto dot = path.rfind('.');
    const auto slash = path.rfind('/');
    const bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
    return (has_ext ? path.substr(0, dot) : path) + suffix;
}

inline void check_inputs(const Domain& domain, const Eigen::Ref<const Eigen::MatrixXd>& X) {
    if (X.cols() != domain.input_dim())
        throw InvalidArgument("data has " + std::to_string(X.cols()) + " input columns but the domain has " +
                              std::to_string(domain.input_dim()));
    for (Eigen::Index i = 0; i < X.rows(); ++i) domain.check_point(X.row(i), i);
}

}  // namespace detail

// ---------------------------------------------------------------------------

struct FitRequest {
    std::string config, data, out, report;
    Overrides overrides;
};

/// Fit the reduced-rank model and write the model file plus a JSON report.
inline json run_fit(const FitRequest& req) {
    const Config cfg = load_config(req.config, req.overrides);
    const Dataset ds = to_dataset(read_table_file(req.data), cfg.data.target);
    const double offset = cfg.data.center_y ? ds.y.mean() : 0.0;
    const Eigen::VectorXd y = ds.y.array() - offset;

    auto t0 = detail::Clock::now();
    const Domain domain = make_domain(cfg.basis, ds.X);
    detail::check_inputs(domain, ds.X);
    ModelArtifact a;
    a.fit = precompute(ds.X, y, build_basis(domain, cfg.basis.m, cfg.basis.mode));
    const double t_pre = hgp::detail::seconds_since(t0);

    const Hyperparams theta0 = cfg.theta ? *cfg.theta : default_initial_hyperparams(cfg.kernel, ds.X, y);
    t0 = detail::Clock::now();
    TrainResult tr{theta0, 0.0, {}};
    if (cfg.optimize) tr = optimize(a.fit, cfg.kernel, theta0, cfg.optimizer);
    else tr.value = nlml(a.fit, cfg.kernel, theta0);
    const double t_train = hgp::detail::seconds_since(t0);

    a.spec = cfg.kernel;
    a.theta = tr.theta;
    a.input_names = ds.input_names;
    a.target_name = ds.target_name;
    a.y_offset = offset;
    a.seed = cfg.optimizer.seed;
    a.mode = to_string(cfg.basis.mode);
    write_artifact(a, req.out);

    json report = {{"nlml", tr.value},
                   {"hyperparameters", hyperparams_to_json(tr.theta)},
                   {"kernel", kernel_to_json(cfg.kernel)},
                   {"m", a.fit.basis.size()},
                   {"n", a.fit.n},
                   {"optimized", cfg.optimize},
                   {"iterations", tr.trace.iterations()},
                   {"status", cfg.optimize ? to_string(tr.trace.status) : "fixed"},
                   {"restart", tr.trace.restart},
                   {"y_offset", offset},
                   {"seconds", {{"precompute", t_pre}, {"train", t_train}}}};
    const std::string report_path = !req.report.empty() ? req.report : !cfg.report.empty() ? cfg.report
                                                                                            : detail::sibling(req.out, ".report.json");
    detail::write_json(report, report_path);
    return report;
}

// ---------------------------------------------------------------------------

struct PredictRequest {
    std::string model, data, out;
};

/// Columns: inputs, mean, var_latent, var_observation; input row order.
inline Prediction run_predict(const PredictRequest& req) {
    const ModelArtifact a = read_artifact(req.model);
    const Table t = read_table_file(req.data);
    const Eigen::MatrixXd X = select_inputs(t, a.input_names);
    detail::check_inputs(a.fit.basis.domain, X);
    Prediction p = predict(a.fit, a.spec, a.theta, X);
    p.mean.array() += a.y_offset;
    std::vector<std::string> names = a.input_names;
    names.insert(names.end(), {"mean", "var_latent", "var_observation"});
    Eigen::MatrixXd out(X.rows(), X.cols() + 3);
    out << X, p.mean, p.var_latent, p.var_observation;
    auto f = detail::open_out(req.out);
    write_table(f, names, out);
    return p;
}

// ---------------------------------------------------------------------------

struct CvRequest {
    std::string config, data, out, sweep;
    int k = 10;
    std::uint64_t seed = 1;
    bool smse_verbatim = false;
    Overrides overrides;
};

inline json report_to_json(const MetricsReport& r) {
    json folds = json::array();
    for (const auto& f : r.folds) {
        folds.push_back({{"fold", f.fold},
                         {"n_train", f.n_train},
                         {"n_test", f.n_test},
                         {"smse", f.smse},
                         {"msll", f.msll},
                         {"hyperparameters", hyperparams_to_json(f.theta)},
                         {"seconds", {{"precompute", f.seconds_precompute}, {"train", f.seconds_train}, {"predict", f.seconds_predict}}}});
    }
    return {{"method", r.method}, {"m", r.m},           {"k", r.k},
            {"seed", r.seed},     {"smse_mean", r.smse_mean}, {"smse_std", r.smse_std},
            {"msll_mean", r.msll_mean}, {"msll_std", r.msll_std}, {"folds", folds}};
}

/// k-fold CV for every configured method; JSON report, sweep CSV and a table on stdout.
inline std::vector<MetricsReport> run_cv(const CvRequest& req, std::ostream& table = std::cout) {
    const Config cfg = load_config(req.config, req.overrides);
    if (cfg.basis.center) throw ParseError("cv rebuilds the domain from each training fold; basis.center/half_widths are not allowed");
    const Dataset ds = to_dataset(read_table_file(req.data), cfg.data.target);
    if (req.k < 2) throw ParseError("--k must be >= 2");
    if (ds.X.rows() < req.k) throw ParseError("--k exceeds the number of data rows");

    std::vector<MetricsReport> reports;
    for (Method method : cfg.methods) {
        MethodConfig mc;
        mc.method = method;
        mc.spec = cfg.kernel;
        mc.m = cfg.basis.m;
        mc.mode = cfg.basis.mode;
        mc.extension = cfg.basis.extension;
        mc.sphere = cfg.basis.sphere;
        mc.sphere_spectral_dim = cfg.basis.spectral_dim;
        mc.theta0 = cfg.theta;
        mc.optimize = cfg.optimize;
        mc.center_y = cfg.data.center_y;
        mc.optimizer = cfg.optimizer;
        reports.push_back(kfold_cv(ds.X, ds.y, mc, req.k, req.seed, req.smse_verbatim));
    }

    json out = {{"k", req.k},
                {"seed", req.seed},
                {"n", ds.X.rows()},
                {"smse_normalization", req.smse_verbatim ? "sum over test points (no 1/n*)" : "mean over test points (1/n*)"},
                {"msll_baseline", "none"},
                {"methods", json::array()}};
    for (const auto& r : reports) out["methods"].push_back(report_to_json(r));
    detail::write_json(out, req.out);

    const std::string sweep = !req.sweep.empty() ? req.sweep : !cfg.sweep_csv.empty() ? cfg.sweep_csv
                                                                                       : detail::sibling(req.out, ".sweep.csv");
    auto f = detail::open_out(sweep);
    f << "method,m,seed,fold,smse,msll,seconds_precompute,seconds_train,seconds_predict\n";
    f << std::setprecision(17);
    for (const auto& r : reports)
        for (const auto& fr : r.folds)
            f << r.method << ',' << r.m << ',' << r.seed << ',' << fr.fold << ',' << fr.smse << ',' << fr.msll << ','
              << fr.seconds_precompute << ',' << fr.seconds_train << ',' << fr.seconds_predict << '\n';

    table << std::left << std::setw(14) << "method" << std::setw(8) << "m" << std::setw(22) << "smse (mean +- sd)"
          << "msll (mean +- sd)\n";
    for (const auto& r : reports) {
        std::ostringstream s1, s2;
        s1 << std::fixed << std::setprecision(4) << r.smse_mean << " +- " << r.smse_std;
        s2 << std::fixed << std::setprecision(4) << r.msll_mean << " +- " << r.msll_std;
        table << std::left << std::setw(14) << r.method << std::setw(8) << r.m << std::setw(22) << s1.str() << s2.str() << '\n';
    }
    return reports;
}

// ---------------------------------------------------------------------------

struct SampleRequest {
    std::string config, grid, out;
    std::uint64_t seed = 0;
    int draws = 1;
    Overrides overrides;
};

/// Prior draws on the grid points; columns: inputs, draw_0, draw_1, ...
inline Eigen::MatrixXd run_sample(const SampleRequest& req) {
    const Config cfg = load_config(req.config, req.overrides);
    if (!cfg.theta) throw ParseError("sample needs a hyperparameters section");
    if (req.draws < 1) throw ParseError("--draws must be >= 1");
    const Table t = read_table_file(req.grid);
    const Eigen::MatrixXd& X = t.values;
    const Domain domain = make_domain(cfg.basis, X);
    detail::check_inputs(domain, X);
    const Basis basis = build_basis(domain, cfg.basis.m, cfg.basis.mode);
    Eigen::MatrixXd draws(X.rows(), req.draws);
    for (int s = 0; s < req.draws; ++s)
        draws.col(s) = sample_prior(basis, cfg.kernel, *cfg.theta, X, req.seed + static_cast<std::uint64_t>(s));
    std::vector<std::string> names = t.names;
    for (int s = 0; s < req.draws; ++s) names.push_back("draw_" + std::to_string(s));
    Eigen::MatrixXd out(X.rows(), X.cols() + req.draws);
    out << X, draws;
    auto f = detail::open_out(req.out);
    write_table(f, names, out);
    return draws;
}

// ---------------------------------------------------------------------------

struct DiagnoseRequest {
    std::string config, out;
    Overrides overrides;
};

/// Tail terms and grid sup errors over an (m, L) sweep, the fitted boundary
/// constant, and a learning-curve table.
inline json run_diagnose(const DiagnoseRequest& req) {
    const Config cfg = load_config(req.config, req.overrides);
    if (!cfg.theta) throw ParseError("diagnose needs a hyperparameters section");
    const auto& d = cfg.diagnose;
    if (d.dim < 1 || d.ms.empty() || d.Ls.empty()) throw ParseError("diagnose needs dim >= 1 and non-empty m and L lists");
    GridSpec grid;
    grid.points_per_dim = d.grid_points;
    grid.half_width = d.grid_half_width;
    const auto sweep = convergence_sweep(cfg.kernel, *cfg.theta, d.dim, d.ms, d.Ls, d.mode, grid);
    const double C = fit_bound_constant(sweep.front());
    json rows = json::array();
    for (const auto& e : sweep) {
        const double bound = C / e.L + e.tail;
        rows.push_back({{"m", e.m}, {"L", e.L}, {"sup_error", e.sup_error}, {"tail", e.tail}, {"bound", bound},
                        {"within_bound", e.sup_error <= bound}});
    }
    const Basis lc_basis = build_basis(Domain::symmetric(d.dim, d.learning_curve_L), d.learning_curve_m, d.mode);
    json curve = json::array();
    for (double n : d.ns) curve.push_back({{"n", n}, {"epsilon_ov", learning_curve_ov(lc_basis, cfg.kernel, *cfg.theta, n)}});
    json out = {{"kernel", kernel_to_json(cfg.kernel)},
                {"hyperparameters", hyperparams_to_json(*cfg.theta)},
                {"dim", d.dim},
                {"mode", to_string(d.mode)},
                {"grid", {{"points_per_dim", d.grid_points}, {"half_width", d.grid_half_width}}},
                {"bound_constant", C},
                {"sweep", rows},
                {"learning_curve", {{"m", d.learning_curve_m}, {"L", d.learning_curve_L}, {"values", curve}}}};
    detail::write_json(out, req.out);
    return out;
}

}  // namespace hgp::cli
