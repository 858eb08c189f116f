#pragma once

// Run configuration: one JSON file with sections
//   data, kernel, basis, hyperparameters, optimizer, diagnose, output.
// Every key is optional; command-line flags override file values.

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hgp/basis.hpp"
#include "hgp/error.hpp"
#include "hgp/eval.hpp"
#include "hgp/kernels.hpp"
#include "hgp/train.hpp"

namespace hgp::cli {

using json = nlohmann::json;

struct DataConfig {
    std::string target;  // empty: last column
    bool center_y = false;
};

struct BasisConfig {
    std::int64_t m = 32;
    SelectionMode mode = SelectionMode::Sorted;
    double extension = 0.1;
    bool sphere = false;
    int spectral_dim = 2;
    std::optional<Eigen::VectorXd> center;  // explicit box, else derived from data
    std::optional<Eigen::VectorXd> half_widths;
};

struct DiagnoseConfig {
    int dim = 1;
    std::vector<std::int64_t> ms = {16, 32, 64, 128};
    std::vector<double> Ls = {1.0, 2.0, 4.0};
    SelectionMode mode = SelectionMode::Sorted;
    int grid_points = 101;
    double grid_half_width = 0.8;
    std::vector<double> ns = {0, 1, 10, 100, 1000, 10000};
    std::int64_t learning_curve_m = 32;
    double learning_curve_L = 1.0;
};

struct Config {
    DataConfig data;
    KernelSpec kernel;
    BasisConfig basis;
    std::optional<Hyperparams> theta;  // initial (fit/cv) or fixed (sample/diagnose)
    bool optimize = true;
    OptimizerOptions optimizer;
    std::vector<Method> methods = {Method::ReducedRank};
    DiagnoseConfig diagnose;
    std::string sweep_csv;  // output.sweep_csv
    std::string report;     // output.report
};

namespace detail {

inline ParseError json_error(const std::string& source, const std::string& text, std::size_t byte, const std::string& what) {
    long line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return ParseError(source + ": " + what, line, col);
}

template <typename T>
T get(const json& j, const char* key, const std::string& where) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ParseError("config " + where + "." + key + ": " + e.what());
    }
}

inline Eigen::VectorXd get_vector(const json& j, const char* key, const std::string& where) {
    const auto v = get<std::vector<double>>(j, key, where);
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ParseError("config " + where + ": expected an object");
    for (const auto& [k, _] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || k == a;
        if (!ok) throw ParseError("config " + where + ": unknown key '" + k + "'");
    }
}

}  // namespace detail

inline SelectionMode parse_mode(const std::string& s) {
    if (s == "sorted") return SelectionMode::Sorted;
    if (s == "grid") return SelectionMode::Grid;
    throw ParseError("unknown basis mode '" + s + "' (expected sorted or grid)");
}

inline const char* to_string(SelectionMode m) { return m == SelectionMode::Grid ? "grid" : "sorted"; }

/// {"type": "se"} | {"type": "matern", "nu": 1.5} | {"type": "sum", "terms": [...]}.
inline KernelSpec parse_kernel(const json& j) {
    if (!j.is_object()) throw ParseError("config kernel: expected an object");
    const auto type = detail::get<std::string>(j, "type", "kernel");
    if (type == "se" || type == "squared_exponential") {
        detail::check_keys(j, "kernel", {"type"});
        return KernelSpec::squared_exponential();
    }
    if (type == "matern") {
        detail::check_keys(j, "kernel", {"type", "nu"});
        return KernelSpec::matern(detail::get<double>(j, "nu", "kernel"));
    }
    if (type == "sum") {
        detail::check_keys(j, "kernel", {"type", "terms"});
        const json& terms = j.at("terms");
        if (!terms.is_array() || terms.empty()) throw ParseError("config kernel.terms: expected a non-empty array");
        std::vector<KernelSpec> parts;
        for (const auto& t : terms) parts.push_back(parse_kernel(t));
        return KernelSpec::sum(parts);
    }
    throw ParseError("config kernel.type: unknown kernel '" + type + "' (expected se, matern or sum)");
}

inline json kernel_to_json(const KernelSpec& spec) {
    auto one = [](const KernelTerm& t) {
        return t.family == Family::SquaredExponential ? json{{"type", "se"}} : json{{"type", "matern"}, {"nu", t.nu}};
    };
    if (!spec.is_sum()) return one(spec.terms().front());
    json terms = json::array();
    for (const auto& t : spec.terms()) terms.push_back(one(t));
    return {{"type", "sum"}, {"terms", terms}};
}

/// {"terms": [{"magnitude": s2, "lengthscale": l}, ...], "noise": v}
inline Hyperparams parse_hyperparams(const json& j) {
    detail::check_keys(j, "hyperparameters", {"terms", "noise"});
    Hyperparams h;
    h.terms.clear();
    const json& terms = j.at("terms");
    if (!terms.is_array() || terms.empty()) throw ParseError("config hyperparameters.terms: expected a non-empty array");
    for (const auto& t : terms) {
        detail::check_keys(t, "hyperparameters.terms[]", {"magnitude", "lengthscale"});
        h.terms.push_back({detail::get<double>(t, "magnitude", "hyperparameters.terms[]"),
                           detail::get<double>(t, "lengthscale", "hyperparameters.terms[]")});
    }
    h.noise = detail::get<double>(j, "noise", "hyperparameters");
    return h;
}

inline json hyperparams_to_json(const Hyperparams& h) {
    json terms = json::array();
    for (const auto& t : h.terms) terms.push_back({{"magnitude", t.magnitude}, {"lengthscale", t.lengthscale}});
    return {{"terms", terms}, {"noise", h.noise}};
}

inline Config parse_config(const json& j) {
    Config c;
    c.kernel = KernelSpec::squared_exponential();
    detail::check_keys(j, "", {"data", "kernel", "basis", "hyperparameters", "optimizer", "method", "methods", "diagnose",
                               "output"});
    if (j.contains("data")) {
        const json& d = j["data"];
        detail::check_keys(d, "data", {"target", "center_y"});
        if (d.contains("target")) c.data.target = detail::get<std::string>(d, "target", "data");
        if (d.contains("center_y")) c.data.center_y = detail::get<bool>(d, "center_y", "data");
    }
    if (j.contains("kernel")) c.kernel = parse_kernel(j["kernel"]);
    if (j.contains("basis")) {
        const json& b = j["basis"];
        detail::check_keys(b, "basis", {"m", "mode", "extension", "domain", "spectral_dim", "center", "half_widths"});
        if (b.contains("m")) c.basis.m = detail::get<std::int64_t>(b, "m", "basis");
        if (b.contains("mode")) c.basis.mode = parse_mode(detail::get<std::string>(b, "mode", "basis"));
        if (b.contains("extension")) c.basis.extension = detail::get<double>(b, "extension", "basis");
        if (b.contains("domain")) {
            const auto dom = detail::get<std::string>(b, "domain", "basis");
            if (dom == "sphere") c.basis.sphere = true;
            else if (dom != "box") throw ParseError("config basis.domain: expected box or sphere, got '" + dom + "'");
        }
        if (b.contains("spectral_dim")) c.basis.spectral_dim = detail::get<int>(b, "spectral_dim", "basis");
        if (b.contains("center") != b.contains("half_widths"))
            throw ParseError("config basis: center and half_widths must be given together");
        if (b.contains("center")) {
            c.basis.center = detail::get_vector(b, "center", "basis");
            c.basis.half_widths = detail::get_vector(b, "half_widths", "basis");
        }
    }
    if (j.contains("hyperparameters")) c.theta = parse_hyperparams(j["hyperparameters"]);
    if (j.contains("optimizer")) {
        const json& o = j["optimizer"];
        detail::check_keys(o, "optimizer", {"enabled", "max_iters", "tol_f", "tol_x", "restarts", "seed"});
        if (o.contains("enabled")) c.optimize = detail::get<bool>(o, "enabled", "optimizer");
        if (o.contains("max_iters")) c.optimizer.max_iters = detail::get<int>(o, "max_iters", "optimizer");
        if (o.contains("tol_f")) c.optimizer.tol_f = detail::get<double>(o, "tol_f", "optimizer");
        if (o.contains("tol_x")) c.optimizer.tol_x = detail::get<double>(o, "tol_x", "optimizer");
        if (o.contains("restarts")) c.optimizer.restarts = detail::get<int>(o, "restarts", "optimizer");
        if (o.contains("seed")) c.optimizer.seed = detail::get<std::uint64_t>(o, "seed", "optimizer");
    }
    if (j.contains("method") && j.contains("methods")) throw ParseError("config: give either method or methods, not both");
    try {
        if (j.contains("method")) c.methods = {parse_method(detail::get<std::string>(j, "method", ""))};
        if (j.contains("methods")) {
            c.methods.clear();
            for (const auto& s : detail::get<std::vector<std::string>>(j, "methods", "")) c.methods.push_back(parse_method(s));
            if (c.methods.empty()) throw ParseError("config methods: expected at least one method");
        }
    } catch (const InvalidArgument& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    if (j.contains("diagnose")) {
        const json& d = j["diagnose"];
        detail::check_keys(d, "diagnose", {"dim", "m", "L", "mode", "grid_points", "grid_half_width", "n",
                                           "learning_curve_m", "learning_curve_L"});
        auto& g = c.diagnose;
        if (d.contains("dim")) g.dim = detail::get<int>(d, "dim", "diagnose");
        if (d.contains("m")) g.ms = detail::get<std::vector<std::int64_t>>(d, "m", "diagnose");
        if (d.contains("L")) g.Ls = detail::get<std::vector<double>>(d, "L", "diagnose");
        if (d.contains("mode")) g.mode = parse_mode(detail::get<std::string>(d, "mode", "diagnose"));
        if (d.contains("grid_points")) g.grid_points = detail::get<int>(d, "grid_points", "diagnose");
        if (d.contains("grid_half_width")) g.grid_half_width = detail::get<double>(d, "grid_half_width", "diagnose");
        if (d.contains("n")) g.ns = detail::get<std::vector<double>>(d, "n", "diagnose");
        if (d.contains("learning_curve_m")) g.learning_curve_m = detail::get<std::int64_t>(d, "learning_curve_m", "diagnose");
        if (d.contains("learning_curve_L")) g.learning_curve_L = detail::get<double>(d, "learning_curve_L", "diagnose");
    }
    if (j.contains("output")) {
        const json& o = j["output"];
        detail::check_keys(o, "output", {"report", "sweep_csv"});
        if (o.contains("report")) c.report = detail::get<std::string>(o, "report", "output");
        if (o.contains("sweep_csv")) c.sweep_csv = detail::get<std::string>(o, "sweep_csv", "output");
    }
    if (c.theta) {
        try {
            c.theta->validate(c.kernel);
        } catch (const InvalidArgument& e) {
            throw ParseError(std::string("config hyperparameters: ") + e.what());
        }
    }
    return c;
}

inline json parse_json_text(const std::string& text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw detail::json_error(source, text, e.byte, e.what());
    }
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_json_text(ss.str(), path);
}

inline Config read_config(const std::string& path) { return parse_config(read_json_file(path)); }

/// Domain for the configured basis: sphere, explicit box, or data bounding box.
inline Domain make_domain(const BasisConfig& b, const Eigen::Ref<const Eigen::MatrixXd>& X) {
    if (b.sphere) return Domain::sphere(b.spectral_dim);
    if (b.center) {
        if (b.center->size() != X.cols())
            throw InvalidArgument("basis.center has " + std::to_string(b.center->size()) + " entries but data has " +
                                  std::to_string(X.cols()) + " input columns");
        return Domain::box(*b.center, *b.half_widths);
    }
    return domain_from_data(X, b.extension);
}

}  // namespace hgp::cli
