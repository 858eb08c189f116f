#pragma once

// Fitted-model persistence. Numeric arrays are stored as base64 of
// little-endian IEEE-754 doubles so that a round trip is bit-exact.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hgp/basis.hpp"
#include "hgp/cli/config.hpp"
#include "hgp/error.hpp"
#include "hgp/kernels.hpp"
#include "hgp/model.hpp"

namespace hgp::cli {

inline constexpr int kArtifactVersion = 1;
inline constexpr const char* kArtifactFormat = "hilbert-gp-model";

struct ModelArtifact {
    KernelSpec spec;
    Hyperparams theta;
    FitState fit;
    std::vector<std::string> input_names;
    std::string target_name;
    double y_offset = 0.0;  // training mean removed before fitting (0 unless centered)
    std::uint64_t seed = 0;
    std::string mode = "sorted";
};

namespace base64 {

inline constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

inline std::string encode(const std::vector<std::uint8_t>& bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 2 < bytes.size(); i += 3) {
        const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += kAlphabet[(v >> 6) & 63];
        out += kAlphabet[v & 63];
    }
    if (i < bytes.size()) {
        std::uint32_t v = bytes[i] << 16;
        if (i + 1 < bytes.size()) v |= bytes[i + 1] << 8;
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += i + 1 < bytes.size() ? kAlphabet[(v >> 6) & 63] : '=';
        out += '=';
    }
    return out;
}

inline std::vector<std::uint8_t> decode(const std::string& text) {
    std::array<int, 256> table{};
    table.fill(-1);
    for (int k = 0; k < 64; ++k) table[static_cast<unsigned char>(kAlphabet[k])] = k;
    if (text.size() % 4 != 0) throw ParseError("base64: length is not a multiple of 4");
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        std::uint32_t v = 0;
        int pad = 0;
        for (int k = 0; k < 4; ++k) {
            const char c = text[i + k];
            if (c == '=' && i + 4 == text.size() && k >= 2) {
                ++pad;
                v <<= 6;
                continue;
            }
            if (pad > 0) throw ParseError("base64: data after padding");
            const int s = table[static_cast<unsigned char>(c)];
            if (s < 0) throw ParseError("base64: invalid character");
            v = (v << 6) | static_cast<std::uint32_t>(s);
        }
        out.push_back(static_cast<std::uint8_t>(v >> 16));
        if (pad < 2) out.push_back(static_cast<std::uint8_t>(v >> 8));
        if (pad < 1) out.push_back(static_cast<std::uint8_t>(v));
    }
    return out;
}

}  // namespace base64

/// Column-major doubles as base64 of little-endian bytes.
inline std::string encode_doubles(const double* data, std::size_t count) {
    std::vector<std::uint8_t> bytes(count * 8);
    for (std::size_t i = 0; i < count; ++i) {
        const auto bits = std::bit_cast<std::uint64_t>(data[i]);
        for (int b = 0; b < 8; ++b) bytes[i * 8 + b] = static_cast<std::uint8_t>(bits >> (8 * b));
    }
    return base64::encode(bytes);
}

inline std::vector<double> decode_doubles(const std::string& text) {
    const auto bytes = base64::decode(text);
    if (bytes.size() % 8 != 0) throw ParseError("encoded array length is not a multiple of 8 bytes");
    std::vector<double> out(bytes.size() / 8);
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[i * 8 + b]) << (8 * b);
        out[i] = std::bit_cast<double>(bits);
    }
    return out;
}

namespace detail {

inline json encode_matrix(const Eigen::MatrixXd& m) {
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", encode_doubles(m.data(), static_cast<std::size_t>(m.size()))}};
}

inline Eigen::MatrixXd decode_matrix(const json& j, const char* what) {
    const auto rows = get<Eigen::Index>(j, "rows", what);
    const auto cols = get<Eigen::Index>(j, "cols", what);
    const auto v = decode_doubles(get<std::string>(j, "data", what));
    if (rows < 0 || cols < 0 || static_cast<std::size_t>(rows * cols) != v.size())
        throw ParseError(std::string("model ") + what + ": shape does not match data length");
    return Eigen::Map<const Eigen::MatrixXd>(v.data(), rows, cols);
}

}  // namespace detail

inline json artifact_to_json(const ModelArtifact& a) {
    const Basis& b = a.fit.basis;
    json domain;
    if (b.domain.is_sphere()) {
        domain = {{"type", "sphere"}, {"spectral_dim", b.domain.sphere_shape().spectral_dim}};
    } else {
        domain = {{"type", "box"},
                  {"center", detail::encode_matrix(b.domain.rect().center)},
                  {"half_widths", detail::encode_matrix(b.domain.rect().half_widths)}};
    }
    json indices = json::array();
    for (const auto& idx : b.indices) {
        if (const auto* c = std::get_if<CartesianIndex>(&idx)) indices.push_back(c->j);
        else {
            const auto& s = std::get<SphericalIndex>(idx);
            indices.push_back({s.l, s.m});
        }
    }
    return {{"format", kArtifactFormat},
            {"version", kArtifactVersion},
            {"created_by", "hilbert-gp"},
            {"seed", a.seed},
            {"kernel", kernel_to_json(a.spec)},
            {"hyperparameters", hyperparams_to_json(a.theta)},
            {"theta_log", detail::encode_matrix(a.theta.to_log())},
            {"input_names", a.input_names},
            {"target_name", a.target_name},
            {"y_offset", detail::encode_matrix(Eigen::VectorXd::Constant(1, a.y_offset))},
            {"domain", domain},
            {"basis", {{"mode", a.mode}, {"indices", indices}, {"eigenvalues", detail::encode_matrix(b.eigenvalues)}}},
            {"gram", detail::encode_matrix(a.fit.gram)},
            {"proj", detail::encode_matrix(a.fit.proj)},
            {"yty", detail::encode_matrix(Eigen::VectorXd::Constant(1, a.fit.yty))},
            {"n", a.fit.n}};
}

inline ModelArtifact artifact_from_json(const json& j) {
    if (!j.is_object() || !j.contains("version")) throw ParseError("model file: missing mandatory 'version' field");
    if (!j.contains("format") || j["format"] != kArtifactFormat) throw ParseError("model file: not a hilbert-gp model");
    const int version = detail::get<int>(j, "version", "model");
    if (version != kArtifactVersion)
        throw ParseError("model file: format version " + std::to_string(version) + " is not supported (this build reads version " +
                         std::to_string(kArtifactVersion) + ")");
    ModelArtifact a;
    a.spec = parse_kernel(j.at("kernel"));
    const Eigen::VectorXd log_theta = detail::decode_matrix(j.at("theta_log"), "theta_log");
    if (log_theta.size() != static_cast<Eigen::Index>(2 * a.spec.size() + 1))
        throw ParseError("model file: hyperparameter count does not match kernel");
    a.theta = Hyperparams::from_log(log_theta);
    a.seed = detail::get<std::uint64_t>(j, "seed", "model");
    a.input_names = detail::get<std::vector<std::string>>(j, "input_names", "model");
    a.target_name = detail::get<std::string>(j, "target_name", "model");
    a.y_offset = detail::decode_matrix(j.at("y_offset"), "y_offset")(0, 0);

    const json& dj = j.at("domain");
    const auto dtype = detail::get<std::string>(dj, "type", "domain");
    std::optional<Domain> domain;
    if (dtype == "sphere") domain = Domain::sphere(detail::get<int>(dj, "spectral_dim", "domain"));
    else if (dtype == "box")
        domain = Domain::box(detail::decode_matrix(dj.at("center"), "domain.center"),
                             detail::decode_matrix(dj.at("half_widths"), "domain.half_widths"));
    else throw ParseError("model file: unknown domain type '" + dtype + "'");

    const json& bj = j.at("basis");
    a.mode = detail::get<std::string>(bj, "mode", "basis");
    Basis basis{*domain, {}, detail::decode_matrix(bj.at("eigenvalues"), "basis.eigenvalues")};
    const json& idx = bj.at("indices");
    if (!idx.is_array() || static_cast<Eigen::Index>(idx.size()) != basis.eigenvalues.size())
        throw ParseError("model file: basis index count does not match eigenvalues");
    for (const auto& e : idx) {
        const auto v = e.get<std::vector<int>>();
        if (domain->is_sphere()) {
            if (v.size() != 2) throw ParseError("model file: sphere index must be [l, m]");
            basis.indices.emplace_back(SphericalIndex{v[0], v[1]});
        } else {
            if (static_cast<int>(v.size()) != domain->input_dim()) throw ParseError("model file: index dimension mismatch");
            basis.indices.emplace_back(CartesianIndex{v});
        }
    }
    a.fit.basis = std::move(basis);
    a.fit.gram = detail::decode_matrix(j.at("gram"), "gram");
    a.fit.proj = detail::decode_matrix(j.at("proj"), "proj");
    a.fit.yty = detail::decode_matrix(j.at("yty"), "yty")(0, 0);
    a.fit.n = detail::get<Eigen::Index>(j, "n", "model");
    const Eigen::Index m = a.fit.basis.size();
    if (a.fit.gram.rows() != m || a.fit.gram.cols() != m || a.fit.proj.size() != m)
        throw ParseError("model file: gram/proj shapes do not match the basis");
    if (static_cast<int>(a.input_names.size()) != a.fit.basis.domain.input_dim())
        throw ParseError("model file: input name count does not match domain dimension");
    return a;
}

inline void write_artifact(const ModelArtifact& a, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << artifact_to_json(a).dump(2) << '\n';
}

inline ModelArtifact read_artifact(const std::string& path) {
    try {
        return artifact_from_json(read_json_file(path));
    } catch (const json::exception& e) {
        throw ParseError("model file '" + path + "': " + e.what());
    }
}

}  // namespace hgp::cli
