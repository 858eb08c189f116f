#pragma once

// Minimal CSV reader/writer for numeric tables with a header row.

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "hgp/error.hpp"

namespace hgp::cli {

struct Table {
    std::vector<std::string> names;
    Eigen::MatrixXd values;  // rows x names.size()

    [[nodiscard]] long column(const std::string& name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return static_cast<long>(i);
        return -1;
    }
};

struct Dataset {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    std::vector<std::string> input_names;
    std::string target_name;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

inline bool blank(std::string_view s) { return trim(s).empty(); }

}  // namespace detail

/// Parse a header + numeric rows. Line and column numbers in errors are 1-based.
inline Table read_table(std::istream& in, const std::string& source = "<input>") {
    Table t;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!detail::blank(line)) break;
    }
    if (detail::blank(line)) throw ParseError(source + ": empty file, expected a header row", lineno);
    for (auto f : detail::split(line)) {
        const long col = static_cast<long>(t.names.size()) + 1;
        if (f.empty()) throw ParseError(source + ": empty header name", lineno, col);
        for (const auto& prev : t.names)
            if (prev == f) throw ParseError(source + ": duplicated header name '" + std::string(f) + "'", lineno, col);
        t.names.emplace_back(f);
    }
    const std::size_t width = t.names.size();
    std::vector<double> flat;
    Eigen::Index rows = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::blank(line)) continue;
        const auto fields = detail::split(line);
        if (fields.size() != width)
            throw ParseError(source + ": expected " + std::to_string(width) + " fields, found " +
                                 std::to_string(fields.size()),
                             lineno, static_cast<long>(std::min(fields.size(), width)) + 1);
        for (std::size_t c = 0; c < width; ++c) {
            const auto f = fields[c];
            double v = 0.0;
            const char* first = f.data();
            const char* last = f.data() + f.size();
            if (!f.empty() && *first == '+') ++first;
            const auto [ptr, ec] = std::from_chars(first, last, v);
            const long col = static_cast<long>(c) + 1;
            if (f.empty() || ec != std::errc() || ptr != last)
                throw ParseError(source + ": cannot parse '" + std::string(f) + "' as a number", lineno, col);
            if (!std::isfinite(v)) throw ParseError(source + ": non-finite value '" + std::string(f) + "'", lineno, col);
            flat.push_back(v);
        }
        ++rows;
    }
    if (rows == 0) throw ParseError(source + ": no data rows", lineno);
    t.values = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        flat.data(), rows, static_cast<Eigen::Index>(width));
    return t;
}

inline Table read_table_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    return read_table(in, path);
}

/// Split a table into inputs and target. An empty target name selects the last column.
inline Dataset to_dataset(const Table& t, const std::string& target = "") {
    if (t.names.size() < 2) throw ParseError("dataset needs at least one input column and a target column");
    const long tc = target.empty() ? static_cast<long>(t.names.size()) - 1 : t.column(target);
    if (tc < 0) throw ParseError("target column '" + target + "' not found in header");
    Dataset ds;
    ds.target_name = t.names[static_cast<std::size_t>(tc)];
    std::vector<Eigen::Index> cols;
    for (std::size_t c = 0; c < t.names.size(); ++c) {
        if (static_cast<long>(c) == tc) continue;
        cols.push_back(static_cast<Eigen::Index>(c));
        ds.input_names.push_back(t.names[c]);
    }
    ds.X = t.values(Eigen::all, cols);
    ds.y = t.values.col(tc);
    return ds;
}

/// Input columns for prediction: the named columns when all are present, else
/// the leading `d` columns.
inline Eigen::MatrixXd select_inputs(const Table& t, const std::vector<std::string>& names) {
    const auto d = static_cast<Eigen::Index>(names.size());
    std::vector<Eigen::Index> cols;
    for (const auto& n : names) {
        const long c = t.column(n);
        if (c < 0) break;
        cols.push_back(c);
    }
    if (static_cast<Eigen::Index>(cols.size()) == d) return t.values(Eigen::all, cols);
    if (t.values.cols() < d)
        throw ParseError("expected " + std::to_string(d) + " input columns, found " + std::to_string(t.values.cols()));
    return t.values.leftCols(d);
}

/// Write with round-trip precision (17 significant digits).
inline void write_table(std::ostream& out, const std::vector<std::string>& names, const Eigen::Ref<const Eigen::MatrixXd>& v) {
    for (std::size_t i = 0; i < names.size(); ++i) out << (i ? "," : "") << names[i];
    out << '\n';
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
        for (Eigen::Index c = 0; c < v.cols(); ++c) out << (c ? "," : "") << v(r, c);
        out << '\n';
    }
}

}  // namespace hgp::cli
