#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "hgp/error.hpp"

namespace hgp::quad {

struct Result {
    double value = 0.0;
    double error = 0.0;
    int evaluations = 0;
};

struct Options {
    double rel_tol = 1e-10;
    double abs_tol = 1e-300;
    int max_intervals = 2000;
};

namespace detail {

// Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15).
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

template <typename F>
Segment kronrod15(F& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double gauss = fc * kWg[3];
    double kronrod = fc * kWgk[7];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        const double sum = f(center - dx) + f(center + dx);
        kronrod += kWgk[j] * sum;
        if (j % 2 == 1) gauss += kWg[j / 2] * sum;
    }
    return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod integration of f over [a, b].
template <typename F>
Result integrate(F f, double a, double b, const Options& opts = {}) {
    if (!(std::isfinite(a) && std::isfinite(b))) throw InvalidArgument("integrate: non-finite limits");
    if (a == b) return {};
    std::priority_queue<detail::Segment> heap;
    auto first = detail::kronrod15(f, a, b);
    double total = first.value;
    double err = first.error;
    heap.push(first);
    int evals = 15;
    int intervals = 1;
    while (err > std::max(opts.abs_tol, opts.rel_tol * std::abs(total))) {
        if (intervals >= opts.max_intervals) {
            throw QuadratureError("integrate: no convergence after " + std::to_string(intervals) +
                                  " subintervals (estimate " + std::to_string(total) + " +- " +
                                  std::to_string(err) + ")");
        }
        const auto worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        const auto left = detail::kronrod15(f, worst.a, mid);
        const auto right = detail::kronrod15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        evals += 30;
        ++intervals;
        // Round-off floor: once the running error is at machine level there is nothing left to refine.
        if (err <= 50.0 * std::numeric_limits<double>::epsilon() * std::abs(total)) break;
    }
    // Re-sum from scratch to shed accumulated update drift.
    total = 0.0;
    err = 0.0;
    while (!heap.empty()) {
        total += heap.top().value;
        err += heap.top().error;
        heap.pop();
    }
    return {total, err, evals};
}

/// Integral of f over [a, inf) via the map x = a + scale * t / (1 - t).
/// `scale` should be near the width over which f decays.
template <typename F>
Result integrate_to_infinity(F f, double a, const Options& opts = {}, double scale = 1.0) {
    if (!(scale > 0.0)) throw InvalidArgument("integrate_to_infinity: scale must be > 0");
    auto mapped = [&](double t) {
        if (t >= 1.0) return 0.0;
        const double s = 1.0 - t;
        const double v = scale * f(a + scale * t / s) / (s * s);
        return std::isfinite(v) ? v : 0.0;
    };
    return integrate(mapped, 0.0, 1.0, opts);
}

}  // namespace hgp::quad
