#pragma once

// Dirichlet Laplacian eigenbases on hyperrectangles and real spherical
// harmonics on the unit sphere, plus the reduced-rank kernel they induce:
//
//   k(x, x') ~ sum_j S(sqrt(lambda_j)) phi_j(x) phi_j(x').

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "hgp/error.hpp"
#include "hgp/kernels.hpp"
#include "hgp/log.hpp"
#include "hgp/spherical_harmonics.hpp"

namespace hgp {

struct Hyperrectangle {
    Eigen::VectorXd center;
    Eigen::VectorXd half_widths;
};

/// Unit sphere; inputs are (latitude, longitude) in radians.
struct Sphere {
    /// Dimension used when evaluating the spectral density (2 = intrinsic, 3 = ambient).
    int spectral_dim = 2;
};

class Domain {
public:
    Domain() : shape_(Sphere{}) {}

    static Domain box(Eigen::VectorXd center, Eigen::VectorXd half_widths) {
        if (center.size() < 1 || center.size() != half_widths.size())
            throw InvalidArgument("domain center and half-widths must be non-empty and equally sized");
        for (Eigen::Index k = 0; k < half_widths.size(); ++k) {
            if (!std::isfinite(center(k)) || !std::isfinite(half_widths(k)) || !(half_widths(k) > 0.0))
                throw InvalidArgument("domain half-width " + std::to_string(k) + " must be finite and > 0");
        }
        return Domain(Hyperrectangle{std::move(center), std::move(half_widths)});
    }

    /// Symmetric interval/cube [-L, L]^d.
    static Domain symmetric(int d, double half_width) {
        return box(Eigen::VectorXd::Zero(d), Eigen::VectorXd::Constant(d, half_width));
    }

    static Domain sphere(int spectral_dim = 2) {
        if (spectral_dim < 1) throw InvalidArgument("sphere spectral dimension must be >= 1");
        return Domain(Sphere{spectral_dim});
    }

    [[nodiscard]] bool is_sphere() const { return std::holds_alternative<Sphere>(shape_); }
    [[nodiscard]] const Hyperrectangle& rect() const { return std::get<Hyperrectangle>(shape_); }
    [[nodiscard]] const Sphere& sphere_shape() const { return std::get<Sphere>(shape_); }

    [[nodiscard]] int input_dim() const {
        return is_sphere() ? 2 : static_cast<int>(rect().center.size());
    }
    [[nodiscard]] int spectral_dim() const { return is_sphere() ? sphere_shape().spectral_dim : input_dim(); }

    /// Smallest half-width (the L of the convergence bounds).
    [[nodiscard]] double min_half_width() const { return is_sphere() ? 1.0 : rect().half_widths.minCoeff(); }

    /// Throws OutOfDomain for the first coordinate outside the closed domain.
    void check_point(const Eigen::Ref<const Eigen::RowVectorXd>& x, long row) const {
        if (x.size() != input_dim())
            throw InvalidArgument("input has " + std::to_string(x.size()) + " columns, domain expects " +
                                  std::to_string(input_dim()));
        if (is_sphere()) {
            const double lat = x(0), lon = x(1);
            if (!std::isfinite(lat) || std::abs(lat) > 0.5 * std::numbers::pi)
                throw OutOfDomain(row, 0, "row " + std::to_string(row) + ": latitude outside [-pi/2, pi/2]");
            if (!std::isfinite(lon) || std::abs(lon) > 2.0 * std::numbers::pi)
                throw OutOfDomain(row, 1, "row " + std::to_string(row) + ": longitude outside [-2pi, 2pi]");
            return;
        }
        const auto& r = rect();
        for (Eigen::Index k = 0; k < x.size(); ++k) {
            if (!std::isfinite(x(k)) || std::abs(x(k) - r.center(k)) > r.half_widths(k)) {
                throw OutOfDomain(row, static_cast<long>(k),
                                  "row " + std::to_string(row) + ", dimension " + std::to_string(k) + ": value " +
                                      std::to_string(x(k)) + " outside domain [" +
                                      std::to_string(r.center(k) - r.half_widths(k)) + ", " +
                                      std::to_string(r.center(k) + r.half_widths(k)) + "]");
            }
        }
    }

private:
    explicit Domain(std::variant<Hyperrectangle, Sphere> s) : shape_(std::move(s)) {}
    std::variant<Hyperrectangle, Sphere> shape_;
};

/// Bounding box of the data, widened by `extension` of the half-range on each side.
inline Domain domain_from_data(const Eigen::Ref<const Eigen::MatrixXd>& X, double extension = 0.1) {
    if (X.rows() < 1 || X.cols() < 1) throw InvalidArgument("domain_from_data: empty input matrix");
    if (!X.allFinite()) throw InvalidArgument("domain_from_data: non-finite input");
    if (!(extension >= 0.0) || !std::isfinite(extension)) throw InvalidArgument("extension must be >= 0");
    const Eigen::Index d = X.cols();
    const Eigen::VectorXd lo = X.colwise().minCoeff().transpose();
    const Eigen::VectorXd hi = X.colwise().maxCoeff().transpose();
    const Eigen::VectorXd range = hi - lo;
    Eigen::VectorXd center = 0.5 * (lo + hi);
    Eigen::VectorXd half(d);
    for (Eigen::Index k = 0; k < d; ++k) {
        if (range(k) > 0.0) {
            half(k) = (1.0 + extension) * 0.5 * range(k);
        } else {
            double other = 1.0;
            for (Eigen::Index q = 0; q < d; ++q)
                if (q != k) other = std::max(other, range(q));
            half(k) = extension * other;
            if (!(half(k) > 0.0))
                throw InvalidArgument("dimension " + std::to_string(k) +
                                      " has zero range and extension 0; cannot build a domain");
        }
    }
    if (extension == 0.0) warn("domain boundary coincides with the data range; boundary points are pinned to zero");
    return Domain::box(std::move(center), std::move(half));
}

// ---------------------------------------------------------------------------

struct CartesianIndex {
    std::vector<int> j;
    auto operator<=>(const CartesianIndex&) const = default;
};

struct SphericalIndex {
    int l = 0;
    int m = 0;
    auto operator<=>(const SphericalIndex&) const = default;
};

using EigenIndex = std::variant<CartesianIndex, SphericalIndex>;

enum class SelectionMode { Sorted, Grid };

/// A truncated Laplacian eigenbasis. Immutable after construction.
struct Basis {
    Domain domain;
    std::vector<EigenIndex> indices;
    Eigen::VectorXd eigenvalues;  // non-decreasing

    [[nodiscard]] Eigen::Index size() const { return eigenvalues.size(); }
    [[nodiscard]] int spectral_dim() const { return domain.spectral_dim(); }

    /// Eigenvalue of a Cartesian multi-index on this (rectangular) domain.
    [[nodiscard]] static double cartesian_eigenvalue(const Hyperrectangle& r, const std::vector<int>& j) {
        double lam = 0.0;
        for (std::size_t k = 0; k < j.size(); ++k) {
            const double w = std::numbers::pi * j[k] / (2.0 * r.half_widths(static_cast<Eigen::Index>(k)));
            lam += w * w;
        }
        return lam;
    }
};

namespace detail {

inline constexpr std::int64_t kMaxBasisSize = 20'000'000;

struct Candidate {
    double lambda;
    std::vector<int> j;
    // std::priority_queue is a max-heap; invert so the smallest (lambda, index) pops first.
    bool operator<(const Candidate& o) const {
        if (lambda != o.lambda) return lambda > o.lambda;
        return j > o.j;
    }
};

inline Basis sorted_cartesian(const Domain& domain, std::int64_t m) {
    const auto& r = domain.rect();
    const auto d = static_cast<std::size_t>(r.center.size());
    Basis b{domain, {}, Eigen::VectorXd(m)};
    b.indices.reserve(static_cast<std::size_t>(m));
    std::priority_queue<Candidate> frontier;
    std::set<std::vector<int>> seen;
    std::vector<int> start(d, 1);
    frontier.push({Basis::cartesian_eigenvalue(r, start), start});
    seen.insert(start);
    for (std::int64_t i = 0; i < m; ++i) {
        Candidate c = frontier.top();
        frontier.pop();
        b.eigenvalues(i) = c.lambda;
        for (std::size_t k = 0; k < d; ++k) {
            std::vector<int> next = c.j;
            if (next[k] == std::numeric_limits<int>::max()) throw ResourceError("eigen index overflow");
            ++next[k];
            if (seen.insert(next).second) frontier.push({Basis::cartesian_eigenvalue(r, next), next});
        }
        b.indices.emplace_back(CartesianIndex{std::move(c.j)});
    }
    return b;
}

inline Basis grid_cartesian(const Domain& domain, std::int64_t m) {
    const auto& r = domain.rect();
    const auto d = static_cast<int>(r.center.size());
    const auto side = static_cast<int>(std::llround(std::pow(static_cast<double>(m), 1.0 / d)));
    std::int64_t total = 1;
    for (int k = 0; k < d; ++k) total *= side;
    if (total != m)
        throw InvalidArgument("grid mode needs m = mhat^d; got m=" + std::to_string(m) + " for d=" + std::to_string(d));
    std::vector<Candidate> all;
    all.reserve(static_cast<std::size_t>(m));
    std::vector<int> j(static_cast<std::size_t>(d), 1);
    for (std::int64_t i = 0; i < m; ++i) {
        all.push_back({Basis::cartesian_eigenvalue(r, j), j});
        for (int k = d - 1; k >= 0; --k) {
            if (++j[static_cast<std::size_t>(k)] <= side) break;
            j[static_cast<std::size_t>(k)] = 1;
        }
    }
    std::sort(all.begin(), all.end(), [](const Candidate& a, const Candidate& b) { return b < a; });
    Basis b{domain, {}, Eigen::VectorXd(m)};
    for (std::int64_t i = 0; i < m; ++i) {
        b.eigenvalues(i) = all[static_cast<std::size_t>(i)].lambda;
        b.indices.emplace_back(CartesianIndex{std::move(all[static_cast<std::size_t>(i)].j)});
    }
    return b;
}

inline Basis spherical(const Domain& domain, std::int64_t m) {
    const auto side = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<double>(m))));
    if (side * side != m)
        throw InvalidArgument("sphere basis needs m = (l_max+1)^2 (complete degree levels); got m=" + std::to_string(m));
    const int l_max = static_cast<int>(side - 1);
    if (l_max > sph::kMaxDegree) throw InvalidArgument("sphere basis degree l_max capped at 100");
    Basis b{domain, {}, Eigen::VectorXd(m)};
    Eigen::Index i = 0;
    for (int l = 0; l <= l_max; ++l) {
        for (int mo = -l; mo <= l; ++mo) {
            b.indices.emplace_back(SphericalIndex{l, mo});
            b.eigenvalues(i++) = static_cast<double>(l) * (l + 1);
        }
    }
    return b;
}

/// sin(pi t) with exact zeros at integer t.
inline double sinpi(double t) {
    double r = std::fmod(t, 2.0);  // (-2, 2)
    if (r > 1.0) r -= 2.0;
    if (r < -1.0) r += 2.0;
    if (r == 0.0 || r == 1.0 || r == -1.0) return 0.0;
    if (r > 0.5) r = 1.0 - r;
    if (r < -0.5) r = -1.0 - r;
    return std::sin(std::numbers::pi * r);
}

}  // namespace detail

/// Select m Laplacian eigenpairs. Sorted mode takes the m smallest eigenvalues
/// of the tensor lattice; grid mode takes all multi-indices in [1, mhat]^d.
inline Basis build_basis(const Domain& domain, std::int64_t m, SelectionMode mode = SelectionMode::Sorted) {
    if (m < 1) throw InvalidArgument("basis size m must be >= 1");
    if (m > detail::kMaxBasisSize) throw ResourceError("basis size " + std::to_string(m) + " exceeds lattice search cap");
    if (domain.is_sphere()) return detail::spherical(domain, m);
    return mode == SelectionMode::Grid ? detail::grid_cartesian(domain, m) : detail::sorted_cartesian(domain, m);
}

/// Phi(i, j) = phi_j(x_i). Points must lie in the closed domain.
inline Eigen::MatrixXd eigenfunction_matrix(const Basis& basis, const Eigen::Ref<const Eigen::MatrixXd>& X,
                                            long row_offset = 0) {
    const Eigen::Index n = X.rows();
    const Eigen::Index m = basis.size();
    const auto& dom = basis.domain;
    for (Eigen::Index i = 0; i < n; ++i) dom.check_point(X.row(i), row_offset + static_cast<long>(i));
    Eigen::MatrixXd phi(n, m);
    if (n == 0) return phi;

    if (dom.is_sphere()) {
        int l_max = 0;
        for (const auto& idx : basis.indices) l_max = std::max(l_max, std::get<SphericalIndex>(idx).l);
        sph::LegendreTable table(l_max);
        for (Eigen::Index i = 0; i < n; ++i) {
            table.evaluate(0.5 * std::numbers::pi - X(i, 0));
            for (Eigen::Index j = 0; j < m; ++j) {
                const auto& s = std::get<SphericalIndex>(basis.indices[static_cast<std::size_t>(j)]);
                phi(i, j) = sph::real_harmonic(table, s.l, s.m, X(i, 1));
            }
        }
        return phi;
    }

    const auto& r = dom.rect();
    const Eigen::Index d = r.center.size();
    std::vector<int> jmax(static_cast<std::size_t>(d), 0);
    for (const auto& idx : basis.indices) {
        const auto& c = std::get<CartesianIndex>(idx);
        for (Eigen::Index k = 0; k < d; ++k)
            jmax[static_cast<std::size_t>(k)] = std::max(jmax[static_cast<std::size_t>(k)], c.j[static_cast<std::size_t>(k)]);
    }
    // Per-dimension tables of L^-1/2 sin(pi j (x + L) / 2L).
    std::vector<Eigen::MatrixXd> tables(static_cast<std::size_t>(d));
    for (Eigen::Index k = 0; k < d; ++k) {
        const double L = r.half_widths(k);
        const double scale = 1.0 / std::sqrt(L);
        auto& t = tables[static_cast<std::size_t>(k)];
        t.resize(n, jmax[static_cast<std::size_t>(k)] + 1);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double u = (X(i, k) - r.center(k) + L) / (2.0 * L);
            for (int j = 1; j <= jmax[static_cast<std::size_t>(k)]; ++j) t(i, j) = scale * detail::sinpi(j * u);
        }
    }
    for (Eigen::Index j = 0; j < m; ++j) {
        const auto& c = std::get<CartesianIndex>(basis.indices[static_cast<std::size_t>(j)]);
        phi.col(j) = tables[0].col(c.j[0]);
        for (Eigen::Index k = 1; k < d; ++k) phi.col(j).array() *= tables[static_cast<std::size_t>(k)].col(c.j[static_cast<std::size_t>(k)]).array();
    }
    return phi;
}

/// Diagonal of Lambda: S(sqrt(lambda_j)) summed over kernel terms.
inline Eigen::VectorXd basis_spectrum(const Basis& basis, const KernelSpec& spec, const Hyperparams& theta) {
    theta.validate(spec, true);
    Eigen::VectorXd s(basis.size());
    const int d = basis.spectral_dim();
    for (Eigen::Index j = 0; j < basis.size(); ++j) s(j) = spectral_density(spec, theta, d, std::sqrt(basis.eigenvalues(j)));
    return s;
}

/// Reduced-rank approximation of k(x, x').
inline double approx_kernel_eval(const Basis& basis, const KernelSpec& spec, const Hyperparams& theta,
                                 const Eigen::Ref<const Eigen::RowVectorXd>& x,
                                 const Eigen::Ref<const Eigen::RowVectorXd>& xp) {
    Eigen::MatrixXd pts(2, x.size());
    pts.row(0) = x;
    pts.row(1) = xp;
    const Eigen::MatrixXd phi = eigenfunction_matrix(basis, pts);
    const Eigen::VectorXd s = basis_spectrum(basis, spec, theta);
    double k = 0.0;
    for (Eigen::Index j = 0; j < basis.size(); ++j) k += s(j) * phi(0, j) * phi(1, j);
    return k;
}

/// Karhunen-Loeve prior draw f = Phi sqrt(Lambda) z, z ~ N(0, I_m).
inline Eigen::VectorXd sample_prior(const Basis& basis, const KernelSpec& spec, const Hyperparams& theta,
                                    const Eigen::Ref<const Eigen::MatrixXd>& X, std::uint64_t seed) {
    const Eigen::MatrixXd phi = eigenfunction_matrix(basis, X);
    const Eigen::VectorXd s = basis_spectrum(basis, spec, theta);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Eigen::VectorXd coeff(basis.size());
    for (Eigen::Index j = 0; j < basis.size(); ++j) coeff(j) = std::sqrt(s(j)) * normal(rng);
    return phi * coeff;
}

}  // namespace hgp
