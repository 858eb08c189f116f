#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/spherical_harmonic.hpp>

#include "hgp/basis.hpp"
#include "hgp/log.hpp"
#include "hgp/reference.hpp"

using hgp::Basis;
using hgp::Domain;
using hgp::Hyperparams;
using hgp::KernelSpec;

namespace {

// Tensor-product Gauss-Legendre (10 nodes in cos(colatitude)) x 20 equispaced longitudes.
struct SphereGrid {
    Eigen::MatrixXd points;  // (lat, lon)
    Eigen::VectorXd weights;
};

SphereGrid gauss_sphere_grid() {
    using GL = boost::math::quadrature::gauss<double, 10>;
    std::vector<double> z, w;
    for (std::size_t i = 0; i < GL::abscissa().size(); ++i) {
        const double a = GL::abscissa()[i];
        const double wt = GL::weights()[i];
        z.push_back(a);
        w.push_back(wt);
        if (a != 0.0) {
            z.push_back(-a);
            w.push_back(wt);
        }
    }
    const int nlon = 20;
    SphereGrid g;
    g.points.resize(static_cast<Eigen::Index>(z.size()) * nlon, 2);
    g.weights.resize(g.points.rows());
    Eigen::Index r = 0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        for (int k = 0; k < nlon; ++k, ++r) {
            g.points(r, 0) = std::asin(z[i]);
            g.points(r, 1) = 2 * std::numbers::pi * k / nlon;
            g.weights(r) = w[i] * 2 * std::numbers::pi / nlon;
        }
    }
    return g;
}

}  // namespace

// ---------------------------------------------------------------------------
// Domains

TEST(DomainTest, FromDataAddsExtension) {
    Eigen::MatrixXd X(3, 2);
    X << -1, 0, 1, 2, 0, 4;
    const Domain d = hgp::domain_from_data(X, 0.1);
    EXPECT_NEAR(d.rect().center(0), 0.0, 1e-15);
    EXPECT_NEAR(d.rect().center(1), 2.0, 1e-15);
    EXPECT_NEAR(d.rect().half_widths(0), 1.1, 1e-15);
    EXPECT_NEAR(d.rect().half_widths(1), 2.2, 1e-15);
}

TEST(DomainTest, ZeroRangeDimensionBorrowsScale) {
    Eigen::MatrixXd X(2, 2);
    X << 0, 5, 3, 5;
    const Domain d = hgp::domain_from_data(X, 0.1);
    EXPECT_NEAR(d.rect().half_widths(1), 0.3, 1e-15);
    Eigen::MatrixXd single(1, 1);
    single << 2.0;
    EXPECT_THROW(hgp::domain_from_data(single, 0.0), hgp::InvalidArgument);
}

TEST(DomainTest, ZeroExtensionWarns) {
    std::vector<std::string> seen;
    auto prev = hgp::set_warning_handler([&](const std::string& m) { seen.push_back(m); });
    Eigen::MatrixXd X(2, 1);
    X << 0, 1;
    hgp::domain_from_data(X, 0.0);
    hgp::set_warning_handler(prev);
    EXPECT_EQ(seen.size(), 1u);
}

TEST(DomainTest, RejectsInvalidBoxes) {
    EXPECT_THROW(Domain::box(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Constant(2, -1.0)), hgp::InvalidArgument);
    EXPECT_THROW(Domain::box(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(3)), hgp::InvalidArgument);
}

TEST(DomainTest, CheckPointReportsRowAndDimension) {
    const Domain d = Domain::symmetric(2, 1.0);
    EXPECT_NO_THROW(d.check_point(Eigen::RowVector2d(1.0, -1.0), 0));
    try {
        d.check_point(Eigen::RowVector2d(0.0, 1.5), 7);
        FAIL() << "expected OutOfDomain";
    } catch (const hgp::OutOfDomain& e) {
        EXPECT_EQ(e.row(), 7);
        EXPECT_EQ(e.dim(), 1);
        EXPECT_NE(std::string(e.what()).find("row 7"), std::string::npos);
    }
    const Domain s = Domain::sphere();
    EXPECT_THROW(s.check_point(Eigen::RowVector2d(2.0, 0.0), 0), hgp::OutOfDomain);
}

// ---------------------------------------------------------------------------
// Eigenpair selection

TEST(BasisTest, OneDimensionalEigenvalues) {
    const Basis b = hgp::build_basis(Domain::symmetric(1, 1.5), 10);
    for (int j = 1; j <= 10; ++j) {
        const double w = std::numbers::pi * j / 3.0;
        EXPECT_NEAR(b.eigenvalues(j - 1), w * w, 1e-12);
    }
}

TEST(BasisTest, SortedSelectionMatchesBruteForce) {
    const Domain dom = Domain::box(Eigen::Vector2d(0.0, 1.0), Eigen::Vector2d(1.0, 2.5));
    const Basis b = hgp::build_basis(dom, 60);
    std::vector<double> all;
    for (int i = 1; i <= 40; ++i)
        for (int j = 1; j <= 40; ++j) all.push_back(Basis::cartesian_eigenvalue(dom.rect(), {i, j}));
    std::sort(all.begin(), all.end());
    for (Eigen::Index k = 0; k < 60; ++k) EXPECT_NEAR(b.eigenvalues(k), all[static_cast<std::size_t>(k)], 1e-12);
    EXPECT_TRUE(std::is_sorted(b.eigenvalues.data(), b.eigenvalues.data() + b.size()));
}

TEST(BasisTest, GridModeUsesFullLattice) {
    const Basis b = hgp::build_basis(Domain::symmetric(2, 1.0), 16, hgp::SelectionMode::Grid);
    ASSERT_EQ(b.size(), 16);
    for (const auto& idx : b.indices) {
        const auto& c = std::get<hgp::CartesianIndex>(idx);
        EXPECT_GE(c.j[0], 1);
        EXPECT_LE(c.j[0], 4);
        EXPECT_LE(c.j[1], 4);
    }
    EXPECT_THROW(hgp::build_basis(Domain::symmetric(2, 1.0), 15, hgp::SelectionMode::Grid), hgp::InvalidArgument);
}

TEST(BasisTest, SphereNeedsCompleteDegrees) {
    const Basis b = hgp::build_basis(Domain::sphere(), 16);
    EXPECT_EQ(b.eigenvalues(15), 12.0);
    EXPECT_EQ(b.eigenvalues(0), 0.0);
    EXPECT_THROW(hgp::build_basis(Domain::sphere(), 15), hgp::InvalidArgument);
    EXPECT_THROW(hgp::build_basis(Domain::sphere(), 102 * 102), hgp::InvalidArgument);
}

TEST(BasisTest, RejectsBadSizes) {
    EXPECT_THROW(hgp::build_basis(Domain::symmetric(1, 1.0), 0), hgp::InvalidArgument);
    EXPECT_THROW(hgp::build_basis(Domain::symmetric(1, 1.0), 30'000'000), hgp::ResourceError);
}

// ---------------------------------------------------------------------------
// Eigenfunctions

TEST(EigenfunctionTest, DiscreteOrthonormalityOneDimension) {
    const double L = 1.3;
    const Basis b = hgp::build_basis(Domain::box(Eigen::VectorXd::Constant(1, 0.4), Eigen::VectorXd::Constant(1, L)), 20);
    const int N = 1000;
    Eigen::MatrixXd X(N, 1);
    for (int i = 0; i < N; ++i) X(i, 0) = 0.4 - L + 2 * L * (i + 0.5) / N;
    const Eigen::MatrixXd phi = hgp::eigenfunction_matrix(b, X);
    const Eigen::MatrixXd gram = phi.transpose() * phi * (2 * L / N);
    EXPECT_LT((gram - Eigen::MatrixXd::Identity(20, 20)).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(EigenfunctionTest, DirichletZeroAtBoundary) {
    const Basis b = hgp::build_basis(Domain::box(Eigen::Vector2d(0.5, -2.0), Eigen::Vector2d(0.75, 1.5)), 50);
    Eigen::MatrixXd X(4, 2);
    X << -0.25, -2.3, 1.25, -1.0, 0.0, -3.5, 0.1, -0.5;
    const Eigen::MatrixXd phi = hgp::eigenfunction_matrix(b, X);
    EXPECT_LT(phi.cwiseAbs().maxCoeff(), 1e-15);
}

TEST(EigenfunctionTest, SatisfiesLaplacianEigenEquation) {
    const Basis b = hgp::build_basis(Domain::symmetric(2, 1.0), 12);
    const double h = 1e-4;
    const Eigen::RowVector2d x(0.21, -0.37);
    Eigen::MatrixXd pts(5, 2);
    pts.row(0) = x;
    pts.row(1) = x + Eigen::RowVector2d(h, 0);
    pts.row(2) = x - Eigen::RowVector2d(h, 0);
    pts.row(3) = x + Eigen::RowVector2d(0, h);
    pts.row(4) = x - Eigen::RowVector2d(0, h);
    const Eigen::MatrixXd phi = hgp::eigenfunction_matrix(b, pts);
    for (Eigen::Index j = 0; j < b.size(); ++j) {
        const double lap = (phi(1, j) + phi(2, j) + phi(3, j) + phi(4, j) - 4 * phi(0, j)) / (h * h);
        EXPECT_NEAR(-lap, b.eigenvalues(j) * phi(0, j), 2e-4 * std::max(1.0, b.eigenvalues(j))) << "j=" << j;
    }
}

TEST(EigenfunctionTest, RowOffsetAppearsInErrors) {
    const Basis b = hgp::build_basis(Domain::symmetric(1, 1.0), 4);
    Eigen::MatrixXd X(2, 1);
    X << 0.0, 2.0;
    try {
        hgp::eigenfunction_matrix(b, X, 100);
        FAIL();
    } catch (const hgp::OutOfDomain& e) {
        EXPECT_EQ(e.row(), 101);
    }
}

// ---------------------------------------------------------------------------
// Spherical harmonics

TEST(SphericalHarmonicsTest, MatchesBoostComplexHarmonics) {
    const Basis b = hgp::build_basis(Domain::sphere(), 11 * 11);
    Eigen::MatrixXd pts(3, 2);
    pts << 0.3, 1.1, -1.2, 4.0, 0.0, -0.5;
    const Eigen::MatrixXd phi = hgp::eigenfunction_matrix(b, pts);
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
        const double theta = std::numbers::pi / 2 - pts(i, 0);
        for (Eigen::Index j = 0; j < b.size(); ++j) {
            const auto& s = std::get<hgp::SphericalIndex>(b.indices[static_cast<std::size_t>(j)]);
            const int am = std::abs(s.m);
            const std::complex<double> y = boost::math::spherical_harmonic(static_cast<unsigned>(s.l), am, theta, pts(i, 1));
            const double sign = am % 2 ? -1.0 : 1.0;  // remove the Condon-Shortley phase
            double expect = y.real();
            if (s.m > 0) expect = std::numbers::sqrt2 * sign * y.real();
            if (s.m < 0) expect = std::numbers::sqrt2 * sign * y.imag();
            EXPECT_NEAR(phi(i, j), expect, 1e-12) << "l=" << s.l << " m=" << s.m;
        }
    }
}

TEST(SphericalHarmonicsTest, OrthonormalOnGaussGrid) {
    const SphereGrid g = gauss_sphere_grid();
    ASSERT_EQ(g.points.rows(), 200);
    const Basis b = hgp::build_basis(Domain::sphere(), 8 * 8);
    const Eigen::MatrixXd phi = hgp::eigenfunction_matrix(b, g.points);
    const Eigen::MatrixXd gram = phi.transpose() * g.weights.asDiagonal() * phi;
    EXPECT_LT((gram - Eigen::MatrixXd::Identity(b.size(), b.size())).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(SphericalHarmonicsTest, HighDegreeStaysFinite) {
    const Basis b = hgp::build_basis(Domain::sphere(), 101 * 101);
    Eigen::MatrixXd pts(2, 2);
    pts << 1.5, 0.2, -0.01, 3.0;
    const Eigen::MatrixXd phi = hgp::eigenfunction_matrix(b, pts);
    EXPECT_TRUE(phi.allFinite());
    EXPECT_LT(phi.cwiseAbs().maxCoeff(), 10.0);
}

// ---------------------------------------------------------------------------
// Approximate kernel and prior draws

TEST(ApproxKernelTest, ConvergesToExactKernel) {
    const auto se = KernelSpec::squared_exponential();
    const auto th = Hyperparams::single(1.0, 0.3, 0.1);
    const Basis b = hgp::build_basis(Domain::symmetric(1, 3.0), 80);
    for (double r : {0.0, 0.2, 0.6}) {
        Eigen::RowVectorXd x(1), xp(1);
        x << 0.1;
        xp << 0.1 + r;
        EXPECT_NEAR(hgp::approx_kernel_eval(b, se, th, x, xp), hgp::kernel_eval(se, th, r), 1e-4) << "r=" << r;
    }
}

TEST(ApproxKernelTest, SmootherKernelConvergesFaster) {
    const auto th = Hyperparams::single(1.0, 0.1, 0.1);
    const Basis b = hgp::build_basis(Domain::symmetric(1, 1.0), 12);
    Eigen::RowVectorXd x(1), xp(1);
    double se_err = 0.0, m12_err = 0.0;
    for (double a = -0.8; a <= 0.8; a += 0.1) {
        for (double c = -0.8; c <= 0.8; c += 0.1) {
            x << a;
            xp << c;
            const double r = std::abs(a - c);
            se_err = std::max(se_err, std::abs(hgp::approx_kernel_eval(b, KernelSpec::squared_exponential(), th, x, xp) -
                                               hgp::kernel_eval(KernelSpec::squared_exponential(), th, r)));
            m12_err = std::max(m12_err, std::abs(hgp::approx_kernel_eval(b, KernelSpec::matern(0.5), th, x, xp) -
                                                 hgp::kernel_eval(KernelSpec::matern(0.5), th, r)));
        }
    }
    EXPECT_LT(se_err, m12_err);
}

TEST(SamplePriorTest, DeterministicPerSeed) {
    const Basis b = hgp::build_basis(Domain::symmetric(1, 1.0), 30);
    const Eigen::MatrixXd X = Eigen::VectorXd::LinSpaced(25, -0.9, 0.9);
    const auto se = KernelSpec::squared_exponential();
    const auto th = Hyperparams::single(1.0, 0.2, 0.1);
    const Eigen::VectorXd a = hgp::sample_prior(b, se, th, X, 5);
    const Eigen::VectorXd c = hgp::sample_prior(b, se, th, X, 5);
    const Eigen::VectorXd d = hgp::sample_prior(b, se, th, X, 6);
    EXPECT_EQ(a, c);
    EXPECT_NE(a, d);
}

TEST(SamplePriorTest, EmpiricalCovarianceMatchesApproxKernel) {
    const Basis b = hgp::build_basis(Domain::symmetric(1, 1.0), 40);
    Eigen::MatrixXd X(3, 1);
    X << -0.3, 0.0, 0.25;
    const auto se = KernelSpec::squared_exponential();
    const auto th = Hyperparams::single(2.0, 0.2, 0.1);
    const int draws = 4000;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(3, 3);
    for (int s = 0; s < draws; ++s) {
        const Eigen::VectorXd f = hgp::sample_prior(b, se, th, X, static_cast<std::uint64_t>(s));
        cov += f * f.transpose();
    }
    cov /= draws;
    const Eigen::MatrixXd phi = hgp::eigenfunction_matrix(b, X);
    const Eigen::MatrixXd expect = phi * hgp::basis_spectrum(b, se, th).asDiagonal() * phi.transpose();
    // Monte Carlo standard error of a covariance entry is about 2 * sqrt(2/4000) ~ 0.045.
    EXPECT_LT((cov - expect).cwiseAbs().maxCoeff(), 0.2);
}
