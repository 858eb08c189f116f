#pragma once

// Synthetic 1-D regression problem shared by tests, acceptance checks and demos:
// n inputs uniform on [-1, 1], a prior draw with (s2, ell, noise) = (1, 0.1, 0.04)
// from a 256-term basis on [-1.2, 1.2], plus Gaussian noise.

#include <cstdint>
#include <random>

#include <Eigen/Core>

#include "hgp/basis.hpp"
#include "hgp/kernels.hpp"

namespace toy {

struct Replica {
    Eigen::MatrixXd X;
    Eigen::VectorXd f;
    Eigen::VectorXd y;
    hgp::Hyperparams theta;
};

inline hgp::Hyperparams true_theta() { return hgp::Hyperparams::single(1.0, 0.1, 0.2 * 0.2); }

inline Replica make(Eigen::Index n = 256, std::uint64_t seed = 2024) {
    Replica r;
    r.theta = true_theta();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    r.X.resize(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) r.X(i, 0) = unif(rng);
    const hgp::Basis big = hgp::build_basis(hgp::Domain::symmetric(1, 1.2), 256);
    r.f = hgp::sample_prior(big, hgp::KernelSpec::squared_exponential(), r.theta, r.X, seed + 1);
    std::normal_distribution<double> normal;
    r.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) r.y(i) = r.f(i) + std::sqrt(r.theta.noise) * normal(rng);
    return r;
}

inline Eigen::MatrixXd interior_points(Eigen::Index count = 81) {
    return Eigen::VectorXd::LinSpaced(count, -0.8, 0.8);
}

}  // namespace toy
