// Acceptance checks. Prints one PASS/FAIL line per criterion; exits non-zero if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include <Eigen/Dense>

#include "hgp/eval.hpp"
#include "hgp/model.hpp"
#include "hgp/reference.hpp"
#include "hgp/train.hpp"
#include "toy_replica.hpp"

using hgp::Basis;
using hgp::Domain;
using hgp::Hyperparams;
using hgp::KernelSpec;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << "[failed: " << what << "] ";
        }
    }
};

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// ---------------------------------------------------------------------------
// 1. Woodbury against the dense computation with K = Phi Lambda Phi^T + noise I

void woodbury_exactness(Outcome& out) {
    std::mt19937_64 rng(101);
    const std::vector<KernelSpec> specs = {KernelSpec::squared_exponential(), KernelSpec::matern(0.5), KernelSpec::matern(1.5),
                                           KernelSpec::matern(2.5)};
    std::uniform_int_distribution<int> n_dist(20, 300), m_dist(4, 64), d_dist(1, 2), s_dist(0, 3);
    std::uniform_real_distribution<double> u(-1.0, 1.0), log_u(0.0, 1.0);
    double worst_nlml = 0.0, worst_mean = 0.0, worst_var = 0.0;
    for (int c = 0; c < 50; ++c) {
        const int n = n_dist(rng), m = m_dist(rng), d = d_dist(rng);
        const KernelSpec& spec = specs[static_cast<std::size_t>(s_dist(rng))];
        const auto th = Hyperparams::single(std::exp(std::log(0.3) + log_u(rng) * std::log(10.0)),
                                            std::exp(std::log(0.05) + log_u(rng) * std::log(20.0)),
                                            std::exp(std::log(0.01) + log_u(rng) * std::log(30.0)));
        Eigen::MatrixXd X(n, d);
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) {
            for (int k = 0; k < d; ++k) X(i, k) = u(rng);
            y(i) = std::sin(3 * X(i, 0)) + 0.3 * u(rng);
        }
        const Basis b = hgp::build_basis(hgp::domain_from_data(X, 0.1), m);
        const auto fit = hgp::precompute(X, y, b);

        const Eigen::MatrixXd phi = hgp::eigenfunction_matrix(b, X);
        const Eigen::VectorXd s = hgp::basis_spectrum(b, spec, th);
        Eigen::MatrixXd Q = phi * s.asDiagonal() * phi.transpose();
        Q.diagonal().array() += th.noise;
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(Q);
        const double dense = 0.5 * y.dot(ldlt.solve(y)) + 0.5 * ldlt.vectorD().array().log().sum() +
                             0.5 * n * std::log(2 * std::numbers::pi);
        worst_nlml = std::max(worst_nlml, rel(hgp::nlml(fit, spec, th), dense));

        Eigen::MatrixXd Xs(25, d);
        for (int i = 0; i < 25; ++i)
            for (int k = 0; k < d; ++k) Xs(i, k) = 0.9 * u(rng);
        const Eigen::MatrixXd phis = hgp::eigenfunction_matrix(b, Xs);
        const Eigen::MatrixXd ks = phis * s.asDiagonal() * phi.transpose();
        const Eigen::VectorXd mean = ks * ldlt.solve(y);
        const Eigen::VectorXd var = (phis * s.asDiagonal() * phis.transpose() - ks * ldlt.solve(Eigen::MatrixXd(ks.transpose()))).diagonal();
        const auto pr = hgp::predict(fit, spec, th, Xs);
        worst_mean = std::max(worst_mean, (pr.mean - mean).cwiseAbs().maxCoeff() / mean.cwiseAbs().maxCoeff());
        worst_var = std::max(worst_var, (pr.var_latent - var).cwiseAbs().maxCoeff() / var.cwiseAbs().maxCoeff());
    }
    out.detail << "50 configs, max rel err nlml=" << worst_nlml << " mean=" << worst_mean << " var=" << worst_var << ' ';
    out.require(worst_nlml < 1e-8 && worst_mean < 1e-8 && worst_var < 1e-8, "relative error < 1e-8");
}

// ---------------------------------------------------------------------------
// 2. Analytic gradients against central differences on the toy replica

// Fourth-order central difference; used over a wide hyperparameter range where
// the 1e-6 two-point stencil is limited by rounding in the NLML itself.
Eigen::VectorXd five_point_gradient(const hgp::FitState& fit, const KernelSpec& spec, const Eigen::VectorXd& x, double h) {
    Eigen::VectorXd g(x.size());
    for (Eigen::Index p = 0; p < x.size(); ++p) {
        auto f = [&](double dx) {
            Eigen::VectorXd y = x;
            y(p) += dx;
            return hgp::nlml(fit, spec, Hyperparams::from_log(y));
        };
        g(p) = (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h);
    }
    return g;
}

void gradient_certification(Outcome& out) {
    const auto toy = toy::make();
    const Basis b = hgp::build_basis(hgp::domain_from_data(toy.X, 0.1), 32);
    const auto fit = hgp::precompute(toy.X, toy.y, b);
    const std::vector<KernelSpec> specs = {KernelSpec::squared_exponential(), KernelSpec::matern(1.5),
                                           KernelSpec::sum({KernelSpec::squared_exponential(), KernelSpec::matern(1.5)})};
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> u(0.0, 1.0), unit(-1.0, 1.0);
    auto log_uniform = [&](double lo, double hi) { return std::exp(std::log(lo) + u(rng) * std::log(hi / lo)); };
    for (const auto& spec : specs) {
        // Step 1e-6 around the generating values: every log-parameter within a factor e.
        double worst = 0.0;
        for (int t = 0; t < 20; ++t) {
            Hyperparams th;
            th.terms.clear();
            for (std::size_t k = 0; k < spec.size(); ++k)
                th.terms.push_back({std::exp(unit(rng)) / static_cast<double>(spec.size()), 0.1 * std::pow(3.0, static_cast<double>(k)) * std::exp(unit(rng))});
            th.noise = 0.04 * std::exp(unit(rng));
            worst = std::max(worst, hgp::grad_check(fit, spec, th, 1e-6).max_rel_error);
        }
        // Wide range including noise down to 0.005 and lengthscales below 2L/m.
        double worst_wide = 0.0;
        for (int t = 0; t < 20; ++t) {
            Hyperparams th;
            th.terms.clear();
            for (std::size_t k = 0; k < spec.size(); ++k) th.terms.push_back({log_uniform(0.2, 5.0), log_uniform(0.05, 1.0)});
            th.noise = log_uniform(0.005, 0.5);
            Eigen::VectorXd g;
            hgp::nlml_with_grad(fit, spec, th, g);
            const Eigen::VectorXd fd = five_point_gradient(fit, spec, th.to_log(), 1e-3);
            for (Eigen::Index p = 0; p < g.size(); ++p) worst_wide = std::max(worst_wide, hgp::relative_error(g(p), fd(p)));
        }
        out.detail << spec.name() << " step 1e-6 max rel err=" << worst << " wide-range 5-point=" << worst_wide << ' ';
        out.require(worst < 1e-5, spec.name() + " gradient rel error < 1e-5");
        out.require(worst_wide < 1e-5, spec.name() + " wide-range gradient rel error < 1e-5");
    }
}

// ---------------------------------------------------------------------------
// 3. Toy experiment: reduced rank (m = 32, 10% extension) against the exact GP

void toy_reproduction(Outcome& out) {
    const auto toy = toy::make();
    const auto spec = KernelSpec::squared_exponential();
    const auto th = toy::true_theta();
    const Domain dom = hgp::domain_from_data(toy.X, 0.1);
    const Basis b = hgp::build_basis(dom, 32);
    const auto fit = hgp::precompute(toy.X, toy.y, b);

    // (a) predictive moments on interior points
    const Eigen::MatrixXd Xs = toy::interior_points();
    const auto rr = hgp::predict(fit, spec, th, Xs);
    const auto full = hgp::full_gp_predict(toy.X, toy.y, spec, th, Xs);
    const double dm = (rr.mean - full.mean).cwiseAbs().maxCoeff();
    const double dv = (rr.var_latent - full.var_latent).cwiseAbs().maxCoeff();
    out.detail << "(a) max|dmean|=" << dm << " max|dvar|=" << dv << ' ';
    out.require(dm < 0.01 * std::sqrt(th.magnitude()) && dv < 0.01 * th.magnitude(), "(a) within 1% of sigma / sigma^2");

    // (b) 10-fold CV SMSE with optimised hyperparameters
    hgp::MethodConfig cfg;
    cfg.spec = spec;
    cfg.m = 32;
    cfg.extension = 0.1;
    const auto cv_rr = hgp::kfold_cv(toy.X, toy.y, cfg, 10, 1);
    cfg.method = hgp::Method::Full;
    const auto cv_full = hgp::kfold_cv(toy.X, toy.y, cfg, 10, 1);
    const double gap = rel(cv_rr.smse_mean, cv_full.smse_mean);
    out.detail << "(b) smse rr=" << cv_rr.smse_mean << " full=" << cv_full.smse_mean << " rel=" << gap << ' ';
    out.require(gap < 0.05, "(b) CV SMSE within 5% of full");

    // (c) NLML profile in the lengthscale
    const double L = dom.rect().half_widths(0);
    const double threshold = 2 * L / 32;
    // Other hyperparameters stay at the generating values; ell spans 0.01 to 0.5 on a log grid.
    double worst_above = 0.0, worst_below = 0.0, ell_worst = 0.0, worst_near = 0.0;
    for (int i = 0; i <= 40; ++i) {
        const double ell = std::exp(std::log(0.01) + i * std::log(50.0) / 40);
        const auto t = Hyperparams::single(th.magnitude(), ell, th.noise);
        const double r = rel(hgp::nlml(fit, spec, t), hgp::full_gp_nlml(toy.X, toy.y, spec, t));
        if (ell < threshold) {
            worst_below = std::max(worst_below, r);
        } else {
            if (r > worst_above) ell_worst = ell;
            worst_above = std::max(worst_above, r);
            if (ell <= 2 * th.lengthscale()) worst_near = std::max(worst_near, r);
        }
    }
    out.detail << "(c) 2L/m=" << threshold << " max rel diff above=" << worst_above << " (at ell=" << ell_worst
               << "; " << worst_near << " for ell <= 0.2) below=" << worst_below;
    out.require(worst_above < 0.01, "(c) NLML within 1% of full for ell >= 2L/m");
    out.require(worst_below > 0.01, "(c) NLML departs from full below 2L/m");
}

// ---------------------------------------------------------------------------
// 4. Convergence in m and L

bool non_increasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[i - 1]) return false;
    return true;
}

void convergence(Outcome& out) {
    const auto spec = KernelSpec::squared_exponential();
    const auto th = Hyperparams::single(1.0, 0.1, 0.01);
    hgp::GridSpec grid;
    grid.points_per_dim = 101;
    grid.half_width = 0.8;
    const auto sweep = hgp::convergence_sweep(spec, th, 1, {16, 32, 64, 128}, {1.0, 2.0, 4.0}, hgp::SelectionMode::Sorted, grid);
    std::vector<double> at_unit;
    for (const auto& e : sweep)
        if (e.L == 1.0) at_unit.push_back(e.sup_error);
    const double C = hgp::fit_bound_constant(sweep.front());
    int violations = 0;
    for (const auto& e : sweep) violations += e.sup_error > C / e.L + e.tail;
    out.detail << "d=1 L=1 sup err:";
    for (double e : at_unit) out.detail << ' ' << e;
    out.detail << " C=" << C << " bound violations=" << violations << "/" << sweep.size() << ' ';
    out.require(non_increasing(at_unit), "d=1 sup error non-increasing in m");
    out.require(at_unit.back() < 1e-3, "d=1 sup error < 1e-3 at m=128");
    out.require(violations == 0, "d=1 C/L + tail bound");

    hgp::GridSpec grid2 = grid;
    grid2.points_per_dim = 41;
    const auto sweep2 = hgp::convergence_sweep(spec, th, 2, {4, 8, 12}, {1.0, 2.0, 4.0}, hgp::SelectionMode::Grid, grid2);
    std::vector<double> at_unit2;
    for (const auto& e : sweep2)
        if (e.L == 1.0) at_unit2.push_back(e.sup_error);
    const double C2 = hgp::fit_bound_constant(sweep2.front());
    int violations2 = 0;
    for (const auto& e : sweep2) violations2 += e.sup_error > C2 / e.L + e.tail;
    out.detail << "| d=2 grid L=1 sup err:";
    for (double e : at_unit2) out.detail << ' ' << e;
    out.detail << " C=" << C2 << " bound violations=" << violations2 << "/" << sweep2.size();
    out.require(non_increasing(at_unit2), "d=2 sup error non-increasing in mhat");
    out.require(violations2 == 0, "d=2 C/L + tail bound");
}

// ---------------------------------------------------------------------------
// 5. Cost of an NLML evaluation is independent of n; precompute is linear in n

void complexity(Outcome& out) {
    const auto spec = KernelSpec::squared_exponential();
    const auto th = Hyperparams::single(1.0, 0.1, 0.04);
    const Basis b = hgp::build_basis(Domain::symmetric(1, 1.1), 64);
    std::mt19937_64 rng(505);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const std::vector<Eigen::Index> ns = {1000, 10000, 100000};
    std::vector<double> t_pre, t_eval;
    for (Eigen::Index n : ns) {
        Eigen::MatrixXd X(n, 1);
        Eigen::VectorXd y(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            X(i, 0) = u(rng);
            y(i) = std::sin(5 * X(i, 0)) + 0.2 * u(rng);
        }
        std::vector<double> pre;
        hgp::FitState fit;
        const int reps = n >= 100000 ? 3 : 7;
        for (int r = 0; r < reps; ++r) {
            const auto t0 = Clock::now();
            fit = hgp::precompute(X, y, b, {4096, 1});
            pre.push_back(seconds_since(t0));
        }
        t_pre.push_back(median(pre));
        std::vector<double> ev;
        double sink = 0.0;
        for (int r = 0; r < 9; ++r) {
            const auto t0 = Clock::now();
            for (int k = 0; k < 200; ++k) sink += hgp::nlml(fit, spec, th);
            ev.push_back(seconds_since(t0) / 200);
        }
        if (!std::isfinite(sink)) out.require(false, "finite nlml");
        t_eval.push_back(median(ev));
    }
    const double eval_ratio = t_eval[1] / t_eval[0];
    out.detail << "nlml eval s: " << t_eval[0] << ' ' << t_eval[1] << ' ' << t_eval[2] << " (ratio 1e4/1e3=" << eval_ratio
               << ") precompute s: " << t_pre[0] << ' ' << t_pre[1] << ' ' << t_pre[2];
    out.require(eval_ratio < 1.5, "nlml time at n=1e4 < 1.5x n=1e3");
    for (std::size_t i = 1; i < ns.size(); ++i) {
        const double scaled = (t_pre[i] / t_pre[i - 1]) / (static_cast<double>(ns[i]) / static_cast<double>(ns[i - 1]));
        out.detail << " scaled ratio=" << scaled;
        out.require(scaled > 0.5 && scaled < 2.0, "precompute within 2x of linear");
    }
}

// ---------------------------------------------------------------------------
// 6. Sparse spectrum baseline

void ssgp_sanity(Outcome& out) {
    const auto se = KernelSpec::squared_exponential();
    const auto th = Hyperparams::single(1.7, 0.1, 0.04);
    std::mt19937_64 rng(606);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    bool exact = true;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto sp = hgp::draw_spectral_points(se.terms().front(), 1, 16, seed);
        Eigen::RowVectorXd x(1);
        x << u(rng);
        exact = exact && hgp::ssgp_kernel_eval(sp, th, x, x) == th.magnitude();
    }
    out.require(exact, "k_ssgp(x, x) == sigma^2");

    const std::vector<double> lags = {0.05, 0.1, 0.2};
    std::vector<double> avg(lags.size(), 0.0);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto sp = hgp::draw_spectral_points(se.terms().front(), 1, 4096, 1000 + seed);
        for (std::size_t i = 0; i < lags.size(); ++i) {
            Eigen::RowVectorXd x(1), xp(1);
            x << 0.0;
            xp << lags[i];
            avg[i] += hgp::ssgp_kernel_eval(sp, th, x, xp) / 20;
        }
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < lags.size(); ++i) worst = std::max(worst, std::abs(avg[i] - hgp::kernel_eval(se, th, lags[i])));
    out.detail << "k(x,x) exact=" << (exact ? "yes" : "no") << " h=4096 max|avg-k|/s2=" << worst / th.magnitude() << ' ';
    out.require(worst < 0.05 * th.magnitude(), "h=4096 within 5% of sigma^2");

    const auto toy = toy::make();
    hgp::MethodConfig cfg;
    cfg.spec = se;
    cfg.m = 32;
    const auto rr = hgp::kfold_cv(toy.X, toy.y, cfg, 10, 1);
    cfg.method = hgp::Method::SSGP;
    const auto ss = hgp::kfold_cv(toy.X, toy.y, cfg, 10, 1);
    out.detail << "cv smse ssgp=" << ss.smse_mean << " reduced-rank=" << rr.smse_mean;
    out.require(ss.smse_mean >= rr.smse_mean, "SSGP CV SMSE >= reduced-rank");
}

// ---------------------------------------------------------------------------
// 7. Basis orthonormality and boundary conditions

void basis_correctness(Outcome& out) {
    // Midpoint rule with 1000 nodes on [-L, L].
    const double L = 1.3;
    const int N = 1000;
    const Basis b1 = hgp::build_basis(Domain::symmetric(1, L), 32);
    Eigen::MatrixXd x(N, 1);
    for (int i = 0; i < N; ++i) x(i, 0) = -L + (i + 0.5) * 2 * L / N;
    const Eigen::MatrixXd phi = hgp::eigenfunction_matrix(b1, x);
    const double e1 = (phi.transpose() * phi * (2 * L / N) - Eigen::MatrixXd::Identity(32, 32)).cwiseAbs().maxCoeff();

    // 10 Gauss-Legendre nodes in cos(colatitude) times 20 longitudes.
    using GL = boost::math::quadrature::gauss<double, 10>;
    std::vector<double> z, w;
    for (std::size_t i = 0; i < GL::abscissa().size(); ++i) {
        z.push_back(GL::abscissa()[i]);
        w.push_back(GL::weights()[i]);
        if (GL::abscissa()[i] != 0.0) {
            z.push_back(-GL::abscissa()[i]);
            w.push_back(GL::weights()[i]);
        }
    }
    const int nlon = 20;
    Eigen::MatrixXd sp(static_cast<Eigen::Index>(z.size()) * nlon, 2);
    Eigen::VectorXd sw(sp.rows());
    for (std::size_t i = 0, r = 0; i < z.size(); ++i)
        for (int k = 0; k < nlon; ++k, ++r) {
            sp(static_cast<Eigen::Index>(r), 0) = std::asin(z[i]);
            sp(static_cast<Eigen::Index>(r), 1) = 2 * std::numbers::pi * k / nlon;
            sw(static_cast<Eigen::Index>(r)) = w[i] * 2 * std::numbers::pi / nlon;
        }
    const Basis bs = hgp::build_basis(Domain::sphere(), 64);
    const Eigen::MatrixXd ys = hgp::eigenfunction_matrix(bs, sp);
    const double e2 = (ys.transpose() * sw.asDiagonal() * ys - Eigen::MatrixXd::Identity(64, 64)).cwiseAbs().maxCoeff();

    // Dirichlet zeros on every face of an offset 2-D box and at both ends in 1-D.
    Eigen::VectorXd c(2), h(2);
    c << 0.5, -2.0;
    h << 0.75, 1.5;
    const Basis b2 = hgp::build_basis(Domain::box(c, h), 40);
    Eigen::MatrixXd face(4 * 11, 2);
    for (int i = 0; i <= 10; ++i) {
        const double t = -1.0 + 0.2 * i;
        face.row(4 * i + 0) << c(0) - h(0), c(1) + t * h(1);
        face.row(4 * i + 1) << c(0) + h(0), c(1) + t * h(1);
        face.row(4 * i + 2) << c(0) + t * h(0), c(1) - h(1);
        face.row(4 * i + 3) << c(0) + t * h(0), c(1) + h(1);
    }
    Eigen::MatrixXd ends(2, 1);
    ends << -L, L;
    const double e3 = std::max(hgp::eigenfunction_matrix(b2, face).cwiseAbs().maxCoeff(),
                               hgp::eigenfunction_matrix(b1, ends).cwiseAbs().maxCoeff());
    out.detail << "1-D N=1000 err=" << e1 << " sphere 200-pt err=" << e2 << " max|phi| on boundary=" << e3;
    out.require(e1 < 1e-3, "1-D orthonormality");
    out.require(e2 < 1e-2, "sphere orthonormality");
    out.require(e3 < 1e-13, "Dirichlet zeros");
}

// ---------------------------------------------------------------------------
// 8. Opper-Vivarelli learning curve

void learning_curve(Outcome& out) {
    const auto th = Hyperparams::single(1.0, 0.1, 0.04);
    bool monotone = true, at_zero = true, bounded = true;
    for (const auto& spec : {KernelSpec::squared_exponential(), KernelSpec::matern(1.5)}) {
        const Basis b = hgp::build_basis(Domain::symmetric(1, 1.0), 32);
        double sum_s = 0.0;
        for (Eigen::Index j = 0; j < b.size(); ++j) sum_s += hgp::spectral_density(spec, th, 1, std::sqrt(b.eigenvalues(j)));
        at_zero = at_zero && rel(hgp::learning_curve_ov(b, spec, th, 0.0), sum_s) < 1e-13;
        double prev = INFINITY;
        for (double n : {0.0, 1.0, 10.0, 100.0, 1e3, 1e4, 1e5, 1e6}) {
            const double e = hgp::learning_curve_ov(b, spec, th, n);
            monotone = monotone && e <= prev;
            prev = e;
            if (n >= 1.0) bounded = bounded && e <= th.noise * static_cast<double>(b.size()) / n;
        }
    }
    out.detail << "non-increasing=" << monotone << " eps(0)=sum S=" << at_zero << " eps(n)<=noise*m/n=" << bounded;
    out.require(monotone && at_zero && bounded, "learning-curve properties");
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double limit_seconds;
        std::function<void(Outcome&)> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "woodbury exactness", 60, woodbury_exactness},
        {2, "gradient certification", 60, gradient_certification},
        {3, "toy experiment", 300, toy_reproduction},
        {4, "convergence", 300, convergence},
        {5, "complexity", 300, complexity},
        {6, "ssgp baseline", 300, ssgp_sanity},
        {7, "basis correctness", 300, basis_correctness},
        {8, "learning curve", 300, learning_curve},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Outcome o;
        const auto t0 = Clock::now();
        try {
            c.run(o);
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        const double secs = seconds_since(t0);
        o.require(secs < c.limit_seconds, "runtime limit");
        failed += !o.pass;
        std::printf("%s criterion %d (%s) [%.1fs]: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs, o.detail.str().c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
