#include <doctest.h>

#include <cmath>

#include "glelab/analysis.hpp"
#include "glelab/rng.hpp"

using namespace glelab;

TEST_CASE("decay fits recover exact rates") {
    const TimeGrid grid = TimeGrid::from_horizon(0.01, 20.0);

    const GridFunction pl = GridFunction::sample(grid, [](double t) {
        return t > 0.0 ? 7.0 * std::pow(t, -3.0) : 0.0;
    });
    const DecayFit fp = fit_decay(pl, DecayModel::PowerLaw, {1.0, 20.0});
    CHECK(fp.rate == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(fp.r_squared == doctest::Approx(1.0).epsilon(1e-12));

    const GridFunction ex = GridFunction::sample(grid, [](double t) {
        return 2.0 * std::exp(-0.5 * t);
    });
    const DecayFit fe = fit_decay(ex, DecayModel::Exponential, {1.0, 20.0});
    CHECK(fe.rate == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(fe.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::exp(fe.intercept) == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("noisy power law fits stay near the true exponent") {
    const TimeGrid grid = TimeGrid::from_horizon(0.01, 20.0);
    GridFunction noisy(grid);
    for (int i = 0; i < grid.size(); ++i) {
        const double t = grid.t(i);
        const double eps =
            0.01 * normal_draw(31, 0, RngStream::Generic, static_cast<uint32_t>(i), 0);
        noisy[i] = t > 0.0 ? std::pow(t, -3.0) * (1.0 + eps) : 0.0;
    }
    const DecayFit fit = fit_decay(noisy, DecayModel::PowerLaw, {1.0, 20.0});
    CHECK(fit.rate > 2.9);
    CHECK(fit.rate < 3.1);
}

TEST_CASE("fits drop nonpositive points and fail below five points") {
    const TimeGrid grid = TimeGrid::from_horizon(0.5, 10.0);
    GridFunction f = GridFunction::sample(grid, [](double t) { return std::exp(-t); });
    f[4] = 0.0;
    f[5] = -1.0;
    const DecayFit fit = fit_decay(f, DecayModel::Exponential, {0.0, 10.0});
    CHECK(fit.n_dropped == 2);

    GridFunction tiny = GridFunction::sample(grid, [](double) { return 0.0; });
    CHECK_THROWS_AS(fit_decay(tiny, DecayModel::Exponential, {0.0, 10.0}), FitError);
    CHECK_THROWS_AS(fit_decay(f, DecayModel::Exponential, {9.4, 10.0}), FitError);
}

TEST_CASE("fit rate is scale equivariant") {
    const TimeGrid grid = TimeGrid::from_horizon(0.01, 10.0);
    const GridFunction base = GridFunction::sample(grid, [](double t) {
        return t > 0.0 ? std::pow(t, -2.2) * (1.0 + 0.05 * std::sin(5.0 * t)) : 0.0;
    });
    GridFunction scaled = base;
    for (double& v : scaled.values) v *= 37.5;
    const DecayFit f1 = fit_decay(base, DecayModel::PowerLaw, {1.0, 10.0});
    const DecayFit f2 = fit_decay(scaled, DecayModel::PowerLaw, {1.0, 10.0});
    CHECK(f1.rate == doctest::Approx(f2.rate).epsilon(1e-10));
    CHECK(f2.intercept - f1.intercept == doctest::Approx(std::log(37.5)).epsilon(1e-10));
}

TEST_CASE("empirical sup ratio") {
    const TimeGrid grid = TimeGrid::from_horizon(0.01, 10.0);
    const WeightFunction h = WeightFunction::power_law(1.0, 6.0);
    const FitWindow window{grid.dt, grid.horizon()};

    const GridFunction same = GridFunction::sample(grid, [&](double t) { return h(t); });
    CHECK(empirical_sup_ratio(same, h, 0.0, window).value == doctest::Approx(1.0).epsilon(1e-14));

    const GridFunction zero(grid);
    CHECK(empirical_sup_ratio(zero, h, 0.0, window).value == 0.0);

    // floor-offset case against a direct evaluation oracle
    const double offset = 1e-3;
    const GridFunction two = GridFunction::sample(grid, [&](double t) {
        return 2.0 * h(t) + offset;
    });
    const BoundConstant bc = empirical_sup_ratio(two, h, offset, window);
    double oracle = 0.0;
    double min_h = 1e300;
    for (int i = 1; i < grid.size(); ++i) {
        oracle = std::max(oracle, (2.0 * h(grid.t(i)) + offset) / (h(grid.t(i)) + offset));
        min_h = std::min(min_h, h(grid.t(i)));
    }
    CHECK(bc.value == doctest::Approx(oracle).epsilon(1e-14));
    CHECK(std::abs(bc.value - 2.0) <= offset / min_h);

    // monotone in the series
    GridFunction bigger = two;
    for (double& v : bigger.values) v *= 1.25;
    CHECK(empirical_sup_ratio(bigger, h, offset, window).value >= bc.value);
}

TEST_CASE("decay threshold and characteristic rate formulas") {
    CHECK(threshold_f(1.0, 0.1, 2.0) == doctest::Approx(10.0).epsilon(1e-14));
    CHECK(threshold_f(1.0, 0.1, 4.0) == doctest::Approx(1000.0 / 3.0).epsilon(1e-14));
    CHECK_THROWS_AS(threshold_f(1.0, 0.1, 1.0), std::domain_error);

    CHECK(rate_p(3.0, 2.0, 6.0) == doctest::Approx(0.0));
    CHECK(rate_p(3.0, 2.0, 1.0) == doctest::Approx(0.5 * (-5.0 + std::sqrt(5.0))).epsilon(1e-14));
}

TEST_CASE("linearity report") {
    const std::vector<double> xs = {0.0, 1.0, 2.0, 3.5, 7.0};
    std::vector<double> ys;
    for (double x : xs) ys.push_back(3.0 * x);
    const LinearityReport lin = linearity_report(xs, ys);
    CHECK(lin.slope == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(lin.intercept == doctest::Approx(0.0));
    CHECK(lin.pearson_r == doctest::Approx(1.0).epsilon(1e-14));

    const std::vector<double> flat = {2.0, 2.0, 2.0, 2.0, 2.0};
    const LinearityReport zero = linearity_report(xs, flat);
    CHECK(zero.slope == doctest::Approx(0.0));
    CHECK(zero.pearson_r == 0.0);

    CHECK_THROWS_AS(linearity_report(flat, xs), std::invalid_argument);
    CHECK_THROWS_AS(linearity_report({1.0, 2.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("ensemble moments") {
    SimConfig cfg;
    cfg.dim = 1;
    cfg.gamma = 2.0;
    cfg.grid = TimeGrid::from_horizon(0.01, 2.0);
    cfg.batches = 1;
    cfg.seed = 5;
    cfg.sigma = Mat::scalar(0.3);
    const Kernel k = Kernel::exponential(0.5, 1.0);
    const CoupledEnsemble single = simulate_coupled(cfg, k, k, SystemOrder::First);

    // one batch: the mean is that batch, the standard error vanishes
    const MomentSeries m = ensemble_moments(single, EnsembleFunctional::NormSq);
    for (int i = 0; i < m.mean.size(); ++i) {
        const double v = single.true_paths[0].state(i)[0];
        CHECK(m.mean[i] == doctest::Approx(v * v).epsilon(1e-14));
        CHECK(m.std_error[i] == 0.0);
    }

    // identical kernels: difference functional is exactly zero
    const MomentSeries d = ensemble_moments(single, EnsembleFunctional::DiffSq);
    for (int i = 0; i < d.mean.size(); ++i) CHECK(d.mean[i] == 0.0);
}

TEST_CASE("lyapunov functional equals the manual quadratic form") {
    SimConfig cfg;
    cfg.dim = 2;
    cfg.gamma = 5.0;
    cfg.grid = TimeGrid::from_horizon(0.01, 1.0);
    cfg.batches = 2;
    cfg.seed = 9;
    cfg.sigma = Mat::identity(2) * 0.05;
    const PotentialSpec pot = PotentialSpec::quadratic(Mat::identity(2) * 2.0, 3.0);
    const LyapunovParams p = lyapunov_params(cfg.gamma, pot.u, pot.r, pot.kappa0);
    const Kernel k = Kernel::matrix_exp(Mat::identity(2), {1.0, 2.0});
    const Kernel pert = Kernel::perturbed(k, PerturbFamily::Translation, 0.2);
    const CoupledEnsemble ens = simulate_coupled(cfg, k, pert, SystemOrder::Second, &pot);

    const MomentSeries m = ensemble_moments(ens, EnsembleFunctional::LyapunovSq, &p);
    for (int i = 0; i < m.mean.size(); i += 17) {
        double acc = 0.0;
        for (int b = 0; b < cfg.batches; ++b) {
            const auto& a = ens.true_paths[static_cast<size_t>(b)];
            const auto& bb = ens.pert_paths[static_cast<size_t>(b)];
            Vec z(2), w(2);
            for (int c = 0; c < 2; ++c) {
                z[static_cast<size_t>(c)] = a.state(i)[c] - bb.state(i)[c];
                w[static_cast<size_t>(c)] = a.state(i)[2 + c] - bb.state(i)[2 + c];
            }
            acc += lyapunov_distance_sq(p, z, w);
        }
        CHECK(m.mean[i] == doctest::Approx(acc / cfg.batches).epsilon(1e-12));
    }

    // reference series against the origin matches the hand expansion
    const GridFunction ref = lyapunov_ref_series(ens.true_paths[0], p);
    Vec z(2), w(2);
    for (int c = 0; c < 2; ++c) {
        z[static_cast<size_t>(c)] = ens.true_paths[0].state(30)[c];
        w[static_cast<size_t>(c)] = ens.true_paths[0].state(30)[2 + c];
    }
    CHECK(ref[30] == doctest::Approx(lyapunov_distance_sq(p, z, w)).epsilon(1e-14));
}
