#include <doctest.h>

#include <cmath>

#include "glelab/analysis.hpp"
#include "glelab/experiments.hpp"
#include "glelab/gle_sim.hpp"
#include "glelab/rng.hpp"

using namespace glelab;

namespace {

SimConfig basic_config(int dim, double gamma, double dt, double t_final) {
    SimConfig cfg;
    cfg.dim = dim;
    cfg.gamma = gamma;
    cfg.grid = TimeGrid::from_horizon(dt, t_final);
    cfg.batches = 1;
    cfg.seed = 101;
    return cfg;
}

double sup_state_diff(const Trajectory& a, const Trajectory& b) {
    double worst = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i)
        worst = std::max(worst, std::abs(a.data[i] - b.data[i]));
    return worst;
}

}  // namespace

TEST_CASE("noise-free memoryless relaxation is exponential") {
    SimConfig cfg = basic_config(1, 2.0, 1e-3, 2.0);
    cfg.init_v = InitSpec::point({1.5});
    const Trajectory traj = simulate_first_order(cfg, Kernel::zero());
    double worst = 0.0;
    for (int i = 0; i < cfg.grid.size(); ++i)
        worst = std::max(worst,
                         std::abs(traj.state(i)[0] - 1.5 * std::exp(-2.0 * cfg.grid.t(i))));
    CHECK(worst < 5e-3);  // first-order stepping without noise
}

TEST_CASE("power-law memory drives squared-velocity decay at twice the kernel rate") {
    SimConfig cfg = basic_config(1, 3.0, 0.01, 100.0);
    cfg.init_v = InitSpec::point({1.0});
    const Trajectory traj = simulate_first_order(cfg, Kernel::power_law(1.0, 1.0, 4.0));
    GridFunction vsq(cfg.grid);
    for (int i = 0; i < cfg.grid.size(); ++i) vsq[i] = traj.state(i)[0] * traj.state(i)[0];
    const DecayFit fit = fit_decay(vsq, DecayModel::PowerLaw, {5.0, 100.0});
    CHECK(fit.rate > 7.0);
    CHECK(fit.rate < 9.0);
}

TEST_CASE("fixed seeds reproduce trajectories bit for bit") {
    SimConfig cfg = basic_config(1, 1.0, 0.01, 5.0);
    cfg.sigma = Mat::scalar(0.5);
    const Kernel k = Kernel::exponential(0.4, 1.0);
    const Trajectory a = simulate_first_order(cfg, k, 3);
    const Trajectory b = simulate_first_order(cfg, k, 3);
    CHECK(sup_state_diff(a, b) == 0.0);
    // another batch index deviates
    const Trajectory c = simulate_first_order(cfg, k, 4);
    CHECK(sup_state_diff(a, c) > 0.0);
}

TEST_CASE("noise-free runs do not depend on the seed") {
    SimConfig cfg = basic_config(1, 1.0, 0.01, 5.0);
    cfg.init_v = InitSpec::point({0.7});
    const Kernel k = Kernel::power_law(0.5, 1.0, 3.0);
    Trajectory a = simulate_first_order(cfg, k);
    cfg.seed = 999;
    Trajectory b = simulate_first_order(cfg, k);
    CHECK(sup_state_diff(a, b) == 0.0);
}

TEST_CASE("coupled ensembles with equal kernels coincide exactly") {
    SimConfig cfg = basic_config(1, 3.0, 0.01, 10.0);
    cfg.sigma = Mat::scalar(1e-3);
    cfg.batches = 3;
    const Kernel k = Kernel::power_law(1.0, 1.0, 4.0);
    const CoupledEnsemble ens = simulate_coupled(cfg, k, k, SystemOrder::First);
    for (int b = 0; b < cfg.batches; ++b)
        CHECK(sup_state_diff(ens.true_paths[static_cast<size_t>(b)],
                             ens.pert_paths[static_cast<size_t>(b)]) == 0.0);
    const MomentSeries diff = ensemble_moments(ens, EnsembleFunctional::DiffSq);
    for (int i = 0; i < diff.mean.size(); ++i) CHECK(diff.mean[i] == 0.0);
}

TEST_CASE("coupled results are independent of thread count and symmetric in arguments") {
    SimConfig cfg = basic_config(1, 3.0, 0.01, 5.0);
    cfg.sigma = Mat::scalar(1e-3);
    cfg.batches = 4;
    const Kernel k = Kernel::power_law(1.0, 1.0, 4.0);
    const Kernel pert = Kernel::perturbed(k, PerturbFamily::Translation, 1.0);

    const CoupledEnsemble one = simulate_coupled(cfg, k, pert, SystemOrder::First, nullptr, 1);
    const CoupledEnsemble two = simulate_coupled(cfg, k, pert, SystemOrder::First, nullptr, 4);
    for (int b = 0; b < cfg.batches; ++b) {
        CHECK(sup_state_diff(one.true_paths[static_cast<size_t>(b)],
                             two.true_paths[static_cast<size_t>(b)]) == 0.0);
        CHECK(sup_state_diff(one.pert_paths[static_cast<size_t>(b)],
                             two.pert_paths[static_cast<size_t>(b)]) == 0.0);
    }

    const CoupledEnsemble swapped = simulate_coupled(cfg, pert, k, SystemOrder::First);
    const GridFunction d1 = ensemble_moments(one, EnsembleFunctional::DiffSq).mean;
    const GridFunction d2 = ensemble_moments(swapped, EnsembleFunctional::DiffSq).mean;
    for (int i = 0; i < d1.size(); ++i) CHECK(d1[i] == d2[i]);
}

TEST_CASE("translated kernel produces a finite decaying discrepancy") {
    SimConfig cfg = basic_config(1, 3.0, 0.01, 20.0);
    cfg.sigma = Mat::scalar(1e-3);
    cfg.batches = 4;
    const Kernel k = Kernel::power_law(1.0, 1.0, 4.0);
    const Kernel pert = Kernel::perturbed(k, PerturbFamily::Translation, 1.0);
    const CoupledEnsemble ens = simulate_coupled(cfg, k, pert, SystemOrder::First);
    const GridFunction diff = ensemble_moments(ens, EnsembleFunctional::DiffSq).mean;
    double peak = 0.0;
    for (int i = 0; i < diff.size(); ++i) peak = std::max(peak, diff[i]);
    CHECK(peak > 0.0);
    CHECK(std::isfinite(peak));
    CHECK(diff[diff.size() - 1] < 0.05 * peak);

    const BoundConstant c2 = empirical_sup_ratio(diff, WeightFunction::power_law(1.0, 6.0), 1e-6,
                                                 {cfg.grid.dt, cfg.grid.horizon()});
    CHECK(c2.value > 0.0);
}

TEST_CASE("second-order noiseless energy decays and equilibria persist") {
    SimConfig cfg = basic_config(2, 2.0, 1e-3, 5.0);
    cfg.init_x = InitSpec::point({1.0, -0.5});
    cfg.init_v = InitSpec::point({0.0, 0.25});
    const double kappa0 = 1.0, u = 1.0;
    const PotentialSpec pot = PotentialSpec::quadratic(Mat::identity(2) * kappa0, u);
    const Trajectory traj = simulate_second_order(cfg, Kernel::zero(2), pot);

    auto energy = [&](int i) {
        double e = 0.0;
        for (int c = 0; c < 2; ++c) {
            const double x = traj.state(i)[c], v = traj.state(i)[2 + c];
            e += 0.5 * kappa0 * u * x * x + 0.5 * v * v;
        }
        return e;
    };
    double prev = energy(0);
    for (int i = 1; i < cfg.grid.size(); ++i) {
        const double e = energy(i);
        CHECK(e <= prev * (1.0 + 10.0 * cfg.grid.dt) + 1e-12);
        prev = e;
    }
    CHECK(energy(cfg.grid.n_steps) < 0.2 * energy(0));

    // exact equilibrium at the minimum
    SimConfig eq = cfg;
    eq.init_x = InitSpec::point({0.0, 0.0});
    eq.init_v = InitSpec::point({0.0, 0.0});
    const PotentialSpec pot2 = PotentialSpec::quadratic_log_cosh(Mat::identity(2), 1.0, 0.01);
    const Trajectory rest = simulate_second_order(eq, Kernel::zero(2), pot2);
    for (double v : rest.data) CHECK(v == 0.0);
}

TEST_CASE("recursion memory path agrees with the direct sum") {
    // scalar exponential kernel
    {
        SimConfig cfg = basic_config(1, 1.5, 0.01, 8.0);
        cfg.sigma = Mat::scalar(0.1);
        const Kernel k = Kernel::exponential(0.8, 1.3);
        const Trajectory slow = simulate_first_order(cfg, k, 2);
        cfg.memory = MemoryMode::ExpRecursion;
        const Trajectory fast = simulate_first_order(cfg, k, 2);
        CHECK(sup_state_diff(slow, fast) < 1e-6);
    }
    // matrix exponential base and each perturbation family
    const Mat q = random_orthogonal(3, 11);
    const Kernel base = Kernel::matrix_exp(q, {0.5, 1.0, 2.0});
    const PotentialSpec pot = PotentialSpec::quadratic_log_cosh(Mat::identity(3) * 10.0, 10.0, 0.01);
    struct Case {
        PerturbFamily fam;
        double alpha;
    };
    for (const Case c : {Case{PerturbFamily::Translation, 0.4}, Case{PerturbFamily::Dilation, 0.6},
                         Case{PerturbFamily::Cutoff, 1.2}, Case{PerturbFamily::Oscillation, 0.9}}) {
        SimConfig cfg = basic_config(3, 10.0, 0.01, 4.0);
        cfg.sigma = Mat::identity(3) * 1e-4;
        const Kernel k = Kernel::perturbed(base, c.fam, c.alpha);
        const Trajectory slow = simulate_second_order(cfg, k, pot, 1);
        cfg.memory = MemoryMode::ExpRecursion;
        const Trajectory fast = simulate_second_order(cfg, k, pot, 1);
        CHECK(sup_state_diff(slow, fast) < 1e-6);
    }
    // the recursion refuses kernels without exponential structure
    SimConfig cfg = basic_config(1, 1.0, 0.01, 2.0);
    cfg.memory = MemoryMode::ExpRecursion;
    CHECK_THROWS_AS(simulate_first_order(cfg, Kernel::power_law(1.0, 1.0, 4.0)),
                    std::invalid_argument);
}

TEST_CASE("ornstein-uhlenbeck closed form within monte carlo error") {
    const double gamma = 1.0, sigma = 0.8, v0 = 1.0;
    SimConfig cfg = basic_config(1, gamma, 0.005, 2.0);
    cfg.sigma = Mat::scalar(sigma);
    cfg.init_v = InitSpec::point({v0});
    cfg.memory = MemoryMode::ExpRecursion;
    const Kernel none = Kernel::exponential(0.0, 1.0);

    const int batches = 10000;
    const std::vector<int> probes = {static_cast<int>(0.5 / cfg.grid.dt),
                                     static_cast<int>(1.0 / cfg.grid.dt), cfg.grid.n_steps};
    std::vector<double> sum(probes.size(), 0.0), sum2(probes.size(), 0.0);
    for (int b = 0; b < batches; ++b) {
        const Trajectory traj = simulate_first_order(cfg, none, b);
        for (size_t j = 0; j < probes.size(); ++j) {
            const double v = traj.state(probes[j])[0];
            sum[j] += v * v;
            sum2[j] += v * v * v * v;
        }
    }
    for (size_t j = 0; j < probes.size(); ++j) {
        const double t = cfg.grid.t(probes[j]);
        const double mean = sum[j] / batches;
        const double var = sum2[j] / batches - mean * mean;
        const double se = std::sqrt(var / batches);
        const double theory = std::exp(-2.0 * gamma * t) * v0 * v0 +
                              sigma * sigma * (1.0 - std::exp(-2.0 * gamma * t)) / (2.0 * gamma);
        CHECK(std::abs(mean - theory) < 3.0 * se + 0.01 * theory);
    }
}

TEST_CASE("lyapunov parameters and distance forms") {
    const double gamma = 10.0, u = 10.0, kappa0 = 10.0;
    const LyapunovParams p = lyapunov_params(gamma, u, Mat::identity(3) * kappa0, kappa0);
    CHECK(p.lambda == doctest::Approx(0.125));
    CHECK(p.b(0, 0) == doctest::Approx(0.75 / gamma));
    CHECK(p.a(0, 0) == doctest::Approx(u * kappa0 / (gamma * gamma) + 9.0 / 32.0));
    CHECK(p.c(1, 1) == doctest::Approx(1.0 / (gamma * gamma)));

    CHECK(lyapunov_distance_sq(p, {0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}) == 0.0);

    const Vec z = {0.3, -1.0, 0.7};
    CHECK(lyapunov_distance_sq(p, z, {0.0, 0.0, 0.0}) ==
          doctest::Approx(dot(z, p.a.apply(z))).epsilon(1e-14));

    // quadratic form equals the explicit three-term expression
    for (uint64_t s = 0; s < 50; ++s) {
        Vec zz(3), ww(3);
        for (int c = 0; c < 3; ++c) {
            zz[static_cast<size_t>(c)] =
                normal_draw(s, 0, RngStream::Generic, 1, static_cast<uint32_t>(c));
            ww[static_cast<size_t>(c)] =
                normal_draw(s, 0, RngStream::Generic, 2, static_cast<uint32_t>(c));
        }
        const double lhs = lyapunov_distance_sq(p, zz, ww);
        double cross = 0.0, znorm = 0.0, wnorm = 0.0, zr = 0.0;
        for (int c = 0; c < 3; ++c) {
            const double comb = (1.0 - 2.0 * p.lambda) * zz[static_cast<size_t>(c)] +
                                ww[static_cast<size_t>(c)] / gamma;
            cross += comb * comb;
            znorm += zz[static_cast<size_t>(c)] * zz[static_cast<size_t>(c)];
            wnorm += ww[static_cast<size_t>(c)] * ww[static_cast<size_t>(c)];
            zr += zz[static_cast<size_t>(c)] * zz[static_cast<size_t>(c)] * kappa0;
        }
        const double rhs = u / (gamma * gamma) * zr + 0.5 * cross + 0.5 * wnorm / (gamma * gamma);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
        if (znorm + wnorm > 0.0) CHECK(lhs > 0.0);
    }
}

TEST_CASE("drift form closed cases and the contraction inequality") {
    // one-dimensional closed form at (z, w) = (1, 0) without convex part
    {
        const double gamma = 4.0, u = 2.0, kappa0 = 3.0;
        const PotentialSpec pot = PotentialSpec::quadratic(Mat::identity(1) * kappa0, u);
        const LyapunovParams p = lyapunov_params(gamma, u, pot.r, kappa0);
        const double got = gamma_form(p, pot, {1.0}, {0.0}, {0.5}, {0.5});
        const double want = -(1.0 - 2.0 * p.lambda) / gamma * u * kappa0;
        CHECK(got == doctest::Approx(want).epsilon(1e-14));
        CHECK(gamma_form(p, pot, {1.0}, {1.0}, {0.5}, {0.5}) == 0.0);
    }

    // random-state sweep of the contraction bound
    const double gamma = 10.0, u = 10.0, kappa0 = 10.0, lg = 0.01;
    const PotentialSpec pot = PotentialSpec::quadratic_log_cosh(Mat::identity(3) * kappa0, u, lg);
    REQUIRE(lg * u / (gamma * gamma) <= 0.75);
    const LyapunovParams p = lyapunov_params(gamma, u, pot.r, kappa0);
    int violations = 0;
    for (uint32_t s = 0; s < 10000; ++s) {
        Vec x(3), xt(3), v(3), vt(3), z(3), w(3);
        for (int c = 0; c < 3; ++c) {
            x[static_cast<size_t>(c)] = 5.0 * normal_draw(77, s, RngStream::Generic, 0,
                                                          static_cast<uint32_t>(c));
            xt[static_cast<size_t>(c)] = 5.0 * normal_draw(77, s, RngStream::Generic, 1,
                                                           static_cast<uint32_t>(c));
            v[static_cast<size_t>(c)] = 5.0 * normal_draw(77, s, RngStream::Generic, 2,
                                                          static_cast<uint32_t>(c));
            vt[static_cast<size_t>(c)] = 5.0 * normal_draw(77, s, RngStream::Generic, 3,
                                                           static_cast<uint32_t>(c));
            z[static_cast<size_t>(c)] = x[static_cast<size_t>(c)] - xt[static_cast<size_t>(c)];
            w[static_cast<size_t>(c)] = v[static_cast<size_t>(c)] - vt[static_cast<size_t>(c)];
        }
        const double gamma_val = gamma_form(p, pot, x, xt, v, vt);
        const double rsq = lyapunov_distance_sq(p, z, w);
        if (gamma_val > -2.0 * p.lambda * gamma * rsq + 1e-9 * (1.0 + rsq)) ++violations;
    }
    CHECK(violations == 0);
}

TEST_CASE("divergent simulations abort with the failing step") {
    SimConfig cfg = basic_config(1, 1e8, 0.5, 40.0);
    cfg.init_v = InitSpec::point({1.0});
    try {
        simulate_first_order(cfg, Kernel::zero());
        FAIL("expected divergence");
    } catch (const SimDivergence& e) {
        CHECK(e.step > 0);
        CHECK(e.batch == 0);
    }
}
