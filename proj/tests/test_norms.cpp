#include <doctest.h>

#include <cmath>

#include "glelab/experiments.hpp"
#include "glelab/norms.hpp"
#include "glelab/rng.hpp"

using namespace glelab;

namespace {

// independent quadrature oracle for integral_0^inf k(lag)^2 / h(lag) d lag,
// trapezoid at a finer step and a longer horizon than the norm under test
double norm_sq_oracle(const Kernel& k, const WeightFunction& h, double dt, double t_end) {
    const TimeGrid g = TimeGrid::from_horizon(dt, t_end);
    GridFunction f(g);
    for (int i = 0; i < g.size(); ++i) {
        const double a = k.opnorm_lag(g.t(i));
        f[i] = a * a / h(g.t(i));
    }
    return trapezoid(f);
}

}  // namespace

TEST_CASE("laplace transform closed forms and failure modes") {
    CHECK(laplace_transform(Kernel::exponential(1.0, 2.0), 0.0) == doctest::Approx(0.5));
    CHECK(laplace_transform(Kernel::exponential(3.0, 2.0), 1.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(laplace_transform(Kernel::exponential(1.0, 2.0), -2.0), DivergenceError);

    // c alpha^(1-beta) / (beta - 1)
    CHECK(laplace_transform(Kernel::power_law(1.0, 0.1, 4.0), 0.0) ==
          doctest::Approx(1000.0 / 3.0).epsilon(1e-12));
    CHECK_THROWS_AS(laplace_transform(Kernel::power_law(1.0, 0.1, 4.0), -0.1), DivergenceError);

    // zero kernel transforms to zero for any mu
    CHECK(laplace_transform(Kernel::zero(), 0.0) == 0.0);
    CHECK(laplace_transform(Kernel::exponential(0.0, 1.0), -5.0) == 0.0);

    // quadrature route cross-check against a fine trapezoid oracle (the
    // integrand peaks sharply at zero, which limits the oracle itself)
    const Kernel pl = Kernel::power_law(1.0, 0.1, 4.0);
    const double via_quadrature = laplace_transform(pl, 0.7);
    const TimeGrid g = TimeGrid::from_horizon(5e-5, 60.0);
    GridFunction f(g);
    for (int i = 0; i < g.size(); ++i)
        f[i] = std::exp(-0.7 * g.t(i)) * pl.scalar_lag(g.t(i));
    CHECK(via_quadrature == doctest::Approx(trapezoid(f)).epsilon(1e-6));

    // weights
    CHECK(laplace_transform(WeightFunction::power_law(1.0, 6.0), 0.0) == doctest::Approx(0.2));
    CHECK(laplace_transform(WeightFunction::exponential(0.9, -0.8), -0.8) ==
          doctest::Approx(10.0).epsilon(1e-12));
    CHECK_THROWS_AS(laplace_transform(WeightFunction::exponential(1.0, 0.0), -1.0),
                    DivergenceError);
    CHECK_THROWS_AS(laplace_transform(WeightFunction::power_law(1.0, 0.0), 0.0), DivergenceError);
}

TEST_CASE("schur norm analytic cases") {
    const TimeGrid grid = TimeGrid::from_horizon(0.01, 50.0);

    // integral of (1+u)^-8 (1+u)^6 = integral (1+u)^-2 = 1
    const NormResult pl =
        schur_norm(Kernel::power_law(1.0, 1.0, 4.0), WeightFunction::power_law(1.0, 6.0), grid);
    CHECK(pl.value == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(pl.warnings.empty());

    const NormResult zero =
        schur_norm(Kernel::zero(), WeightFunction::power_law(1.0, 6.0), grid);
    CHECK(zero.value == 0.0);

    // ||K(u)|| = exp(-0.5 u), weight exp(-0.9 u): integral exp(-0.1 u) = 10
    const TimeGrid grid2 = TimeGrid::from_horizon(0.005, 30.0);
    const Kernel mex = Kernel::matrix_exp(random_orthogonal(3, 7), {0.5, 1.0, 2.0});
    const NormResult mn = schur_norm(mex, WeightFunction::exponential(0.9, -0.8), grid2);
    CHECK(mn.value == doctest::Approx(std::sqrt(10.0)).epsilon(1e-3));
}

TEST_CASE("schur norm of translation-invariant kernels equals the lag quadrature") {
    const TimeGrid grid = TimeGrid::from_horizon(0.02, 40.0);
    const Kernel k = Kernel::exponential(0.8, 1.1);
    const WeightFunction h = WeightFunction::power_law(0.5, 3.0);
    const NormResult n = schur_norm(k, h, grid);
    CHECK(n.value * n.value == doctest::Approx(norm_sq_oracle(k, h, 0.002, 120.0)).epsilon(1e-4));
}

TEST_CASE("schur norm axioms") {
    const TimeGrid grid = TimeGrid::from_horizon(0.05, 20.0);
    const WeightFunction h = WeightFunction::power_law(1.0, 6.0);

    // absolute homogeneity through the amplitude parameter
    const double n1 = schur_norm(Kernel::power_law(1.0, 1.0, 4.0), h, grid).value;
    const double n3 = schur_norm(Kernel::power_law(3.0, 1.0, 4.0), h, grid).value;
    CHECK(n3 == doctest::Approx(3.0 * n1).epsilon(1e-12));

    // triangle inequality on random two-time kernels (grid suprema)
    for (uint64_t seed = 0; seed < 5; ++seed) {
        auto wiggle = [seed](int which) {
            return [seed, which](double t, double s) {
                const double a =
                    normal_draw(seed, static_cast<uint32_t>(which), RngStream::Generic, 0, 0);
                const double b =
                    normal_draw(seed, static_cast<uint32_t>(which), RngStream::Generic, 1, 0);
                return Mat::scalar(a * std::exp(-(t - s)) + b * std::pow(1.0 + t - s, -3.0) *
                                                                std::cos(0.3 * s));
            };
        };
        const Kernel k1 = Kernel::two_time(wiggle(0), 1);
        const Kernel k2 = Kernel::two_time(wiggle(1), 1);
        const Kernel sum = Kernel::two_time(
            [f = wiggle(0), g = wiggle(1)](double t, double s) {
                Mat m = f(t, s);
                m += g(t, s);
                return m;
            },
            1);
        const double a = schur_norm(sum, h, grid).value;
        const double b = schur_norm(k1, h, grid).value + schur_norm(k2, h, grid).value;
        CHECK(a <= b * (1.0 + 1e-12));
        CHECK(a >= 0.0);
    }
}

TEST_CASE("difference norms shrink as the perturbation vanishes") {
    const TimeGrid grid = TimeGrid::from_horizon(0.01, 50.0);
    const WeightFunction h = WeightFunction::power_law(1.0, 6.0);
    const Kernel base = Kernel::power_law(1.0, 1.0, 4.0);
    for (const auto fam :
         {PerturbFamily::Translation, PerturbFamily::Dilation, PerturbFamily::Oscillation}) {
        double prev = -1.0;
        for (double alpha : {1.0, 0.5, 0.25, 0.1, 0.0}) {
            const double v =
                schur_norm_diff(base, Kernel::perturbed(base, fam, alpha), h, grid).value;
            if (prev >= 0.0) CHECK(v <= prev + 1e-12);
            prev = v;
        }
        CHECK(prev == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("difference norms against symbolic antiderivatives") {
    // base (1+u)^-4, weight (1+u)^-6:
    //   translation a=2:  1 - 2 I2 + I3 with I2 = int (1+u)^2 (3+u)^-4 = 13/81
    //                     and I3 = int (1+u)^6 (3+u)^-8 (binomial expansion)
    //   dilation a=0.5:   int (1+u)^-2 - 2 (1+u)^-2.5 + (1+u)^-3 = 1/6
    //   cutoff a=1.5:     int_{1.5}^inf (1+u)^-2 = 0.4
    const TimeGrid grid = TimeGrid::from_horizon(0.01, 50.0);
    const WeightFunction h = WeightFunction::power_law(1.0, 6.0);
    const Kernel base = Kernel::power_law(1.0, 1.0, 4.0);

    const double i3 = 1.0 / 3 - 2.0 / 3 + 20.0 / 27 - 40.0 / 81 + 16.0 / 81 - 32.0 / 729 +
                      64.0 / 15309;
    const double translation_sq = 1.0 - 26.0 / 81 + i3;
    const double tr = schur_norm_diff(
                          base, Kernel::perturbed(base, PerturbFamily::Translation, 2.0), h, grid)
                          .value;
    CHECK(tr == doctest::Approx(std::sqrt(translation_sq)).epsilon(1e-4));

    const double dil = schur_norm_diff(
                           base, Kernel::perturbed(base, PerturbFamily::Dilation, 0.5), h, grid)
                           .value;
    CHECK(dil == doctest::Approx(std::sqrt(1.0 / 6.0)).epsilon(1e-4));

    // the straddling quadrature cell at the jump contributes its left-limit
    // value, an O(dt) effect local to the cutoff
    const double cut = schur_norm_diff(
                           base, Kernel::perturbed(base, PerturbFamily::Cutoff, 1.5), h, grid)
                           .value;
    CHECK(cut == doctest::Approx(std::sqrt(0.4)).epsilon(2e-3));

    // oscillation a=0.6 has no elementary antiderivative; long-horizon oracle
    {
        const Kernel pert = Kernel::perturbed(base, PerturbFamily::Oscillation, 0.6);
        const double with_tail = schur_norm_diff(base, pert, h, grid).value;
        const TimeGrid longer = TimeGrid::from_horizon(0.005, 2000.0);
        GridFunction f(longer);
        for (int i = 0; i < longer.size(); ++i) {
            const double u = longer.t(i);
            const double d = base.scalar_lag(u) - pert.scalar_lag(u);
            f[i] = d * d / h(u);
        }
        CHECK(with_tail == doctest::Approx(std::sqrt(trapezoid(f))).epsilon(1e-3));
    }

    // matrix-exponential base, weight exp(-0.9 u), rates {0.5, 1, 2}:
    //   translation a=0.3: int (1 - e^{-0.3u})^2 e^{-0.1u} = 10 - 5 + 10/7
    //   cutoff a=4:        int_4^inf e^{-0.1u} = 10 e^{-0.4}
    //   oscillation a=0.8: 15 - 0.2/(0.01+0.64) + 0.05/(0.01+2.56)
    const TimeGrid grid2 = TimeGrid::from_horizon(0.005, 30.0);
    const WeightFunction h2 = WeightFunction::exponential(0.9, -0.8);
    const Kernel mex = Kernel::matrix_exp(random_orthogonal(3, 7), {0.5, 1.0, 2.0});

    const double mtr = schur_norm_diff(
                           mex, Kernel::perturbed(mex, PerturbFamily::Translation, 0.3), h2, grid2)
                           .value;
    CHECK(mtr == doctest::Approx(std::sqrt(10.0 - 5.0 + 10.0 / 7.0)).epsilon(1e-4));

    const double mcut = schur_norm_diff(
                            mex, Kernel::perturbed(mex, PerturbFamily::Cutoff, 4.0), h2, grid2)
                            .value;
    CHECK(mcut == doctest::Approx(std::sqrt(10.0 * std::exp(-0.4))).epsilon(1e-4));

    const double mosc = schur_norm_diff(
                            mex, Kernel::perturbed(mex, PerturbFamily::Oscillation, 0.8), h2, grid2)
                            .value;
    CHECK(mosc ==
          doctest::Approx(std::sqrt(15.0 - 0.2 / 0.65 + 0.05 / 2.57)).epsilon(1e-4));

    // dilation has eigencomponent crossovers; exponential decay makes a
    // moderate-horizon quadrature oracle accurate
    {
        const Kernel pert = Kernel::perturbed(mex, PerturbFamily::Dilation, 0.5);
        const double with_tail = schur_norm_diff(mex, pert, h2, grid2).value;
        const TimeGrid longer = TimeGrid::from_horizon(0.005, 150.0);
        GridFunction f(longer);
        for (int i = 0; i < longer.size(); ++i) {
            const double u = longer.t(i);
            const double d = operator_norm(mex.evaluate(u, 0.0) - pert.evaluate(u, 0.0));
            f[i] = d * d / h2(u);
        }
        CHECK(with_tail == doctest::Approx(std::sqrt(trapezoid(f))).epsilon(1e-3));
    }
}

TEST_CASE("two-time kernels take the grid supremum with a warning") {
    const TimeGrid grid = TimeGrid::from_horizon(0.05, 10.0);
    const Kernel tt = Kernel::two_time(
        [](double t, double s) { return Mat::scalar(std::exp(-(t - s)) / (1.0 + 0.2 * t)); }, 1);
    const NormResult n = schur_norm(tt, WeightFunction::power_law(1.0, 6.0), grid);
    CHECK(n.value > 0.0);
    CHECK_FALSE(n.warnings.empty());
}

TEST_CASE("mh constant for an integrable power-law weight") {
    const WeightFunction h = WeightFunction::power_law(1.0, 6.0);
    const TimeGrid grid = TimeGrid::from_horizon(0.01, 50.0);
    const MhResult mh = mh_constant(h, grid);
    CHECK(mh.limit == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(mh.value >= 0.4);

    // finer-grid oracle for the convolution supremum
    const MhResult fine = mh_constant(h, TimeGrid::from_horizon(0.002, 50.0));
    CHECK(mh.value == doctest::Approx(fine.value).epsilon(5e-3));

    // doubling the weight doubles the ratio: recompute the convolution by hand
    GridFunction h2(grid);
    for (int i = 0; i < grid.size(); ++i) h2[i] = 2.0 * h(grid.t(i));
    const int probe = grid.size() / 2;
    double conv = 0.5 * (h2[0] * h2[probe] + h2[probe] * h2[0]);
    for (int j = 1; j < probe; ++j) conv += h2[j] * h2[probe - j];
    conv *= grid.dt;
    double conv1 = 0.5 * (h(0.0) * h(grid.t(probe)) + h(grid.t(probe)) * h(0.0));
    for (int j = 1; j < probe; ++j) conv1 += h(grid.t(j)) * h(grid.t(probe - j));
    conv1 *= grid.dt;
    CHECK(conv / h2[probe] == doctest::Approx(2.0 * conv1 / h(grid.t(probe))).epsilon(1e-12));
}

TEST_CASE("mh constant stays finite when the weight underflows") {
    const WeightFunction h = WeightFunction::exponential(5.0, -4.0);
    const MhResult mh = mh_constant(h, TimeGrid::from_horizon(0.05, 150.0));
    CHECK(std::isfinite(mh.value));
    CHECK(mh.value > 0.0);
}

TEST_CASE("weighted sup norm basics") {
    const WeightFunction h = WeightFunction::power_law(1.0, 6.0);
    const TimeGrid grid = TimeGrid::from_horizon(0.02, 30.0);
    const MhResult mh = mh_constant(h, grid);

    GridFunction f = GridFunction::sample(grid, [&](double t) { return h(t); });
    CHECK(weighted_sup_norm(f, h) == doctest::Approx(mh.value).epsilon(1e-12));

    GridFunction zero(grid);
    CHECK(weighted_sup_norm(zero, h) == 0.0);

    GridFunction twice = GridFunction::sample(grid, [&](double t) { return 2.0 * h(t); });
    CHECK(weighted_sup_norm(twice, h) == doctest::Approx(2.0 * mh.value).epsilon(1e-12));
}

TEST_CASE("decay-class diagnostic") {
    // integrable power law: all three limits check out
    const SubexpReport ok = subexponential_diagnostic(WeightFunction::power_law(1.0, 6.0),
                                                      TimeGrid::from_horizon(0.05, 200.0));
    CHECK(ok.origin_ok);
    CHECK(ok.horizon_ok);
    CHECK(ok.shift_ok);
    CHECK_FALSE(ok.divergent);

    // pure exponential: the convolution ratio grows linearly, so the
    // horizon check fails while the shift check passes
    const SubexpReport ex = subexponential_diagnostic(WeightFunction::exponential(1.0, -1.0),
                                                      TimeGrid::from_horizon(0.01, 40.0));
    CHECK_FALSE(ex.horizon_ok);
    CHECK(ex.shift_ok);
    CHECK(ex.divergent);

    // constant weight on a finite horizon is not integrable
    const SubexpReport flat = subexponential_diagnostic(WeightFunction::power_law(1.0, 0.0),
                                                        TimeGrid::from_horizon(0.05, 50.0));
    CHECK(flat.divergent);
    CHECK_FALSE(flat.limit_finite);
}

TEST_CASE("contraction condition checks") {
    // first-order error condition with unit perturbed norm
    ConditionParams p;
    p.gamma = 3.0;
    p.mu = 0.0;
    p.h_hat_mu = 0.2;
    p.schur = 1.0;
    const ConditionCheck c1 = check_condition(ConditionTag::FirstOrderError, p);
    CHECK(c1.checkable);
    CHECK(c1.lhs == doctest::Approx(6.0));
    CHECK(c1.rhs == doctest::Approx(2.0 * std::sqrt(0.4)).epsilon(1e-12));
    CHECK(c1.holds);

    // zero kernel: the right side vanishes
    p.schur = 0.0;
    for (const auto tag : {ConditionTag::FirstOrderMoment, ConditionTag::FirstOrderError}) {
        const ConditionCheck c = check_condition(tag, p);
        CHECK(c.rhs == 0.0);
        CHECK(c.holds);
    }

    // second-order error condition far from holding
    ConditionParams q;
    q.gamma = 10.0;
    q.lambda = 0.125;
    q.mu = -0.8;
    q.h_hat_mu = 10.0;
    q.schur = std::sqrt(10.0);
    const ConditionCheck c2 = check_condition(ConditionTag::SecondOrderError, q);
    CHECK(c2.lhs == doctest::Approx(1.7));
    CHECK(c2.rhs == doctest::Approx(40.0));
    CHECK_FALSE(c2.holds);

    // divergent transform: not checkable
    q.h_hat_finite = false;
    CHECK_FALSE(check_condition(ConditionTag::SecondOrderError, q).checkable);
}
