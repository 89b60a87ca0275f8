#pragma once

// Weighted norms and transforms for kernels and weight functions: the Laplace
// transform, the Schur-type weighted kernel norm, the weighted supremum norm
// with its convolution constant M_h, a decay-class diagnostic, and the
// moment/error contraction condition checks.

#include <optional>
#include <string>
#include <vector>

#include "glelab/grid.hpp"
#include "glelab/kernel.hpp"
#include "glelab/tail.hpp"

namespace glelab {

/// hat{k}(mu) = integral_0^inf exp(-mu s) k(s) ds. Closed form where the
/// family admits one, otherwise adaptive quadrature plus an analytic tail
/// with relative remainder below 1e-8. Throws DivergenceError when the
/// integral does not converge.
double laplace_transform(const Kernel& k, double mu);
double laplace_transform(const WeightFunction& h, double mu);

struct NormResult {
    double value = 0.0;
    double head = 0.0;       // grid part of the squared norm
    double tail = 0.0;       // analytic part beyond the horizon
    double tail_bound = 0.0; // remainder estimate for the tail
    std::vector<std::string> warnings;
};

/// Schur-type weighted norm sup_t (integral_0^t ||K(t,s)||^2 / h(t-s) ds)^1/2.
/// Translation-invariant kernels integrate over the lag with the analytic
/// tail appended; two-time kernels take the supremum over grid times only.
NormResult schur_norm(const Kernel& k, const WeightFunction& h, const TimeGrid& grid);

/// Same norm for the difference K1 - K2. Closed-form tails are available for
/// scalar translation-invariant pairs and for matrix-exponential kernels
/// paired with their own perturbations.
NormResult schur_norm_diff(const Kernel& k1, const Kernel& k2, const WeightFunction& h,
                           const TimeGrid& grid);

struct MhResult {
    double value = 0.0;
    double grid_max = 0.0;
    double limit = 0.0;  // 2 hat{h}(0) when the weight is subexponential
    bool limit_finite = false;
    std::vector<std::string> warnings;
};

/// M_h = sup_t (h*h)(t) / h(t), from the grid convolution together with the
/// analytic limit for subexponential weights.
MhResult mh_constant(const WeightFunction& h, const TimeGrid& grid);

/// ||f||_h = M_h sup_t |f(t) / h(t)| over the grid.
double weighted_sup_norm(const GridFunction& f, const WeightFunction& h);

struct SubexpReport {
    double conv_ratio_origin = 0.0;   // (h*h)(t)/h(t) at the first grid point
    double conv_ratio_horizon = 0.0;  // same ratio at the horizon
    double conv_ratio_limit = 0.0;    // 2 hat{h}(mu) when finite
    bool limit_finite = false;
    double shift_max_dev = 0.0;  // max_{s<=S} |h(t-s)/h(t) e^{mu s} - 1| at the horizon
    double shift_window = 0.0;
    bool origin_ok = false;
    bool horizon_ok = false;
    bool shift_ok = false;
    bool divergent = false;
    std::vector<std::string> notes;
};

/// Empirical check of the decay-class limits at tolerance `tol` (relative).
SubexpReport subexponential_diagnostic(const WeightFunction& h, const TimeGrid& grid,
                                       double tol = 0.05);

enum class ConditionTag { FirstOrderMoment, FirstOrderError, SecondOrderMoment, SecondOrderError };

const char* to_string(ConditionTag tag);

struct ConditionParams {
    double gamma = 0.0;
    double mu = 0.0;
    double h_hat_mu = 0.0;
    bool h_hat_finite = true;
    double schur = 0.0;   // norm of K (moment tags) or of the perturbed kernel (error tags)
    double lambda = 0.0;  // second-order contraction factor
};

struct ConditionCheck {
    bool checkable = false;
    bool holds = false;
    double lhs = 0.0;
    double rhs = 0.0;
};

/// Evaluates the contraction condition for the given tag literally:
///   FirstOrderMoment:  mu + 2 gamma        > 2 |||K|||_h  hat{h}(mu)^1/2
///   FirstOrderError:   mu + 2 gamma        > 2 |||K~|||_h (2 hat{h}(mu))^1/2
///   SecondOrderMoment: mu + 2 gamma lambda > 2 (2 |||K|||_h^2 hat{h}(mu))^1/2
///   SecondOrderError:  mu + 2 gamma lambda > 4 (|||K~|||_h^2 hat{h}(mu))^1/2
ConditionCheck check_condition(ConditionTag tag, const ConditionParams& p);

/// Convenience form: computes the Schur norm of `k` and hat{h}(mu) first.
ConditionCheck check_condition(ConditionTag tag, const Kernel& k, const WeightFunction& h,
                               const TimeGrid& grid, double gamma, double lambda = 0.0);

namespace detail {
/// Signed kernel value as a function of the lag, for scalar translation
/// invariant kernels (pieces for cutoffs).
std::optional<PiecewiseEnvelope> signed_amplitude(const Kernel& k);
/// ||K(lag)||^2 for translation invariant kernels.
std::optional<PiecewiseEnvelope> opnorm_sq_envelope(const Kernel& k);
/// ||K1(lag) - K2(lag)||^2 where representable.
std::optional<PiecewiseEnvelope> opnorm_sq_envelope_diff(const Kernel& k1, const Kernel& k2);
/// Divides an envelope by the weight (multiplies by 1/h).
PiecewiseEnvelope divide_by_weight(PiecewiseEnvelope env, const WeightFunction& h);
}  // namespace detail

}  // namespace glelab
