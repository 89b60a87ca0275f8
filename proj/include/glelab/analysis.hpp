#pragma once

// Rate fitting, empirical bound constants, and ensemble reductions.

#include <optional>
#include <string>
#include <vector>

#include "glelab/gle_sim.hpp"
#include "glelab/grid.hpp"
#include "glelab/kernel.hpp"

namespace glelab {

class FitError : public std::runtime_error {
public:
    explicit FitError(const std::string& what) : std::runtime_error(what) {}
};

enum class DecayModel { PowerLaw, Exponential };

struct FitWindow {
    double t_min = 0.0;
    double t_max = 0.0;
};

struct DecayFit {
    DecayModel model = DecayModel::PowerLaw;
    double rate = 0.0;       // beta-hat for t^-rate, rho-hat for exp(-rate t)
    double intercept = 0.0;  // log-scale intercept
    FitWindow window;
    double r_squared = 0.0;
    int n_used = 0;
    int n_dropped = 0;  // nonpositive / underflowed samples skipped
};

/// Ordinary least squares of log(series) against log(t) (power law) or t
/// (exponential) over the window. Points <= 1e-300 are dropped and counted;
/// fewer than 5 usable points raises FitError.
DecayFit fit_decay(const GridFunction& series, DecayModel model, const FitWindow& window);

struct BoundConstant {
    double value = 0.0;
    double offset = 0.0;
    FitWindow window;
    double argmax_t = 0.0;
};

/// max over grid points in the window of series(t) / (h(t) + offset).
BoundConstant empirical_sup_ratio(const GridFunction& series, const WeightFunction& h,
                                  double offset, const FitWindow& window);

/// Decay threshold f(beta) = c alpha^(1-beta) / (beta - 1); the damping must
/// exceed it for the power-law comparison bound to apply. Requires beta > 1.
double threshold_f(double c, double alpha, double beta);

/// Predicted exponential rate p(a, beta) (the largest characteristic root)
/// for the kernel c e^{-beta t}.
double rate_p(double a, double beta, double c);

struct LinearityReport {
    double slope = 0.0;
    double intercept = 0.0;
    double pearson_r = 0.0;
    int n = 0;
};

/// Least-squares line and Pearson correlation of (x, y) pairs. Needs at
/// least 4 points and nondegenerate x variance. Constant y reports r = 0.
LinearityReport linearity_report(const std::vector<double>& xs, const std::vector<double>& ys);

enum class EnsembleFunctional { DiffSq, LyapunovSq, NormSq };

struct MomentSeries {
    GridFunction mean;
    GridFunction std_error;  // batch standard error of the mean
};

/// Batch mean of the pathwise functional at every grid point.
///   DiffSq:     |state_true - state_pert|^2
///   LyapunovSq: r((X,V),(X~,V~))^2, needs params
///   NormSq:     |state_true|^2
MomentSeries ensemble_moments(const CoupledEnsemble& ens, EnsembleFunctional functional,
                              const LyapunovParams* params = nullptr);

/// r((X,V), (x_ref, 0))^2 along a single second-order trajectory; reference
/// defaults to the origin (the minimum of the built-in potentials).
GridFunction lyapunov_ref_series(const Trajectory& traj, const LyapunovParams& params,
                                 const Vec* x_ref = nullptr);

}  // namespace glelab
