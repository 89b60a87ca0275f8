#pragma once

// Euler-Maruyama simulation of first- and second-order generalized Langevin
// dynamics with memory, under synchronized noise coupling of a true and a
// perturbed kernel, plus the hypocoercive quadratic distance for the second
// order system.
//
// Reproducibility contract: every Gaussian increment is derived from
// (seed, batch, stream, step, component) through the counter generator in
// rng.hpp, so results are bit-identical across runs and thread counts.

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "glelab/grid.hpp"
#include "glelab/kernel.hpp"
#include "glelab/mat.hpp"
#include "glelab/volterra.hpp"

namespace glelab {

class SimDivergence : public std::runtime_error {
public:
    SimDivergence(int batch_, int step_)
        : std::runtime_error("simulation diverged in batch " + std::to_string(batch_) +
                             " at step " + std::to_string(step_)),
          batch(batch_),
          step(step_) {}
    int batch;
    int step;
};

struct InitSpec {
    enum class Kind { PointMass, Gaussian };
    Kind kind = Kind::Gaussian;
    Vec mean;  // empty = zero
    std::optional<Mat> cov;  // Gaussian only; absent = identity

    static InitSpec point(Vec at) { return InitSpec{Kind::PointMass, std::move(at), std::nullopt}; }
    static InitSpec standard_gaussian() { return InitSpec{}; }
};

struct SimConfig {
    int dim = 1;
    double gamma = 1.0;
    Mat sigma;  // dim x dim noise amplitude; default zero
    TimeGrid grid;
    int batches = 1;
    uint64_t seed = 0;
    InitSpec init_v;
    InitSpec init_x;  // second order only
    MemoryMode memory = MemoryMode::Direct;

    void validate() const;
};

enum class SystemOrder { First, Second };

struct Trajectory {
    TimeGrid grid;
    int dim = 1;        // spatial dimension d
    int state_dim = 1;  // d for first order, 2d (X then V) for second order
    std::vector<double> data;  // (n_steps + 1) * state_dim

    double* state(int i) { return data.data() + static_cast<size_t>(i) * state_dim; }
    const double* state(int i) const { return data.data() + static_cast<size_t>(i) * state_dim; }
    const double* velocity(int i) const {
        return state(i) + (state_dim == dim ? 0 : dim);
    }
    const double* position(int i) const { return state(i); }  // second order only
};

/// One batch of the first-order dynamics
///   dV = (-gamma V - integral_0^t K(t,s) V_s ds) dt + sigma dB.
Trajectory simulate_first_order(const SimConfig& cfg, const Kernel& kernel, int batch = 0);

/// One batch of the second-order dynamics with the confining potential:
///   dX = V dt,  dV = (-gamma V - u grad U(X) - memory) dt + sigma dB.
Trajectory simulate_second_order(const SimConfig& cfg, const Kernel& kernel,
                                 const PotentialSpec& pot, int batch = 0);

struct NoiseKey {
    uint64_t seed = 0;
    uint32_t batch = 0;
};

struct CoupledEnsemble {
    std::vector<Trajectory> true_paths;
    std::vector<Trajectory> pert_paths;
    std::vector<NoiseKey> noise_ledger;  // increments are regenerated, never stored
    SystemOrder order = SystemOrder::First;
};

/// Batches of (true, perturbed) pairs driven by identical Brownian increments
/// and identical initial states. `threads` parallelizes over batches without
/// affecting the output.
CoupledEnsemble simulate_coupled(const SimConfig& cfg, const Kernel& kernel_true,
                                 const Kernel& kernel_pert, SystemOrder order,
                                 const PotentialSpec* pot = nullptr, int threads = 1);

// --- hypocoercive distance ----------------------------------------------------

struct LyapunovParams {
    double lambda = 0.0;
    Mat a, b, c;
    double gamma = 0.0;
    double u = 0.0;
};

/// lambda = min(1/8, kappa0 u / (2 gamma^2)), A = u R / gamma^2 +
/// (1-2 lambda)^2 Id / 2, B = (1-2 lambda) Id / gamma, C = Id / gamma^2.
LyapunovParams lyapunov_params(double gamma, double u, const Mat& r, double kappa0);

/// Z.A Z + Z.B W + W.C W; equals u Z.RZ/gamma^2 + |(1-2 lambda) Z +
/// W/gamma|^2 / 2 + |W|^2 / (2 gamma^2).
double lyapunov_distance_sq(const LyapunovParams& p, const Vec& z, const Vec& w);

/// Drift form of the memoryless part:
/// (2A Z + B W).W + (B Z + 2C W).(-gamma W - u (grad U(x) - grad U(x~))).
double gamma_form(const LyapunovParams& p, const PotentialSpec& pot, const Vec& x, const Vec& xt,
                  const Vec& v, const Vec& vt);

}  // namespace glelab
