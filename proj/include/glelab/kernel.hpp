#pragma once

// Memory kernels K(t, s), weight functions h(t), and confining potentials.
//
// The built-in families are translation invariant: K(t, s) = K(t - s). A
// perturbation wrapper derives a modified kernel from a base family; the
// meaning of each perturbation depends on the base:
//
//   base family      Translation            Dilation               Cutoff / Oscillation
//   power law        lag shift t -> t+a     exponent beta -> beta+a   multiplicative
//   exponential      rate beta -> beta+a    lag shift t -> t+a        multiplicative
//   matrix exp       rates S -> S + a I     lag shift t -> t+a        multiplicative
//
// Cutoff multiplies by the indicator 1_{lag <= a}; Oscillation by cos(a*lag).
// All perturbations with a = 0 reproduce the base (Cutoff for a beyond the
// working horizon).

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "glelab/mat.hpp"

namespace glelab {

class DivergenceError : public std::runtime_error {
public:
    explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

enum class PerturbFamily { Translation, Dilation, Cutoff, Oscillation };

const char* to_string(PerturbFamily f);
PerturbFamily perturb_family_from_string(const std::string& name);

/// K(t-s) = c * (t - s + alpha)^(-beta). c = 0 is the zero kernel.
struct PowerLawKernel {
    double c = 1.0;
    double alpha = 1.0;
    double beta = 2.0;
};

/// K(t-s) = c * exp(-beta * (t - s)). c = 0 is the zero kernel.
struct ExponentialKernel {
    double c = 1.0;
    double beta = 1.0;
};

/// K(t-s) = Q exp(-S (t-s)) Q^T with Q orthogonal and S = diag(rates),
/// symmetric positive definite at every lag.
struct MatrixExpKernel {
    Mat q;
    Vec rates;

    double min_rate() const;
};

class Kernel;

struct PerturbedKernel {
    std::shared_ptr<const Kernel> base;
    PerturbFamily family = PerturbFamily::Translation;
    double alpha = 0.0;
};

/// Arbitrary two-time kernel (t, s) -> d x d matrix; no structure assumed.
struct TwoTimeKernel {
    std::function<Mat(double, double)> evaluator;
    int dim = 1;
};

class Kernel {
public:
    using Node = std::variant<PowerLawKernel, ExponentialKernel, MatrixExpKernel,
                              PerturbedKernel, TwoTimeKernel>;

    Kernel() : node_(PowerLawKernel{0.0, 1.0, 2.0}) {}
    explicit Kernel(Node node);

    static Kernel power_law(double c, double alpha, double beta);
    static Kernel exponential(double c, double beta);
    static Kernel matrix_exp(Mat q, Vec rates);
    static Kernel perturbed(Kernel base, PerturbFamily family, double alpha);
    static Kernel two_time(std::function<Mat(double, double)> evaluator, int dim);
    static Kernel zero(int dim = 1);

    const Node& node() const { return node_; }

    int dim() const;
    bool translation_invariant() const;
    /// True when the kernel can take negative values (oscillation wrapper).
    bool negative_memory() const;

    /// K(t, s) as a dim x dim matrix. Requires 0 <= s <= t.
    Mat evaluate(double t, double s) const;

    /// Signed scalar value at the given lag; only for dim-1 translation
    /// invariant kernels.
    double scalar_lag(double lag) const;

    /// Operator norm ||K(lag)|| for translation invariant kernels.
    double opnorm_lag(double lag) const;

private:
    Node node_;
};

// --- weight functions -------------------------------------------------------

/// h(t) = (t + alpha)^(-beta). Integrable for beta > 1; decay index mu = 0.
struct PowerLawWeight {
    double alpha = 1.0;
    double beta = 2.0;
};

/// h(t) = exp(-rate * t). The decay index mu must satisfy mu > -rate so the
/// transform at mu is finite.
struct ExponentialWeight {
    double rate = 1.0;
};

class WeightFunction {
public:
    using Form = std::variant<PowerLawWeight, ExponentialWeight>;

    WeightFunction() : form_(PowerLawWeight{}), mu_(0.0) {}

    static WeightFunction power_law(double alpha, double beta);
    static WeightFunction exponential(double rate, double mu);

    const Form& form() const { return form_; }
    double mu() const { return mu_; }

    double operator()(double t) const;

    /// Non-fatal rule violations (non-integrable power law, mu out of range);
    /// operations that need the violated property raise or flag divergence.
    std::vector<std::string> validate() const;

private:
    WeightFunction(Form f, double mu) : form_(std::move(f)), mu_(mu) {}
    Form form_;
    double mu_;
};

// --- confining potential -----------------------------------------------------

/// U(x) = x . R x / 2 + G(x), with G convex and grad G Lipschitz with
/// constant LG. The force term in the dynamics is -u * grad U.
struct PotentialSpec {
    Mat r;
    double kappa0 = 1.0;  // smallest eigenvalue of R
    std::function<Vec(const Vec&)> grad_g;
    double lg = 0.0;
    double u = 1.0;

    static PotentialSpec quadratic(Mat r, double u);
    /// Adds the convex part G(x) = lg * sum_i log cosh(x_i), whose gradient
    /// lg * tanh is lg-Lipschitz.
    static PotentialSpec quadratic_log_cosh(Mat r, double u, double lg);

    Vec grad_u(const Vec& x) const;

    /// Checks kappa0 against lambda_min(R) and samples random pairs for the
    /// Lipschitz and monotonicity bounds. Returns violation messages.
    std::vector<std::string> validate(uint64_t seed = 2024, int pairs = 64) const;
};

}  // namespace glelab
