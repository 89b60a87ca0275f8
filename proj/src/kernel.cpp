#include "glelab/kernel.hpp"

#include <algorithm>
#include <cmath>

#include "glelab/rng.hpp"

namespace glelab {

const char* to_string(PerturbFamily f) {
    switch (f) {
        case PerturbFamily::Translation: return "translation";
        case PerturbFamily::Dilation: return "dilation";
        case PerturbFamily::Cutoff: return "cutoff";
        case PerturbFamily::Oscillation: return "oscillation";
    }
    return "unknown";
}

PerturbFamily perturb_family_from_string(const std::string& name) {
    if (name == "translation") return PerturbFamily::Translation;
    if (name == "dilation") return PerturbFamily::Dilation;
    if (name == "cutoff") return PerturbFamily::Cutoff;
    if (name == "oscillation") return PerturbFamily::Oscillation;
    throw std::invalid_argument("unknown perturbation family: " + name);
}

double MatrixExpKernel::min_rate() const {
    return *std::min_element(rates.begin(), rates.end());
}

Kernel::Kernel(Node node) : node_(std::move(node)) {}

Kernel Kernel::power_law(double c, double alpha, double beta) {
    if (c < 0.0) throw std::invalid_argument("power-law kernel: c must be >= 0");
    if (!(alpha > 0.0)) throw std::invalid_argument("power-law kernel: alpha must be positive");
    if (!(beta > 1.0)) throw std::invalid_argument("power-law kernel: beta must exceed 1");
    return Kernel(PowerLawKernel{c, alpha, beta});
}

Kernel Kernel::exponential(double c, double beta) {
    if (c < 0.0) throw std::invalid_argument("exponential kernel: c must be >= 0");
    if (!(beta > 0.0)) throw std::invalid_argument("exponential kernel: beta must be positive");
    return Kernel(ExponentialKernel{c, beta});
}

Kernel Kernel::matrix_exp(Mat q, Vec rates) {
    const int d = q.rows();
    if (q.cols() != d || static_cast<int>(rates.size()) != d)
        throw std::invalid_argument("matrix-exp kernel: Q must be d x d with d rates");
    for (double r : rates)
        if (!(r > 0.0)) throw std::invalid_argument("matrix-exp kernel: rates must be positive");
    // orthogonality check
    Mat qtq = q.transpose() * q;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            const double want = (i == j) ? 1.0 : 0.0;
            if (std::abs(qtq(i, j) - want) > 1e-8)
                throw std::invalid_argument("matrix-exp kernel: Q is not orthogonal");
        }
    return Kernel(MatrixExpKernel{std::move(q), std::move(rates)});
}

Kernel Kernel::perturbed(Kernel base, PerturbFamily family, double alpha) {
    if (alpha < 0.0) throw std::invalid_argument("perturbation: alpha must be >= 0");
    if (std::holds_alternative<PerturbedKernel>(base.node_) ||
        std::holds_alternative<TwoTimeKernel>(base.node_))
        throw std::invalid_argument("perturbation: base must be a parametric family");
    auto holder = std::make_shared<const Kernel>(std::move(base));
    return Kernel(PerturbedKernel{std::move(holder), family, alpha});
}

Kernel Kernel::two_time(std::function<Mat(double, double)> evaluator, int dim) {
    if (dim < 1) throw std::invalid_argument("two-time kernel: dim must be >= 1");
    return Kernel(TwoTimeKernel{std::move(evaluator), dim});
}

Kernel Kernel::zero(int dim) {
    if (dim == 1) return Kernel(PowerLawKernel{0.0, 1.0, 2.0});
    return two_time([dim](double, double) { return Mat(dim, dim); }, dim);
}

int Kernel::dim() const {
    return std::visit(
        [](const auto& k) -> int {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, MatrixExpKernel>) return k.q.rows();
            else if constexpr (std::is_same_v<T, PerturbedKernel>) return k.base->dim();
            else if constexpr (std::is_same_v<T, TwoTimeKernel>) return k.dim;
            else return 1;
        },
        node_);
}

bool Kernel::translation_invariant() const {
    return std::visit(
        [](const auto& k) -> bool {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, PerturbedKernel>) return k.base->translation_invariant();
            else if constexpr (std::is_same_v<T, TwoTimeKernel>) return false;
            else return true;
        },
        node_);
}

bool Kernel::negative_memory() const {
    if (const auto* p = std::get_if<PerturbedKernel>(&node_))
        return p->family == PerturbFamily::Oscillation || p->base->negative_memory();
    return false;
}

namespace {

void check_args(double t, double s) {
    if (s < 0.0 || t < 0.0 || s > t)
        throw std::domain_error("kernel evaluation requires 0 <= s <= t");
}

Mat matrix_exp_value(const MatrixExpKernel& k, double lag, double rate_shift, double scale) {
    const int d = k.q.rows();
    Mat e(d, d);
    for (int i = 0; i < d; ++i)
        e(i, i) = scale * std::exp(-(k.rates[static_cast<size_t>(i)] + rate_shift) * lag);
    return k.q * e * k.q.transpose();
}

}  // namespace

Mat Kernel::evaluate(double t, double s) const {
    check_args(t, s);
    if (const auto* tt = std::get_if<TwoTimeKernel>(&node_)) return tt->evaluator(t, s);
    const double lag = t - s;
    if (dim() == 1) return Mat::scalar(scalar_lag(lag));
    // matrix exponential, possibly perturbed
    if (const auto* m = std::get_if<MatrixExpKernel>(&node_)) return matrix_exp_value(*m, lag, 0.0, 1.0);
    const auto& p = std::get<PerturbedKernel>(node_);
    const auto& base = std::get<MatrixExpKernel>(p.base->node());
    switch (p.family) {
        case PerturbFamily::Translation: return matrix_exp_value(base, lag, p.alpha, 1.0);
        case PerturbFamily::Dilation: {
            // Q exp(-S (lag + alpha)) Q^T
            const int d = base.q.rows();
            Mat e(d, d);
            for (int i = 0; i < d; ++i)
                e(i, i) = std::exp(-base.rates[static_cast<size_t>(i)] * (lag + p.alpha));
            return base.q * e * base.q.transpose();
        }
        case PerturbFamily::Cutoff:
            return lag <= p.alpha ? matrix_exp_value(base, lag, 0.0, 1.0) : Mat(base.q.rows(), base.q.rows());
        case PerturbFamily::Oscillation:
            return matrix_exp_value(base, lag, 0.0, std::cos(p.alpha * lag));
    }
    throw std::logic_error("unreachable");
}

double Kernel::scalar_lag(double lag) const {
    if (lag < 0.0) throw std::domain_error("kernel evaluation requires 0 <= s <= t");
    if (const auto* pl = std::get_if<PowerLawKernel>(&node_))
        return pl->c * std::pow(lag + pl->alpha, -pl->beta);
    if (const auto* ex = std::get_if<ExponentialKernel>(&node_))
        return ex->c * std::exp(-ex->beta * lag);
    const auto* p = std::get_if<PerturbedKernel>(&node_);
    if (!p || p->base->dim() != 1)
        throw std::logic_error("scalar_lag: kernel is not scalar translation invariant");
    const auto& base = *p->base;
    switch (p->family) {
        case PerturbFamily::Translation:
            if (const auto* pl = std::get_if<PowerLawKernel>(&base.node()))
                return pl->c * std::pow(lag + p->alpha + pl->alpha, -pl->beta);
            else {
                const auto& ex = std::get<ExponentialKernel>(base.node());
                return ex.c * std::exp(-(ex.beta + p->alpha) * lag);
            }
        case PerturbFamily::Dilation:
            if (const auto* pl = std::get_if<PowerLawKernel>(&base.node()))
                return pl->c * std::pow(lag + pl->alpha, -(pl->beta + p->alpha));
            else {
                const auto& ex = std::get<ExponentialKernel>(base.node());
                return ex.c * std::exp(-ex.beta * (lag + p->alpha));
            }
        case PerturbFamily::Cutoff:
            return lag <= p->alpha ? base.scalar_lag(lag) : 0.0;
        case PerturbFamily::Oscillation:
            return base.scalar_lag(lag) * std::cos(p->alpha * lag);
    }
    throw std::logic_error("unreachable");
}

double Kernel::opnorm_lag(double lag) const {
    if (!translation_invariant())
        throw std::logic_error("opnorm_lag: kernel is not translation invariant");
    if (dim() == 1) return std::abs(scalar_lag(lag));
    return operator_norm(evaluate(lag, 0.0));
}

// --- weight functions -------------------------------------------------------

WeightFunction WeightFunction::power_law(double alpha, double beta) {
    if (!(alpha > 0.0)) throw std::invalid_argument("power-law weight: alpha must be positive");
    if (beta < 0.0) throw std::invalid_argument("power-law weight: beta must be >= 0");
    return WeightFunction(PowerLawWeight{alpha, beta}, 0.0);
}

WeightFunction WeightFunction::exponential(double rate, double mu) {
    if (!(rate > 0.0)) throw std::invalid_argument("exponential weight: rate must be positive");
    return WeightFunction(ExponentialWeight{rate}, mu);
}

double WeightFunction::operator()(double t) const {
    if (const auto* p = std::get_if<PowerLawWeight>(&form_)) return std::pow(t + p->alpha, -p->beta);
    const auto& e = std::get<ExponentialWeight>(form_);
    return std::exp(-e.rate * t);
}

std::vector<std::string> WeightFunction::validate() const {
    std::vector<std::string> issues;
    if (const auto* p = std::get_if<PowerLawWeight>(&form_)) {
        if (!(p->beta > 1.0)) issues.push_back("power-law weight is not integrable (beta <= 1)");
        if (mu_ != 0.0) issues.push_back("power-law weight requires mu = 0");
    } else {
        const auto& e = std::get<ExponentialWeight>(form_);
        if (!(mu_ > -e.rate))
            issues.push_back("exponential weight requires mu > -rate for a finite transform");
    }
    return issues;
}

// --- confining potential -----------------------------------------------------

PotentialSpec PotentialSpec::quadratic(Mat r, double u) {
    PotentialSpec p;
    p.kappa0 = symmetric_eigenvalues(r).front();
    p.r = std::move(r);
    p.grad_g = nullptr;
    p.lg = 0.0;
    p.u = u;
    return p;
}

PotentialSpec PotentialSpec::quadratic_log_cosh(Mat r, double u, double lg) {
    PotentialSpec p = quadratic(std::move(r), u);
    p.lg = lg;
    p.grad_g = [lg](const Vec& x) {
        Vec g(x.size());
        for (size_t i = 0; i < x.size(); ++i) g[i] = lg * std::tanh(x[i]);
        return g;
    };
    return p;
}

Vec PotentialSpec::grad_u(const Vec& x) const {
    Vec g = r.apply(x);
    if (grad_g) {
        const Vec gg = grad_g(x);
        for (size_t i = 0; i < g.size(); ++i) g[i] += gg[i];
    }
    return g;
}

std::vector<std::string> PotentialSpec::validate(uint64_t seed, int pairs) const {
    std::vector<std::string> issues;
    const double lmin = symmetric_eigenvalues(r).front();
    if (std::abs(lmin - kappa0) > 1e-10 * std::max(1.0, std::abs(lmin)))
        issues.push_back("kappa0 does not match the smallest eigenvalue of R");
    if (!(u > 0.0)) issues.push_back("u must be positive");
    if (lg < 0.0) issues.push_back("LG must be nonnegative");
    if (!grad_g) return issues;
    const int d = r.rows();
    for (int p = 0; p < pairs; ++p) {
        Vec x(static_cast<size_t>(d)), y(static_cast<size_t>(d));
        for (int i = 0; i < d; ++i) {
            x[static_cast<size_t>(i)] = 3.0 * normal_draw(seed, 0, RngStream::Generic,
                                                          static_cast<uint32_t>(p), static_cast<uint32_t>(2 * i));
            y[static_cast<size_t>(i)] = 3.0 * normal_draw(seed, 0, RngStream::Generic,
                                                          static_cast<uint32_t>(p), static_cast<uint32_t>(2 * i + 1));
        }
        const Vec gx = grad_g(x), gy = grad_g(y);
        Vec dg(gx.size()), dxy(x.size());
        for (size_t i = 0; i < gx.size(); ++i) {
            dg[i] = gx[i] - gy[i];
            dxy[i] = x[i] - y[i];
        }
        if (dot(dg, dxy) < -1e-12) {
            issues.push_back("convexity check failed on a random pair");
            break;
        }
        if (std::sqrt(norm_sq(dg)) > lg * std::sqrt(norm_sq(dxy)) + 1e-12) {
            issues.push_back("Lipschitz check failed on a random pair");
            break;
        }
    }
    return issues;
}

}  // namespace glelab
