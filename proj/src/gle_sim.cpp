#include "glelab/gle_sim.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "glelab/rng.hpp"
#include "glelab/thread_pool.hpp"

namespace glelab {

void SimConfig::validate() const {
    if (dim < 1) throw std::invalid_argument("SimConfig: dim must be >= 1");
    if (!(gamma > 0.0)) throw std::invalid_argument("SimConfig: gamma must be positive");
    if (batches < 1) throw std::invalid_argument("SimConfig: batches must be >= 1");
    if (sigma.rows() != 0 && (sigma.rows() != dim || sigma.cols() != dim))
        throw std::invalid_argument("SimConfig: sigma must be dim x dim");
}

namespace {

// --- memory-term accumulators -------------------------------------------------
//
// All variants produce the composite-trapezoid memory integral
//   I_i = dt (K_i V_0 / 2 + sum_{0<j<i} K_{i-j} V_j + K_0 V_i / 2)
// over the pushed velocity history.

class MemoryAccumulator {
public:
    virtual ~MemoryAccumulator() = default;
    virtual void push(const double* v) = 0;
    /// Memory vector at node i; the history v_0..v_i has been pushed.
    virtual void eval(int i, double* out) = 0;
};

class DirectScalarAccumulator final : public MemoryAccumulator {
public:
    DirectScalarAccumulator(const Kernel& k, const TimeGrid& grid) : dt_(grid.dt) {
        lags_.resize(static_cast<size_t>(grid.size()));
        for (int m = 0; m < grid.size(); ++m)
            lags_[static_cast<size_t>(m)] = k.scalar_lag(grid.t(m));
        hist_.reserve(lags_.size());
    }
    void push(const double* v) override { hist_.push_back(*v); }
    void eval(int i, double* out) override {
        if (i == 0) {
            out[0] = 0.0;
            return;
        }
        double s = 0.5 * (lags_[static_cast<size_t>(i)] * hist_[0] + lags_[0] * hist_[static_cast<size_t>(i)]);
        for (int j = 1; j < i; ++j) s += lags_[static_cast<size_t>(i - j)] * hist_[static_cast<size_t>(j)];
        out[0] = dt_ * s;
    }

private:
    double dt_;
    std::vector<double> lags_;
    std::vector<double> hist_;
};

class DirectMatrixAccumulator final : public MemoryAccumulator {
public:
    DirectMatrixAccumulator(const Kernel& k, const TimeGrid& grid) : d_(k.dim()), dt_(grid.dt) {
        lags_.reserve(static_cast<size_t>(grid.size()));
        for (int m = 0; m < grid.size(); ++m) lags_.push_back(k.evaluate(grid.t(m), 0.0));
        hist_.reserve(static_cast<size_t>(grid.size() * d_));
    }
    void push(const double* v) override { hist_.insert(hist_.end(), v, v + d_); }
    void eval(int i, double* out) override {
        for (int c = 0; c < d_; ++c) out[c] = 0.0;
        if (i == 0) return;
        for (int j = 0; j <= i; ++j) {
            const double w = (j == 0 || j == i) ? 0.5 : 1.0;
            const Mat& km = lags_[static_cast<size_t>(i - j)];
            const double* vj = hist_.data() + static_cast<size_t>(j) * d_;
            for (int r = 0; r < d_; ++r) {
                double s = 0.0;
                for (int cc = 0; cc < d_; ++cc) s += km(r, cc) * vj[cc];
                out[r] += w * s;
            }
        }
        for (int c = 0; c < d_; ++c) out[c] *= dt_;
    }

private:
    int d_;
    double dt_;
    std::vector<Mat> lags_;
    std::vector<double> hist_;
};

class TwoTimeAccumulator final : public MemoryAccumulator {
public:
    TwoTimeAccumulator(const Kernel& k, const TimeGrid& grid) : k_(k), grid_(grid), d_(k.dim()) {
        hist_.reserve(static_cast<size_t>(grid.size() * d_));
    }
    void push(const double* v) override { hist_.insert(hist_.end(), v, v + d_); }
    void eval(int i, double* out) override {
        for (int c = 0; c < d_; ++c) out[c] = 0.0;
        if (i == 0) return;
        const double t = grid_.t(i);
        for (int j = 0; j <= i; ++j) {
            const double w = (j == 0 || j == i) ? 0.5 : 1.0;
            const Mat km = k_.evaluate(t, grid_.t(j));
            const double* vj = hist_.data() + static_cast<size_t>(j) * d_;
            for (int r = 0; r < d_; ++r) {
                double s = 0.0;
                for (int cc = 0; cc < d_; ++cc) s += km(r, cc) * vj[cc];
                out[r] += w * s;
            }
        }
        for (int c = 0; c < d_; ++c) out[c] *= grid_.dt;
    }

private:
    Kernel k_;
    TimeGrid grid_;
    int d_;
    std::vector<double> hist_;
};

// Exponential-family recursion in the eigenbasis of the kernel. Component
// state b_k tracks sum_j w_j k_k(t_i - t_j) y_j with one multiply per step,
// exact for the trapezoid sum. Oscillation wrappers rotate a complex phase.
class EigenRecursionAccumulator final : public MemoryAccumulator {
public:
    EigenRecursionAccumulator(const Kernel& k, const TimeGrid& grid) : dt_(grid.dt) {
        configure(k);
        y_.resize(rates_.size());
        b_.assign(rates_.size(), 0.0);
        decay_.resize(rates_.size());
        for (size_t c = 0; c < rates_.size(); ++c)
            decay_[c] = std::exp(std::complex<double>(-rates_[c] * dt_, freq_ * dt_));
    }

    void push(const double* v) override {
        rotate_in(v);
        if (!started_) {
            for (size_t c = 0; c < b_.size(); ++c) b_[c] = 0.5 * scale_[c] * y_[c];
            started_ = true;
        } else {
            for (size_t c = 0; c < b_.size(); ++c) b_[c] = decay_[c] * b_[c] + scale_[c] * y_[c];
        }
    }

    void eval(int i, double* out) override {
        if (i == 0) {
            for (size_t c = 0; c < b_.size(); ++c) comp_[c] = 0.0;
        } else {
            for (size_t c = 0; c < b_.size(); ++c)
                comp_[c] = dt_ * (b_[c].real() - 0.5 * scale_[c] * y_[c]);
        }
        rotate_out(out);
    }

private:
    void configure(const Kernel& k) {
        const Kernel* base = &k;
        double rate_shift = 0.0, lag_shift = 0.0;
        if (const auto* p = std::get_if<PerturbedKernel>(&k.node())) {
            base = p->base.get();
            switch (p->family) {
                case PerturbFamily::Translation:
                    if (std::holds_alternative<ExponentialKernel>(base->node()) ||
                        std::holds_alternative<MatrixExpKernel>(base->node()))
                        rate_shift = p->alpha;
                    else
                        throw std::invalid_argument("recursion memory: unsupported base");
                    break;
                case PerturbFamily::Dilation: lag_shift = p->alpha; break;
                case PerturbFamily::Oscillation: freq_ = p->alpha; break;
                case PerturbFamily::Cutoff:
                    throw std::invalid_argument("recursion memory: cutoff needs the windowed path");
            }
        }
        if (const auto* ex = std::get_if<ExponentialKernel>(&base->node())) {
            rates_ = {ex->beta + rate_shift};
            scale_ = {ex->c * std::exp(-ex->beta * lag_shift)};
            comp_.resize(1);
            return;
        }
        const auto* m = std::get_if<MatrixExpKernel>(&base->node());
        if (!m) throw std::invalid_argument("recursion memory: unsupported kernel family");
        q_ = m->q;
        rates_.resize(m->rates.size());
        scale_.resize(m->rates.size());
        comp_.resize(m->rates.size());
        for (size_t c = 0; c < m->rates.size(); ++c) {
            rates_[c] = m->rates[c] + rate_shift;
            scale_[c] = std::exp(-m->rates[c] * lag_shift);
        }
    }

    void rotate_in(const double* v) {
        const int d = static_cast<int>(rates_.size());
        if (q_.rows() == 0) {
            for (int c = 0; c < d; ++c) y_[static_cast<size_t>(c)] = v[c];
            return;
        }
        for (int c = 0; c < d; ++c) {
            double s = 0.0;
            for (int r = 0; r < d; ++r) s += q_(r, c) * v[r];  // Q^T v
            y_[static_cast<size_t>(c)] = s;
        }
    }
    void rotate_out(double* out) const {
        const int d = static_cast<int>(rates_.size());
        if (q_.rows() == 0) {
            for (int c = 0; c < d; ++c) out[c] = comp_[static_cast<size_t>(c)];
            return;
        }
        for (int r = 0; r < d; ++r) {
            double s = 0.0;
            for (int c = 0; c < d; ++c) s += q_(r, c) * comp_[static_cast<size_t>(c)];
            out[r] = s;
        }
    }

    double dt_;
    double freq_ = 0.0;
    Mat q_;  // empty for scalar kernels
    std::vector<double> rates_, scale_, y_, comp_;
    std::vector<std::complex<double>> decay_;
    std::vector<std::complex<double>> b_;
    bool started_ = false;
};

// Cutoff wrapper around an exponential-family base: sliding-window direct sum
// in the eigenbasis, O(window) per step.
class EigenWindowAccumulator final : public MemoryAccumulator {
public:
    EigenWindowAccumulator(const Kernel& k, const TimeGrid& grid) : dt_(grid.dt) {
        const auto& p = std::get<PerturbedKernel>(k.node());
        window_ = std::min(grid.n_steps, static_cast<int>(std::floor(p.alpha / dt_ + 1e-9)));
        if (const auto* ex = std::get_if<ExponentialKernel>(&p.base->node())) {
            rates_ = {ex->beta};
            c0_ = {ex->c};
        } else {
            const auto& m = std::get<MatrixExpKernel>(p.base->node());
            q_ = m.q;
            rates_ = m.rates;
            c0_.assign(m.rates.size(), 1.0);
        }
        comp_.resize(rates_.size());
        lagpow_.resize(static_cast<size_t>(window_ + 1) * rates_.size());
        for (int m = 0; m <= window_; ++m)
            for (size_t c = 0; c < rates_.size(); ++c)
                lagpow_[static_cast<size_t>(m) * rates_.size() + c] =
                    c0_[c] * std::exp(-rates_[c] * dt_ * m);
    }

    void push(const double* v) override {
        const int d = static_cast<int>(rates_.size());
        if (q_.rows() == 0) {
            hist_.push_back(v[0]);
            return;
        }
        for (int c = 0; c < d; ++c) {
            double s = 0.0;
            for (int r = 0; r < d; ++r) s += q_(r, c) * v[r];
            hist_.push_back(s);
        }
    }

    void eval(int i, double* out) override {
        const int d = static_cast<int>(rates_.size());
        for (int c = 0; c < d; ++c) comp_[static_cast<size_t>(c)] = 0.0;
        if (i > 0) {
            const int j0 = std::max(0, i - window_);
            for (int j = j0; j <= i; ++j) {
                const double w = (j == 0 || j == i) ? 0.5 : 1.0;
                const double* row = lagpow_.data() + static_cast<size_t>(i - j) * rates_.size();
                const double* yj = hist_.data() + static_cast<size_t>(j) * rates_.size();
                for (int c = 0; c < d; ++c) comp_[static_cast<size_t>(c)] += w * row[c] * yj[c];
            }
            for (int c = 0; c < d; ++c) comp_[static_cast<size_t>(c)] *= dt_;
        }
        if (q_.rows() == 0) {
            out[0] = comp_[0];
            return;
        }
        for (int r = 0; r < d; ++r) {
            double s = 0.0;
            for (int c = 0; c < d; ++c) s += q_(r, c) * comp_[static_cast<size_t>(c)];
            out[r] = s;
        }
    }

private:
    double dt_;
    int window_ = 0;
    Mat q_;
    std::vector<double> rates_, c0_, comp_, lagpow_, hist_;
};

bool recursion_capable(const Kernel& k) {
    const Kernel* base = &k;
    if (const auto* p = std::get_if<PerturbedKernel>(&k.node())) base = p->base.get();
    return std::holds_alternative<ExponentialKernel>(base->node()) ||
           std::holds_alternative<MatrixExpKernel>(base->node());
}

std::unique_ptr<MemoryAccumulator> make_accumulator(const Kernel& k, const TimeGrid& grid,
                                                    MemoryMode mode) {
    if (mode == MemoryMode::ExpRecursion) {
        if (!recursion_capable(k))
            throw std::invalid_argument("ExpRecursion memory requires an exponential-family kernel");
        const auto* p = std::get_if<PerturbedKernel>(&k.node());
        if (p && p->family == PerturbFamily::Cutoff)
            return std::make_unique<EigenWindowAccumulator>(k, grid);
        return std::make_unique<EigenRecursionAccumulator>(k, grid);
    }
    if (!k.translation_invariant()) return std::make_unique<TwoTimeAccumulator>(k, grid);
    if (k.dim() == 1) return std::make_unique<DirectScalarAccumulator>(k, grid);
    return std::make_unique<DirectMatrixAccumulator>(k, grid);
}

// --- initial states and noise --------------------------------------------------

Vec draw_init(const InitSpec& init, int dim, uint64_t seed, uint32_t batch, RngStream stream) {
    Vec x(static_cast<size_t>(dim), 0.0);
    for (int c = 0; c < dim && c < static_cast<int>(init.mean.size()); ++c)
        x[static_cast<size_t>(c)] = init.mean[static_cast<size_t>(c)];
    if (init.kind == InitSpec::Kind::PointMass) return x;
    Vec xi(static_cast<size_t>(dim));
    for (int c = 0; c < dim; ++c)
        xi[static_cast<size_t>(c)] = normal_draw(seed, batch, stream, 0, static_cast<uint32_t>(c));
    if (init.cov) {
        const Mat l = cholesky(*init.cov);
        const Vec lx = l.apply(xi);
        for (int c = 0; c < dim; ++c) x[static_cast<size_t>(c)] += lx[static_cast<size_t>(c)];
    } else {
        for (int c = 0; c < dim; ++c) x[static_cast<size_t>(c)] += xi[static_cast<size_t>(c)];
    }
    return x;
}

bool has_noise(const SimConfig& cfg) {
    if (cfg.sigma.rows() == 0) return false;
    for (int i = 0; i < cfg.sigma.rows(); ++i)
        for (int j = 0; j < cfg.sigma.cols(); ++j)
            if (cfg.sigma(i, j) != 0.0) return true;
    return false;
}

}  // namespace

Trajectory simulate_first_order(const SimConfig& cfg, const Kernel& kernel, int batch) {
    cfg.validate();
    if (kernel.dim() != cfg.dim)
        throw std::invalid_argument("simulate_first_order: kernel dimension mismatch");
    const int d = cfg.dim;
    const int n = cfg.grid.size();
    const double dt = cfg.grid.dt;
    const double sdt = std::sqrt(dt);
    const bool noisy = has_noise(cfg);

    Trajectory traj;
    traj.grid = cfg.grid;
    traj.dim = d;
    traj.state_dim = d;
    traj.data.resize(static_cast<size_t>(n) * d);

    const Vec v0 = draw_init(cfg.init_v, d, cfg.seed, static_cast<uint32_t>(batch),
                             RngStream::InitVelocity);
    for (int c = 0; c < d; ++c) traj.state(0)[c] = v0[static_cast<size_t>(c)];

    auto acc = make_accumulator(kernel, cfg.grid, cfg.memory);
    acc->push(traj.state(0));

    std::vector<double> mem(static_cast<size_t>(d)), xi(static_cast<size_t>(d));
    for (int i = 0; i + 1 < n; ++i) {
        acc->eval(i, mem.data());
        const double* v = traj.state(i);
        double* vn = traj.state(i + 1);
        for (int c = 0; c < d; ++c) vn[c] = v[c] + dt * (-cfg.gamma * v[c] - mem[static_cast<size_t>(c)]);
        if (noisy) {
            for (int c = 0; c < d; ++c)
                xi[static_cast<size_t>(c)] = normal_draw(cfg.seed, static_cast<uint32_t>(batch),
                                                         RngStream::Brownian,
                                                         static_cast<uint32_t>(i),
                                                         static_cast<uint32_t>(c));
            for (int r = 0; r < d; ++r) {
                double s = 0.0;
                for (int c = 0; c < d; ++c) s += cfg.sigma(r, c) * xi[static_cast<size_t>(c)];
                vn[r] += sdt * s;
            }
        }
        for (int c = 0; c < d; ++c)
            if (!std::isfinite(vn[c])) throw SimDivergence(batch, i + 1);
        acc->push(vn);
    }
    return traj;
}

Trajectory simulate_second_order(const SimConfig& cfg, const Kernel& kernel,
                                 const PotentialSpec& pot, int batch) {
    cfg.validate();
    if (kernel.dim() != cfg.dim)
        throw std::invalid_argument("simulate_second_order: kernel dimension mismatch");
    const int d = cfg.dim;
    const int n = cfg.grid.size();
    const double dt = cfg.grid.dt;
    const double sdt = std::sqrt(dt);
    const bool noisy = has_noise(cfg);

    Trajectory traj;
    traj.grid = cfg.grid;
    traj.dim = d;
    traj.state_dim = 2 * d;
    traj.data.resize(static_cast<size_t>(n) * 2 * d);

    const Vec x0 = draw_init(cfg.init_x, d, cfg.seed, static_cast<uint32_t>(batch),
                             RngStream::InitPosition);
    const Vec v0 = draw_init(cfg.init_v, d, cfg.seed, static_cast<uint32_t>(batch),
                             RngStream::InitVelocity);
    for (int c = 0; c < d; ++c) {
        traj.state(0)[c] = x0[static_cast<size_t>(c)];
        traj.state(0)[d + c] = v0[static_cast<size_t>(c)];
    }

    auto acc = make_accumulator(kernel, cfg.grid, cfg.memory);
    acc->push(traj.state(0) + d);

    std::vector<double> mem(static_cast<size_t>(d)), xi(static_cast<size_t>(d));
    Vec xcur(static_cast<size_t>(d));
    for (int i = 0; i + 1 < n; ++i) {
        acc->eval(i, mem.data());
        const double* s = traj.state(i);
        double* sn = traj.state(i + 1);
        for (int c = 0; c < d; ++c) xcur[static_cast<size_t>(c)] = s[c];
        const Vec force = pot.grad_u(xcur);
        for (int c = 0; c < d; ++c) {
            sn[c] = s[c] + dt * s[d + c];
            sn[d + c] = s[d + c] + dt * (-cfg.gamma * s[d + c] - pot.u * force[static_cast<size_t>(c)] -
                                         mem[static_cast<size_t>(c)]);
        }
        if (noisy) {
            for (int c = 0; c < d; ++c)
                xi[static_cast<size_t>(c)] = normal_draw(cfg.seed, static_cast<uint32_t>(batch),
                                                         RngStream::Brownian,
                                                         static_cast<uint32_t>(i),
                                                         static_cast<uint32_t>(c));
            for (int r = 0; r < d; ++r) {
                double acc_n = 0.0;
                for (int c = 0; c < d; ++c) acc_n += cfg.sigma(r, c) * xi[static_cast<size_t>(c)];
                sn[d + r] += sdt * acc_n;
            }
        }
        for (int c = 0; c < 2 * d; ++c)
            if (!std::isfinite(sn[c])) throw SimDivergence(batch, i + 1);
        acc->push(sn + d);
    }
    return traj;
}

CoupledEnsemble simulate_coupled(const SimConfig& cfg, const Kernel& kernel_true,
                                 const Kernel& kernel_pert, SystemOrder order,
                                 const PotentialSpec* pot, int threads) {
    cfg.validate();
    if (kernel_true.dim() != kernel_pert.dim())
        throw std::invalid_argument("simulate_coupled: kernel dimensions differ");
    if (order == SystemOrder::Second && !pot)
        throw std::invalid_argument("simulate_coupled: second order needs a potential");

    CoupledEnsemble ens;
    ens.order = order;
    ens.true_paths.resize(static_cast<size_t>(cfg.batches));
    ens.pert_paths.resize(static_cast<size_t>(cfg.batches));
    ens.noise_ledger.resize(static_cast<size_t>(cfg.batches));
    parallel_for(cfg.batches, threads, [&](int b) {
        ens.noise_ledger[static_cast<size_t>(b)] = NoiseKey{cfg.seed, static_cast<uint32_t>(b)};
        if (order == SystemOrder::First) {
            ens.true_paths[static_cast<size_t>(b)] = simulate_first_order(cfg, kernel_true, b);
            ens.pert_paths[static_cast<size_t>(b)] = simulate_first_order(cfg, kernel_pert, b);
        } else {
            ens.true_paths[static_cast<size_t>(b)] = simulate_second_order(cfg, kernel_true, *pot, b);
            ens.pert_paths[static_cast<size_t>(b)] = simulate_second_order(cfg, kernel_pert, *pot, b);
        }
    });
    return ens;
}

LyapunovParams lyapunov_params(double gamma, double u, const Mat& r, double kappa0) {
    if (!(gamma > 0.0) || !(u > 0.0) || !(kappa0 > 0.0))
        throw std::invalid_argument("lyapunov_params: gamma, u, kappa0 must be positive");
    LyapunovParams p;
    p.gamma = gamma;
    p.u = u;
    p.lambda = std::min(1.0 / 8.0, kappa0 * u / (gamma * gamma) / 2.0);
    const int d = r.rows();
    const double g2 = gamma * gamma;
    const double one_2l = 1.0 - 2.0 * p.lambda;
    p.a = r * (u / g2);
    for (int i = 0; i < d; ++i) p.a(i, i) += 0.5 * one_2l * one_2l;
    p.b = Mat::identity(d) * (one_2l / gamma);
    p.c = Mat::identity(d) * (1.0 / g2);
    return p;
}

double lyapunov_distance_sq(const LyapunovParams& p, const Vec& z, const Vec& w) {
    return dot(z, p.a.apply(z)) + dot(z, p.b.apply(w)) + dot(w, p.c.apply(w));
}

double gamma_form(const LyapunovParams& p, const PotentialSpec& pot, const Vec& x, const Vec& xt,
                  const Vec& v, const Vec& vt) {
    const size_t d = x.size();
    Vec z(d), w(d);
    for (size_t i = 0; i < d; ++i) {
        z[i] = x[i] - xt[i];
        w[i] = v[i] - vt[i];
    }
    const Vec du_x = pot.grad_u(x);
    const Vec du_xt = pot.grad_u(xt);
    const Vec az = p.a.apply(z), bw = p.b.apply(w), bz = p.b.apply(z), cw = p.c.apply(w);
    double first = 0.0, second = 0.0;
    for (size_t i = 0; i < d; ++i) {
        first += (2.0 * az[i] + bw[i]) * w[i];
        second += (bz[i] + 2.0 * cw[i]) *
                  (-p.gamma * w[i] - p.u * (du_x[i] - du_xt[i]));
    }
    return first + second;
}

}  // namespace glelab
