#include "glelab/volterra.hpp"

#include <algorithm>
#include <cmath>

#include "glelab/norms.hpp"

namespace glelab {

GridFunction convolve(const GridFunction& f, const GridFunction& g) {
    require_same_grid(f, g);
    const int n = f.size();
    const double dt = f.grid.dt;
    GridFunction out(f.grid);
    for (int i = 1; i < n; ++i) {
        double s = 0.5 * (f[i] * g[0] + f[0] * g[i]);
        for (int j = 1; j < i; ++j) s += f[i - j] * g[j];
        out[i] = s * dt;
    }
    return out;
}

ResolventResult resolvent(const GridFunction& h) {
    ResolventResult res;
    const int n = h.size();
    const double dt = h.grid.dt;
    res.r = GridFunction(h.grid);
    GridFunction& r = res.r;
    r[0] = h[0];
    const double denom = 1.0 - 0.5 * dt * h[0];
    for (int i = 1; i < n; ++i) {
        double s = 0.5 * h[i] * r[0];
        for (int j = 1; j < i; ++j) s += h[i - j] * r[j];
        r[i] = (h[i] + dt * s) / denom;
        if (!std::isfinite(r[i]))
            throw DivergenceError("resolvent: non-finite value at step " + std::to_string(i));
    }
    GridFunction habs = h;
    for (double& v : habs.values) v = std::abs(v);
    res.h_l1 = trapezoid(habs);
    if (res.h_l1 >= 1.0)
        res.warnings.push_back("L1 norm of h is >= 1; Neumann series cross-check skipped");
    return res;
}

GridFunction neumann_resolvent(const GridFunction& h, double tol, int max_terms) {
    GridFunction sum = h;
    GridFunction term = h;
    for (int n = 2; n <= max_terms; ++n) {
        term = convolve(h, term);
        double sup = 0.0;
        for (int i = 0; i < term.size(); ++i) sup = std::max(sup, std::abs(term[i]));
        for (int i = 0; i < term.size(); ++i) sum[i] += term[i];
        if (sup < tol) break;
    }
    return sum;
}

namespace {

std::vector<double> lag_table(const IntegroODEProblem& p, const TimeGrid& grid) {
    std::vector<double> k(static_cast<size_t>(grid.size()));
    if (p.kernel_samples) {
        if (!(p.kernel_samples->grid == grid))
            throw std::invalid_argument("solve_integro_ode: kernel samples on a different grid");
        k = p.kernel_samples->values;
    } else if (p.kernel) {
        if (p.kernel->dim() != 1 || !p.kernel->translation_invariant())
            throw std::invalid_argument("solve_integro_ode: kernel must be scalar translation invariant");
        for (int i = 0; i < grid.size(); ++i)
            k[static_cast<size_t>(i)] = p.kernel->scalar_lag(grid.t(i));
    } else {
        throw std::invalid_argument("solve_integro_ode: no kernel given");
    }
    return k;
}

struct ExpRecursionState {
    // B_i = sum_{j<=i} w_j k(t_i - t_j) x_j with trapezoid weights; the
    // memory term is dt * (B_i - k0 x_i / 2). One exponential mode.
    double decay = 1.0;
    double k0 = 0.0;
    double b = 0.0;
    bool started = false;

    void push(double x) {
        if (!started) {
            b = 0.5 * k0 * x;
            started = true;
        } else {
            b = decay * b + k0 * x;
        }
    }
    double memory(double dt, double x_now) const { return dt * (b - 0.5 * k0 * x_now); }
    double memory_with_next(double dt, double x_next) const {
        return dt * (decay * b + 0.5 * k0 * x_next);
    }
};

}  // namespace

GridFunction solve_integro_ode(const IntegroODEProblem& p, const TimeGrid& grid, Stepper stepper,
                               MemoryMode memory) {
    if (!(p.a > 0.0)) throw std::invalid_argument("solve_integro_ode: a must be positive");
    const int n = grid.size();
    const double dt = grid.dt;
    GridFunction x(grid);
    x[0] = p.y0;
    const GridFunction* g = p.forcing ? &*p.forcing : nullptr;
    if (g) require_same_grid(*g, x);
    auto g_at = [&](int i) { return g ? (*g)[i] : 0.0; };

    const ExponentialKernel* exp_kernel = nullptr;
    if (memory == MemoryMode::ExpRecursion) {
        if (!p.kernel || !(exp_kernel = std::get_if<ExponentialKernel>(&p.kernel->node())))
            throw std::invalid_argument("ExpRecursion memory requires an exponential kernel");
    }

    if (exp_kernel) {
        ExpRecursionState st;
        st.decay = std::exp(-exp_kernel->beta * dt);
        st.k0 = exp_kernel->c;
        st.push(x[0]);
        for (int i = 0; i + 1 < n; ++i) {
            const double mem = st.memory(dt, x[i]);
            const double f0 = -p.a * x[i] + mem + g_at(i);
            double xn;
            if (stepper == Stepper::Euler) {
                xn = x[i] + dt * f0;
            } else {
                const double xp = x[i] + dt * f0;
                const double mem_p = st.memory_with_next(dt, xp);
                const double f1 = -p.a * xp + mem_p + g_at(i + 1);
                xn = x[i] + 0.5 * dt * (f0 + f1);
            }
            if (!std::isfinite(xn))
                throw DivergenceError("solve_integro_ode: divergence at step " + std::to_string(i + 1));
            x[i + 1] = xn;
            st.push(xn);
        }
        return x;
    }

    const std::vector<double> k = lag_table(p, grid);
    auto memory_sum = [&](int i, double x_i) {
        // trapezoid over j = 0..i with x_i supplied by the caller
        if (i == 0) return 0.0;
        double s = 0.5 * k[static_cast<size_t>(i)] * x[0];
        for (int j = 1; j < i; ++j) s += k[static_cast<size_t>(i - j)] * x[j];
        s += 0.5 * k[0] * x_i;
        return dt * s;
    };
    for (int i = 0; i + 1 < n; ++i) {
        const double f0 = -p.a * x[i] + memory_sum(i, x[i]) + g_at(i);
        double xn;
        if (stepper == Stepper::Euler) {
            xn = x[i] + dt * f0;
        } else {
            const double xp = x[i] + dt * f0;
            const double f1 = -p.a * xp + memory_sum(i + 1, xp) + g_at(i + 1);
            xn = x[i] + 0.5 * dt * (f0 + f1);
        }
        if (!std::isfinite(xn))
            throw DivergenceError("solve_integro_ode: divergence at step " + std::to_string(i + 1));
        x[i + 1] = xn;
    }
    return x;
}

GridFunction differential_resolvent(double a, const Kernel& k, const TimeGrid& grid,
                                    Stepper stepper, MemoryMode memory) {
    IntegroODEProblem p;
    p.a = a;
    p.kernel = k;
    p.y0 = 1.0;
    return solve_integro_ode(p, grid, stepper, memory);
}

GridFunction differential_resolvent(double a, const GridFunction& k, const TimeGrid& grid,
                                    Stepper stepper) {
    IntegroODEProblem p;
    p.a = a;
    p.kernel_samples = k;
    p.y0 = 1.0;
    return solve_integro_ode(p, grid, stepper);
}

double characteristic_gamma_star(double a, const ExponentialKernel& k) {
    const double s = a + k.beta;
    return 0.5 * (-s + std::sqrt(s * s - 4.0 * (a * k.beta - k.c)));
}

ComparisonReport comparison_bound_check(const IntegroODEProblem& p, const TimeGrid& grid, double mu,
                                        double t_min, const GridFunction* defect) {
    ComparisonReport rep;
    const std::vector<double> kv = lag_table(p, grid);
    for (double v : kv)
        if (v < 0.0) {
            rep.warnings.push_back("kernel takes negative values; comparison bound not applicable");
            break;
        }

    // decay condition mu + a > hat{k}(mu)
    rep.condition_lhs = mu + p.a;
    if (p.kernel) {
        try {
            rep.condition_rhs = laplace_transform(*p.kernel, mu);
            rep.condition_checkable = true;
        } catch (const DivergenceError&) {
            rep.warnings.push_back("hat{k}(mu) diverges; condition not checkable");
        }
    } else {
        GridFunction weighted(grid);
        for (int i = 0; i < grid.size(); ++i)
            weighted[i] = std::exp(-mu * grid.t(i)) * kv[static_cast<size_t>(i)];
        rep.condition_rhs = trapezoid(weighted);
        rep.condition_checkable = true;
        rep.warnings.push_back("hat{k}(mu) truncated at the grid horizon (sampled kernel)");
    }
    rep.condition_holds = rep.condition_checkable && rep.condition_lhs > rep.condition_rhs;

    GridFunction x;
    try {
        x = solve_integro_ode(p, grid);
    } catch (const DivergenceError& e) {
        rep.warnings.push_back(std::string("equality solution diverged (") + e.what() +
                               "); bound not attainable on this horizon");
        return rep;
    }

    // empirical constant against y0 k(t) + (k*g)(t), past the initial window
    GridFunction kg(grid);
    if (p.forcing) {
        GridFunction ks(grid);
        ks.values = kv;
        kg = convolve(ks, *p.forcing);
    }
    for (int i = 0; i < grid.size(); ++i) {
        if (grid.t(i) < t_min) continue;
        const double denom = p.y0 * kv[static_cast<size_t>(i)] + kg[i];
        if (denom <= 0.0) continue;
        const double ratio = x[i] / denom;
        if (ratio > rep.sup_ratio) {
            rep.sup_ratio = ratio;
            rep.sup_ratio_time = grid.t(i);
        }
    }

    // dominance: y' = -a y + k*y + g - d with d >= 0 must stay below x
    GridFunction d(grid);
    if (defect) {
        require_same_grid(*defect, d);
        d = *defect;
    } else {
        for (int i = 0; i < grid.size(); ++i)
            d[i] = 0.1 * (p.y0 + 1.0) * std::exp(-grid.t(i));
    }
    for (double v : d.values)
        if (v < 0.0) throw std::invalid_argument("comparison_bound_check: defect must be nonnegative");
    IntegroODEProblem sub = p;
    GridFunction g_eff = p.forcing ? *p.forcing : GridFunction(grid);
    for (int i = 0; i < grid.size(); ++i) g_eff[i] -= d[i];
    sub.forcing = g_eff;
    const GridFunction y = solve_integro_ode(sub, grid);
    double margin = 0.0;
    for (int i = 0; i < grid.size(); ++i) margin = std::min(margin, x[i] - y[i]);
    rep.dominance_margin = margin;
    rep.dominance_ok = margin >= -1e-10 * std::max(1.0, std::abs(p.y0));
    return rep;
}

}  // namespace glelab
