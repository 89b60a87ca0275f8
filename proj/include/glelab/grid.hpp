#pragma once

// Uniform time grid shared by quadrature and simulation, and scalar functions
// sampled on it.

#include <cmath>
#include <stdexcept>
#include <vector>

namespace glelab {

struct TimeGrid {
    double dt = 0.0;
    int n_steps = 0;

    TimeGrid() = default;
    TimeGrid(double dt_, int n_steps_) : dt(dt_), n_steps(n_steps_) {
        if (!(dt > 0.0)) throw std::invalid_argument("TimeGrid: dt must be positive");
        if (n_steps < 2) throw std::invalid_argument("TimeGrid: need at least two steps");
    }
    static TimeGrid from_horizon(double dt, double t_final) {
        return TimeGrid(dt, static_cast<int>(std::llround(t_final / dt)));
    }

    int size() const { return n_steps + 1; }
    double t(int i) const { return dt * i; }
    double horizon() const { return dt * n_steps; }

    bool operator==(const TimeGrid& o) const { return dt == o.dt && n_steps == o.n_steps; }
};

struct GridFunction {
    TimeGrid grid;
    std::vector<double> values;

    GridFunction() = default;
    explicit GridFunction(const TimeGrid& g, double fill = 0.0)
        : grid(g), values(static_cast<size_t>(g.size()), fill) {}

    template <typename F>
    static GridFunction sample(const TimeGrid& g, F&& f) {
        GridFunction out(g);
        for (int i = 0; i < g.size(); ++i) out.values[static_cast<size_t>(i)] = f(g.t(i));
        return out;
    }

    double operator[](int i) const { return values[static_cast<size_t>(i)]; }
    double& operator[](int i) { return values[static_cast<size_t>(i)]; }
    int size() const { return static_cast<int>(values.size()); }

    bool all_finite() const {
        for (double v : values)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

/// Composite trapezoid integral of the samples over the whole grid.
inline double trapezoid(const GridFunction& f) {
    double s = 0.5 * (f.values.front() + f.values.back());
    for (size_t i = 1; i + 1 < f.values.size(); ++i) s += f.values[i];
    return s * f.grid.dt;
}

inline void require_same_grid(const GridFunction& a, const GridFunction& b) {
    if (!(a.grid == b.grid)) throw std::invalid_argument("grid mismatch");
}

}  // namespace glelab
