#include "glelab/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "glelab/volterra.hpp"

namespace glelab {

DecayFit fit_decay(const GridFunction& series, DecayModel model, const FitWindow& window) {
    DecayFit fit;
    fit.model = model;
    fit.window = window;
    std::vector<double> xs, ys;
    for (int i = 0; i < series.size(); ++i) {
        const double t = series.grid.t(i);
        if (t < window.t_min || t > window.t_max) continue;
        const double v = series[i];
        if (!(v > 1e-300)) {
            ++fit.n_dropped;
            continue;
        }
        if (model == DecayModel::PowerLaw) {
            if (t <= 0.0) {
                ++fit.n_dropped;
                continue;
            }
            xs.push_back(std::log(t));
        } else {
            xs.push_back(t);
        }
        ys.push_back(std::log(v));
    }
    fit.n_used = static_cast<int>(xs.size());
    if (fit.n_used < 5) throw FitError("fit_decay: fewer than 5 usable points");

    const double n = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx, dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx <= 0.0) throw FitError("fit_decay: degenerate abscissa");
    const double slope = sxy / sxx;
    fit.rate = -slope;
    fit.intercept = my - slope * mx;
    fit.r_squared = (syy > 0.0) ? (sxy * sxy) / (sxx * syy) : 1.0;
    return fit;
}

BoundConstant empirical_sup_ratio(const GridFunction& series, const WeightFunction& h,
                                  double offset, const FitWindow& window) {
    BoundConstant out;
    out.offset = offset;
    out.window = window;
    for (int i = 0; i < series.size(); ++i) {
        const double t = series.grid.t(i);
        if (t < window.t_min || t > window.t_max) continue;
        const double denom = h(t) + offset;
        if (!(denom > 0.0)) throw std::invalid_argument("empirical_sup_ratio: h + offset not positive");
        const double ratio = series[i] / denom;
        if (ratio > out.value) {
            out.value = ratio;
            out.argmax_t = t;
        }
    }
    return out;
}

double threshold_f(double c, double alpha, double beta) {
    if (!(beta > 1.0)) throw std::domain_error("threshold_f: beta must exceed 1");
    return c * std::pow(alpha, 1.0 - beta) / (beta - 1.0);
}

double rate_p(double a, double beta, double c) {
    return characteristic_gamma_star(a, ExponentialKernel{c, beta});
}

LinearityReport linearity_report(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("linearity_report: size mismatch");
    LinearityReport rep;
    rep.n = static_cast<int>(xs.size());
    if (rep.n < 4) throw std::invalid_argument("linearity_report: need at least 4 points");
    const double n = static_cast<double>(rep.n);
    double mx = 0.0, my = 0.0;
    for (int i = 0; i < rep.n; ++i) {
        mx += xs[static_cast<size_t>(i)];
        my += ys[static_cast<size_t>(i)];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (int i = 0; i < rep.n; ++i) {
        const double dx = xs[static_cast<size_t>(i)] - mx;
        const double dy = ys[static_cast<size_t>(i)] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx <= 0.0) throw std::invalid_argument("linearity_report: degenerate x variance");
    rep.slope = sxy / sxx;
    rep.intercept = my - rep.slope * mx;
    rep.pearson_r = (syy > 0.0) ? sxy / std::sqrt(sxx * syy) : 0.0;
    return rep;
}

namespace {

double functional_value(const CoupledEnsemble& ens, EnsembleFunctional f,
                        const LyapunovParams* params, int batch, int i) {
    const Trajectory& a = ens.true_paths[static_cast<size_t>(batch)];
    const Trajectory& b = ens.pert_paths[static_cast<size_t>(batch)];
    const int sd = a.state_dim;
    switch (f) {
        case EnsembleFunctional::DiffSq: {
            double s = 0.0;
            for (int c = 0; c < sd; ++c) {
                const double d = a.state(i)[c] - b.state(i)[c];
                s += d * d;
            }
            return s;
        }
        case EnsembleFunctional::NormSq: {
            double s = 0.0;
            for (int c = 0; c < sd; ++c) s += a.state(i)[c] * a.state(i)[c];
            return s;
        }
        case EnsembleFunctional::LyapunovSq: {
            if (!params) throw std::invalid_argument("ensemble_moments: LyapunovSq needs params");
            const int d = a.dim;
            if (sd != 2 * d)
                throw std::invalid_argument("ensemble_moments: LyapunovSq needs second-order states");
            Vec z(static_cast<size_t>(d)), w(static_cast<size_t>(d));
            for (int c = 0; c < d; ++c) {
                z[static_cast<size_t>(c)] = a.state(i)[c] - b.state(i)[c];
                w[static_cast<size_t>(c)] = a.state(i)[d + c] - b.state(i)[d + c];
            }
            return lyapunov_distance_sq(*params, z, w);
        }
    }
    return 0.0;
}

}  // namespace

MomentSeries ensemble_moments(const CoupledEnsemble& ens, EnsembleFunctional functional,
                              const LyapunovParams* params) {
    if (ens.true_paths.empty()) throw std::invalid_argument("ensemble_moments: empty ensemble");
    const int n_batches = static_cast<int>(ens.true_paths.size());
    const TimeGrid grid = ens.true_paths.front().grid;
    MomentSeries out{GridFunction(grid), GridFunction(grid)};
    std::vector<double> vals(static_cast<size_t>(n_batches));
    for (int i = 0; i < grid.size(); ++i) {
        double mean = 0.0;
        for (int b = 0; b < n_batches; ++b) {
            vals[static_cast<size_t>(b)] = functional_value(ens, functional, params, b, i);
            mean += vals[static_cast<size_t>(b)];
        }
        mean /= n_batches;
        out.mean[i] = mean;
        if (n_batches > 1) {
            double var = 0.0;
            for (int b = 0; b < n_batches; ++b) {
                const double d = vals[static_cast<size_t>(b)] - mean;
                var += d * d;
            }
            var /= (n_batches - 1);
            out.std_error[i] = std::sqrt(var / n_batches);
        }
    }
    return out;
}

GridFunction lyapunov_ref_series(const Trajectory& traj, const LyapunovParams& params,
                                 const Vec* x_ref) {
    const int d = traj.dim;
    if (traj.state_dim != 2 * d)
        throw std::invalid_argument("lyapunov_ref_series: needs second-order states");
    GridFunction out(traj.grid);
    Vec z(static_cast<size_t>(d)), w(static_cast<size_t>(d));
    for (int i = 0; i < traj.grid.size(); ++i) {
        for (int c = 0; c < d; ++c) {
            const double ref = x_ref ? (*x_ref)[static_cast<size_t>(c)] : 0.0;
            z[static_cast<size_t>(c)] = traj.state(i)[c] - ref;
            w[static_cast<size_t>(c)] = traj.state(i)[d + c];
        }
        out[i] = lyapunov_distance_sq(params, z, w);
    }
    return out;
}

}  // namespace glelab
