#include "glelab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "glelab/rng.hpp"
#include "glelab/thread_pool.hpp"
#include "glelab/volterra.hpp"

namespace glelab {

std::vector<double> linspace(double lo, double hi, int n) {
    if (n < 1) throw std::invalid_argument("linspace: need at least one point");
    std::vector<double> v(static_cast<size_t>(n));
    if (n == 1) {
        v[0] = lo;
        return v;
    }
    for (int i = 0; i < n; ++i)
        v[static_cast<size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
    return v;
}

Mat random_orthogonal(int d, uint64_t seed) {
    Mat q(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            q(i, j) = normal_draw(seed, 0, RngStream::Generic, static_cast<uint32_t>(i),
                                  static_cast<uint32_t>(j));
    // Gram-Schmidt on columns
    for (int j = 0; j < d; ++j) {
        for (int k = 0; k < j; ++k) {
            double proj = 0.0;
            for (int i = 0; i < d; ++i) proj += q(i, j) * q(i, k);
            for (int i = 0; i < d; ++i) q(i, j) -= proj * q(i, k);
        }
        double nrm = 0.0;
        for (int i = 0; i < d; ++i) nrm += q(i, j) * q(i, j);
        nrm = std::sqrt(nrm);
        if (nrm < 1e-12) throw std::runtime_error("random_orthogonal: degenerate draw");
        for (int i = 0; i < d; ++i) q(i, j) /= nrm;
    }
    return q;
}

std::string fmt_num(double v) {
    if (!std::isfinite(v)) return "0";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (size_t i = 0; i < table.header.size(); ++i)
        out << table.header[i] << (i + 1 < table.header.size() ? "," : "");
    out << '\n';
    for (const auto& row : table.rows) {
        for (size_t i = 0; i < row.size(); ++i) out << row[i] << (i + 1 < row.size() ? "," : "");
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_meta(const std::filesystem::path& path, const RunMeta& meta) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "experiment: " << meta.experiment << '\n';
    out << "seed: " << meta.seed << '\n';
    out << "dt: " << fmt_num(meta.dt) << '\n';
    out << "t_final: " << fmt_num(meta.t_final) << '\n';
    out << "batches: " << meta.batches << '\n';
    out << "threads: " << meta.threads << '\n';
    out << "wall_clock_sec: " << fmt_num(meta.wall_clock_sec) << '\n';
    for (const auto& n : meta.notes) out << "note: " << n << '\n';
}

// --- power-law grid -------------------------------------------------------------

PowerLawGridSpec PowerLawGridSpec::desk_scale() {
    PowerLawGridSpec s;
    s.a_values = {5.0, 16.0, 27.0, 38.0, 50.0};
    s.beta_values = {1.5, 2.0, 3.0, 5.0, 8.0};
    return s;
}

PowerLawGridSpec PowerLawGridSpec::full_scale() {
    PowerLawGridSpec s;
    s.a_values = linspace(5.0, 50.0, 10);
    s.beta_values = linspace(1.05, 20.0, 20);
    return s;
}

void PowerLawGridSpec::validate() const {
    if (a_values.empty()) throw ConfigError("powerlaw-grid: empty damping range");
    if (beta_values.empty()) throw ConfigError("powerlaw-grid: empty beta range");
    for (double b : beta_values)
        if (!(b > 1.0)) throw ConfigError("powerlaw-grid: beta values must exceed 1");
    if (!(dt > 0.0) || !(t_final > dt)) throw ConfigError("powerlaw-grid: bad grid");
}

PowerLawGridResult run_powerlaw_grid(const PowerLawGridSpec& spec, int threads) {
    spec.validate();
    PowerLawGridResult res;
    res.spec = spec;
    const int na = static_cast<int>(spec.a_values.size());
    const int nb = static_cast<int>(spec.beta_values.size());
    res.cells.resize(static_cast<size_t>(na * nb));
    const TimeGrid grid = TimeGrid::from_horizon(spec.dt, spec.t_final);
    std::atomic<int> divergent{0};
    parallel_for(na * nb, threads, [&](int idx) {
        PowerLawCell& cell = res.cells[static_cast<size_t>(idx)];
        cell.a = spec.a_values[static_cast<size_t>(idx / nb)];
        cell.beta = spec.beta_values[static_cast<size_t>(idx % nb)];
        cell.f_beta = threshold_f(spec.c, spec.alpha, cell.beta);
        cell.above_threshold = cell.a > cell.f_beta;
        try {
            IntegroODEProblem p;
            p.a = cell.a;
            p.kernel = Kernel::power_law(spec.c, spec.alpha, cell.beta);
            p.y0 = spec.y0;
            const GridFunction x = solve_integro_ode(p, grid);
            const DecayFit fit = fit_decay(x, DecayModel::PowerLaw, spec.fit_window);
            cell.fitted_rate = fit.rate;
            cell.r_squared = fit.r_squared;
            cell.ratio = cell.above_threshold ? fit.rate / cell.beta : 0.0;
        } catch (const DivergenceError& e) {
            cell.status = std::string("diverged: ") + e.what();
            divergent.fetch_add(1);
        } catch (const FitError& e) {
            cell.status = std::string("fit_failed: ") + e.what();
        }
    });
    res.divergent_cells = divergent.load();
    return res;
}

// --- exponential grid -------------------------------------------------------------

ExpGridSpec ExpGridSpec::desk_scale() {
    ExpGridSpec s;
    s.a_values = linspace(1.0, 10.0, 5);
    s.beta_values = linspace(1.0, 6.0, 5);
    return s;
}

ExpGridSpec ExpGridSpec::full_scale() {
    ExpGridSpec s;
    s.a_values = linspace(1.0, 10.0, 10);
    s.beta_values = linspace(1.0, 6.0, 10);
    return s;
}

void ExpGridSpec::validate() const {
    if (a_values.empty()) throw ConfigError("exp-grid: empty damping range");
    if (beta_values.empty()) throw ConfigError("exp-grid: empty beta range");
    if (!(dt > 0.0) || !(t_final > dt)) throw ConfigError("exp-grid: bad grid");
}

ExpGridResult run_exp_grid(const ExpGridSpec& spec, int threads) {
    spec.validate();
    ExpGridResult res;
    res.spec = spec;
    const int na = static_cast<int>(spec.a_values.size());
    const int nb = static_cast<int>(spec.beta_values.size());
    res.cells.resize(static_cast<size_t>(na * nb));
    const TimeGrid grid = TimeGrid::from_horizon(spec.dt, spec.t_final);
    std::atomic<int> divergent{0};
    parallel_for(na * nb, threads, [&](int idx) {
        ExpGridCell& cell = res.cells[static_cast<size_t>(idx)];
        cell.a = spec.a_values[static_cast<size_t>(idx / nb)];
        cell.beta = spec.beta_values[static_cast<size_t>(idx % nb)];
        cell.gamma_star = characteristic_gamma_star(cell.a, ExponentialKernel{spec.c, cell.beta});
        cell.no_decay = cell.gamma_star >= -spec.no_decay_tol;
        cell.condition_lhs = cell.a;
        cell.condition_rhs = spec.c / cell.beta;
        cell.condition_holds = cell.condition_lhs > cell.condition_rhs;
        try {
            IntegroODEProblem p;
            p.a = cell.a;
            p.kernel = Kernel::exponential(spec.c, cell.beta);
            p.y0 = spec.y0;
            const GridFunction x = solve_integro_ode(p, grid, Stepper::Heun, MemoryMode::ExpRecursion);
            const DecayFit fit =
                fit_decay(x, DecayModel::Exponential, {0.5 * spec.t_final, spec.t_final});
            cell.fitted_rate = fit.rate;
            if (cell.no_decay) {
                cell.status = "no_decay";
            } else {
                cell.rel_error = std::abs(cell.fitted_rate - std::abs(cell.gamma_star)) /
                                 std::abs(cell.gamma_star);
            }
        } catch (const DivergenceError& e) {
            cell.status = std::string("diverged: ") + e.what();
            divergent.fetch_add(1);
        } catch (const FitError& e) {
            cell.status = std::string("fit_failed: ") + e.what();
        }
    });
    res.divergent_cells = divergent.load();
    double sum = 0.0;
    int n = 0;
    for (const auto& c : res.cells) {
        if (c.status != "ok" || c.no_decay) continue;
        sum += c.rel_error;
        res.max_rel_error = std::max(res.max_rel_error, c.rel_error);
        ++n;
    }
    res.mean_rel_error = (n > 0) ? sum / n : 0.0;
    return res;
}

// --- perturbation studies ----------------------------------------------------------

PerturbSpec PerturbSpec::first_order_desk() {
    PerturbSpec s;
    s.order = SystemOrder::First;
    s.sim.dim = 1;
    s.sim.gamma = 3.0;
    s.sim.sigma = Mat::scalar(1e-3);
    s.sim.grid = TimeGrid::from_horizon(0.01, 50.0);
    s.sim.batches = 8;
    s.sim.init_v = InitSpec::standard_gaussian();
    s.kernel = Kernel::power_law(1.0, 1.0, 4.0);
    s.weight = WeightFunction::power_law(1.0, 6.0);
    s.families = {
        {PerturbFamily::Translation, linspace(1.0, 3.0, 6)},
        {PerturbFamily::Dilation, linspace(0.0, 1.0, 6)},
        {PerturbFamily::Cutoff, linspace(0.1, 3.0, 6)},
        {PerturbFamily::Oscillation, linspace(0.1, 4.0, 6)},
    };
    return s;
}

PerturbSpec PerturbSpec::first_order_full() {
    PerturbSpec s = first_order_desk();
    s.sim.batches = 20;
    s.families = {
        {PerturbFamily::Translation, linspace(1.0, 3.0, 10)},
        {PerturbFamily::Dilation, linspace(0.0, 1.0, 10)},
        {PerturbFamily::Cutoff, linspace(0.1, 3.0, 10)},
        {PerturbFamily::Oscillation, linspace(0.1, 4.0, 10)},
    };
    return s;
}

PerturbSpec PerturbSpec::second_order_desk(uint64_t q_seed) {
    PerturbSpec s;
    s.order = SystemOrder::Second;
    const int d = 3;
    s.sim.dim = d;
    s.sim.gamma = 10.0;
    s.sim.sigma = Mat::identity(d) * 1e-4;
    s.sim.grid = TimeGrid::from_horizon(0.005, 30.0);
    s.sim.batches = 8;
    s.sim.memory = MemoryMode::ExpRecursion;
    s.sim.init_v = InitSpec::standard_gaussian();
    s.sim.init_x = InitSpec::standard_gaussian();
    s.kernel = Kernel::matrix_exp(random_orthogonal(d, q_seed), {0.5, 1.0, 2.0});
    s.weight = WeightFunction::exponential(0.9, -0.8);
    s.potential = PotentialSpec::quadratic_log_cosh(Mat::identity(d) * 10.0, 10.0, 0.01);
    s.families = {
        {PerturbFamily::Translation, linspace(0.0, 0.5, 5)},
        {PerturbFamily::Dilation, linspace(0.0, 1.0, 5)},
        {PerturbFamily::Cutoff, linspace(1.0, 20.0, 5)},
        {PerturbFamily::Oscillation, linspace(0.0, 1.0, 5)},
    };
    return s;
}

PerturbSpec PerturbSpec::second_order_full(uint64_t q_seed) {
    PerturbSpec s = second_order_desk(q_seed);
    s.sim.batches = 20;
    for (auto& f : s.families) {
        const double lo = f.alphas.front();
        const double hi = f.alphas.back();
        f.alphas = linspace(lo, hi, 8);
    }
    return s;
}

void PerturbSpec::validate() const {
    sim.validate();
    if (families.empty()) throw ConfigError("perturb: no perturbation families configured");
    for (const auto& f : families)
        if (f.alphas.empty()) throw ConfigError("perturb: empty alpha range");
    if (order == SystemOrder::Second && !potential)
        throw ConfigError("perturb: second order requires a potential");
    if (kernel.dim() != sim.dim) throw ConfigError("perturb: kernel dimension mismatch");
    const auto weight_issues = weight.validate();
    if (!weight_issues.empty())
        throw ConfigError("perturb: weight invalid: " + weight_issues.front());
}

namespace {

double sigma_sq_trace(const Mat& sigma) {
    if (sigma.rows() == 0) return 0.0;
    double tr = 0.0;
    for (int i = 0; i < sigma.rows(); ++i)
        for (int j = 0; j < sigma.cols(); ++j) tr += sigma(i, j) * sigma(i, j);
    return tr;
}

// Fit limits for a decaying stochastic series: the window opens once the
// series has dropped below fit_peak_drop of its peak (past the transient)
// and closes where it meets floor_factor times the Monte Carlo noise floor
// (the median over the last tenth of the horizon).
FitWindow adaptive_fit_window(const GridFunction& series, const PerturbSpec& spec) {
    const TimeGrid& grid = series.grid;
    const int n = series.size();
    std::vector<double> tail(series.values.begin() + (9 * n) / 10, series.values.end());
    std::sort(tail.begin(), tail.end());
    const double floor_med = tail.empty() ? 0.0 : tail[tail.size() / 2];
    const double threshold = spec.floor_factor * floor_med;

    int peak = 0;
    for (int i = 1; i < n; ++i)
        if (series[i] > series[peak]) peak = i;

    double t_start = grid.t(peak);
    for (int i = peak; i < n; ++i) {
        if (series[i] < series[peak] * spec.fit_peak_drop) {
            t_start = grid.t(i);
            break;
        }
    }
    double t_end = grid.horizon();
    for (int i = peak; i < n; ++i) {
        if (grid.t(i) > t_start && series[i] < threshold) {
            t_end = grid.t(i);
            break;
        }
    }
    if (t_end - t_start < 10.0 * grid.dt) t_end = grid.horizon();
    return {t_start, t_end};
}

PerturbResult run_perturb(const PerturbSpec& spec, int threads) {
    spec.validate();
    PerturbResult res;
    res.order = spec.order;
    res.sigma_sq_trace = sigma_sq_trace(spec.sim.sigma);
    const TimeGrid& grid = spec.sim.grid;
    const double mu = spec.weight.mu();

    double h_hat = 0.0;
    bool h_hat_finite = true;
    try {
        h_hat = laplace_transform(spec.weight, mu);
    } catch (const DivergenceError&) {
        h_hat_finite = false;
        res.notes.push_back("hat{h}(mu) diverges; contraction conditions not checkable");
    }

    LyapunovParams lyap;
    if (spec.order == SystemOrder::Second) {
        lyap = lyapunov_params(spec.sim.gamma, spec.potential->u, spec.potential->r,
                               spec.potential->kappa0);
        res.lambda = lyap.lambda;
        const double lg_term = spec.potential->lg * spec.potential->u /
                               (spec.sim.gamma * spec.sim.gamma);
        if (lg_term > 0.75)
            res.notes.push_back("contraction premise violated: LG u / gamma^2 = " +
                                fmt_num(lg_term) + " > 3/4");
    }

    // moment condition for the base kernel
    {
        ConditionParams p;
        p.gamma = spec.sim.gamma;
        p.mu = mu;
        p.h_hat_mu = h_hat;
        p.h_hat_finite = h_hat_finite;
        p.schur = schur_norm(spec.kernel, spec.weight, grid).value;
        p.lambda = res.lambda;
        res.moment_condition = check_condition(spec.order == SystemOrder::First
                                                   ? ConditionTag::FirstOrderMoment
                                                   : ConditionTag::SecondOrderMoment,
                                               p);
        if (res.moment_condition.checkable && !res.moment_condition.holds)
            res.notes.push_back("moment contraction condition fails (lhs " +
                                fmt_num(res.moment_condition.lhs) + " <= rhs " +
                                fmt_num(res.moment_condition.rhs) + "); proceeding");
    }
    res.weight_diagnostic = subexponential_diagnostic(spec.weight, grid);
    if (!res.weight_diagnostic.horizon_ok)
        res.notes.push_back("weight fails the convolution-ratio diagnostic (expected for"
                            " exponential weights)");

    std::vector<std::pair<PerturbFamily, double>> tasks;
    for (const auto& fam : spec.families)
        for (double a : fam.alphas) tasks.emplace_back(fam.family, a);
    res.cells.resize(tasks.size());
    std::atomic<int> divergent{0};

    parallel_for(static_cast<int>(tasks.size()), threads, [&](int idx) {
        PerturbCell& cell = res.cells[static_cast<size_t>(idx)];
        cell.family = tasks[static_cast<size_t>(idx)].first;
        cell.alpha = tasks[static_cast<size_t>(idx)].second;
        const Kernel pert = Kernel::perturbed(spec.kernel, cell.family, cell.alpha);
        cell.negative_memory = pert.negative_memory();
        cell.schur_pert = schur_norm(pert, spec.weight, grid).value;
        const NormResult dn = schur_norm_diff(spec.kernel, pert, spec.weight, grid);
        cell.delta_sq = dn.value * dn.value;
        ConditionParams cp;
        cp.gamma = spec.sim.gamma;
        cp.mu = mu;
        cp.h_hat_mu = h_hat;
        cp.h_hat_finite = h_hat_finite;
        cp.schur = cell.schur_pert;
        cp.lambda = res.lambda;
        cell.condition = check_condition(spec.order == SystemOrder::First
                                             ? ConditionTag::FirstOrderError
                                             : ConditionTag::SecondOrderError,
                                         cp);
        try {
            const CoupledEnsemble ens =
                simulate_coupled(spec.sim, spec.kernel, pert, spec.order,
                                 spec.potential ? &*spec.potential : nullptr, 1);
            const MomentSeries moments =
                (spec.order == SystemOrder::First)
                    ? ensemble_moments(ens, EnsembleFunctional::DiffSq)
                    : ensemble_moments(ens, EnsembleFunctional::LyapunovSq, &lyap);
            const BoundConstant bc = empirical_sup_ratio(
                moments.mean, spec.weight, res.sigma_sq_trace, {grid.dt, grid.horizon()});
            cell.bound_constant = bc.value;
            cell.bound_argmax_t = bc.argmax_t;

            double peak = 0.0;
            for (int i = 0; i < moments.mean.size(); ++i) peak = std::max(peak, moments.mean[i]);
            if (peak == 0.0) {
                cell.status = "zero_difference";
                return;
            }
            const DecayModel model = (spec.order == SystemOrder::First) ? DecayModel::PowerLaw
                                                                        : DecayModel::Exponential;
            cell.fit_window = adaptive_fit_window(moments.mean, spec, model);
            try {
                const DecayFit fit = fit_decay(moments.mean, model, cell.fit_window);
                cell.fitted_rate = fit.rate;
                cell.fit_r_squared = fit.r_squared;
                cell.fit_valid = true;
            } catch (const FitError& e) {
                cell.status = std::string("fit_failed: ") + e.what();
            }
        } catch (const SimDivergence& e) {
            cell.status = std::string("diverged: ") + e.what();
            divergent.fetch_add(1);
        }
    });
    res.divergent_cells = divergent.load();

    for (const auto& fam : spec.families) {
        FamilySummary summary;
        summary.family = fam.family;
        std::vector<double> xs, ys, rates;
        for (const auto& cell : res.cells) {
            if (cell.family != fam.family) continue;
            if (cell.status == "ok" || cell.status == "zero_difference") {
                xs.push_back(cell.delta_sq);
                ys.push_back(cell.bound_constant);
            }
            if (cell.fit_valid) rates.push_back(cell.fitted_rate);
        }
        if (xs.size() >= 4) {
            try {
                summary.linearity = linearity_report(xs, ys);
                summary.linearity_valid = true;
            } catch (const std::invalid_argument&) {
            }
        }
        if (!rates.empty()) {
            std::sort(rates.begin(), rates.end());
            summary.median_rate = rates[rates.size() / 2];
            summary.rated_cells = static_cast<int>(rates.size());
        }
        res.families.push_back(std::move(summary));
    }
    return res;
}

}  // namespace

PerturbResult run_first_order_perturb(const PerturbSpec& spec, int threads) {
    if (spec.order != SystemOrder::First)
        throw std::invalid_argument("run_first_order_perturb: spec is not first order");
    return run_perturb(spec, threads);
}

PerturbResult run_second_order_perturb(const PerturbSpec& spec, int threads) {
    if (spec.order != SystemOrder::Second)
        throw std::invalid_argument("run_second_order_perturb: spec is not second order");
    return run_perturb(spec, threads);
}

// --- one-off simulation -------------------------------------------------------------

SimulateSpec SimulateSpec::defaults() {
    SimulateSpec s;
    s.sim.dim = 1;
    s.sim.gamma = 1.0;
    s.sim.grid = TimeGrid::from_horizon(0.01, 10.0);
    s.sim.batches = 1;
    s.kernel = Kernel::zero(1);
    return s;
}

SimulateResult run_simulate(const SimulateSpec& spec, const std::filesystem::path& dump_dir,
                            int threads) {
    spec.sim.validate();
    SimulateResult res;
    const Kernel pert = spec.kernel_pert.value_or(spec.kernel);
    const CoupledEnsemble ens =
        simulate_coupled(spec.sim, spec.kernel, pert, spec.order,
                         spec.potential ? &*spec.potential : nullptr, threads);

    auto dump = [&](const std::string& system, const std::vector<Trajectory>& paths) {
        const std::filesystem::path dir = dump_dir / system;
        std::filesystem::create_directories(dir);
        for (size_t b = 0; b < paths.size(); ++b) {
            const Trajectory& traj = paths[b];
            const std::filesystem::path file = dir / (std::to_string(b) + ".csv");
            std::ofstream out(file, std::ios::binary);
            if (!out) throw std::runtime_error("cannot write " + file.string());
            out << "t";
            for (int c = 0; c < traj.state_dim; ++c) out << ",component_" << c;
            out << '\n';
            for (int i = 0; i < traj.grid.size(); ++i) {
                out << fmt_num(traj.grid.t(i));
                for (int c = 0; c < traj.state_dim; ++c) out << ',' << fmt_num(traj.state(i)[c]);
                out << '\n';
            }
            res.files.push_back(file);
        }
    };
    dump("true", ens.true_paths);
    if (spec.kernel_pert) dump("pert", ens.pert_paths);
    return res;
}

// --- serialization -------------------------------------------------------------------

CsvTable to_csv(const PowerLawGridResult& r) {
    CsvTable t;
    t.header = {"a",           "beta",      "alpha",     "c",     "f_beta", "condition_holds",
                "fitted_rate", "r_squared", "ratio",     "status"};
    for (const auto& c : r.cells)
        t.rows.push_back({fmt_num(c.a), fmt_num(c.beta), fmt_num(r.spec.alpha), fmt_num(r.spec.c),
                          fmt_num(c.f_beta), c.above_threshold ? "1" : "0", fmt_num(c.fitted_rate),
                          fmt_num(c.r_squared), fmt_num(c.ratio), c.status});
    return t;
}

CsvTable to_csv(const ExpGridResult& r) {
    CsvTable t;
    t.header = {"a",          "beta",        "c",         "gamma_star",     "fitted_rate",
                "rel_error",  "no_decay",    "condition_lhs", "condition_rhs", "condition_holds",
                "status"};
    for (const auto& c : r.cells)
        t.rows.push_back({fmt_num(c.a), fmt_num(c.beta), fmt_num(r.spec.c), fmt_num(c.gamma_star),
                          fmt_num(c.fitted_rate), fmt_num(c.rel_error), c.no_decay ? "1" : "0",
                          fmt_num(c.condition_lhs), fmt_num(c.condition_rhs),
                          c.condition_holds ? "1" : "0", c.status});
    return t;
}

CsvTable to_csv(const PerturbResult& r) {
    CsvTable t;
    const std::string bound_name = (r.order == SystemOrder::First) ? "c2" : "c4";
    t.header = {"family",
                "alpha",
                "schur_pert",
                "delta_norm_sq",
                "condition_lhs",
                "condition_rhs",
                "condition_holds",
                bound_name,
                bound_name + "_argmax_t",
                "fitted_rate",
                "fit_r_squared",
                "fit_t_min",
                "fit_t_max",
                "negative_memory",
                "status"};
    for (const auto& c : r.cells)
        t.rows.push_back({to_string(c.family), fmt_num(c.alpha), fmt_num(c.schur_pert),
                          fmt_num(c.delta_sq), fmt_num(c.condition.lhs), fmt_num(c.condition.rhs),
                          c.condition.checkable ? (c.condition.holds ? "1" : "0") : "unknown",
                          fmt_num(c.bound_constant), fmt_num(c.bound_argmax_t),
                          fmt_num(c.fitted_rate), fmt_num(c.fit_r_squared),
                          fmt_num(c.fit_window.t_min), fmt_num(c.fit_window.t_max),
                          c.negative_memory ? "1" : "0", c.status});
    return t;
}

CsvTable linearity_csv(const PerturbResult& r) {
    CsvTable t;
    t.header = {"family", "slope", "intercept", "pearson_r", "n_points", "median_rate",
                "rated_cells"};
    for (const auto& f : r.families)
        t.rows.push_back({to_string(f.family), fmt_num(f.linearity.slope),
                          fmt_num(f.linearity.intercept), fmt_num(f.linearity.pearson_r),
                          std::to_string(f.linearity.n), fmt_num(f.median_rate),
                          std::to_string(f.rated_cells)});
    return t;
}

// --- config application ------------------------------------------------------------

namespace {

std::vector<double> sweep_values(const Config& cfg, const std::string& table,
                                 const std::string& prefix, std::vector<double> fallback) {
    if (cfg.has(table, prefix + "_values")) return cfg.get_double_list(table, prefix + "_values");
    if (cfg.has(table, prefix + "_min") || cfg.has(table, prefix + "_max") ||
        cfg.has(table, prefix + "_count")) {
        if (fallback.empty()) fallback = {1.0};
        const double lo = cfg.get_double(table, prefix + "_min", fallback.front());
        const double hi = cfg.get_double(table, prefix + "_max", fallback.back());
        const int n = static_cast<int>(
            cfg.get_int(table, prefix + "_count", static_cast<int64_t>(fallback.size())));
        return linspace(lo, hi, n);
    }
    return fallback;
}

Kernel kernel_from_config(const Config& cfg, const Kernel& fallback) {
    if (!cfg.has("kernel", "family")) return fallback;
    const std::string family = cfg.get_string("kernel", "family", "");
    if (family == "power_law")
        return Kernel::power_law(cfg.get_double("kernel", "c", 1.0),
                                 cfg.get_double("kernel", "alpha", 1.0),
                                 cfg.get_double("kernel", "beta", 4.0));
    if (family == "exponential")
        return Kernel::exponential(cfg.get_double("kernel", "c", 1.0),
                                   cfg.get_double("kernel", "beta", 1.0));
    if (family == "matrix_exp") {
        std::vector<double> rates = cfg.get_double_list("kernel", "eigvals");
        if (rates.empty()) rates = {0.5, 1.0, 2.0};
        const auto q_seed = static_cast<uint64_t>(cfg.get_int("kernel", "q_seed", 7));
        return Kernel::matrix_exp(random_orthogonal(static_cast<int>(rates.size()), q_seed),
                                  rates);
    }
    if (family == "zero") return Kernel::zero(static_cast<int>(cfg.get_int("kernel", "dim", 1)));
    throw ConfigError("unknown kernel family: " + family);
}

WeightFunction weight_from_config(const Config& cfg, const WeightFunction& fallback) {
    if (!cfg.has("weight", "form")) return fallback;
    const std::string form = cfg.get_string("weight", "form", "");
    if (form == "power_law")
        return WeightFunction::power_law(cfg.get_double("weight", "alpha", 1.0),
                                         cfg.get_double("weight", "beta", 6.0));
    if (form == "exponential") {
        const double rate = cfg.get_double("weight", "rate", 0.9);
        return WeightFunction::exponential(rate, cfg.get_double("weight", "mu", -0.8));
    }
    throw ConfigError("unknown weight form: " + form);
}

void apply_sim_config(SimConfig& sim, const Config& cfg) {
    sim.dim = static_cast<int>(cfg.get_int("sim", "dim", sim.dim));
    sim.gamma = cfg.get_double("sim", "gamma", sim.gamma);
    sim.batches = static_cast<int>(cfg.get_int("sim", "batches", sim.batches));
    if (cfg.has("sim", "sigma")) {
        const double s = cfg.get_double("sim", "sigma", 0.0);
        sim.sigma = Mat::identity(sim.dim) * s;
    }
    if (cfg.has("sim", "memory")) {
        const std::string m = cfg.get_string("sim", "memory", "direct");
        if (m == "direct") sim.memory = MemoryMode::Direct;
        else if (m == "recursion") sim.memory = MemoryMode::ExpRecursion;
        else throw ConfigError("unknown memory mode: " + m);
    }
    const double dt = cfg.get_double("grid", "dt", sim.grid.dt);
    const double t_final = cfg.get_double("grid", "t_final", sim.grid.horizon());
    sim.grid = TimeGrid::from_horizon(dt, t_final);
    auto init_from = [&](const std::string& key, InitSpec& init) {
        if (!cfg.has("init", key + "_kind")) return;
        const std::string kind = cfg.get_string("init", key + "_kind", "gaussian");
        Vec mean = cfg.get_double_list("init", key + "_mean");
        if (kind == "point") init = InitSpec::point(std::move(mean));
        else if (kind == "gaussian") {
            init = InitSpec::standard_gaussian();
            init.mean = std::move(mean);
        } else throw ConfigError("unknown init kind: " + kind);
    };
    init_from("v", sim.init_v);
    init_from("x", sim.init_x);
}

PotentialSpec potential_from_config(const Config& cfg, int dim, const PotentialSpec& fallback) {
    if (!cfg.has("potential", "u") && !cfg.has("potential", "kappa0") &&
        !cfg.has("potential", "lg") && !cfg.has("potential", "g"))
        return fallback;
    const double u = cfg.get_double("potential", "u", fallback.u);
    const double kappa0 = cfg.get_double("potential", "kappa0", fallback.kappa0);
    const double lg = cfg.get_double("potential", "lg", fallback.lg);
    const std::string g = cfg.get_string("potential", "g", lg > 0.0 ? "log_cosh" : "none");
    const Mat r = Mat::identity(dim) * kappa0;
    if (g == "none") return PotentialSpec::quadratic(r, u);
    if (g == "log_cosh") return PotentialSpec::quadratic_log_cosh(r, u, lg);
    throw ConfigError("unknown potential convex part: " + g);
}

}  // namespace

void apply_config(PowerLawGridSpec& spec, const Config& cfg) {
    spec.a_values = sweep_values(cfg, "sweep", "a", spec.a_values);
    spec.beta_values = sweep_values(cfg, "sweep", "beta", spec.beta_values);
    spec.c = cfg.get_double("kernel", "c", spec.c);
    spec.alpha = cfg.get_double("kernel", "alpha", spec.alpha);
    spec.dt = cfg.get_double("grid", "dt", spec.dt);
    spec.t_final = cfg.get_double("grid", "t_final", spec.t_final);
    spec.y0 = cfg.get_double("sim", "y0", spec.y0);
    spec.fit_window.t_min = cfg.get_double("fit", "t_min", spec.fit_window.t_min);
    spec.fit_window.t_max = cfg.get_double("fit", "t_max", spec.t_final);
}

void apply_config(ExpGridSpec& spec, const Config& cfg) {
    spec.a_values = sweep_values(cfg, "sweep", "a", spec.a_values);
    spec.beta_values = sweep_values(cfg, "sweep", "beta", spec.beta_values);
    spec.c = cfg.get_double("kernel", "c", spec.c);
    spec.dt = cfg.get_double("grid", "dt", spec.dt);
    spec.t_final = cfg.get_double("grid", "t_final", spec.t_final);
    spec.y0 = cfg.get_double("sim", "y0", spec.y0);
}

void apply_config(PerturbSpec& spec, const Config& cfg) {
    apply_sim_config(spec.sim, cfg);
    spec.kernel = kernel_from_config(cfg, spec.kernel);
    spec.weight = weight_from_config(cfg, spec.weight);
    if (spec.order == SystemOrder::Second)
        spec.potential = potential_from_config(cfg, spec.sim.dim, *spec.potential);
    if (cfg.has("families", "names")) {
        std::vector<FamilyRange> ranges;
        for (const auto& name : cfg.get_string_list("families", "names")) {
            FamilyRange fr;
            fr.family = perturb_family_from_string(name);
            std::vector<double> fallback;
            for (const auto& f : spec.families)
                if (f.family == fr.family) fallback = f.alphas;
            fr.alphas = sweep_values(cfg, "families", name, fallback);
            ranges.push_back(std::move(fr));
        }
        spec.families = std::move(ranges);
    } else {
        for (auto& f : spec.families)
            f.alphas = sweep_values(cfg, "families", to_string(f.family), f.alphas);
    }
    spec.fit_t_min = cfg.get_double("fit", "t_min", spec.fit_t_min);
    spec.fit_rise_skip = cfg.get_double("fit", "rise_skip", spec.fit_rise_skip);
    spec.floor_factor = cfg.get_double("fit", "floor_factor", spec.floor_factor);
}

void apply_config(SimulateSpec& spec, const Config& cfg) {
    const std::string order = cfg.get_string("simulate", "order", "first");
    if (order == "first") spec.order = SystemOrder::First;
    else if (order == "second") spec.order = SystemOrder::Second;
    else throw ConfigError("unknown order: " + order);
    apply_sim_config(spec.sim, cfg);
    spec.kernel = kernel_from_config(cfg, spec.kernel);
    if (cfg.has("perturb", "family")) {
        const PerturbFamily fam =
            perturb_family_from_string(cfg.get_string("perturb", "family", "translation"));
        spec.kernel_pert =
            Kernel::perturbed(spec.kernel, fam, cfg.get_double("perturb", "alpha", 0.0));
    }
    if (spec.order == SystemOrder::Second) {
        PotentialSpec fallback = spec.potential
                                     ? *spec.potential
                                     : PotentialSpec::quadratic(Mat::identity(spec.sim.dim), 1.0);
        spec.potential = potential_from_config(cfg, spec.sim.dim, fallback);
    }
}

}  // namespace glelab
