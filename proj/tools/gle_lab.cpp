// gle_lab: memory-kernel Langevin experiment harness.
//
// Subcommands: powerlaw-grid, exp-grid, gle1-perturb, gle2-perturb, simulate.
// Outputs land in {out}/{experiment}/{report.csv, meta.txt, linearity.csv,
// dumps/...}. Exit codes: 0 success, 1 config error, 2 numerical divergence
// in at least one cell (report still written), 3 I/O error.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "glelab/experiments.hpp"
#include "glelab/version.hpp"

namespace fs = std::filesystem;
using namespace glelab;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir = "out";
    std::optional<uint64_t> seed;
    std::optional<double> dt;
    std::optional<double> t_final;
    std::optional<int> batches;
    int threads = 0;
    bool desk_scale = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "configuration file (see docs/config.md)");
    cmd->add_option("--out", o.out_dir, "output directory root");
    cmd->add_option("--seed", o.seed, "random seed (overrides config)");
    cmd->add_option("--dt", o.dt, "time step (overrides config)");
    cmd->add_option("--t-final", o.t_final, "horizon (overrides config)");
    cmd->add_option("--batches", o.batches, "Monte Carlo batches (overrides config)");
    cmd->add_option("--threads", o.threads,
                    "worker threads (0 = GLE_LAB_THREADS or hardware)");
    cmd->add_flag("--desk-scale", o.desk_scale, "use the reduced desk-scale preset");
}

int resolve_threads(int flag) {
    if (flag > 0) return flag;
    if (const char* env = std::getenv("GLE_LAB_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

Config load_config(const CommonOpts& o) {
    if (o.config_path.empty()) return Config{};
    return Config::parse_file(o.config_path);
}

fs::path prepare_dir(const CommonOpts& o, const std::string& experiment) {
    const fs::path dir = fs::path(o.out_dir) / experiment;
    fs::create_directories(dir);
    return dir;
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

uint64_t seed_from(const CommonOpts& o, const Config& cfg) {
    if (o.seed) return *o.seed;
    return static_cast<uint64_t>(cfg.get_int("experiment", "seed", 12345));
}

int run_powerlaw(const CommonOpts& o) {
    const Config cfg = load_config(o);
    PowerLawGridSpec spec =
        o.desk_scale ? PowerLawGridSpec::desk_scale() : PowerLawGridSpec::full_scale();
    apply_config(spec, cfg);
    if (o.dt) spec.dt = *o.dt;
    if (o.t_final) {
        spec.t_final = *o.t_final;
        spec.fit_window.t_max = std::min(spec.fit_window.t_max, spec.t_final);
    }
    const int threads = resolve_threads(o.threads);
    Timer timer;
    const PowerLawGridResult res = run_powerlaw_grid(spec, threads);
    const fs::path dir = prepare_dir(o, "powerlaw-grid");
    write_csv(dir / "report.csv", to_csv(res));
    RunMeta meta{"powerlaw-grid", 0, spec.dt, spec.t_final, 0, threads, timer.seconds(), {}};
    meta.notes.push_back(std::string("git: ") + kGitDescribe);
    meta.notes.push_back("divergent_cells: " + std::to_string(res.divergent_cells));
    write_meta(dir / "meta.txt", meta);
    std::cout << "powerlaw-grid: " << res.cells.size() << " cells -> " << (dir / "report.csv")
              << "\n";
    return res.divergent_cells > 0 ? 2 : 0;
}

int run_exp(const CommonOpts& o) {
    const Config cfg = load_config(o);
    ExpGridSpec spec = o.desk_scale ? ExpGridSpec::desk_scale() : ExpGridSpec::full_scale();
    apply_config(spec, cfg);
    if (o.dt) spec.dt = *o.dt;
    if (o.t_final) spec.t_final = *o.t_final;
    const int threads = resolve_threads(o.threads);
    Timer timer;
    const ExpGridResult res = run_exp_grid(spec, threads);
    const fs::path dir = prepare_dir(o, "exp-grid");
    write_csv(dir / "report.csv", to_csv(res));
    RunMeta meta{"exp-grid", 0, spec.dt, spec.t_final, 0, threads, timer.seconds(), {}};
    meta.notes.push_back(std::string("git: ") + kGitDescribe);
    meta.notes.push_back("mean_rel_error: " + fmt_num(res.mean_rel_error));
    meta.notes.push_back("max_rel_error: " + fmt_num(res.max_rel_error));
    write_meta(dir / "meta.txt", meta);
    std::cout << "exp-grid: mean rel error " << res.mean_rel_error << " -> "
              << (dir / "report.csv") << "\n";
    return res.divergent_cells > 0 ? 2 : 0;
}

int run_perturb_cmd(const CommonOpts& o, SystemOrder order) {
    const Config cfg = load_config(o);
    PerturbSpec spec;
    if (order == SystemOrder::First)
        spec = o.desk_scale ? PerturbSpec::first_order_desk() : PerturbSpec::first_order_full();
    else
        spec = o.desk_scale ? PerturbSpec::second_order_desk() : PerturbSpec::second_order_full();
    apply_config(spec, cfg);
    spec.sim.seed = seed_from(o, cfg);
    if (o.dt || o.t_final) {
        const double dt = o.dt ? *o.dt : spec.sim.grid.dt;
        const double tf = o.t_final ? *o.t_final : spec.sim.grid.horizon();
        spec.sim.grid = TimeGrid::from_horizon(dt, tf);
    }
    if (o.batches) spec.sim.batches = *o.batches;
    const int threads = resolve_threads(o.threads);
    const std::string name = order == SystemOrder::First ? "gle1-perturb" : "gle2-perturb";
    Timer timer;
    const PerturbResult res = (order == SystemOrder::First) ? run_first_order_perturb(spec, threads)
                                                            : run_second_order_perturb(spec, threads);
    const fs::path dir = prepare_dir(o, name);
    write_csv(dir / "report.csv", to_csv(res));
    write_csv(dir / "linearity.csv", linearity_csv(res));
    RunMeta meta{name,  spec.sim.seed,      spec.sim.grid.dt, spec.sim.grid.horizon(),
                 spec.sim.batches, threads, timer.seconds(),  {}};
    meta.notes.push_back(std::string("git: ") + kGitDescribe);
    meta.notes.push_back("sigma_sq_trace: " + fmt_num(res.sigma_sq_trace));
    if (order == SystemOrder::Second) meta.notes.push_back("lambda: " + fmt_num(res.lambda));
    meta.notes.push_back(std::string("moment_condition_holds: ") +
                         (res.moment_condition.checkable
                              ? (res.moment_condition.holds ? "1" : "0")
                              : "unknown"));
    for (const auto& n : res.notes) meta.notes.push_back(n);
    write_meta(dir / "meta.txt", meta);
    std::cout << name << ": " << res.cells.size() << " cells -> " << (dir / "report.csv") << "\n";
    return res.divergent_cells > 0 ? 2 : 0;
}

int run_simulate_cmd(const CommonOpts& o) {
    const Config cfg = load_config(o);
    SimulateSpec spec = SimulateSpec::defaults();
    apply_config(spec, cfg);
    spec.sim.seed = seed_from(o, cfg);
    if (o.dt || o.t_final) {
        const double dt = o.dt ? *o.dt : spec.sim.grid.dt;
        const double tf = o.t_final ? *o.t_final : spec.sim.grid.horizon();
        spec.sim.grid = TimeGrid::from_horizon(dt, tf);
    }
    if (o.batches) spec.sim.batches = *o.batches;
    const int threads = resolve_threads(o.threads);
    Timer timer;
    const fs::path dir = prepare_dir(o, "simulate");
    const SimulateResult res = run_simulate(spec, dir / "dumps", threads);
    RunMeta meta{"simulate", spec.sim.seed,    spec.sim.grid.dt, spec.sim.grid.horizon(),
                 spec.sim.batches, threads, timer.seconds(), {}};
    meta.notes.push_back(std::string("git: ") + kGitDescribe);
    meta.notes.push_back("files: " + std::to_string(res.files.size()));
    write_meta(dir / "meta.txt", meta);
    std::cout << "simulate: " << res.files.size() << " trajectory dumps -> " << (dir / "dumps")
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"memory-kernel Langevin experiment harness"};
    app.require_subcommand(1);

    CommonOpts opts[5];
    auto* c0 = app.add_subcommand("powerlaw-grid", "power-law kernel decay-rate sweep");
    add_common(c0, opts[0]);
    auto* c1 = app.add_subcommand("exp-grid", "exponential kernel decay-rate sweep");
    add_common(c1, opts[1]);
    auto* c2 = app.add_subcommand("gle1-perturb", "first-order coupled perturbation study");
    add_common(c2, opts[2]);
    auto* c3 = app.add_subcommand("gle2-perturb", "second-order coupled perturbation study");
    add_common(c3, opts[3]);
    auto* c4 = app.add_subcommand("simulate", "one-off simulation with trajectory dumps");
    add_common(c4, opts[4]);

    CLI11_PARSE(app, argc, argv);

    try {
        if (c0->parsed()) return run_powerlaw(opts[0]);
        if (c1->parsed()) return run_exp(opts[1]);
        if (c2->parsed()) return run_perturb_cmd(opts[2], SystemOrder::First);
        if (c3->parsed()) return run_perturb_cmd(opts[3], SystemOrder::Second);
        if (c4->parsed()) return run_simulate_cmd(opts[4]);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 3;
    } catch (const std::runtime_error& e) {
        const std::string what = e.what();
        if (what.find("cannot write") != std::string::npos ||
            what.find("write failed") != std::string::npos) {
            std::cerr << "i/o error: " << what << "\n";
            return 3;
        }
        std::cerr << "error: " << what << "\n";
        return 2;
    }
    return 0;
}
