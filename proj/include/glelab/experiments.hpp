#pragma once

// Experiment orchestration: parameter-grid decay studies for the linear
// integro-ODE, perturbation studies for the first- and second-order dynamics
// under synchronized coupling, and one-off trajectory dumps. Runners return
// typed results; writers serialize them to CSV reports with reproducibility
// metadata.
//
// Desk-scale presets keep each experiment within a few minutes on a small
// machine; full-scale presets cover the complete parameter ranges.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "glelab/analysis.hpp"
#include "glelab/config.hpp"
#include "glelab/gle_sim.hpp"
#include "glelab/norms.hpp"

namespace glelab {

// --- power-law decay grid -----------------------------------------------------

struct PowerLawGridSpec {
    std::vector<double> a_values;
    std::vector<double> beta_values;
    double c = 1.0;
    double alpha = 0.1;
    double dt = 0.01;
    double t_final = 100.0;
    double y0 = 1.0;
    FitWindow fit_window{5.0, 100.0};

    static PowerLawGridSpec desk_scale();
    static PowerLawGridSpec full_scale();
    void validate() const;
};

struct PowerLawCell {
    double a = 0.0;
    double beta = 0.0;
    double f_beta = 0.0;  // decay threshold hat{k}(0)
    bool above_threshold = false;
    double fitted_rate = 0.0;
    double r_squared = 0.0;
    double ratio = 0.0;  // fitted_rate / beta, zeroed below the threshold
    std::string status = "ok";
};

struct PowerLawGridResult {
    PowerLawGridSpec spec;
    std::vector<PowerLawCell> cells;
    int divergent_cells = 0;
};

PowerLawGridResult run_powerlaw_grid(const PowerLawGridSpec& spec, int threads = 1);

// --- exponential decay grid ---------------------------------------------------

struct ExpGridSpec {
    std::vector<double> a_values;
    std::vector<double> beta_values;
    double c = 1.0;
    double dt = 0.005;
    double t_final = 100.0;
    double y0 = 1.0;
    double no_decay_tol = 1e-8;  // |gamma*| below this is flagged as no decay

    static ExpGridSpec desk_scale();
    static ExpGridSpec full_scale();
    void validate() const;
};

struct ExpGridCell {
    double a = 0.0;
    double beta = 0.0;
    double gamma_star = 0.0;
    double fitted_rate = 0.0;
    double rel_error = 0.0;
    bool no_decay = false;
    double condition_lhs = 0.0;  // a
    double condition_rhs = 0.0;  // hat{k}(0) = c / beta
    bool condition_holds = false;
    std::string status = "ok";
};

struct ExpGridResult {
    ExpGridSpec spec;
    std::vector<ExpGridCell> cells;
    int divergent_cells = 0;
    double mean_rel_error = 0.0;  // over decaying cells
    double max_rel_error = 0.0;
};

ExpGridResult run_exp_grid(const ExpGridSpec& spec, int threads = 1);

// --- kernel perturbation studies ----------------------------------------------

struct FamilyRange {
    PerturbFamily family = PerturbFamily::Translation;
    std::vector<double> alphas;
};

struct PerturbSpec {
    SystemOrder order = SystemOrder::First;
    SimConfig sim;
    Kernel kernel;
    WeightFunction weight;
    std::optional<PotentialSpec> potential;  // second order
    std::vector<FamilyRange> families;
    // Rate fits run on the visible decay of the mean discrepancy: from where
    // the series first falls below fit_peak_drop * peak down to where it
    // meets floor_factor * (Monte Carlo noise floor).
    double fit_peak_drop = 0.3;
    double floor_factor = 10.0;

    static PerturbSpec first_order_desk();
    static PerturbSpec first_order_full();
    static PerturbSpec second_order_desk(uint64_t q_seed = 7);
    static PerturbSpec second_order_full(uint64_t q_seed = 7);
    void validate() const;
};

struct PerturbCell {
    PerturbFamily family = PerturbFamily::Translation;
    double alpha = 0.0;
    double schur_pert = 0.0;     // |||K~|||_h
    double delta_sq = 0.0;       // |||K - K~|||_h^2
    ConditionCheck condition;    // error-contraction condition for K~
    double bound_constant = 0.0; // C2 (first order) or C4 (second order)
    double bound_argmax_t = 0.0;
    double fitted_rate = 0.0;
    double fit_r_squared = 0.0;
    FitWindow fit_window;
    bool fit_valid = false;
    bool negative_memory = false;
    std::string status = "ok";
};

struct FamilySummary {
    PerturbFamily family = PerturbFamily::Translation;
    LinearityReport linearity;
    bool linearity_valid = false;
    double median_rate = 0.0;
    int rated_cells = 0;
};

struct PerturbResult {
    SystemOrder order = SystemOrder::First;
    std::vector<PerturbCell> cells;
    std::vector<FamilySummary> families;
    ConditionCheck moment_condition;  // for the base kernel
    SubexpReport weight_diagnostic;
    double sigma_sq_trace = 0.0;
    double lambda = 0.0;  // second order only
    int divergent_cells = 0;
    std::vector<std::string> notes;
};

PerturbResult run_first_order_perturb(const PerturbSpec& spec, int threads = 1);
PerturbResult run_second_order_perturb(const PerturbSpec& spec, int threads = 1);

// --- one-off simulation with dumps ---------------------------------------------

struct SimulateSpec {
    SystemOrder order = SystemOrder::First;
    SimConfig sim;
    Kernel kernel;
    std::optional<Kernel> kernel_pert;
    std::optional<PotentialSpec> potential;

    static SimulateSpec defaults();
};

struct SimulateResult {
    std::vector<std::filesystem::path> files;
};

SimulateResult run_simulate(const SimulateSpec& spec, const std::filesystem::path& dump_dir,
                            int threads = 1);

// --- serialization --------------------------------------------------------------

std::string fmt_num(double v);  // 17 significant digits

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);

CsvTable to_csv(const PowerLawGridResult& r);
CsvTable to_csv(const ExpGridResult& r);
CsvTable to_csv(const PerturbResult& r);
CsvTable linearity_csv(const PerturbResult& r);

struct RunMeta {
    std::string experiment;
    uint64_t seed = 0;
    double dt = 0.0;
    double t_final = 0.0;
    int batches = 0;
    int threads = 0;
    double wall_clock_sec = 0.0;
    std::vector<std::string> notes;
};

void write_meta(const std::filesystem::path& path, const RunMeta& meta);

/// Deterministic orthogonal matrix from a seeded Gaussian draw (QR by
/// Gram-Schmidt); used for the matrix-exponential kernel eigenvectors.
Mat random_orthogonal(int d, uint64_t seed);

/// Evenly spaced values over [lo, hi] inclusive.
std::vector<double> linspace(double lo, double hi, int n);

// --- config application ----------------------------------------------------------

void apply_config(PowerLawGridSpec& spec, const Config& cfg);
void apply_config(ExpGridSpec& spec, const Config& cfg);
void apply_config(PerturbSpec& spec, const Config& cfg);
void apply_config(SimulateSpec& spec, const Config& cfg);

}  // namespace glelab
