#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "spme/field.hpp"
#include "spme/solver.hpp"

namespace spme {

/// One blob of initial data. `species` is 1-based as written in files.
/// Shapes: pme-bump   amplitude (1 - |x-c|^2/r^2)_+^{1/(m-1)}
///         barenblatt source profile at t_start, amplitude = species mass
///         travelling-wave  amplitude = wave coefficient c_i
struct BumpSpec {
    int species = 1;
    std::string shape = "pme-bump";
    std::array<double, 2> center{0.0, 0.0};
    double radius = 0.0;
    double amplitude = 0.0;
    int line = 0;
};

struct GridSpec {
    std::array<int, 2> cells{0, 0};
    std::array<double, 2> lo{0.0, 0.0};
    std::array<double, 2> hi{0.0, 0.0};
    /// Derive the box from the bumps instead: pad so the source-solution
    /// support radius at t_end fits with a 20% margin.
    bool auto_pad = false;
};

struct HarnackSpec {
    std::vector<double> T{0.25, 1.0};
    std::vector<double> R_factors{1.5, 2.0, 4.0};  // R = factor * sqrt(T)
    /// Empirical C* recorded for the shipped sweep; 0 disables the
    /// regression bound and only finiteness is checked.
    double cstar_baseline = 0.0;
};

struct EntropySpec {
    double tau_end = 1.5;
    int stride = 500;
};

struct TravellingSpec {
    double t0 = 0.5;
    double t_end = 1.0;
    double x_lo = -0.25;
    double x_hi = 1.75;
    std::vector<double> hs{1.0 / 64, 1.0 / 128, 1.0 / 256};
};

struct Scenario {
    std::string name;
    double m = 2.0;
    int k = 1;
    int n = 1;
    double t_start = 0.0;
    double t_end = 0.0;
    std::size_t sample_stride = 100;
    std::size_t max_steps = 0;
    std::size_t checkpoint_count = 8;
    std::vector<std::string> checks;
    GridSpec grid;
    SolverConfig solver;
    std::vector<BumpSpec> bumps;
    HarnackSpec harnack;
    EntropySpec entropy;
    TravellingSpec travelling;
    std::filesystem::path source_path;

    /// min over species of initial mass / max over species; the sweep
    /// hypothesis recorded for Harnack scenarios.
    double mu0 = 0.0;
};

/// Parse and validate; every violation is collected into one ScenarioError
/// with line/key context.
Scenario parse_scenario(const std::filesystem::path& path);

/// The box the scenario runs on (resolves auto_pad).
Grid build_grid(const Scenario& scenario);

/// Initial state from the bump list at t_start.
SpeciesState build_initial_state(const Scenario& scenario, const Grid& grid);

struct CheckResult {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct ExperimentResult {
    int exit_code = 0;  // 0 pass, 1 check failure
    bool pass = false;
    std::vector<CheckResult> checks;
    std::filesystem::path out_dir;
};

/// Run every requested check, write the manifest, checkpoints, diagnostics
/// CSVs and verdict JSON under out_root/<name>. Numerical failures
/// propagate as exceptions.
ExperimentResult run_experiment(const Scenario& scenario,
                                const std::filesystem::path& out_root);

struct StudyRow {
    double h = 0.0;
    double l1 = 0.0;
    double order = 0.0;  // NaN on the first row
};

struct StudyResult {
    std::vector<StudyRow> rows;
    bool conclusive = true;  // false when errors fail to decrease monotonically
};

/// Refinement study against the scenario's exact solution (all-barenblatt or
/// all-travelling-wave initial data); levels >= 2 runs at h, h/2, ...
StudyResult refinement_study(const Scenario& scenario, int levels);

void write_study_csv(const std::filesystem::path& path, const StudyResult& study);

}  // namespace spme
