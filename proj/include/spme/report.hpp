#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>
#include <vector>

#include "spme/field.hpp"

namespace spme {

/// Per-species support summary at one sample time.
struct SupportSummary {
    std::size_t cell_count = 0;
    CellSet cells;  // empty when set recording is off
};

/// One sampled instant of a run.
struct SampleRecord {
    double time = 0.0;
    std::size_t step = 0;
    double dt = 0.0;
    std::vector<double> masses;            // per species
    double max_norm = 0.0;                 // max |u|
    std::vector<SupportSummary> supports;  // per species
    SupportSummary norm_support;           // support of |u|
    double support_threshold = 0.0;
    /// Pairwise species support distances, pairs (i,j), i < j, row order.
    std::vector<double> pair_support_distance;
    /// min over interior faces of sum_i (face grad u^i)^2 - (face grad |u|)^2.
    double cs_min_slack = std::numeric_limits<double>::infinity();
    /// max over supported cells of d|u|/dt - lap_h(|u|^m) for the sample step.
    double subsolution_max = -std::numeric_limits<double>::infinity();
};

/// Aggregated record of one solver (or rescaled-solver) run.
struct DiagnosticsReport {
    std::vector<SampleRecord> samples;
    std::size_t total_steps = 0;
    /// max over species and samples of |mass(t)/mass(0) - 1|.
    double mass_drift_max = 0.0;
    /// Total mass added by clamping rounding negatives, per unit initial mass.
    double clamp_mass_relative = 0.0;
    /// max over the run of (max u - cap); meaningful when a cap was set.
    double cap_exceed = -std::numeric_limits<double>::infinity();
    /// Sample intervals where the |u| support lost more than chatter allows.
    int support_monotonicity_violations = 0;
    /// Steps taken with dt above the advertised stability bound.
    int cfl_violations = 0;
    /// Support of |u| came within two cells of the domain boundary.
    bool boundary_touched = false;

    double min_cs_slack() const;
    double max_subsolution() const;
};

/// `t,<metric columns>` rows, one per sample.
void write_report_csv(const std::filesystem::path& path, const DiagnosticsReport& report);

}  // namespace spme
