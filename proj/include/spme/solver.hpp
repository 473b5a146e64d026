#pragma once

#include <functional>
#include <optional>
#include <span>

#include "spme/field.hpp"
#include "spme/report.hpp"

namespace spme {

/// Explicit finite-volume stepper for the coupled system
///     (u^i)_t = div( m (|u|^{m-1} + eps) grad u^i ),
/// all species sharing the face diffusivities built from |u|.
struct SolverConfig {
    double m = 2.0;
    /// Regularization floor; 0 runs the degenerate coefficient.
    double epsilon = 0.0;
    /// Optional cap applied to initial data, min(u0, cap).
    std::optional<double> cap;
    double cfl_safety = 0.9;
    bool clamp_negative = true;
    /// Step returned for an all-zero state with epsilon = 0.
    double max_dt = 1.0;
};

/// D = m(|u|^{m-1} + eps) pointwise.
ScalarField diffusivity(const SpeciesState& state, const SolverConfig& cfg);

/// cfl_safety * h_min^2 / (2 dim D_max); cfg.max_dt when D_max vanishes.
double stable_dt(const SpeciesState& state, const SolverConfig& cfg);

/// One forward-Euler update with zero-flux boundaries. Face diffusivity is
/// the arithmetic mean of the two adjacent cells (harmonic would stall the
/// free boundary). Negatives produced by rounding are clamped.
SpeciesState step(const SpeciesState& state, const SolverConfig& cfg, double dt);

/// Time-dependent boundary values for the 1D Dirichlet variant used by
/// manufactured-solution runs: values(species, x_face, t).
struct DirichletBoundary {
    std::function<double(int species, double x_face, double t)> values;
};

/// Dirichlet counterpart of step(); 1D only.
SpeciesState step_dirichlet(const SpeciesState& state, const SolverConfig& cfg,
                            double dt, const DirichletBoundary& boundary);

struct RunOptions {
    double t_end = 0.0;
    /// Observers fire and a record is kept every this many steps (and at the
    /// final time).
    std::size_t sample_stride = 100;
    /// 0 means no cap.
    std::size_t max_steps = 0;
    bool record_support_sets = true;
    /// Face-level inequality checks evaluated at sampled steps.
    bool record_face_checks = true;
    /// Negative requests the default support floor per sample.
    double support_threshold = -1.0;
};

using Observer = std::function<void(const SpeciesState& state, const SampleRecord& record)>;

struct RunResult {
    SpeciesState final_state;
    DiagnosticsReport report;
};

/// Repeated step() with dt = min(stable_dt, remaining); the final stamp is
/// exactly t_end. Observers run on the sampling stride. Throws
/// NumericalBlowupError / StagnationError on failure.
RunResult run(const SpeciesState& initial, const SolverConfig& cfg,
              const RunOptions& options, std::span<const Observer> observers = {});

}  // namespace spme
