#pragma once

#include <optional>
#include <span>
#include <vector>

#include "spme/barenblatt.hpp"
#include "spme/field.hpp"
#include "spme/report.hpp"

namespace spme {

/// First sampled time of a run at which two species supports intersect;
/// nullopt when they stay disjoint through the trace. The initial supports
/// must be pairwise disjoint.
std::optional<double> waiting_time(const DiagnosticsReport& trace);

/// |support(i) symdiff support(j)| / |union|, in [0, 1]. Thresholds default
/// to the per-field support floor.
double support_sync_defect(const SpeciesState& state, int i, int j,
                           double threshold = -1.0);

/// max over supported cells and pairs (i,j) of
/// |M_j u^i - M_i u^j| / (M_i M_j max|u|); zero iff the fields are exactly
/// proportional with the given masses.
double ratio_defect(const SpeciesState& state, std::span<const double> masses,
                    double threshold = -1.0);

struct BarenblattDistance {
    std::vector<double> l1;           // per species
    std::vector<double> scaled_linf;  // t^{a1} max over the compact window
};

/// Distance of each species to its share (M_i/|M|) of the source solution
/// with mass |M|: L1 over the grid, and the t^{a1}-weighted sup over the
/// ball of 80% of the support radius (uniform convergence is slowest at the
/// free boundary, so the window stays clear of it).
BarenblattDistance barenblatt_distance(const SpeciesState& state,
                                       std::span<const double> masses, double m);
/// Same with a pre-calibrated profile carrying mass |M|.
BarenblattDistance barenblatt_distance(const SpeciesState& state,
                                       std::span<const double> masses,
                                       const BarenblattProfile& profile);

/// u_lambda(x, t) = lambda^{a1} u(lambda^{a2} x, lambda t) as a grid
/// operation: spacing shrinks by lambda^{a2}, values grow by lambda^{a1},
/// the stamp becomes t/lambda. Mass per species is unchanged.
SpeciesState lambda_rescale(const SpeciesState& state, double lambda, double m);

/// Quotient of the initial spatial average over |x| < R against the
/// mass-ratio-weighted bound built from the point value at the origin at
/// time T = at_T.time - initial.time:
///   Q = int_{|x|<R} u^i(x,0) / [ (mu^i)^{-p} ( R^{n+2/(m-1)}/T^{1/(m-1)}
///                                 + T^{n/2} u^i(0,T)^p ) ],  p = ((m-1)n+2)/2.
/// Requires R > sqrt(T). u^i(0,T) is interpolated multilinearly.
double harnack_quotient(const SpeciesState& initial, const SpeciesState& at_T,
                        int species, double R, double m);

}  // namespace spme
