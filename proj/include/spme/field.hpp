#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "spme/grid.hpp"

namespace spme {

/// Sorted flat cell indices; the discrete stand-in for a support set.
using CellSet = std::vector<std::uint32_t>;

/// One scalar quantity as cell averages on a grid (|u|, w = |u|^2, ...).
struct ScalarField {
    Grid grid;
    std::vector<double> values;

    /// Validating constructor path: values must be finite.
    static ScalarField create(Grid grid, std::vector<double> values);

    double max_value() const noexcept;
};

/// Nonnegative densities of k species sharing one grid and one time stamp.
struct SpeciesState {
    Grid grid;
    double time = 0.0;
    std::vector<std::vector<double>> fields;

    /// Validating constructor path: every value finite and >= 0, all fields
    /// sized to the grid, time >= 0.
    static SpeciesState create(Grid grid, std::vector<std::vector<double>> fields,
                               double time);

    int species_count() const noexcept { return int(fields.size()); }
    std::size_t cells() const noexcept { return grid.cell_count(); }
};

/// Pointwise Euclidean norm across species.
ScalarField norm_field(const SpeciesState& state);

/// Cell-volume-weighted (midpoint) integral of species i. Compensated
/// summation in a fixed traversal order keeps the result reproducible.
double mass(const SpeciesState& state, int species);

/// Integral of a scalar field.
double field_mass(const ScalarField& field);

/// Default discrete support floor: exact supports need a threshold a bit
/// above rounding noise.
double default_support_threshold(const ScalarField& field) noexcept;

/// Cells with value strictly above the threshold.
CellSet support(const ScalarField& field, double threshold);

/// Minimum center-to-center distance between two cell sets on one grid;
/// +infinity when either set is empty, 0 when they intersect.
double support_distance(const CellSet& a, const CellSet& b, const Grid& grid);

/// Multilinear interpolation of cell averages at a point; 0 outside the
/// domain of cell centers is never needed here, the point must lie within
/// the outermost cell centers.
double interpolate(const Grid& grid, std::span<const double> values,
                   std::array<double, 2> point);

/// CSV checkpoint of a state: one commented header line with the grid and
/// time, then one row per cell.
void write_state_csv(const std::filesystem::path& path, const SpeciesState& state);
SpeciesState read_state_csv(const std::filesystem::path& path);

}  // namespace spme
