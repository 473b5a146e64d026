#include "spme/grid.hpp"

#include <cmath>

#include "spme/errors.hpp"

namespace spme {

Grid::Grid(int dim, std::array<int, 2> cells, std::array<double, 2> origin,
           std::array<double, 2> spacing)
    : dim_(dim), cells_(cells), origin_(origin), spacing_(spacing) {
    if (dim != 1 && dim != 2) throw ParameterError("grid dimension must be 1 or 2");
    if (dim == 1) {
        cells_[1] = 1;
        origin_[1] = 0.0;
        spacing_[1] = 1.0;
    }
    for (int a = 0; a < dim_; ++a) {
        if (cells_[a] < 4) throw ParameterError("grid needs at least 4 cells per axis");
        if (!(spacing_[a] > 0.0) || !std::isfinite(spacing_[a]))
            throw ParameterError("grid spacing must be positive and finite");
        if (!std::isfinite(origin_[a])) throw ParameterError("grid origin must be finite");
    }
    count_ = std::size_t(cells_[0]) * std::size_t(cells_[1]);
}

Grid Grid::line(int cells, double lo, double hi) {
    if (!(hi > lo)) throw ParameterError("grid interval must have positive length");
    return Grid(1, {cells, 1}, {lo, 0.0}, {(hi - lo) / cells, 1.0});
}

Grid Grid::box(std::array<int, 2> cells, std::array<double, 2> lo,
               std::array<double, 2> hi) {
    for (int a = 0; a < 2; ++a)
        if (!(hi[a] > lo[a])) throw ParameterError("grid box must have positive extent");
    return Grid(2, cells, lo,
                {(hi[0] - lo[0]) / cells[0], (hi[1] - lo[1]) / cells[1]});
}

double Grid::min_spacing() const noexcept {
    return dim_ == 1 ? spacing_[0] : std::min(spacing_[0], spacing_[1]);
}

double Grid::cell_volume() const noexcept {
    return dim_ == 1 ? spacing_[0] : spacing_[0] * spacing_[1];
}

double Grid::center(std::size_t index, int axis) const noexcept {
    const auto ij = unflatten(index);
    return origin_[axis] + (ij[axis] + 0.5) * spacing_[axis];
}

std::array<double, 2> Grid::center(std::size_t index) const noexcept {
    const auto ij = unflatten(index);
    return {origin_[0] + (ij[0] + 0.5) * spacing_[0],
            origin_[1] + (ij[1] + 0.5) * spacing_[1]};
}

double Grid::center_distance2(std::size_t a, std::size_t b) const noexcept {
    const auto pa = unflatten(a);
    const auto pb = unflatten(b);
    double d2 = 0.0;
    for (int ax = 0; ax < dim_; ++ax) {
        const double d = (pa[ax] - pb[ax]) * spacing_[ax];
        d2 += d * d;
    }
    return d2;
}

bool Grid::operator==(const Grid& other) const noexcept {
    if (dim_ != other.dim_) return false;
    for (int a = 0; a < dim_; ++a) {
        if (cells_[a] != other.cells_[a]) return false;
        if (origin_[a] != other.origin_[a]) return false;
        if (spacing_[a] != other.spacing_[a]) return false;
    }
    return true;
}

}  // namespace spme
