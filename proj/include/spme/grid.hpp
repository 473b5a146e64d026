#pragma once

#include <array>
#include <cstddef>

namespace spme {

/// Uniform cell-centered rectangular mesh in one or two dimensions.
/// Cell centers sit at origin + (i + 1/2) * spacing on each axis; the cell
/// volume is the product of the spacings.
class Grid {
public:
    Grid(int dim, std::array<int, 2> cells, std::array<double, 2> origin,
         std::array<double, 2> spacing);

    /// 1D mesh covering [lo, hi].
    static Grid line(int cells, double lo, double hi);
    /// 2D mesh covering [lo[0], hi[0]] x [lo[1], hi[1]].
    static Grid box(std::array<int, 2> cells, std::array<double, 2> lo,
                    std::array<double, 2> hi);

    int dim() const noexcept { return dim_; }
    int cells(int axis) const noexcept { return cells_[axis]; }
    std::size_t cell_count() const noexcept { return count_; }
    double origin(int axis) const noexcept { return origin_[axis]; }
    double spacing(int axis) const noexcept { return spacing_[axis]; }
    double min_spacing() const noexcept;
    double cell_volume() const noexcept;
    /// Upper domain corner on an axis.
    double extent_hi(int axis) const noexcept {
        return origin_[axis] + spacing_[axis] * cells_[axis];
    }

    double center(std::size_t index, int axis) const noexcept;
    std::array<double, 2> center(std::size_t index) const noexcept;

    std::size_t flatten(int ix, int iy = 0) const noexcept {
        return std::size_t(iy) * std::size_t(cells_[0]) + std::size_t(ix);
    }
    std::array<int, 2> unflatten(std::size_t index) const noexcept {
        const int nx = cells_[0];
        return {int(index % std::size_t(nx)), int(index / std::size_t(nx))};
    }

    double center_distance2(std::size_t a, std::size_t b) const noexcept;

    bool operator==(const Grid& other) const noexcept;

private:
    int dim_;
    std::array<int, 2> cells_;
    std::array<double, 2> origin_;
    std::array<double, 2> spacing_;
    std::size_t count_;
};

}  // namespace spme
