#include "spme/field.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>

#include "spme/detail/numerics.hpp"
#include "spme/errors.hpp"

namespace spme {

ScalarField ScalarField::create(Grid grid, std::vector<double> values) {
    if (values.size() != grid.cell_count())
        throw ParameterError("field size does not match grid");
    for (double v : values)
        if (!std::isfinite(v)) throw ParameterError("field contains non-finite value");
    return ScalarField{std::move(grid), std::move(values)};
}

double ScalarField::max_value() const noexcept {
    double m = 0.0;
    for (double v : values) m = std::max(m, v);
    return m;
}

SpeciesState SpeciesState::create(Grid grid, std::vector<std::vector<double>> fields,
                                  double time) {
    if (fields.empty()) throw ParameterError("state needs at least one species");
    if (!(time >= 0.0) || !std::isfinite(time))
        throw ParameterError("state time must be finite and >= 0");
    for (const auto& f : fields) {
        if (f.size() != grid.cell_count())
            throw ParameterError("species field size does not match grid");
        for (double v : f) {
            if (!std::isfinite(v)) throw ParameterError("species field has non-finite value");
            if (v < 0.0) throw ParameterError("species field has negative value");
        }
    }
    return SpeciesState{std::move(grid), time, std::move(fields)};
}

ScalarField norm_field(const SpeciesState& state) {
    const std::size_t n = state.cells();
    std::vector<double> out(n, 0.0);
    if (state.fields.size() == 1) {
        out = state.fields[0];
    } else {
        for (const auto& f : state.fields)
            for (std::size_t j = 0; j < n; ++j) out[j] += f[j] * f[j];
        for (std::size_t j = 0; j < n; ++j) out[j] = std::sqrt(out[j]);
    }
    return ScalarField{state.grid, std::move(out)};
}

double mass(const SpeciesState& state, int species) {
    if (species < 0 || species >= state.species_count())
        throw ParameterError("species index out of range");
    detail::KahanSum sum;
    for (double v : state.fields[species]) sum.add(v);
    return sum.value() * state.grid.cell_volume();
}

double field_mass(const ScalarField& field) {
    detail::KahanSum sum;
    for (double v : field.values) sum.add(v);
    return sum.value() * field.grid.cell_volume();
}

double default_support_threshold(const ScalarField& field) noexcept {
    return std::max(1e-10, 1e-8 * field.max_value());
}

CellSet support(const ScalarField& field, double threshold) {
    if (threshold < 0.0) throw ParameterError("support threshold must be >= 0");
    CellSet cells;
    for (std::size_t j = 0; j < field.values.size(); ++j)
        if (field.values[j] > threshold) cells.push_back(std::uint32_t(j));
    return cells;
}

double support_distance(const CellSet& a, const CellSet& b, const Grid& grid) {
    if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
    // Both sets are sorted by construction; shared cells mean distance 0.
    {
        auto ia = a.begin();
        auto ib = b.begin();
        while (ia != a.end() && ib != b.end()) {
            if (*ia == *ib) return 0.0;
            (*ia < *ib) ? ++ia : ++ib;
        }
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::uint32_t ca : a)
        for (std::uint32_t cb : b)
            best = std::min(best, grid.center_distance2(ca, cb));
    return std::sqrt(best);
}

double interpolate(const Grid& grid, std::span<const double> values,
                   std::array<double, 2> point) {
    // Index of the cell whose center lies at or below the point, per axis.
    int lo[2] = {0, 0};
    double w[2] = {0.0, 0.0};
    for (int ax = 0; ax < grid.dim(); ++ax) {
        const double s = (point[ax] - grid.origin(ax)) / grid.spacing(ax) - 0.5;
        int i = int(std::floor(s));
        double frac = s - i;
        if (i < 0) {
            i = 0;
            frac = 0.0;
        }
        if (i >= grid.cells(ax) - 1) {
            i = grid.cells(ax) - 2;
            frac = 1.0;
        }
        lo[ax] = i;
        w[ax] = frac;
    }
    if (grid.dim() == 1) {
        const double v0 = values[grid.flatten(lo[0])];
        const double v1 = values[grid.flatten(lo[0] + 1)];
        return v0 * (1.0 - w[0]) + v1 * w[0];
    }
    const double v00 = values[grid.flatten(lo[0], lo[1])];
    const double v10 = values[grid.flatten(lo[0] + 1, lo[1])];
    const double v01 = values[grid.flatten(lo[0], lo[1] + 1)];
    const double v11 = values[grid.flatten(lo[0] + 1, lo[1] + 1)];
    return (v00 * (1.0 - w[0]) + v10 * w[0]) * (1.0 - w[1]) +
           (v01 * (1.0 - w[0]) + v11 * w[0]) * w[1];
}

void write_state_csv(const std::filesystem::path& path, const SpeciesState& state) {
    std::FILE* f = std::fopen(path.string().c_str(), "w");
    if (!f) throw ConfigurationError("cannot open " + path.string() + " for writing");
    const Grid& g = state.grid;
    if (g.dim() == 1)
        std::fprintf(f, "# grid dim=1 cells=%d origin=%.17g spacing=%.17g time=%.17g\n",
                     g.cells(0), g.origin(0), g.spacing(0), state.time);
    else
        std::fprintf(f,
                     "# grid dim=2 cells=%d,%d origin=%.17g,%.17g spacing=%.17g,%.17g "
                     "time=%.17g\n",
                     g.cells(0), g.cells(1), g.origin(0), g.origin(1), g.spacing(0),
                     g.spacing(1), state.time);
    for (std::size_t j = 0; j < state.cells(); ++j) {
        const auto ij = g.unflatten(j);
        if (g.dim() == 1)
            std::fprintf(f, "%d", ij[0]);
        else
            std::fprintf(f, "%d,%d", ij[0], ij[1]);
        for (const auto& field : state.fields) std::fprintf(f, ",%.17g", field[j]);
        std::fputc('\n', f);
    }
    std::fclose(f);
}

namespace {

// Parses "key=v0[,v1]" tokens out of the checkpoint header line.
bool header_values(const std::string& header, const std::string& key, double out[2],
                   int* count) {
    const auto pos = header.find(key + "=");
    if (pos == std::string::npos) return false;
    std::string rest = header.substr(pos + key.size() + 1);
    const auto end = rest.find(' ');
    if (end != std::string::npos) rest = rest.substr(0, end);
    std::stringstream ss(rest);
    std::string tok;
    *count = 0;
    while (std::getline(ss, tok, ',') && *count < 2) out[(*count)++] = std::stod(tok);
    return *count > 0;
}

}  // namespace

SpeciesState read_state_csv(const std::filesystem::path& path) {
    std::FILE* f = std::fopen(path.string().c_str(), "r");
    if (!f) throw ConfigurationError("cannot open " + path.string());
    char line[4096];
    if (!std::fgets(line, sizeof line, f)) {
        std::fclose(f);
        throw ConfigurationError("empty checkpoint " + path.string());
    }
    std::string header(line);
    double dim[2], cells[2], origin[2], spacing[2], time[2];
    int nd, nc, no, ns, nt;
    if (!header_values(header, "dim", dim, &nd) ||
        !header_values(header, "cells", cells, &nc) ||
        !header_values(header, "origin", origin, &no) ||
        !header_values(header, "spacing", spacing, &ns) ||
        !header_values(header, "time", time, &nt)) {
        std::fclose(f);
        throw ConfigurationError("malformed checkpoint header in " + path.string());
    }
    const int d = int(dim[0]);
    Grid grid(d, {int(cells[0]), d == 2 ? int(cells[1]) : 1}, {origin[0], origin[1]},
              {spacing[0], spacing[1]});

    std::vector<std::vector<double>> fields;
    std::size_t row = 0;
    while (std::fgets(line, sizeof line, f)) {
        std::stringstream ss(line);
        std::string tok;
        std::vector<double> cols;
        while (std::getline(ss, tok, ',')) cols.push_back(std::stod(tok));
        const std::size_t index_cols = (d == 1) ? 1 : 2;
        if (cols.size() <= index_cols) continue;
        const std::size_t k = cols.size() - index_cols;
        if (fields.empty()) fields.assign(k, std::vector<double>(grid.cell_count(), 0.0));
        std::size_t j = (d == 1) ? grid.flatten(int(cols[0]))
                                 : grid.flatten(int(cols[0]), int(cols[1]));
        for (std::size_t i = 0; i < k; ++i) fields[i][j] = cols[index_cols + i];
        ++row;
    }
    std::fclose(f);
    if (row != grid.cell_count())
        throw ConfigurationError("checkpoint row count does not match grid in " +
                                 path.string());
    return SpeciesState::create(std::move(grid), std::move(fields), time[0]);
}

}  // namespace spme
