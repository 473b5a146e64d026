#include "spme/travelling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "spme/detail/numerics.hpp"
#include "spme/errors.hpp"
#include "spme/solver.hpp"

namespace spme {

using detail::ppow;
using detail::pow_real;

double speed_from_coeffs(std::span<const double> coeffs, double m) {
    if (!(m > 1.0)) throw ParameterError("travelling waves require m > 1");
    if (coeffs.empty()) throw ParameterError("at least one amplitude required");
    double sum2 = 0.0;
    for (double c : coeffs) {
        if (!(c > 0.0)) throw ParameterError("wave amplitudes must be positive");
        sum2 += c * c;
    }
    return pow_real(sum2, 0.5 * (m - 1.0)) / (m - 1.0);
}

TravellingWave::TravellingWave(int dim, std::array<double, 2> direction,
                               std::vector<double> coeffs, WaveOrientation orientation,
                               double m)
    : dim_(dim), e_(direction), coeffs_(std::move(coeffs)), orientation_(orientation),
      m_(m), speed_(speed_from_coeffs(coeffs_, m)) {
    if (dim != 1 && dim != 2) throw ParameterError("wave dimension must be 1 or 2");
    double norm2 = e_[0] * e_[0];
    if (dim == 2) norm2 += e_[1] * e_[1];
    else e_[1] = 0.0;
    if (std::abs(std::sqrt(norm2) - 1.0) > 1e-14)
        throw ParameterError("wave direction must be a unit vector");
}

TravellingWave TravellingWave::from_orientations(
    int dim, std::array<double, 2> direction, std::vector<double> coeffs,
    std::span<const WaveOrientation> orientations, double m) {
    if (orientations.size() != coeffs.size())
        throw ParameterError("one orientation per species required");
    for (WaveOrientation o : orientations)
        if (o != orientations.front())
            throw MixedOrientationError(
                "species of one wave cannot move in opposite orientations");
    return TravellingWave(dim, direction, std::move(coeffs), orientations.front(), m);
}

double TravellingWave::evaluate(int species, std::span<const double> x, double t) const {
    if (species < 0 || species >= species_count())
        throw ParameterError("species index out of range");
    double xe = x[0] * e_[0];
    if (dim_ == 2) xe += x[1] * e_[1];
    const double arg =
        orientation_ == WaveOrientation::LeftMoving ? speed_ * t - xe : speed_ * t + xe;
    return coeffs_[std::size_t(species)] * ppow(arg, 1.0 / (m_ - 1.0));
}

double TravellingWave::evaluate1d(int species, double x, double t) const {
    const double xs[1] = {x};
    return evaluate(species, std::span<const double>(xs, 1), t);
}

double TravellingWave::profile(int species, double s) const {
    if (species < 0 || species >= species_count())
        throw ParameterError("species index out of range");
    const double arg = orientation_ == WaveOrientation::LeftMoving ? -s : s;
    return coeffs_[std::size_t(species)] * ppow(arg, 1.0 / (m_ - 1.0));
}

SpeciesState TravellingWave::sample(const Grid& grid, double t) const {
    std::vector<std::vector<double>> fields(coeffs_.size());
    for (int s = 0; s < species_count(); ++s) {
        fields[s].resize(grid.cell_count());
        for (std::size_t j = 0; j < grid.cell_count(); ++j) {
            const auto c = grid.center(j);
            fields[s][j] = evaluate(s, std::span<const double>(c.data(), grid.dim()), t);
        }
    }
    return SpeciesState::create(grid, std::move(fields), t);
}

double ode_residual(const TravellingWave& wave, double m,
                    std::span<const double> s_samples, double h_s) {
    if (!(h_s > 0.0)) throw ParameterError("h_s must be positive");
    const int k = wave.species_count();
    // First integral of the profile ODE under the solver's flow. In solver
    // time the front moves at m * speed(), so the matching identity reads
    //   m |g|^{m-1} (g^i)' = -(m c_hat) g^i   (LeftMoving; mirrored otherwise).
    const double c_ode = m * wave.speed();
    const double sign = wave.orientation() == WaveOrientation::LeftMoving ? 1.0 : -1.0;
    double worst = 0.0;
    for (double s : s_samples) {
        if (std::abs(s) <= 5.0 * h_s) continue;  // derivative blows up at the front
        double norm2 = 0.0;
        for (int i = 0; i < k; ++i) norm2 += detail::sq(wave.profile(i, s));
        const double normpow = pow_real(std::sqrt(norm2), m - 1.0);
        for (int i = 0; i < k; ++i) {
            const double gp =
                (wave.profile(i, s + h_s) - wave.profile(i, s - h_s)) / (2.0 * h_s);
            const double g = wave.profile(i, s);
            worst = std::max(worst, std::abs(m * normpow * gp + sign * c_ode * g));
        }
    }
    return worst;
}

SpeciesState epsilon_scale(const SpeciesState& state, double epsilon, double m) {
    if (!(epsilon > 0.0)) throw ParameterError("epsilon must be positive");
    if (!(m > 1.0)) throw ParameterError("epsilon scaling requires m > 1");
    const Grid& g = state.grid;
    Grid scaled(g.dim(), {g.cells(0), g.dim() == 2 ? g.cells(1) : 1},
                {g.origin(0) * epsilon, g.origin(1) * epsilon},
                {g.spacing(0) * epsilon, g.dim() == 2 ? g.spacing(1) * epsilon : 1.0});
    const double amp = std::pow(epsilon, 1.0 / (m - 1.0));
    std::vector<std::vector<double>> fields = state.fields;
    for (auto& f : fields)
        for (double& v : f) v *= amp;
    return SpeciesState{std::move(scaled), state.time * epsilon, std::move(fields)};
}

std::vector<WaveErrorRow> dirichlet_tw_run(const TravellingWave& wave, double x_lo,
                                           double x_hi, double t0, double t_end,
                                           std::span<const double> hs) {
    if (wave.dim() != 1) throw ConfigurationError("Dirichlet wave runs are 1D");
    if (!(t_end > t0) || !(t0 >= 0.0))
        throw ConfigurationError("need 0 <= t0 < t_end");
    if (hs.empty()) throw ConfigurationError("at least one mesh width required");

    const double e = wave.direction()[0];
    const double sgn = wave.orientation() == WaveOrientation::LeftMoving ? 1.0 : -1.0;
    // x.e = sgn * speed * t at the front.
    const auto front = [&](double t) { return sgn * wave.speed() * t / e; };
    double h_coarsest = 0.0;
    for (double h : hs) h_coarsest = std::max(h_coarsest, h);
    const double margin = 4.0 * h_coarsest;
    for (double t : {t0, t_end})
        if (front(t) < x_lo + margin || front(t) > x_hi - margin)
            throw ConfigurationError("wave front leaves the domain during the run");

    const double m = wave.exponent_m();
    SolverConfig cfg;
    cfg.m = m;

    // The closed form solves the flow with coefficient |u|^{m-1}; under the
    // solver's coefficient m|u|^{m-1} the identical states appear at solver
    // time t/m, so the run covers [t0/m, t_end/m] with wave time m*sigma.
    DirichletBoundary bc{[&wave, m](int species, double x_face, double sigma) {
        return wave.evaluate1d(species, x_face, m * sigma);
    }};

    std::vector<WaveErrorRow> rows;
    for (double h : hs) {
        const int cells = std::max(4, int(std::lround((x_hi - x_lo) / h)));
        const Grid grid = Grid::line(cells, x_lo, x_hi);
        SpeciesState state = wave.sample(grid, t0);
        state.time = t0 / m;
        const double sigma_end = t_end / m;

        while (state.time < sigma_end) {
            // Boundary faces sit half a cell from the first centers, which
            // tightens the explicit bound; the face diffusivity can also
            // exceed the cell maximum, so fold it in.
            double dmax = diffusivity(state, cfg).max_value();
            for (double xf : {x_lo, x_hi}) {
                double norm2 = 0.0;
                for (int s = 0; s < wave.species_count(); ++s)
                    norm2 += detail::sq(bc.values(s, xf, state.time));
                dmax = std::max(dmax, m * pow_real(std::sqrt(norm2), m - 1.0));
            }
            const double bound = cfg.cfl_safety * grid.spacing(0) * grid.spacing(0) /
                                 (4.0 * dmax);
            const double dt = std::min(bound, sigma_end - state.time);
            if (state.time + dt == state.time)
                throw StagnationError("dt underflow in wave run");
            state = step_dirichlet(state, cfg, dt, bc);
        }

        WaveErrorRow row;
        row.h = grid.spacing(0);
        row.order_estimate = std::numeric_limits<double>::quiet_NaN();
        detail::KahanSum l1;
        double linf = 0.0;
        for (int s = 0; s < wave.species_count(); ++s) {
            detail::KahanSum l1s;
            for (std::size_t j = 0; j < grid.cell_count(); ++j) {
                const double exact = wave.evaluate1d(s, grid.center(j, 0), t_end);
                const double err = std::abs(state.fields[s][j] - exact);
                l1.add(err);
                l1s.add(err);
                linf = std::max(linf, err);
            }
            row.l1_species.push_back(l1s.value() * grid.cell_volume());
        }
        row.l1 = l1.value() * grid.cell_volume();
        row.linf = linf;
        if (!rows.empty())
            row.order_estimate = std::log2(rows.back().l1 / row.l1) /
                                 std::log2(rows.back().h / row.h);
        rows.push_back(row);
    }
    return rows;
}

void write_wave_errors_csv(const std::filesystem::path& path,
                           std::span<const WaveErrorRow> rows) {
    std::FILE* f = std::fopen(path.string().c_str(), "w");
    if (!f) throw ConfigurationError("cannot open " + path.string() + " for writing");
    std::fprintf(f, "h,L1,Linf,order_estimate\n");
    for (const auto& r : rows)
        std::fprintf(f, "%.17g,%.17g,%.17g,%.17g\n", r.h, r.l1, r.linf, r.order_estimate);
    std::fclose(f);
}

}  // namespace spme
