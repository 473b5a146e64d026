#include "spme/solver.hpp"

#include <algorithm>
#include <cmath>

#include "spme/detail/numerics.hpp"
#include "spme/errors.hpp"

namespace spme {

using detail::ppow;
using detail::sq;

namespace {

void compute_norm(const std::vector<std::vector<double>>& fields,
                  std::vector<double>& norm) {
    const std::size_t n = fields[0].size();
    if (fields.size() == 1) {
        norm.assign(fields[0].begin(), fields[0].end());
        return;
    }
    norm.assign(n, 0.0);
    for (const auto& f : fields)
        for (std::size_t j = 0; j < n; ++j) norm[j] += f[j] * f[j];
    for (std::size_t j = 0; j < n; ++j) norm[j] = std::sqrt(norm[j]);
}

void compute_diffusivity(const std::vector<double>& norm, const SolverConfig& cfg,
                         std::vector<double>& diff) {
    const std::size_t n = norm.size();
    const double expo = cfg.m - 1.0;
    diff.resize(n);
    for (std::size_t j = 0; j < n; ++j)
        diff[j] = cfg.m * (detail::pow_real(norm[j], expo) + cfg.epsilon);
}

struct StepScratch {
    std::vector<double> norm;
    std::vector<double> diff;
    std::vector<std::vector<double>> next;
    double clamped = 0.0;  // accumulated |negative| mass clamped away, unweighted
};

// One explicit update of `fields` into scratch.next. Flux differencing keeps
// per-species mass telescoping exactly; every species sees the same face
// diffusivities. Returns false if a non-finite value appeared.
bool advance(const std::vector<std::vector<double>>& fields, const Grid& grid,
             const SolverConfig& cfg, double dt, const DirichletBoundary* bc,
             double t_now, StepScratch& ws) {
    compute_norm(fields, ws.norm);
    compute_diffusivity(ws.norm, cfg, ws.diff);

    const int nx = grid.cells(0);
    const int ny = grid.dim() == 2 ? grid.cells(1) : 1;
    const double hx = grid.spacing(0);
    const double hy = grid.spacing(1);
    const std::size_t n = fields[0].size();
    const int k = int(fields.size());

    if (ws.next.size() != fields.size()) ws.next.assign(fields.size(), {});
    for (int s = 0; s < k; ++s) ws.next[s] = fields[s];

    for (int s = 0; s < k; ++s) {
        const std::vector<double>& u = fields[s];
        std::vector<double>& v = ws.next[s];
        const double rx = dt / hx;
        for (int iy = 0; iy < ny; ++iy) {
            const std::size_t row = std::size_t(iy) * nx;
            for (int f = 1; f < nx; ++f) {
                const std::size_t j = row + f;
                const double dface = 0.5 * (ws.diff[j - 1] + ws.diff[j]);
                const double flux = dface * (u[j] - u[j - 1]) / hx;
                v[j - 1] += rx * flux;
                v[j] -= rx * flux;
            }
            if (bc) {
                // Dirichlet value imposed at the boundary face, half a cell
                // from the first center; diffusivity from the exact face data.
                const double t_left = grid.origin(0);
                const double t_right = grid.extent_hi(0);
                double norm2_l = 0.0, norm2_r = 0.0;
                for (int ss = 0; ss < k; ++ss) {
                    norm2_l += sq(bc->values(ss, t_left, t_now));
                    norm2_r += sq(bc->values(ss, t_right, t_now));
                }
                const double dl = cfg.m * (detail::pow_real(std::sqrt(norm2_l), cfg.m - 1.0) + cfg.epsilon);
                const double dr = cfg.m * (detail::pow_real(std::sqrt(norm2_r), cfg.m - 1.0) + cfg.epsilon);
                const double gl = bc->values(s, t_left, t_now);
                const double gr = bc->values(s, t_right, t_now);
                const double flux_l = dl * (u[row] - gl) / (0.5 * hx);
                const double flux_r = dr * (gr - u[row + nx - 1]) / (0.5 * hx);
                v[row] -= rx * flux_l;
                v[row + nx - 1] += rx * flux_r;
            }
        }
        if (ny > 1) {
            const double ry = dt / hy;
            for (int iy = 1; iy < ny; ++iy) {
                const std::size_t lo = std::size_t(iy - 1) * nx;
                const std::size_t hi = std::size_t(iy) * nx;
                for (int ix = 0; ix < nx; ++ix) {
                    const double dface = 0.5 * (ws.diff[lo + ix] + ws.diff[hi + ix]);
                    const double flux = dface * (u[hi + ix] - u[lo + ix]) / hy;
                    v[lo + ix] += ry * flux;
                    v[hi + ix] -= ry * flux;
                }
            }
        }
    }

    for (int s = 0; s < k; ++s) {
        std::vector<double>& v = ws.next[s];
        double sum = 0.0;
        if (cfg.clamp_negative) {
            for (std::size_t j = 0; j < n; ++j) {
                if (v[j] < 0.0) {
                    ws.clamped -= v[j];
                    v[j] = 0.0;
                }
                sum += v[j];
            }
        } else {
            for (std::size_t j = 0; j < n; ++j) sum += v[j];
        }
        if (!std::isfinite(sum)) return false;
    }
    return true;
}

double max_value(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, x);
    return m;
}

// Zero-flux discrete Laplacian of a scalar array.
void laplacian(const std::vector<double>& f, const Grid& grid, std::vector<double>& out) {
    const int nx = grid.cells(0);
    const int ny = grid.dim() == 2 ? grid.cells(1) : 1;
    const double ihx2 = 1.0 / sq(grid.spacing(0));
    const double ihy2 = 1.0 / sq(grid.spacing(1));
    out.assign(f.size(), 0.0);
    for (int iy = 0; iy < ny; ++iy) {
        const std::size_t row = std::size_t(iy) * nx;
        for (int ix = 0; ix < nx; ++ix) {
            const std::size_t j = row + ix;
            double acc = 0.0;
            if (ix > 0) acc += (f[j - 1] - f[j]) * ihx2;
            if (ix < nx - 1) acc += (f[j + 1] - f[j]) * ihx2;
            if (ny > 1) {
                if (iy > 0) acc += (f[j - nx] - f[j]) * ihy2;
                if (iy < ny - 1) acc += (f[j + nx] - f[j]) * ihy2;
            }
            out[j] = acc;
        }
    }
}

// min over interior faces of sum_i (grad u^i)^2 - (grad |u|)^2.
double cauchy_schwarz_slack(const std::vector<std::vector<double>>& fields,
                            const std::vector<double>& norm, const Grid& grid) {
    const int nx = grid.cells(0);
    const int ny = grid.dim() == 2 ? grid.cells(1) : 1;
    double slack = std::numeric_limits<double>::infinity();
    auto face = [&](std::size_t a, std::size_t b, double ih) {
        double grads2 = 0.0;
        for (const auto& f : fields) grads2 += sq((f[b] - f[a]) * ih);
        slack = std::min(slack, grads2 - sq((norm[b] - norm[a]) * ih));
    };
    const double ihx = 1.0 / grid.spacing(0);
    const double ihy = 1.0 / grid.spacing(1);
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 1; ix < nx; ++ix)
            face(grid.flatten(ix - 1, iy), grid.flatten(ix, iy), ihx);
    for (int iy = 1; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix)
            face(grid.flatten(ix, iy - 1), grid.flatten(ix, iy), ihy);
    return slack;
}

bool is_boundary_of_set(const Grid& grid, const CellSet& set, std::uint32_t cell) {
    const auto in = [&](int ix, int iy) {
        return std::binary_search(set.begin(), set.end(),
                                  std::uint32_t(grid.flatten(ix, iy)));
    };
    const auto ij = grid.unflatten(cell);
    const int nx = grid.cells(0);
    const int ny = grid.dim() == 2 ? grid.cells(1) : 1;
    if (ij[0] == 0 || ij[0] == nx - 1) return true;
    if (!in(ij[0] - 1, ij[1]) || !in(ij[0] + 1, ij[1])) return true;
    if (grid.dim() == 2) {
        if (ij[1] == 0 || ij[1] == ny - 1) return true;
        if (!in(ij[0], ij[1] - 1) || !in(ij[0], ij[1] + 1)) return true;
    }
    return false;
}

bool near_domain_boundary(const Grid& grid, const CellSet& set) {
    const int nx = grid.cells(0);
    const int ny = grid.dim() == 2 ? grid.cells(1) : 1;
    for (std::uint32_t c : set) {
        const auto ij = grid.unflatten(c);
        if (ij[0] < 2 || ij[0] > nx - 3) return true;
        if (grid.dim() == 2 && (ij[1] < 2 || ij[1] > ny - 3)) return true;
    }
    return false;
}

}  // namespace

ScalarField diffusivity(const SpeciesState& state, const SolverConfig& cfg) {
    std::vector<double> norm, diff;
    compute_norm(state.fields, norm);
    compute_diffusivity(norm, cfg, diff);
    return ScalarField{state.grid, std::move(diff)};
}

double stable_dt(const SpeciesState& state, const SolverConfig& cfg) {
    std::vector<double> norm, diff;
    compute_norm(state.fields, norm);
    compute_diffusivity(norm, cfg, diff);
    const double dmax = max_value(diff);
    if (dmax <= 0.0) return cfg.max_dt;
    const double h = state.grid.min_spacing();
    return cfg.cfl_safety * h * h / (2.0 * state.grid.dim() * dmax);
}

SpeciesState step(const SpeciesState& state, const SolverConfig& cfg, double dt) {
    if (!(dt > 0.0)) throw ParameterError("dt must be positive");
    StepScratch ws;
    if (!advance(state.fields, state.grid, cfg, dt, nullptr, state.time, ws))
        throw NumericalBlowupError("non-finite value in explicit update", 0);
    return SpeciesState{state.grid, state.time + dt, std::move(ws.next)};
}

SpeciesState step_dirichlet(const SpeciesState& state, const SolverConfig& cfg,
                            double dt, const DirichletBoundary& boundary) {
    if (state.grid.dim() != 1)
        throw ConfigurationError("Dirichlet stepping is 1D only");
    if (!(dt > 0.0)) throw ParameterError("dt must be positive");
    StepScratch ws;
    if (!advance(state.fields, state.grid, cfg, dt, &boundary, state.time, ws))
        throw NumericalBlowupError("non-finite value in explicit update", 0);
    return SpeciesState{state.grid, state.time + dt, std::move(ws.next)};
}

RunResult run(const SpeciesState& initial, const SolverConfig& cfg,
              const RunOptions& options, std::span<const Observer> observers) {
    if (options.t_end < initial.time)
        throw ParameterError("t_end must not precede the state time");
    if (options.sample_stride == 0) throw ParameterError("sample stride must be >= 1");

    RunResult result{initial, {}};
    if (options.t_end == initial.time) return result;

    SpeciesState& state = result.final_state;
    if (cfg.cap) {
        for (auto& f : state.fields)
            for (double& v : f) v = std::min(v, *cfg.cap);
    }

    DiagnosticsReport& report = result.report;
    const int k = state.species_count();
    std::vector<double> mass0(k);
    detail::KahanSum mass0_total;
    for (int s = 0; s < k; ++s) {
        mass0[s] = mass(state, s);
        mass0_total.add(mass0[s]);
    }

    StepScratch ws;
    std::vector<double> norm_before, lap_m, norm_now;

    auto make_record = [&](std::size_t step_index, double dt_used,
                           const std::vector<double>* subsol_norm_before) {
        SampleRecord rec;
        rec.time = state.time;
        rec.step = step_index;
        rec.dt = dt_used;
        rec.masses.resize(k);
        for (int s = 0; s < k; ++s) rec.masses[s] = mass(state, s);

        compute_norm(state.fields, norm_now);
        ScalarField norm_f{state.grid, norm_now};
        rec.max_norm = norm_f.max_value();
        rec.support_threshold = options.support_threshold >= 0.0
                                    ? options.support_threshold
                                    : default_support_threshold(norm_f);
        rec.norm_support.cells = support(norm_f, rec.support_threshold);
        rec.norm_support.cell_count = rec.norm_support.cells.size();
        rec.supports.resize(k);
        for (int s = 0; s < k; ++s) {
            ScalarField sf{state.grid, state.fields[s]};
            const double thr = options.support_threshold >= 0.0
                                   ? options.support_threshold
                                   : default_support_threshold(sf);
            rec.supports[s].cells = support(sf, thr);
            rec.supports[s].cell_count = rec.supports[s].cells.size();
        }
        for (int i = 0; i < k; ++i)
            for (int j = i + 1; j < k; ++j)
                rec.pair_support_distance.push_back(support_distance(
                    rec.supports[i].cells, rec.supports[j].cells, state.grid));

        if (options.record_face_checks) {
            rec.cs_min_slack = cauchy_schwarz_slack(state.fields, norm_now, state.grid);
            // A vanishing closing step would put rounding noise over dt;
            // skip the rate check there.
            if (subsol_norm_before && dt_used > 1e-8) {
                const auto& nb = *subsol_norm_before;
                std::vector<double> powm(nb.size());
                for (std::size_t j = 0; j < nb.size(); ++j)
                    powm[j] = detail::pow_real(nb[j], cfg.m);
                laplacian(powm, state.grid, lap_m);
                ScalarField before_f{state.grid, nb};
                const double thr = default_support_threshold(before_f);
                double worst = -std::numeric_limits<double>::infinity();
                for (std::size_t j = 0; j < nb.size(); ++j)
                    if (nb[j] > thr)
                        worst = std::max(worst,
                                         (norm_now[j] - nb[j]) / dt_used - lap_m[j]);
                rec.subsolution_max = worst;
            }
        }

        // Bookkeeping against the first sample.
        for (int s = 0; s < k; ++s)
            if (mass0[s] > 0.0)
                report.mass_drift_max = std::max(
                    report.mass_drift_max, std::abs(rec.masses[s] / mass0[s] - 1.0));
        if (cfg.cap) report.cap_exceed = std::max(report.cap_exceed, rec.max_norm - *cfg.cap);
        if (!report.samples.empty()) {
            const CellSet& prev = report.samples.back().norm_support.cells;
            const CellSet& cur = rec.norm_support.cells;
            CellSet lost;
            std::set_difference(prev.begin(), prev.end(), cur.begin(), cur.end(),
                                std::back_inserter(lost));
            bool bad = lost.size() > std::size_t(state.grid.dim());
            for (std::uint32_t c : lost)
                if (!is_boundary_of_set(state.grid, prev, c)) bad = true;
            if (bad) ++report.support_monotonicity_violations;
        }
        if (near_domain_boundary(state.grid, rec.norm_support.cells))
            report.boundary_touched = true;

        if (!options.record_support_sets) {
            rec.norm_support.cells.clear();
            for (auto& s : rec.supports) s.cells.clear();
        }
        for (const Observer& obs : observers) obs(state, rec);
        report.samples.push_back(std::move(rec));
    };

    make_record(0, 0.0, nullptr);

    std::size_t step_index = 0;
    double t = state.time;
    while (t < options.t_end) {
        if (options.max_steps && step_index >= options.max_steps) break;
        const double dts = stable_dt(state, cfg);
        const double remaining = options.t_end - t;
        const bool final_step = dts >= remaining;
        const double dt = final_step ? remaining : dts;
        if (t + dt == t) throw StagnationError("time step underflow at t = " + std::to_string(t));
        if (dt > dts * (1.0 + 1e-12)) ++report.cfl_violations;

        const bool sampled = ((step_index + 1) % options.sample_stride == 0) ||
                             final_step ||
                             (options.max_steps && step_index + 1 >= options.max_steps);
        const bool want_subsol = sampled && options.record_face_checks;
        if (want_subsol) compute_norm(state.fields, norm_before);

        if (!advance(state.fields, state.grid, cfg, dt, nullptr, t, ws))
            throw NumericalBlowupError("non-finite value in explicit update",
                                       step_index + 1);
        state.fields.swap(ws.next);
        ++step_index;
        t = final_step ? options.t_end : t + dt;
        state.time = t;

        if (sampled) make_record(step_index, dt, want_subsol ? &norm_before : nullptr);
    }

    report.total_steps = step_index;
    if (mass0_total.value() > 0.0)
        report.clamp_mass_relative =
            ws.clamped * state.grid.cell_volume() / mass0_total.value();
    return result;
}

}  // namespace spme
