#include "spme/selfsim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "spme/barenblatt.hpp"
#include "spme/detail/numerics.hpp"
#include "spme/errors.hpp"

namespace spme {

using detail::pow_real;
using detail::sq;

RescaledState RescaledState::create(Grid grid, std::vector<std::vector<double>> theta,
                                    double tau) {
    if (theta.empty()) throw ParameterError("rescaled state needs at least one species");
    if (!std::isfinite(tau)) throw ParameterError("tau must be finite");
    for (const auto& f : theta) {
        if (f.size() != grid.cell_count())
            throw ParameterError("theta field size does not match grid");
        for (double v : f) {
            if (!std::isfinite(v)) throw ParameterError("theta has non-finite value");
            if (v < 0.0) throw ParameterError("theta has negative value");
        }
    }
    return RescaledState{std::move(grid), tau, std::move(theta)};
}

RescaledState to_selfsimilar(const SpeciesState& state, double m) {
    if (!(state.time > 0.0))
        throw DomainError("similarity variables require a positive time");
    const auto coef = coefficients(m, state.grid.dim());
    const double t = state.time;
    const double scale_x = std::pow(t, -coef.a2);
    const double scale_u = std::pow(t, coef.a1);

    Grid eta_grid(state.grid.dim(),
                  {state.grid.cells(0), state.grid.dim() == 2 ? state.grid.cells(1) : 1},
                  {state.grid.origin(0) * scale_x, state.grid.origin(1) * scale_x},
                  {state.grid.spacing(0) * scale_x,
                   state.grid.dim() == 2 ? state.grid.spacing(1) * scale_x : 1.0});

    std::vector<std::vector<double>> theta = state.fields;
    for (auto& f : theta)
        for (double& v : f) v *= scale_u;
    return RescaledState{std::move(eta_grid), std::log(t), std::move(theta)};
}

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

double max_abs_eta(const Grid& grid) {
    double m = 0.0;
    for (int a = 0; a < grid.dim(); ++a)
        m = std::max(m, std::max(std::abs(grid.origin(a)),
                                 std::abs(grid.extent_hi(a))));
    return m;
}

}  // namespace

double stable_dtau(const RescaledState& state, double m, double safety) {
    const auto coef = coefficients(m, state.grid.dim());
    std::vector<double> norm;
    compute_norm(state.theta, norm);
    double dmax = 0.0;
    for (double v : norm) dmax = std::max(dmax, m * pow_real(v, m - 1.0));
    const double h = state.grid.min_spacing();
    const double diff_bound =
        dmax > 0.0 ? h * h / (2.0 * state.grid.dim() * dmax)
                   : std::numeric_limits<double>::infinity();
    const double drift_bound = h / (coef.a2 * max_abs_eta(state.grid));
    const double bound = std::min(diff_bound, drift_bound);
    if (!std::isfinite(bound)) return safety * drift_bound;
    return safety * bound;
}

RescaledState step_theta(const RescaledState& state, double m, double dtau) {
    if (!(dtau > 0.0)) throw ParameterError("dtau must be positive");
    const auto coef = coefficients(m, state.grid.dim());
    const Grid& grid = state.grid;
    const int nx = grid.cells(0);
    const int ny = grid.dim() == 2 ? grid.cells(1) : 1;
    const double hx = grid.spacing(0);
    const double hy = grid.spacing(1);
    const int k = state.species_count();

    std::vector<double> norm, diff;
    compute_norm(state.theta, norm);
    diff.resize(norm.size());
    for (std::size_t j = 0; j < norm.size(); ++j)
        diff[j] = m * pow_real(norm[j], m - 1.0);

    std::vector<std::vector<double>> next = state.theta;

    for (int s = 0; s < k; ++s) {
        const std::vector<double>& u = state.theta[s];
        std::vector<double>& v = next[s];
        const double rx = dtau / hx;
        for (int iy = 0; iy < ny; ++iy) {
            const std::size_t row = std::size_t(iy) * nx;
            for (int f = 1; f < nx; ++f) {
                const std::size_t j = row + f;
                const double eta_f = grid.origin(0) + f * hx;
                const double dface = 0.5 * (diff[j - 1] + diff[j]);
                // Donor cell for the drift flux a2*eta*theta is the cell eta
                // points at; inward transport stays positivity-preserving.
                const double up = eta_f > 0.0 ? u[j] : u[j - 1];
                const double flux = dface * (u[j] - u[j - 1]) / hx +
                                    coef.a2 * eta_f * up;
                v[j - 1] += rx * flux;
                v[j] -= rx * flux;
            }
        }
        if (ny > 1) {
            const double ry = dtau / hy;
            for (int iy = 1; iy < ny; ++iy) {
                const double eta_f = grid.origin(1) + iy * hy;
                const std::size_t lo = std::size_t(iy - 1) * nx;
                const std::size_t hi = std::size_t(iy) * nx;
                for (int ix = 0; ix < nx; ++ix) {
                    const double dface = 0.5 * (diff[lo + ix] + diff[hi + ix]);
                    const double up = eta_f > 0.0 ? u[hi + ix] : u[lo + ix];
                    const double flux = dface * (u[hi + ix] - u[lo + ix]) / hy +
                                        coef.a2 * eta_f * up;
                    v[lo + ix] += ry * flux;
                    v[hi + ix] -= ry * flux;
                }
            }
        }
    }

    for (auto& f : next) {
        double sum = 0.0;
        for (double& x : f) {
            if (x < 0.0) x = 0.0;
            sum += x;
        }
        if (!std::isfinite(sum))
            throw NumericalBlowupError("non-finite value in rescaled update", 0);
    }
    return RescaledState{grid, state.tau + dtau, std::move(next)};
}

namespace {

// Centered gradient of a scalar array, one-sided at domain edges.
void gradient(const std::vector<double>& f, const Grid& grid, int axis,
              std::vector<double>& out) {
    const int nx = grid.cells(0);
    const int ny = grid.dim() == 2 ? grid.cells(1) : 1;
    const double h = grid.spacing(axis);
    out.resize(f.size());
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            const std::size_t j = grid.flatten(ix, iy);
            const int i = axis == 0 ? ix : iy;
            const int n = axis == 0 ? nx : ny;
            const std::size_t stride = axis == 0 ? 1 : std::size_t(nx);
            double g;
            if (i == 0)
                g = (f[j + stride] - f[j]) / h;
            else if (i == n - 1)
                g = (f[j] - f[j - stride]) / h;
            else
                g = (f[j + stride] - f[j - stride]) / (2.0 * h);
            out[j] = g;
        }
    }
}

}  // namespace

EntropyRecord entropy(const RescaledState& state, double m) {
    const auto coef = coefficients(m, state.grid.dim());
    const Grid& grid = state.grid;
    const std::size_t n = state.cells();
    const int k = state.species_count();
    const double vol = grid.cell_volume();

    std::vector<double> norm;
    compute_norm(state.theta, norm);
    ScalarField norm_field_{grid, norm};
    const double thr = default_support_threshold(norm_field_);

    // Bracket xi = m/(m-1) Theta^{m-1} + a2/2 |eta|^2; outside the support it
    // continues as the pure |eta|^2 term, which keeps it continuous across
    // the free boundary for the centered differences below.
    std::vector<double> xi(n);
    std::vector<double> eta2(n);
    for (std::size_t j = 0; j < n; ++j) {
        const auto c = grid.center(j);
        double r2 = sq(c[0]);
        if (grid.dim() == 2) r2 += sq(c[1]);
        eta2[j] = r2;
        xi[j] = m / (m - 1.0) * pow_real(norm[j], m - 1.0) + 0.5 * coef.a2 * r2;
    }

    detail::KahanSum h_sum;
    for (std::size_t j = 0; j < n; ++j)
        h_sum.add(pow_real(norm[j], m) / (m - 1.0) +
                  0.5 * coef.a2 * eta2[j] * norm[j]);

    std::vector<double> gx, gy, gtx, gty, gnx, gny;
    gradient(xi, grid, 0, gx);
    if (grid.dim() == 2) gradient(xi, grid, 1, gy);
    gradient(norm, grid, 0, gnx);
    if (grid.dim() == 2) gradient(norm, grid, 1, gny);

    detail::KahanSum i1_sum;
    for (std::size_t j = 0; j < n; ++j) {
        if (norm[j] <= thr) continue;
        double g2 = sq(gx[j]);
        if (grid.dim() == 2) g2 += sq(gy[j]);
        i1_sum.add(norm[j] * g2);
    }

    detail::KahanSum i2_sum;
    if (k == 1) {
        // Single species: |grad Theta|^2 equals the species gradient square.
    } else {
        std::vector<double> grads2(n, 0.0);
        for (int s = 0; s < k; ++s) {
            gradient(state.theta[s], grid, 0, gtx);
            for (std::size_t j = 0; j < n; ++j) grads2[j] += sq(gtx[j]);
            if (grid.dim() == 2) {
                gradient(state.theta[s], grid, 1, gty);
                for (std::size_t j = 0; j < n; ++j) grads2[j] += sq(gty[j]);
            }
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (norm[j] <= thr) continue;
            double gn2 = sq(gnx[j]);
            if (grid.dim() == 2) gn2 += sq(gny[j]);
            i2_sum.add(pow_real(norm[j], m - 2.0) * xi[j] * (grads2[j] - gn2));
        }
    }

    EntropyRecord rec;
    rec.tau = state.tau;
    rec.H = h_sum.value() * vol;
    rec.I1 = i1_sum.value() * vol;
    rec.I2 = m * i2_sum.value() * vol;
    rec.dH_dtau_numeric = std::numeric_limits<double>::quiet_NaN();
    return rec;
}

std::vector<EntropyRecord> entropy_trace(const RescaledState& initial, double m,
                                         double tau_end, int stride) {
    if (!(tau_end > initial.tau))
        throw ParameterError("tau_end must exceed the initial tau");
    if (stride < 1) throw ParameterError("stride must be >= 1");

    std::vector<EntropyRecord> records;
    records.push_back(entropy(initial, m));

    RescaledState state = initial;
    std::size_t step = 0;
    double tau = state.tau;
    while (tau < tau_end) {
        const double bound = stable_dtau(state, m);
        const double remaining = tau_end - tau;
        const bool last = bound >= remaining;
        const double dtau = last ? remaining : bound;
        if (tau + dtau == tau)
            throw StagnationError("tau step underflow at tau = " + std::to_string(tau));
        state = step_theta(state, m, dtau);
        tau = last ? tau_end : tau + dtau;
        state.tau = tau;
        ++step;
        if (step % std::size_t(stride) == 0 || last) {
            EntropyRecord rec = entropy(state, m);
            const EntropyRecord& prev = records.back();
            rec.dH_dtau_numeric = (rec.H - prev.H) / (rec.tau - prev.tau);
            records.push_back(rec);
        }
    }
    return records;
}

void write_entropy_csv(const std::filesystem::path& path,
                       std::span<const EntropyRecord> records) {
    std::FILE* f = std::fopen(path.string().c_str(), "w");
    if (!f) throw ConfigurationError("cannot open " + path.string() + " for writing");
    std::fprintf(f, "tau,H,I1,I2,dH_dtau_numeric\n");
    for (const auto& r : records)
        std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g\n", r.tau, r.H, r.I1, r.I2,
                     r.dH_dtau_numeric);
    std::fclose(f);
}

}  // namespace spme
