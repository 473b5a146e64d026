#include "spme/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "spme/detail/numerics.hpp"
#include "spme/errors.hpp"

namespace spme {

using detail::KahanSum;

std::optional<double> waiting_time(const DiagnosticsReport& trace) {
    if (trace.samples.size() < 2)
        throw PreconditionError("waiting time needs a trace with at least two samples");
    const SampleRecord& first = trace.samples.front();
    const int k = int(first.supports.size());
    if (k < 2) return std::nullopt;  // no pairs
    for (double d : first.pair_support_distance)
        if (d <= 0.0)
            throw PreconditionError("initial supports must be pairwise disjoint");
    for (std::size_t s = 1; s < trace.samples.size(); ++s)
        for (double d : trace.samples[s].pair_support_distance)
            if (d <= 0.0) return trace.samples[s].time;
    return std::nullopt;
}

double support_sync_defect(const SpeciesState& state, int i, int j, double threshold) {
    const int k = state.species_count();
    if (i < 0 || j < 0 || i >= k || j >= k || i == j)
        throw ParameterError("need two distinct species indices");
    auto support_of = [&](int s) {
        ScalarField f{state.grid, state.fields[s]};
        const double thr = threshold >= 0.0 ? threshold : default_support_threshold(f);
        return support(f, thr);
    };
    const CellSet si = support_of(i);
    const CellSet sj = support_of(j);
    if (si.empty() || sj.empty())
        throw PreconditionError("both supports must be nonempty");
    CellSet uni, sym;
    std::set_union(si.begin(), si.end(), sj.begin(), sj.end(), std::back_inserter(uni));
    std::set_symmetric_difference(si.begin(), si.end(), sj.begin(), sj.end(),
                                  std::back_inserter(sym));
    return double(sym.size()) / double(uni.size());
}

double ratio_defect(const SpeciesState& state, std::span<const double> masses,
                    double threshold) {
    const int k = state.species_count();
    if (int(masses.size()) != k) throw ParameterError("one mass per species required");
    for (double mi : masses)
        if (!(mi > 0.0)) throw ParameterError("masses must be positive");

    const ScalarField norm = norm_field(state);
    const double thr = threshold >= 0.0 ? threshold : default_support_threshold(norm);
    const double scale = norm.max_value();
    bool any = false;
    double worst = 0.0;
    for (std::size_t c = 0; c < norm.values.size(); ++c) {
        if (norm.values[c] <= thr) continue;
        any = true;
        for (int i = 0; i < k; ++i)
            for (int j = i + 1; j < k; ++j) {
                const double defect =
                    std::abs(masses[j] * state.fields[i][c] - masses[i] * state.fields[j][c]);
                worst = std::max(worst, defect / (masses[i] * masses[j] * scale));
            }
    }
    if (!any) throw PreconditionError("no cell above the support threshold");
    return worst;
}

BarenblattDistance barenblatt_distance(const SpeciesState& state,
                                       std::span<const double> masses, double m) {
    double norm2 = 0.0;
    for (double mi : masses) {
        if (!(mi > 0.0)) throw ParameterError("masses must be positive");
        norm2 += mi * mi;
    }
    return barenblatt_distance(state, masses,
                               BarenblattProfile(std::sqrt(norm2), m, state.grid.dim()));
}

BarenblattDistance barenblatt_distance(const SpeciesState& state,
                                       std::span<const double> masses,
                                       const BarenblattProfile& profile) {
    if (!(state.time > 0.0)) throw DomainError("distance is defined for t > 0");
    const int k = state.species_count();
    if (int(masses.size()) != k) throw ParameterError("one mass per species required");
    double norm2 = 0.0;
    for (double mi : masses) norm2 += mi * mi;
    const double mass_norm = std::sqrt(norm2);
    if (std::abs(profile.mass() - mass_norm) > 1e-9 * mass_norm)
        throw ParameterError("profile mass must equal |M|");

    const Grid& grid = state.grid;
    const double t = state.time;
    const double window = 0.8 * profile.support_radius(t);
    const double weight = std::pow(t, profile.exponents().a1);

    BarenblattDistance out;
    out.l1.resize(k);
    out.scaled_linf.resize(k);
    std::vector<double> share(grid.cell_count());
    for (std::size_t j = 0; j < grid.cell_count(); ++j) {
        const auto c = grid.center(j);
        share[j] = profile.evaluate(std::span<const double>(c.data(), grid.dim()), t);
    }
    for (int s = 0; s < k; ++s) {
        const double frac = masses[s] / mass_norm;
        KahanSum l1;
        double linf = 0.0;
        for (std::size_t j = 0; j < grid.cell_count(); ++j) {
            const double diff = std::abs(state.fields[s][j] - frac * share[j]);
            l1.add(diff);
            const auto c = grid.center(j);
            double r2 = c[0] * c[0];
            if (grid.dim() == 2) r2 += c[1] * c[1];
            if (r2 <= window * window) linf = std::max(linf, diff);
        }
        out.l1[s] = l1.value() * grid.cell_volume();
        out.scaled_linf[s] = weight * linf;
    }
    return out;
}

SpeciesState lambda_rescale(const SpeciesState& state, double lambda, double m) {
    if (!(lambda > 0.0)) throw ParameterError("lambda must be positive");
    const auto coef = coefficients(m, state.grid.dim());
    const Grid& g = state.grid;
    const double sx = std::pow(lambda, -coef.a2);
    const double su = std::pow(lambda, coef.a1);
    Grid scaled(g.dim(), {g.cells(0), g.dim() == 2 ? g.cells(1) : 1},
                {g.origin(0) * sx, g.origin(1) * sx},
                {g.spacing(0) * sx, g.dim() == 2 ? g.spacing(1) * sx : 1.0});
    std::vector<std::vector<double>> fields = state.fields;
    for (auto& f : fields)
        for (double& v : f) v *= su;
    return SpeciesState{std::move(scaled), state.time / lambda, std::move(fields)};
}

double harnack_quotient(const SpeciesState& initial, const SpeciesState& at_T,
                        int species, double R, double m) {
    const int k = initial.species_count();
    if (species < 0 || species >= k) throw ParameterError("species index out of range");
    if (at_T.species_count() != k)
        throw ParameterError("states must carry the same species");
    const double T = at_T.time - initial.time;
    if (!(T > 0.0)) throw ParameterError("final state must be later than the initial one");
    if (!(R > std::sqrt(T)))
        throw PreconditionError("hypothesis violated: need R > sqrt(T)");

    const int n = initial.grid.dim();
    const double p = ((m - 1.0) * n + 2.0) / 2.0;

    std::vector<double> ms(k);
    double mmax = 0.0;
    for (int s = 0; s < k; ++s) {
        ms[s] = mass(initial, s);
        mmax = std::max(mmax, ms[s]);
    }
    if (!(mmax > 0.0)) throw PreconditionError("initial data carries no mass");
    const double mu = ms[species] / mmax;
    if (mu == 0.0) return 0.0;  // numerator vanishes with the species

    KahanSum num;
    const Grid& grid = initial.grid;
    for (std::size_t j = 0; j < grid.cell_count(); ++j) {
        const auto c = grid.center(j);
        double r2 = c[0] * c[0];
        if (n == 2) r2 += c[1] * c[1];
        if (r2 < R * R) num.add(initial.fields[species][j]);
    }
    const double numerator = num.value() * grid.cell_volume();

    const double u0T = interpolate(at_T.grid, at_T.fields[species], {0.0, 0.0});
    const double denom = std::pow(mu, -p) *
                         (std::pow(R, n + 2.0 / (m - 1.0)) / std::pow(T, 1.0 / (m - 1.0)) +
                          std::pow(T, 0.5 * n) * std::pow(u0T, p));
    return numerator / denom;
}

}  // namespace spme
