#include "spme/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "spme/barenblatt.hpp"
#include "spme/errors.hpp"

namespace spme {

namespace {

struct RawEntry {
    std::string key;
    std::string value;
    int line = 0;
    mutable bool used = false;
};

struct RawSection {
    std::string name;  // "" for top level
    int line = 0;
    std::vector<RawEntry> entries;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<RawSection> tokenize(const std::filesystem::path& path,
                                 std::vector<std::string>& errors) {
    std::ifstream in(path);
    if (!in) {
        errors.push_back("cannot open file " + path.string());
        return {};
    }
    std::vector<RawSection> sections;
    sections.push_back({"", 0, {}});
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto comment = line.find('#');
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                errors.push_back("line " + std::to_string(lineno) + ": unclosed section");
                continue;
            }
            sections.push_back({trim(line.substr(1, line.size() - 2)), lineno, {}});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        sections.back().entries.push_back(
            {trim(line.substr(0, eq)), trim(line.substr(eq + 1)), lineno, false});
    }
    return sections;
}

class Reader {
public:
    Reader(const RawSection& section, std::vector<std::string>& errors)
        : section_(section), errors_(errors) {}

    const RawEntry* find(const std::string& key) const {
        for (const auto& e : section_.entries)
            if (e.key == key) {
                e.used = true;
                return &e;
            }
        return nullptr;
    }

    bool has(const std::string& key) const {
        for (const auto& e : section_.entries)
            if (e.key == key) return true;
        return false;
    }

    std::string context(const RawEntry& e) const {
        return "line " + std::to_string(e.line) + " (" +
               (section_.name.empty() ? "top level" : section_.name) + "." + e.key + ")";
    }

    double number(const std::string& key, double fallback, bool required = false) {
        const RawEntry* e = find(key);
        if (!e) {
            if (required)
                errors_.push_back("missing required key '" + key + "'" +
                                  (section_.name.empty() ? "" : " in [" + section_.name + "]"));
            return fallback;
        }
        return parse_number(*e);
    }

    int integer(const std::string& key, int fallback, bool required = false) {
        const double v = number(key, fallback, required);
        if (v != std::floor(v)) {
            errors_.push_back("expected an integer for '" + key + "'");
            return fallback;
        }
        return int(v);
    }

    bool flag(const std::string& key, bool fallback) {
        const RawEntry* e = find(key);
        if (!e) return fallback;
        if (e->value == "true" || e->value == "on" || e->value == "1") return true;
        if (e->value == "false" || e->value == "off" || e->value == "0") return false;
        errors_.push_back(context(*e) + ": expected true/false");
        return fallback;
    }

    std::string text(const std::string& key, const std::string& fallback) {
        const RawEntry* e = find(key);
        return e ? e->value : fallback;
    }

    std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
        const RawEntry* e = find(key);
        if (!e) return fallback;
        std::vector<double> out;
        std::stringstream ss(e->value);
        std::string tok;
        while (std::getline(ss, tok, ',')) out.push_back(parse_token(*e, trim(tok)));
        return out;
    }

    std::vector<std::string> words(const std::string& key) {
        const RawEntry* e = find(key);
        std::vector<std::string> out;
        if (!e) return out;
        std::stringstream ss(e->value);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            tok = trim(tok);
            if (!tok.empty()) out.push_back(tok);
        }
        return out;
    }

    void report_unused() {
        for (const auto& e : section_.entries)
            if (!e.used) errors_.push_back(context(e) + ": unknown key");
    }

private:
    double parse_number(const RawEntry& e) { return parse_token(e, e.value); }

    double parse_token(const RawEntry& e, const std::string& tok) {
        try {
            std::size_t used = 0;
            const double v = std::stod(tok, &used);
            if (used != tok.size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            errors_.push_back(context(e) + ": cannot parse '" + tok + "' as a number");
            return 0.0;
        }
    }

    const RawSection& section_;
    std::vector<std::string>& errors_;
};

const std::set<std::string> kKnownChecks = {
    "mass_conservation", "cauchy_schwarz", "subsolution",    "support_monotone",
    "waiting_time",      "support_sync",   "ratio_defect",   "barenblatt_distance",
    "linf_decay",        "entropy",        "harnack",        "travelling_order"};

bool physical_run_needed(const Scenario& s) {
    for (const auto& c : s.checks)
        if (c != "entropy" && c != "travelling_order") return true;
    return false;
}

// n-ball integral of (1 - |y|^2)^{1/(m-1)}; closed Beta-function form.
double unit_bump_volume(double m, int n) {
    const double p = 1.0 / (m - 1.0);
    if (n == 1) return std::beta(0.5, p + 1.0);
    return std::numbers::pi / (p + 1.0);
}

double bump_mass(const BumpSpec& b, double m, int n) {
    if (b.shape == "barenblatt") return b.amplitude;
    const double rn = n == 1 ? b.radius : b.radius * b.radius;
    return b.amplitude * rn * unit_bump_volume(m, n);
}

}  // namespace

Scenario parse_scenario(const std::filesystem::path& path) {
    std::vector<std::string> errors;
    const auto sections = tokenize(path, errors);
    if (!errors.empty()) throw ScenarioError(std::move(errors));

    Scenario sc;
    sc.source_path = path;

    const RawSection* top = &sections.front();
    std::vector<const RawSection*> bump_sections;
    const RawSection *grid_sec = nullptr, *solver_sec = nullptr, *harnack_sec = nullptr,
                     *entropy_sec = nullptr, *travelling_sec = nullptr;
    for (const auto& s : sections) {
        if (s.name.empty()) continue;
        if (s.name == "bump") bump_sections.push_back(&s);
        else if (s.name == "grid") grid_sec = &s;
        else if (s.name == "solver") solver_sec = &s;
        else if (s.name == "harnack") harnack_sec = &s;
        else if (s.name == "entropy") entropy_sec = &s;
        else if (s.name == "travelling") travelling_sec = &s;
        else errors.push_back("line " + std::to_string(s.line) + ": unknown section [" + s.name + "]");
    }

    {
        Reader r(*top, errors);
        sc.name = r.text("name", path.stem().string());
        sc.m = r.number("m", 2.0, true);
        sc.k = r.integer("k", 1, true);
        sc.n = r.integer("n", 1, true);
        sc.t_start = r.number("t_start", 0.0);
        sc.t_end = r.number("t_end", sc.t_start);
        sc.sample_stride = std::size_t(r.integer("sample_stride", 100));
        sc.max_steps = std::size_t(r.integer("max_steps", 0));
        sc.checkpoint_count = std::size_t(r.integer("checkpoints", 8));
        sc.checks = r.words("checks");
        r.report_unused();
    }
    if (!(sc.m > 1.0)) errors.push_back("m must be > 1 (slow-diffusion range)");
    if (sc.k < 1) errors.push_back("k must be a positive species count");
    if (sc.n != 1 && sc.n != 2) errors.push_back("n must be 1 or 2");
    if (sc.checks.empty()) errors.push_back("at least one check must be requested");
    for (const auto& c : sc.checks)
        if (!kKnownChecks.count(c)) errors.push_back("unknown check '" + c + "'");
    if (sc.sample_stride == 0) errors.push_back("sample_stride must be >= 1");

    if (grid_sec) {
        Reader r(*grid_sec, errors);
        const auto cells = r.numbers("cells", {});
        const auto lo = r.numbers("min", {});
        const auto hi = r.numbers("max", {});
        sc.grid.auto_pad = r.flag("auto_pad", false);
        r.report_unused();
        auto fill = [&](const std::vector<double>& v, auto& out, const char* what,
                        bool required) {
            if (v.empty()) {
                if (required) errors.push_back(std::string("grid.") + what + " is required");
                return;
            }
            if (int(v.size()) != sc.n && v.size() != 1)
                errors.push_back(std::string("grid.") + what + " needs " +
                                 std::to_string(sc.n) + " entries");
            for (int a = 0; a < 2; ++a)
                out[a] = v[std::min(std::size_t(a), v.size() - 1)];
        };
        std::array<double, 2> cells_d{0, 0};
        fill(cells, cells_d, "cells", true);
        sc.grid.cells = {int(cells_d[0]), int(cells_d[1])};
        fill(lo, sc.grid.lo, "min", !sc.grid.auto_pad);
        fill(hi, sc.grid.hi, "max", !sc.grid.auto_pad);
    } else {
        errors.push_back("missing [grid] section");
    }
    for (int a = 0; a < sc.n; ++a) {
        if (sc.grid.cells[a] < 4) errors.push_back("grid needs at least 4 cells per axis");
        if (!sc.grid.auto_pad && !(sc.grid.hi[a] > sc.grid.lo[a]))
            errors.push_back("grid.max must exceed grid.min");
    }

    if (solver_sec) {
        Reader r(*solver_sec, errors);
        sc.solver.m = sc.m;
        sc.solver.epsilon = r.number("epsilon", 0.0);
        sc.solver.cfl_safety = r.number("cfl_safety", 0.9);
        sc.solver.clamp_negative = r.flag("clamp_negative", true);
        if (r.has("cap")) sc.solver.cap = r.number("cap", 0.0);
        r.report_unused();
        if (sc.solver.epsilon < 0.0) errors.push_back("solver.epsilon must be >= 0");
        if (!(sc.solver.cfl_safety > 0.0) || sc.solver.cfl_safety > 1.0)
            errors.push_back("solver.cfl_safety must lie in (0, 1]");
        if (sc.solver.cap && !(*sc.solver.cap > 0.0))
            errors.push_back("solver.cap must be positive");
    } else {
        sc.solver.m = sc.m;
    }

    for (const RawSection* bs : bump_sections) {
        Reader r(*bs, errors);
        BumpSpec b;
        b.line = bs->line;
        b.species = r.integer("species", 1, true);
        b.shape = r.text("shape", "pme-bump");
        const auto center = r.numbers("center", {0.0});
        for (int a = 0; a < 2; ++a)
            b.center[a] = center[std::min(std::size_t(a), center.size() - 1)];
        b.radius = r.number("radius", 0.0);
        b.amplitude = r.number("amplitude", 0.0, true);
        r.report_unused();
        sc.bumps.push_back(b);
    }

    if (harnack_sec) {
        Reader r(*harnack_sec, errors);
        sc.harnack.T = r.numbers("T", sc.harnack.T);
        sc.harnack.R_factors = r.numbers("R_factors", sc.harnack.R_factors);
        sc.harnack.cstar_baseline = r.number("cstar_baseline", 0.0);
        r.report_unused();
    }
    if (entropy_sec) {
        Reader r(*entropy_sec, errors);
        sc.entropy.tau_end = r.number("tau_end", sc.entropy.tau_end);
        sc.entropy.stride = r.integer("stride", sc.entropy.stride);
        r.report_unused();
    }
    if (travelling_sec) {
        Reader r(*travelling_sec, errors);
        sc.travelling.t0 = r.number("t0", sc.travelling.t0);
        sc.travelling.t_end = r.number("t_end", sc.travelling.t_end);
        sc.travelling.x_lo = r.number("x_min", sc.travelling.x_lo);
        sc.travelling.x_hi = r.number("x_max", sc.travelling.x_hi);
        sc.travelling.hs = r.numbers("h", sc.travelling.hs);
        r.report_unused();
    }

    // Cross-field validation.
    const bool physical = physical_run_needed(sc);
    const bool has_travelling_check =
        std::count(sc.checks.begin(), sc.checks.end(), "travelling_order") > 0;
    const bool has_entropy_check =
        std::count(sc.checks.begin(), sc.checks.end(), "entropy") > 0;

    if (physical && !(sc.t_end > sc.t_start) && sc.max_steps == 0)
        errors.push_back("t_end must exceed t_start (or set max_steps)");
    if (sc.t_start < 0.0) errors.push_back("t_start must be >= 0");
    if (has_entropy_check && !(sc.t_start > 0.0))
        errors.push_back("the entropy check rescales from t_start, which must be > 0");

    if (sc.bumps.empty() && (physical || has_entropy_check))
        errors.push_back("at least one [bump] is required");

    std::size_t n_barenblatt = 0, n_wave = 0;
    std::vector<int> species_bumps(std::size_t(std::max(sc.k, 1)), 0);
    for (const auto& b : sc.bumps) {
        const std::string at = "line " + std::to_string(b.line) + " ([bump])";
        if (b.species < 1 || b.species > sc.k)
            errors.push_back(at + ": species must lie in 1.." + std::to_string(sc.k));
        else
            ++species_bumps[std::size_t(b.species - 1)];
        if (b.shape == "barenblatt") {
            ++n_barenblatt;
            if (!(sc.t_start > 0.0))
                errors.push_back(at + ": barenblatt initial data needs t_start > 0");
        } else if (b.shape == "travelling-wave") {
            ++n_wave;
        } else if (b.shape == "pme-bump") {
            if (!(b.radius > 0.0)) errors.push_back(at + ": pme-bump needs radius > 0");
        } else {
            errors.push_back(at + ": unknown shape '" + b.shape + "'");
        }
        if (!(b.amplitude > 0.0)) errors.push_back(at + ": amplitude must be positive");
        if (!sc.grid.auto_pad && b.shape == "pme-bump") {
            for (int a = 0; a < sc.n; ++a)
                if (b.center[a] - b.radius < sc.grid.lo[a] ||
                    b.center[a] + b.radius > sc.grid.hi[a])
                    errors.push_back(at + ": bump leaves the grid on axis " +
                                     std::to_string(a));
        }
    }
    if (n_barenblatt > 0 && n_barenblatt != sc.bumps.size())
        errors.push_back("barenblatt initial data cannot be mixed with other shapes");
    if (n_barenblatt > 0) {
        for (const auto& b : sc.bumps)
            if (b.center != sc.bumps.front().center)
                errors.push_back("barenblatt bumps must share one center");
        if (n_barenblatt != std::size_t(sc.k))
            errors.push_back("barenblatt initial data needs exactly one bump per species");
    }
    if (n_wave > 0 && n_wave != sc.bumps.size())
        errors.push_back("travelling-wave data cannot be mixed with other shapes");
    if (has_travelling_check && n_wave != std::size_t(sc.k))
        errors.push_back("travelling_order needs one travelling-wave bump per species");

    auto needs_all_species_mass = [&](const char* check) {
        if (!std::count(sc.checks.begin(), sc.checks.end(), check)) return;
        for (int s = 0; s < sc.k; ++s)
            if (species_bumps[std::size_t(s)] == 0)
                errors.push_back(std::string(check) + " requires positive mass for species " +
                                 std::to_string(s + 1));
    };
    needs_all_species_mass("harnack");
    needs_all_species_mass("ratio_defect");
    needs_all_species_mass("barenblatt_distance");

    if (!errors.empty()) throw ScenarioError(std::move(errors));

    if (!sc.bumps.empty() && n_wave == 0) {
        std::vector<double> per_species(std::size_t(sc.k), 0.0);
        for (const auto& b : sc.bumps)
            per_species[std::size_t(b.species - 1)] += bump_mass(b, sc.m, sc.n);
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (double mi : per_species) {
            lo = std::min(lo, mi);
            hi = std::max(hi, mi);
        }
        sc.mu0 = hi > 0.0 ? lo / hi : 0.0;
    }
    return sc;
}

Grid build_grid(const Scenario& sc) {
    GridSpec g = sc.grid;
    if (g.auto_pad) {
        // Pad so the source solution carrying the total |M| would stay inside
        // with a 20% margin through t_end, starting from the bump hull.
        double masses2 = 0.0;
        std::vector<double> per_species(std::size_t(sc.k), 0.0);
        double hull = 0.0;
        for (const auto& b : sc.bumps) {
            per_species[std::size_t(b.species - 1)] += bump_mass(b, sc.m, sc.n);
            for (int a = 0; a < sc.n; ++a)
                hull = std::max(hull, std::abs(b.center[a]) + b.radius);
        }
        for (double mi : per_species) masses2 += mi * mi;
        const BarenblattProfile profile(std::sqrt(masses2), sc.m, sc.n);
        const double r1 = profile.support_radius(1.0);
        const double t_match = std::pow(std::max(hull, 1e-6) / r1,
                                        1.0 / profile.exponents().a2);
        const double horizon = t_match + (sc.t_end - sc.t_start);
        const double half = 1.2 * profile.support_radius(std::max(horizon, 1e-6));
        for (int a = 0; a < sc.n; ++a) {
            g.lo[a] = -half;
            g.hi[a] = half;
        }
    }
    if (sc.n == 1) return Grid::line(g.cells[0], g.lo[0], g.hi[0]);
    return Grid::box(g.cells, g.lo, g.hi);
}

SpeciesState build_initial_state(const Scenario& sc, const Grid& grid) {
    std::vector<std::vector<double>> fields(std::size_t(sc.k),
                                            std::vector<double>(grid.cell_count(), 0.0));
    const bool barenblatt = !sc.bumps.empty() && sc.bumps.front().shape == "barenblatt";
    if (barenblatt) {
        std::vector<double> masses(std::size_t(sc.k), 0.0);
        for (const auto& b : sc.bumps) masses[std::size_t(b.species - 1)] += b.amplitude;
        double norm2 = 0.0;
        for (double mi : masses) norm2 += mi * mi;
        const BarenblattProfile profile(std::sqrt(norm2), sc.m, sc.n);
        const auto& c0 = sc.bumps.front().center;
        for (int s = 0; s < sc.k; ++s) {
            for (std::size_t j = 0; j < grid.cell_count(); ++j) {
                const auto c = grid.center(j);
                const double x[2] = {c[0] - c0[0], c[1] - c0[1]};
                fields[std::size_t(s)][j] = profile.species_value(
                    masses, s, std::span<const double>(x, std::size_t(sc.n)), sc.t_start);
            }
        }
    } else {
        const double p = 1.0 / (sc.m - 1.0);
        for (const auto& b : sc.bumps) {
            auto& f = fields[std::size_t(b.species - 1)];
            for (std::size_t j = 0; j < grid.cell_count(); ++j) {
                const auto c = grid.center(j);
                double r2 = 0.0;
                for (int a = 0; a < sc.n; ++a) {
                    const double d = c[a] - b.center[a];
                    r2 += d * d;
                }
                const double arg = 1.0 - r2 / (b.radius * b.radius);
                if (arg > 0.0) f[j] += b.amplitude * std::pow(arg, p);
            }
        }
    }
    return SpeciesState::create(grid, std::move(fields), sc.t_start);
}

}  // namespace spme
