#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "spme/barenblatt.hpp"
#include "spme/detail/numerics.hpp"
#include "spme/diagnostics.hpp"
#include "spme/errors.hpp"
#include "spme/scenario.hpp"
#include "spme/selfsim.hpp"
#include "spme/travelling.hpp"

namespace spme {

namespace {

using json = nlohmann::ordered_json;

std::vector<double> species_masses(const SpeciesState& state) {
    std::vector<double> ms(std::size_t(state.species_count()));
    for (int s = 0; s < state.species_count(); ++s) ms[std::size_t(s)] = mass(state, s);
    return ms;
}

double sync_defect_from_record(const SampleRecord& rec, int i, int j) {
    const CellSet& a = rec.supports[std::size_t(i)].cells;
    const CellSet& b = rec.supports[std::size_t(j)].cells;
    CellSet uni, sym;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(uni));
    std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(),
                                  std::back_inserter(sym));
    if (uni.empty()) return 1.0;
    return double(sym.size()) / double(uni.size());
}

struct CheckSink {
    std::vector<CheckResult> results;
    void add(const std::string& name, bool pass, double value, double threshold,
             std::string detail = "") {
        results.push_back({name, pass, value, threshold, std::move(detail)});
    }
};

bool wants(const Scenario& sc, const char* check) {
    return std::count(sc.checks.begin(), sc.checks.end(), check) > 0;
}

}  // namespace

ExperimentResult run_experiment(const Scenario& sc,
                                const std::filesystem::path& out_root) {
    namespace fs = std::filesystem;
    const fs::path out = out_root / sc.name;
    fs::create_directories(out);

    CheckSink sink;
    json manifest;
    manifest["scenario"] = {{"name", sc.name},     {"m", sc.m},
                            {"k", sc.k},           {"n", sc.n},
                            {"t_start", sc.t_start}, {"t_end", sc.t_end},
                            {"epsilon", sc.solver.epsilon},
                            {"cfl_safety", sc.solver.cfl_safety},
                            {"mu0", sc.mu0},       {"source", sc.source_path.string()}};
    json outputs;

    const bool physical =
        wants(sc, "mass_conservation") || wants(sc, "cauchy_schwarz") ||
        wants(sc, "subsolution") || wants(sc, "support_monotone") ||
        wants(sc, "waiting_time") || wants(sc, "support_sync") ||
        wants(sc, "ratio_defect") || wants(sc, "barenblatt_distance") ||
        wants(sc, "linf_decay") || wants(sc, "harnack");

    if (physical) {
        const Grid grid = build_grid(sc);
        manifest["grid"] = {{"cells", {grid.cells(0), grid.cells(1)}},
                            {"origin", {grid.origin(0), grid.origin(1)}},
                            {"spacing", {grid.spacing(0), grid.spacing(1)}}};
        SpeciesState initial = build_initial_state(sc, grid);
        const std::vector<double> masses0 = species_masses(initial);

        RunOptions opts;
        opts.t_end = sc.t_end;
        opts.sample_stride = sc.sample_stride;
        opts.max_steps = sc.max_steps;

        // Observed traces accumulated on the sampling stride.
        std::vector<double> ratio_trace;
        std::vector<BarenblattDistance> bdist_trace;
        std::vector<double> bdist_times;
        std::vector<fs::path> checkpoints;
        json times = json::array();

        std::optional<BarenblattProfile> profile;
        if (wants(sc, "barenblatt_distance")) {
            double norm2 = 0.0;
            for (double mi : masses0) norm2 += mi * mi;
            profile.emplace(std::sqrt(norm2), sc.m, sc.n);
        }

        std::vector<Observer> observers;
        observers.push_back([&](const SpeciesState& state, const SampleRecord& rec) {
            times.push_back(rec.time);
            if (wants(sc, "ratio_defect"))
                ratio_trace.push_back(ratio_defect(state, masses0));
            if (profile) {
                bdist_trace.push_back(barenblatt_distance(state, masses0, *profile));
                bdist_times.push_back(rec.time);
            }
        });

        // Field checkpoints, roughly evenly spaced over the sampled records.
        std::size_t sample_counter = 0;
        const std::size_t expected_samples =
            sc.max_steps ? sc.max_steps / sc.sample_stride + 2 : 0;
        observers.push_back([&](const SpeciesState& state, const SampleRecord& rec) {
            const std::size_t every =
                sc.checkpoint_count == 0
                    ? std::size_t(-1)
                    : std::max<std::size_t>(
                          1, (expected_samples ? expected_samples : 64) / sc.checkpoint_count);
            if (sample_counter++ % every == 0) {
                char name[64];
                std::snprintf(name, sizeof name, "state_%06zu.csv", rec.step);
                const fs::path p = out / name;
                write_state_csv(p, state);
                checkpoints.push_back(p);
            }
        });

        RunResult result = run(initial, sc.solver, opts, observers);
        const DiagnosticsReport& report = result.report;

        // Always write the final state and the per-sample metric table.
        write_state_csv(out / "state_final.csv", result.final_state);
        write_report_csv(out / "report.csv", report);
        outputs["report"] = "report.csv";
        json cp = json::array();
        for (const auto& p : checkpoints) cp.push_back(p.filename().string());
        cp.push_back("state_final.csv");
        manifest["times"] = times;
        manifest["checkpoints"] = cp;

        sink.add("domain_containment", !report.boundary_touched,
                 report.boundary_touched ? 1.0 : 0.0, 0.0,
                 "support stayed clear of the zero-flux boundary");

        if (wants(sc, "mass_conservation"))
            sink.add("mass_conservation", report.mass_drift_max <= 1e-12,
                     report.mass_drift_max, 1e-12, "max relative drift per species");
        if (wants(sc, "cauchy_schwarz"))
            sink.add("cauchy_schwarz", report.min_cs_slack() >= -1e-12,
                     report.min_cs_slack(), -1e-12,
                     "min face slack of the gradient inequality");
        if (wants(sc, "subsolution")) {
            const double tol = 10.0 * grid.min_spacing();
            sink.add("subsolution", report.max_subsolution() <= tol,
                     report.max_subsolution(), tol,
                     "max one-sided defect of d|u|/dt <= lap(|u|^m)");
        }
        if (wants(sc, "support_monotone"))
            sink.add("support_monotone", report.support_monotonicity_violations == 0,
                     double(report.support_monotonicity_violations), 0.0,
                     "sample intervals losing support cells beyond chatter");
        if (wants(sc, "waiting_time")) {
            const auto hit = waiting_time(report);
            sink.add("waiting_time", !hit.has_value(),
                     hit.value_or(result.final_state.time), 0.0,
                     hit ? "supports met during the run"
                         : "supports stayed disjoint through the horizon");
        }
        if (wants(sc, "support_sync")) {
            double final_defect = 0.0;
            bool tail_monotone = true;
            const auto& samples = report.samples;
            for (int i = 0; i < sc.k; ++i)
                for (int j = i + 1; j < sc.k; ++j) {
                    const std::size_t ns = samples.size();
                    const double d2 = sync_defect_from_record(samples[ns - 1], i, j);
                    final_defect = std::max(final_defect, d2);
                    if (ns >= 3) {
                        const double d0 = sync_defect_from_record(samples[ns - 3], i, j);
                        const double d1 = sync_defect_from_record(samples[ns - 2], i, j);
                        if (!(d2 <= d1 && d1 <= d0)) tail_monotone = false;
                    }
                }
            sink.add("support_sync", final_defect < 0.05 && tail_monotone, final_defect,
                     0.05,
                     tail_monotone ? "defect non-increasing over the last three samples"
                                   : "defect grew over the last three samples");
        }
        if (wants(sc, "ratio_defect")) {
            double worst = 0.0;
            for (double d : ratio_trace) worst = std::max(worst, d);
            sink.add("ratio_defect", worst <= 1e-12, worst, 1e-12,
                     "max pairwise proportionality defect over the run");
        }
        if (profile) {
            std::FILE* f = std::fopen((out / "barenblatt_distance.csv").string().c_str(), "w");
            if (f) {
                std::fprintf(f, "t");
                for (int s = 0; s < sc.k; ++s)
                    std::fprintf(f, ",l1_%d,scaled_linf_%d", s + 1, s + 1);
                std::fputc('\n', f);
                for (std::size_t r = 0; r < bdist_trace.size(); ++r) {
                    std::fprintf(f, "%.17g", bdist_times[r]);
                    for (int s = 0; s < sc.k; ++s)
                        std::fprintf(f, ",%.17g,%.17g", bdist_trace[r].l1[std::size_t(s)],
                                     bdist_trace[r].scaled_linf[std::size_t(s)]);
                    std::fputc('\n', f);
                }
                std::fclose(f);
                outputs["barenblatt_distance"] = "barenblatt_distance.csv";
            }
            double worst_ratio = 0.0;
            for (int s = 0; s < sc.k; ++s) {
                const auto& first = bdist_trace.front();
                const auto& last = bdist_trace.back();
                worst_ratio = std::max(worst_ratio,
                                       last.l1[std::size_t(s)] / first.l1[std::size_t(s)]);
                worst_ratio = std::max(worst_ratio, last.scaled_linf[std::size_t(s)] /
                                                        first.scaled_linf[std::size_t(s)]);
            }
            sink.add("barenblatt_distance", worst_ratio <= 0.5, worst_ratio, 0.5,
                     "worst final/initial distance ratio (L1 and weighted sup)");
        }
        if (wants(sc, "linf_decay")) {
            std::vector<double> lt, ln;
            for (const auto& rec : report.samples) {
                if (rec.time <= 0.0 || rec.max_norm <= 0.0) continue;
                lt.push_back(std::log(rec.time));
                ln.push_back(std::log(rec.max_norm));
            }
            const double slope = detail::fit_slope(lt, ln);
            const double a1 = coefficients(sc.m, sc.n).a1;
            sink.add("linf_decay", slope <= -a1 + 0.05, slope, -a1 + 0.05,
                     "log-log slope of max|u| against t");
        }
        if (wants(sc, "harnack")) {
            // Chain runs so each requested T is hit exactly.
            std::vector<double> Ts = sc.harnack.T;
            std::sort(Ts.begin(), Ts.end());
            std::FILE* f = std::fopen((out / "harnack.csv").string().c_str(), "w");
            if (f) std::fprintf(f, "T,R,species,Q\n");
            double max_q = 0.0;
            SpeciesState state = initial;
            for (double T : Ts) {
                RunOptions ro;
                ro.t_end = sc.t_start + T;
                ro.sample_stride = sc.sample_stride;
                ro.record_support_sets = false;
                ro.record_face_checks = false;
                state = run(state, sc.solver, ro).final_state;
                for (double factor : sc.harnack.R_factors) {
                    const double R = factor * std::sqrt(T);
                    for (int s = 0; s < sc.k; ++s) {
                        const double q = harnack_quotient(initial, state, s, R, sc.m);
                        max_q = std::max(max_q, q);
                        if (f) std::fprintf(f, "%.17g,%.17g,%d,%.17g\n", T, R, s + 1, q);
                    }
                }
            }
            if (f) {
                std::fclose(f);
                outputs["harnack"] = "harnack.csv";
            }
            const bool finite = std::isfinite(max_q);
            const double baseline = sc.harnack.cstar_baseline;
            const bool pass = finite && (baseline <= 0.0 || max_q <= 1.1 * baseline);
            sink.add("harnack", pass, max_q, baseline > 0.0 ? 1.1 * baseline : 0.0,
                     baseline > 0.0 ? "sweep max against 1.1x recorded baseline"
                                    : "sweep max (no baseline recorded)");
        }
    }

    if (wants(sc, "entropy")) {
        const Grid grid = build_grid(sc);
        const SpeciesState initial = build_initial_state(sc, grid);
        const RescaledState theta0 = to_selfsimilar(initial, sc.m);
        const auto trace =
            entropy_trace(theta0, sc.m, theta0.tau + sc.entropy.tau_end, sc.entropy.stride);
        write_entropy_csv(out / "entropy.csv", trace);
        outputs["entropy"] = "entropy.csv";
        double worst_rise = -std::numeric_limits<double>::infinity();
        for (std::size_t r = 1; r < trace.size(); ++r)
            worst_rise = std::max(worst_rise, (trace[r].H - trace[r - 1].H) /
                                                  std::abs(trace[r - 1].H));
        sink.add("entropy", worst_rise <= 1e-8, worst_rise, 1e-8,
                 "max relative H increase between records");
    }

    if (wants(sc, "travelling_order")) {
        std::vector<double> coeffs(std::size_t(sc.k), 0.0);
        for (const auto& b : sc.bumps) coeffs[std::size_t(b.species - 1)] = b.amplitude;
        const TravellingWave wave(1, {1.0, 0.0}, coeffs, WaveOrientation::LeftMoving,
                                  sc.m);
        const auto rows = dirichlet_tw_run(wave, sc.travelling.x_lo, sc.travelling.x_hi,
                                           sc.travelling.t0, sc.travelling.t_end,
                                           sc.travelling.hs);
        write_wave_errors_csv(out / "travelling.csv", rows);
        outputs["travelling"] = "travelling.csv";
        double min_order = std::numeric_limits<double>::infinity();
        for (std::size_t r = 1; r < rows.size(); ++r)
            min_order = std::min(min_order, rows[r].order_estimate);
        sink.add("travelling_order", min_order >= 0.8, min_order, 0.8,
                 "min observed L1 order along the refinement ladder");
    }

    ExperimentResult result;
    result.checks = sink.results;
    result.pass = std::all_of(sink.results.begin(), sink.results.end(),
                              [](const CheckResult& c) { return c.pass; });
    result.exit_code = result.pass ? 0 : 1;
    result.out_dir = out;

    json verdict;
    verdict["scenario"] = sc.name;
    json checks;
    for (const auto& c : sink.results)
        checks[c.name] = {{"pass", c.pass},
                          {"value", c.value},
                          {"threshold", c.threshold},
                          {"detail", c.detail}};
    verdict["checks"] = checks;
    verdict["pass"] = result.pass;

    manifest["outputs"] = outputs;
    std::ofstream(out / "manifest.json") << manifest.dump(2) << '\n';
    std::ofstream(out / "verdict.json") << verdict.dump(2) << '\n';
    return result;
}

StudyResult refinement_study(const Scenario& sc, int levels) {
    if (levels < 2) throw PreconditionError("a refinement study needs at least 2 levels");
    const bool barenblatt =
        !sc.bumps.empty() &&
        std::all_of(sc.bumps.begin(), sc.bumps.end(),
                    [](const BumpSpec& b) { return b.shape == "barenblatt"; });
    const bool wave =
        !sc.bumps.empty() &&
        std::all_of(sc.bumps.begin(), sc.bumps.end(),
                    [](const BumpSpec& b) { return b.shape == "travelling-wave"; });
    if (!barenblatt && !wave)
        throw PreconditionError(
            "refinement study needs an exact-solution scenario (barenblatt or "
            "travelling-wave initial data)");

    StudyResult study;
    if (wave) {
        std::vector<double> coeffs(std::size_t(sc.k), 0.0);
        for (const auto& b : sc.bumps) coeffs[std::size_t(b.species - 1)] = b.amplitude;
        const TravellingWave tw(1, {1.0, 0.0}, coeffs, WaveOrientation::LeftMoving, sc.m);
        std::vector<double> hs;
        const double h0 = (sc.travelling.x_hi - sc.travelling.x_lo) /
                          std::max(4, sc.grid.cells[0]);
        for (int l = 0; l < levels; ++l) hs.push_back(h0 / double(1 << l));
        const auto rows = dirichlet_tw_run(tw, sc.travelling.x_lo, sc.travelling.x_hi,
                                           sc.travelling.t0, sc.travelling.t_end, hs);
        for (const auto& r : rows) study.rows.push_back({r.h, r.l1, r.order_estimate});
    } else {
        std::vector<double> masses;
        {
            const Grid probe = build_grid(sc);
            masses = species_masses(build_initial_state(sc, probe));
        }
        double norm2 = 0.0;
        for (double mi : masses) norm2 += mi * mi;
        const BarenblattProfile profile(std::sqrt(norm2), sc.m, sc.n);

        for (int l = 0; l < levels; ++l) {
            Scenario fine = sc;
            for (int a = 0; a < sc.n; ++a) fine.grid.cells[a] = sc.grid.cells[a] << l;
            const Grid grid = build_grid(fine);
            const SpeciesState initial = build_initial_state(fine, grid);
            RunOptions opts;
            opts.t_end = sc.t_end;
            opts.sample_stride = std::size_t(-1);
            opts.record_face_checks = false;
            opts.record_support_sets = false;
            const RunResult rr = run(initial, fine.solver, opts);
            const auto dist = barenblatt_distance(rr.final_state, masses, profile);
            detail::KahanSum total;
            for (double e : dist.l1) total.add(e);
            StudyRow row{grid.min_spacing(), total.value(),
                         std::numeric_limits<double>::quiet_NaN()};
            if (!study.rows.empty())
                row.order = std::log2(study.rows.back().l1 / row.l1) /
                            std::log2(study.rows.back().h / row.h);
            study.rows.push_back(row);
        }
    }
    for (std::size_t r = 1; r < study.rows.size(); ++r)
        if (!(study.rows[r].l1 < study.rows[r - 1].l1)) study.conclusive = false;
    return study;
}

void write_study_csv(const std::filesystem::path& path, const StudyResult& study) {
    std::FILE* f = std::fopen(path.string().c_str(), "w");
    if (!f) throw ConfigurationError("cannot open " + path.string() + " for writing");
    std::fprintf(f, "h,L1,order_estimate\n");
    for (const auto& r : study.rows)
        std::fprintf(f, "%.17g,%.17g,%.17g\n", r.h, r.l1, r.order);
    std::fclose(f);
}

}  // namespace spme
