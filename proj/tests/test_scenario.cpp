#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "spme/errors.hpp"
#include "spme/field.hpp"
#include "spme/scenario.hpp"

using namespace spme;
namespace fs = std::filesystem;

namespace {

fs::path write_cfg(const std::string& name, const std::string& body) {
    const fs::path dir = fs::temp_directory_path() / "spme_scenario_test";
    fs::create_directories(dir);
    const fs::path p = dir / name;
    std::ofstream(p) << body;
    return p;
}

const char* kMinimal = R"(m = 2.0
k = 1
n = 1
t_end = 0.01
checks = mass_conservation

[grid]
cells = 64
min = -2.0
max = 2.0

[bump]
species = 1
shape = pme-bump
center = 0.0
radius = 0.5
amplitude = 1.0
)";

}  // namespace

TEST_CASE("minimal valid scenario gets documented defaults") {
    const Scenario sc = parse_scenario(write_cfg("minimal.cfg", kMinimal));
    CHECK(sc.name == "minimal");  // file stem
    CHECK(sc.m == 2.0);
    CHECK(sc.sample_stride == 100);
    CHECK(sc.solver.epsilon == 0.0);
    CHECK(sc.solver.cfl_safety == 0.9);
    CHECK(sc.solver.clamp_negative);
    CHECK(!sc.solver.cap.has_value());
    CHECK(sc.bumps.size() == 1);
    CHECK(sc.mu0 == doctest::Approx(1.0));
}

TEST_CASE("validation failures are collected with context") {
    SUBCASE("fast-diffusion m is named") {
        const auto p = write_cfg("badm.cfg", R"(m = 0.5
k = 1
n = 1
t_end = 0.01
checks = mass_conservation

[grid]
cells = 64
min = -2.0
max = 2.0

[bump]
species = 1
radius = 0.5
amplitude = 1.0
)");
        try {
            parse_scenario(p);
            FAIL("expected ScenarioError");
        } catch (const ScenarioError& e) {
            CHECK(std::string(e.what()).find("m must be > 1") != std::string::npos);
        }
    }
    SUBCASE("bump outside the grid is rejected with its line") {
        const auto p = write_cfg("outside.cfg", R"(m = 2.0
k = 1
n = 1
t_end = 0.01
checks = mass_conservation

[grid]
cells = 64
min = -2.0
max = 2.0

[bump]
species = 1
radius = 0.5
amplitude = 1.0
center = 1.9
)");
        try {
            parse_scenario(p);
            FAIL("expected ScenarioError");
        } catch (const ScenarioError& e) {
            CHECK(std::string(e.what()).find("leaves the grid") != std::string::npos);
            CHECK(std::string(e.what()).find("line 12") != std::string::npos);
        }
    }
    SUBCASE("multiple violations arrive together") {
        const auto p = write_cfg("multi.cfg", R"(m = 0.5
k = 0
n = 3
checks = mass_conservation, bogus_check

[grid]
cells = 2
min = -2.0
max = 2.0
)");
        try {
            parse_scenario(p);
            FAIL("expected ScenarioError");
        } catch (const ScenarioError& e) {
            CHECK(e.issues().size() >= 5);
        }
    }
    SUBCASE("unknown keys are flagged") {
        std::string body(kMinimal);
        body += "\n[solver]\ntypo_key = 1.0\n";
        try {
            parse_scenario(write_cfg("typo.cfg", body));
            FAIL("expected ScenarioError");
        } catch (const ScenarioError& e) {
            CHECK(std::string(e.what()).find("unknown key") != std::string::npos);
        }
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(parse_scenario("/nonexistent/nowhere.cfg"), ScenarioError);
    }
}

TEST_CASE("initial state construction matches the closed-form bump mass") {
    const Scenario sc = parse_scenario(write_cfg("minimal.cfg", kMinimal));
    const Grid grid = build_grid(sc);
    const SpeciesState state = build_initial_state(sc, grid);
    // 1D pme-bump mass amplitude * r * Beta(1/2, 1/(m-1)+1); m = 2 gives 4/3 r.
    CHECK(mass(state, 0) == doctest::Approx(1.0 * 0.5 * 4.0 / 3.0).epsilon(1e-3));
    CHECK(state.time == 0.0);
}

TEST_CASE("auto-padded grid swallows the expected spread") {
    std::string body(kMinimal);
    const auto pos = body.find("min = -2.0\nmax = 2.0");
    body.replace(pos, std::string("min = -2.0\nmax = 2.0").size(), "auto_pad = true");
    const Scenario sc = parse_scenario(write_cfg("auto.cfg", body));
    const Grid grid = build_grid(sc);
    CHECK(grid.origin(0) < -0.5);
    CHECK(grid.extent_hi(0) > 0.5);
    // the run never reaches the boundary at this horizon
    const auto result = run_experiment(sc, fs::temp_directory_path() / "spme_auto_out");
    CHECK(result.pass);
}

TEST_CASE("run_experiment writes the artifact set and a deterministic verdict") {
    const fs::path out = fs::temp_directory_path() / "spme_exp_out";
    fs::remove_all(out);
    const Scenario sc = parse_scenario(write_cfg("minimal.cfg", kMinimal));

    const ExperimentResult r1 = run_experiment(sc, out / "a");
    CHECK(r1.exit_code == 0);
    CHECK(r1.pass);
    CHECK(fs::exists(r1.out_dir / "manifest.json"));
    CHECK(fs::exists(r1.out_dir / "verdict.json"));
    CHECK(fs::exists(r1.out_dir / "report.csv"));
    CHECK(fs::exists(r1.out_dir / "state_final.csv"));

    const ExperimentResult r2 = run_experiment(sc, out / "b");
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    CHECK(slurp(r1.out_dir / "verdict.json") == slurp(r2.out_dir / "verdict.json"));
}

TEST_CASE("shipped scenario files parse") {
    const fs::path dir = SPME_SCENARIO_DIR;
    int count = 0;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() != ".cfg") continue;
        CHECK_NOTHROW(parse_scenario(entry.path()));
        ++count;
    }
    CHECK(count >= 7);
}

TEST_CASE("refinement_study") {
    SUBCASE("needs at least two levels") {
        const Scenario sc = parse_scenario(write_cfg("minimal.cfg", kMinimal));
        CHECK_THROWS_AS(refinement_study(sc, 1), PreconditionError);
    }
    SUBCASE("needs an exact-solution scenario") {
        const Scenario sc = parse_scenario(write_cfg("minimal.cfg", kMinimal));
        CHECK_THROWS_AS(refinement_study(sc, 2), PreconditionError);
    }
    SUBCASE("source-data study converges at first order or better") {
        const auto p = write_cfg("study.cfg", R"(m = 2.0
k = 1
n = 1
t_start = 1.0
t_end = 2.0
checks = mass_conservation

[grid]
cells = 256
min = -3.2
max = 3.2

[bump]
species = 1
shape = barenblatt
center = 0.0
amplitude = 1.0
)");
        const Scenario sc = parse_scenario(p);
        const StudyResult study = refinement_study(sc, 3);
        REQUIRE(study.rows.size() == 3);
        CHECK(study.conclusive);
        for (std::size_t r = 1; r < study.rows.size(); ++r)
            CHECK(study.rows[r].order >= 0.8);
    }
}
