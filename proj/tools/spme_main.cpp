#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spme/errors.hpp"
#include "spme/scenario.hpp"

namespace fs = std::filesystem;

namespace {

// 0 pass, 1 check failure, 2 configuration error, 3 numerical failure.
int run_one(const fs::path& cfg, const fs::path& out_root, bool quiet) {
    try {
        const spme::Scenario sc = spme::parse_scenario(cfg);
        const spme::ExperimentResult result = spme::run_experiment(sc, out_root);
        if (!quiet) {
            std::printf("== %s\n", sc.name.c_str());
            for (const auto& c : result.checks)
                std::printf("  [%s] %-22s value=% .6g threshold=% .6g  %s\n",
                            c.pass ? "PASS" : "FAIL", c.name.c_str(), c.value,
                            c.threshold, c.detail.c_str());
            std::printf("  verdict: %s (%s)\n", result.pass ? "pass" : "FAIL",
                        (result.out_dir / "verdict.json").string().c_str());
        }
        return result.exit_code;
    } catch (const spme::ScenarioError& e) {
        std::fprintf(stderr, "%s: configuration error\n%s\n", cfg.string().c_str(),
                     e.what());
        return 2;
    } catch (const spme::ConfigurationError& e) {
        std::fprintf(stderr, "%s: configuration error: %s\n", cfg.string().c_str(),
                     e.what());
        return 2;
    } catch (const spme::NumericalBlowupError& e) {
        std::fprintf(stderr, "%s: numerical failure: %s\n", cfg.string().c_str(),
                     e.what());
        return 3;
    } catch (const spme::StagnationError& e) {
        std::fprintf(stderr, "%s: numerical failure: %s\n", cfg.string().c_str(),
                     e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "%s: error: %s\n", cfg.string().c_str(), e.what());
        return 2;
    }
}

int run_many(const std::vector<fs::path>& cfgs, const fs::path& out_root, int jobs) {
    if (jobs < 1) jobs = 1;
    std::vector<int> codes(cfgs.size(), 0);
    std::size_t next = 0;
    while (next < cfgs.size()) {
        const std::size_t batch = std::min<std::size_t>(std::size_t(jobs),
                                                        cfgs.size() - next);
        std::vector<std::future<int>> futures;
        for (std::size_t i = 0; i < batch; ++i) {
            const fs::path cfg = cfgs[next + i];
            futures.push_back(std::async(std::launch::async, [cfg, out_root] {
                return run_one(cfg, out_root, false);
            }));
        }
        for (std::size_t i = 0; i < batch; ++i) codes[next + i] = futures[i].get();
        next += batch;
    }
    int worst = 0;
    for (int c : codes) worst = std::max(worst, c);
    return worst;
}

fs::path default_out(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("SPME_OUT")) return env;
    return "out";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Degenerate multi-species diffusion laboratory"};
    app.require_subcommand(1);

    std::vector<std::string> run_cfgs;
    std::string out_flag;
    int jobs = 1;
    CLI::App* cmd_run = app.add_subcommand("run", "Run one or more scenario files");
    cmd_run->add_option("scenario", run_cfgs, "scenario .cfg file(s)")->required();
    cmd_run->add_option("--jobs,-j", jobs, "scenarios to run concurrently");
    cmd_run->add_option("--out,-o", out_flag, "output root (default $SPME_OUT or ./out)");

    std::string study_cfg;
    int levels = 3;
    std::string study_out;
    CLI::App* cmd_study = app.add_subcommand("study", "Grid refinement study");
    cmd_study->add_option("scenario", study_cfg, "scenario .cfg file")->required();
    cmd_study->add_option("--levels,-l", levels, "refinement levels (>= 2)");
    cmd_study->add_option("--out,-o", study_out, "output root");

    std::string verify_dir;
    int vjobs = 1;
    std::string verify_out;
    CLI::App* cmd_verify =
        app.add_subcommand("verify-all", "Run every scenario in a directory");
    cmd_verify->add_option("dir", verify_dir, "directory of .cfg files")->required();
    cmd_verify->add_option("--jobs,-j", vjobs, "scenarios to run concurrently");
    cmd_verify->add_option("--out,-o", verify_out, "output root");

    CLI11_PARSE(app, argc, argv);

    if (cmd_run->parsed()) {
        std::vector<fs::path> cfgs(run_cfgs.begin(), run_cfgs.end());
        return run_many(cfgs, default_out(out_flag), jobs);
    }

    if (cmd_study->parsed()) {
        try {
            const spme::Scenario sc = spme::parse_scenario(study_cfg);
            const spme::StudyResult study = spme::refinement_study(sc, levels);
            const fs::path out = default_out(study_out) / fs::path(sc.name);
            fs::create_directories(out);
            spme::write_study_csv(out / "study.csv", study);
            std::printf("h,L1,order\n");
            for (const auto& r : study.rows)
                std::printf("%.6g,%.6e,%.3f\n", r.h, r.l1, r.order);
            if (!study.conclusive)
                std::printf("study inconclusive: errors did not decrease monotonically\n");
            return 0;
        } catch (const spme::ScenarioError& e) {
            std::fprintf(stderr, "%s\n", e.what());
            return 2;
        } catch (const spme::PreconditionError& e) {
            std::fprintf(stderr, "configuration error: %s\n", e.what());
            return 2;
        } catch (const spme::NumericalBlowupError& e) {
            std::fprintf(stderr, "numerical failure: %s\n", e.what());
            return 3;
        } catch (const std::exception& e) {
            std::fprintf(stderr, "error: %s\n", e.what());
            return 2;
        }
    }

    if (cmd_verify->parsed()) {
        std::vector<fs::path> cfgs;
        for (const auto& entry : fs::directory_iterator(verify_dir))
            if (entry.path().extension() == ".cfg") cfgs.push_back(entry.path());
        std::sort(cfgs.begin(), cfgs.end());
        if (cfgs.empty()) {
            std::fprintf(stderr, "no .cfg files under %s\n", verify_dir.c_str());
            return 2;
        }
        const int code = run_many(cfgs, default_out(verify_out), vjobs);
        std::printf("verify-all: %zu scenario(s), exit %d\n", cfgs.size(), code);
        return code;
    }
    return 2;
}
