#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "spme/barenblatt.hpp"
#include "spme/errors.hpp"
#include "spme/selfsim.hpp"
#include "spme/solver.hpp"

using namespace spme;

namespace {

std::vector<double> bump(const Grid& g, double center, double radius, double amp,
                         double m) {
    std::vector<double> v(g.cell_count(), 0.0);
    for (std::size_t j = 0; j < g.cell_count(); ++j) {
        const double x = g.center(j, 0);
        const double a = 1.0 - (x - center) * (x - center) / (radius * radius);
        if (a > 0.0) v[j] = amp * std::pow(a, 1.0 / (m - 1.0));
    }
    return v;
}

RescaledState stationary_state(const BarenblattProfile& p, const Grid& g,
                               std::vector<double> shares) {
    std::vector<std::vector<double>> theta;
    for (double share : shares) {
        std::vector<double> v(g.cell_count());
        for (std::size_t j = 0; j < g.cell_count(); ++j)
            v[j] = share * p.rescaled_profile1d(g.center(j, 0));
        theta.push_back(std::move(v));
    }
    return RescaledState::create(g, std::move(theta), 0.0);
}

double theta_mass(const RescaledState& s, int i) {
    double sum = 0.0;
    for (double v : s.theta[std::size_t(i)]) sum += v;
    return sum * s.grid.cell_volume();
}

}  // namespace

TEST_CASE("to_selfsimilar") {
    SUBCASE("t = 1 is the identity relabeling") {
        const Grid g = Grid::line(64, -2.0, 2.0);
        const auto state = SpeciesState::create(g, {bump(g, 0.0, 0.5, 1.0, 2.0)}, 1.0);
        const auto theta = to_selfsimilar(state, 2.0);
        CHECK(theta.tau == 0.0);
        CHECK(theta.grid == g);
        for (std::size_t j = 0; j < g.cell_count(); ++j)
            CHECK(theta.theta[0][j] == state.fields[0][j]);
    }
    SUBCASE("nonpositive time is outside the domain") {
        const Grid g = Grid::line(64, -2.0, 2.0);
        const auto state = SpeciesState::create(g, {bump(g, 0.0, 0.5, 1.0, 2.0)}, 0.0);
        CHECK_THROWS_AS(to_selfsimilar(state, 2.0), DomainError);
    }
    SUBCASE("source solution maps to the stationary profile at any time") {
        const BarenblattProfile p(1.0, 2.0, 1);
        for (double t : {0.5, 1.0, 7.0}) {
            const double half = p.support_radius(t) * 1.1;
            const Grid g = Grid::line(512, -half, half);
            std::vector<double> v(g.cell_count());
            for (std::size_t j = 0; j < g.cell_count(); ++j)
                v[j] = p.evaluate1d(g.center(j, 0), t);
            const auto theta =
                to_selfsimilar(SpeciesState::create(g, {v}, t), 2.0);
            CHECK(theta.tau == doctest::Approx(std::log(t)).epsilon(1e-15));
            for (std::size_t j = 0; j < g.cell_count(); ++j) {
                const double eta = theta.grid.center(j, 0);
                CHECK(theta.theta[0][j] ==
                      doctest::Approx(p.rescaled_profile1d(eta)).epsilon(1e-13));
            }
        }
    }
    SUBCASE("mass is preserved by the relabeling") {
        const Grid g = Grid::line(256, -2.0, 2.0);
        const auto state = SpeciesState::create(g, {bump(g, 0.2, 0.5, 0.8, 2.0)}, 3.7);
        const auto theta = to_selfsimilar(state, 2.0);
        CHECK(theta_mass(theta, 0) == doctest::Approx(mass(state, 0)).epsilon(1e-12));
    }
}

TEST_CASE("step_theta") {
    const BarenblattProfile p(1.0, 2.0, 1);

    SUBCASE("zero state stays zero") {
        const Grid g = Grid::line(64, -2.0, 2.0);
        const auto z = RescaledState::create(
            g, {std::vector<double>(g.cell_count(), 0.0)}, 0.0);
        const auto next = step_theta(z, 2.0, 1e-4);
        for (double v : next.theta[0]) CHECK(v == 0.0);
    }
    SUBCASE("the stationary profile moves at most O(dtau h) per step") {
        for (int cells : {512, 1024}) {
            const Grid g = Grid::line(cells, -2.3, 2.3);
            const auto st = stationary_state(p, g, {1.0});
            const double dtau = stable_dtau(st, 2.0);
            const auto next = step_theta(st, 2.0, dtau);
            double l1 = 0.0;
            for (std::size_t j = 0; j < g.cell_count(); ++j)
                l1 += std::abs(next.theta[0][j] - st.theta[0][j]);
            l1 *= g.cell_volume();
            CHECK(l1 <= 1.0 * dtau * g.spacing(0));  // measured C ~ 0.48
        }
    }
    SUBCASE("theta mass is conserved to rounding per step") {
        const Grid g = Grid::line(512, -3.0, 3.0);
        auto st = RescaledState::create(
            g, {bump(g, -0.4, 0.6, 0.9, 2.0), bump(g, 0.5, 0.5, 0.4, 2.0)}, 0.0);
        const double m0 = theta_mass(st, 0), m1 = theta_mass(st, 1);
        for (int i = 0; i < 50; ++i) st = step_theta(st, 2.0, stable_dtau(st, 2.0));
        CHECK(theta_mass(st, 0) == doctest::Approx(m0).epsilon(1e-12));
        CHECK(theta_mass(st, 1) == doctest::Approx(m1).epsilon(1e-12));
    }
}

TEST_CASE("entropy functional") {
    SUBCASE("closed-form value at the stationary profile (|M| = 1, m = 2)") {
        const BarenblattProfile p(1.0, 2.0, 1);
        const Grid g = Grid::line(2048, -2.3, 2.3);
        const auto st = stationary_state(p, g, {1.0});
        const auto rec = entropy(st, 2.0);
        // (16 sqrt 3 / 5) C^{5/2} = 3^{4/3}/10
        const double closed = 16.0 * std::sqrt(3.0) / 5.0 *
                              std::pow(p.mass_constant(), 2.5);
        CHECK(closed == doctest::Approx(std::pow(3.0, 4.0 / 3.0) / 10.0).epsilon(1e-12));
        CHECK(rec.H == doctest::Approx(closed).epsilon(2e-6));
        CHECK(rec.H == doctest::Approx(0.43267).epsilon(1e-3));
    }
    SUBCASE("one species makes the second dissipation term vanish identically") {
        const Grid g = Grid::line(256, -2.0, 2.0);
        const auto st = RescaledState::create(g, {bump(g, 0.3, 0.6, 0.7, 2.0)}, 0.0);
        CHECK(entropy(st, 2.0).I2 == 0.0);
    }
    SUBCASE("dissipation terms vanish at the equilibrium, proportional species") {
        const BarenblattProfile p(1.0, 2.0, 1);
        const Grid g = Grid::line(2048, -2.3, 2.3);
        const auto st = stationary_state(p, g, {0.6, 0.8});
        const auto rec = entropy(st, 2.0);
        CHECK(rec.I1 >= 0.0);
        CHECK(rec.I1 <= 0.05 * g.spacing(0));  // measured ~4e-8 at this h
        CHECK(std::abs(rec.I2) <= 1e-12);
    }
    SUBCASE("I1 is nonnegative and I2 bounded below by rounding on generic data") {
        const Grid g = Grid::line(512, -3.0, 3.0);
        const auto st = RescaledState::create(
            g, {bump(g, -0.5, 0.7, 0.9, 2.0), bump(g, 0.4, 0.5, 0.6, 2.0)}, 0.0);
        const auto rec = entropy(st, 2.0);
        CHECK(rec.I1 >= 0.0);
        CHECK(rec.I2 >= -1e-13);
    }
}

TEST_CASE("entropy trace") {
    SUBCASE("H is nonincreasing and matches the dissipation identity") {
        const Grid g = Grid::line(768, -3.0, 3.0);
        const auto st = RescaledState::create(
            g, {bump(g, -0.4, 0.6, 0.8, 2.0), bump(g, 0.3, 0.7, 0.5, 2.0)}, 0.0);
        const auto trace = entropy_trace(st, 2.0, 0.5, 100);
        REQUIRE(trace.size() >= 5);
        CHECK(std::isnan(trace.front().dH_dtau_numeric));
        for (std::size_t r = 1; r < trace.size(); ++r) {
            CHECK(trace[r].H <= trace[r - 1].H + 1e-8 * std::abs(trace[r - 1].H));
            CHECK(trace[r].tau > trace[r - 1].tau);
        }
        CHECK(trace.back().tau == doctest::Approx(0.5).epsilon(1e-15));
    }
    SUBCASE("dissipation identity sharpens under joint refinement") {
        auto worst_residual = [](int cells) {
            const Grid g = Grid::line(cells, -3.0, 3.0);
            const auto st = RescaledState::create(
                g, {bump(g, -0.4, 0.9, 0.7, 2.0), bump(g, 0.3, 1.0, 0.5, 2.0)}, 0.0);
            const auto trace = entropy_trace(st, 2.0, 0.2, 50);
            double worst = 0.0;
            for (std::size_t r = 1; r < trace.size(); ++r) {
                const double mid = 0.5 * (trace[r].I1 + trace[r].I2 +
                                          trace[r - 1].I1 + trace[r - 1].I2);
                worst = std::max(worst, std::abs(trace[r].dH_dtau_numeric + mid));
            }
            return worst;
        };
        const double coarse = worst_residual(512);
        const double fine = worst_residual(1024);
        CHECK(fine < coarse);
    }
    SUBCASE("equilibrium start holds H nearly constant") {
        const BarenblattProfile p(1.0, 2.0, 1);
        const Grid g = Grid::line(1024, -2.3, 2.3);
        const auto st = stationary_state(p, g, {1.0});
        const auto trace = entropy_trace(st, 2.0, 0.25, 1000);
        for (const auto& r : trace)
            CHECK(std::abs(r.H - trace.front().H) <= 1e-6);
    }
}

TEST_CASE("generic data contracts toward the stationary profile") {
    // L1 distance to the equilibrium shares at tau = 6 falls by far more
    // than the required factor of 4.
    const Grid g = Grid::line(256, -3.0, 3.0);
    const auto st0 = SpeciesState::create(
        g, {bump(g, -0.7, 0.5, 0.8, 2.0), bump(g, 0.6, 0.6, 0.5, 2.0)}, 1.0);
    const double m1 = mass(st0, 0), m2 = mass(st0, 1);
    const double mm = std::hypot(m1, m2);
    const BarenblattProfile p(mm, 2.0, 1);

    auto distance = [&](const RescaledState& ts) {
        double d = 0.0;
        for (std::size_t j = 0; j < ts.cells(); ++j) {
            const double b = p.rescaled_profile1d(ts.grid.center(j, 0));
            d += std::abs(ts.theta[0][j] - m1 / mm * b);
            d += std::abs(ts.theta[1][j] - m2 / mm * b);
        }
        return d * ts.grid.cell_volume();
    };

    RescaledState ts = to_selfsimilar(st0, 2.0);
    const double d0 = distance(ts);
    while (ts.tau < 6.0) {
        const double dtau = std::min(stable_dtau(ts, 2.0), 6.0 - ts.tau);
        ts = step_theta(ts, 2.0, dtau);
    }
    CHECK(distance(ts) * 4.0 < d0);
}

TEST_CASE("entropy trace CSV") {
    namespace fs = std::filesystem;
    std::vector<EntropyRecord> recs{{0.0, 1.0, 0.1, 0.0, std::nan("")},
                                    {0.5, 0.9, 0.05, 0.01, -0.2}};
    const fs::path path = fs::temp_directory_path() / "spme_entropy_test.csv";
    write_entropy_csv(path, recs);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "tau,H,I1,I2,dH_dtau_numeric");
    int rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 2);
}
