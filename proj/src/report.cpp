#include "spme/report.hpp"

#include <algorithm>
#include <cstdio>

#include "spme/errors.hpp"

namespace spme {

double DiagnosticsReport::min_cs_slack() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& s : samples) m = std::min(m, s.cs_min_slack);
    return m;
}

double DiagnosticsReport::max_subsolution() const {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& s : samples) m = std::max(m, s.subsolution_max);
    return m;
}

void write_report_csv(const std::filesystem::path& path, const DiagnosticsReport& report) {
    std::FILE* f = std::fopen(path.string().c_str(), "w");
    if (!f) throw ConfigurationError("cannot open " + path.string() + " for writing");
    const int k = report.samples.empty() ? 0 : int(report.samples.front().masses.size());
    std::fprintf(f, "t");
    for (int s = 0; s < k; ++s) std::fprintf(f, ",mass_%d", s + 1);
    std::fprintf(f, ",max_norm");
    for (int s = 0; s < k; ++s) std::fprintf(f, ",support_cells_%d", s + 1);
    std::fprintf(f, ",support_cells_norm,min_pair_distance,cs_min_slack,subsolution_max,dt\n");
    for (const auto& rec : report.samples) {
        std::fprintf(f, "%.17g", rec.time);
        for (double m : rec.masses) std::fprintf(f, ",%.17g", m);
        std::fprintf(f, ",%.17g", rec.max_norm);
        for (const auto& s : rec.supports) std::fprintf(f, ",%zu", s.cell_count);
        double dmin = std::numeric_limits<double>::infinity();
        for (double d : rec.pair_support_distance) dmin = std::min(dmin, d);
        std::fprintf(f, ",%zu,%.17g,%.17g,%.17g,%.17g\n", rec.norm_support.cell_count,
                     dmin, rec.cs_min_slack, rec.subsolution_max, rec.dt);
    }
    std::fclose(f);
}

}  // namespace spme
