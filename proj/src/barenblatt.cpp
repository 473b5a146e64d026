#include "spme/barenblatt.hpp"

#include <cmath>
#include <cstdio>

#include "spme/detail/numerics.hpp"
#include "spme/errors.hpp"

namespace spme {

using detail::ppow;

SelfSimilarExponents coefficients(double m, int n) {
    if (!(m > 1.0)) throw ParameterError("slow-diffusion range requires m > 1");
    if (n != 1 && n != 2) throw ParameterError("dimension must be 1 or 2");
    const double a1 = n / ((m - 1.0) * n + 2.0);
    return {a1, a1 / n, a1 * (m - 1.0) / (2.0 * m * n)};
}

double profile_quadrature_mass(double c, double m, int n) {
    const SelfSimilarExponents coef = coefficients(m, n);
    const double p = 1.0 / (m - 1.0);
    const double radius = std::sqrt(c / coef.a3);
    if (n == 1) {
        // Composite midpoint on the support interval; midpoints avoid the
        // free-boundary endpoints where the integrand has a power kink.
        const int npts = 1 << 16;
        const double h = 2.0 * radius / npts;
        detail::KahanSum sum;
        for (int i = 0; i < npts; ++i) {
            const double x = -radius + (i + 0.5) * h;
            sum.add(ppow(c - coef.a3 * x * x, p));
        }
        return sum.value() * h;
    }
    // 2D: midpoint lattice on the bounding square of the support ball.
    // The integrand is even per axis, so one quadrant carries the sum.
    const int npts = 1024;
    const int half = npts / 2;
    const double h = 2.0 * radius / npts;
    detail::KahanSum sum;
    for (int iy = 0; iy < half; ++iy) {
        const double y = (iy + 0.5) * h;
        const double cy = c - coef.a3 * y * y;
        for (int ix = 0; ix < half; ++ix) {
            const double x = (ix + 0.5) * h;
            sum.add(ppow(cy - coef.a3 * x * x, p));
        }
    }
    return 4.0 * sum.value() * h * h;
}

double mass_constant(double mass, double m, int n) {
    if (!(mass > 0.0)) throw ParameterError("profile mass must be positive");
    coefficients(m, n);  // validates m, n

    double hi = 1.0;
    int guard = 0;
    while (profile_quadrature_mass(hi, m, n) < mass) {
        hi *= 2.0;
        if (++guard > 200) throw ParameterError("mass calibration bracket failed");
    }
    double lo = 0.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double got = profile_quadrature_mass(mid, m, n);
        if (std::abs(got - mass) <= 1e-12 * mass) return mid;
        (got < mass ? lo : hi) = mid;
        if (hi - lo <= 1e-16 * hi) break;
    }
    return 0.5 * (lo + hi);
}

BarenblattProfile::BarenblattProfile(double mass, double m, int n)
    : mass_(mass), m_(m), n_(n), c_(spme::mass_constant(mass, m, n)),
      coef_(coefficients(m, n)) {}

double BarenblattProfile::support_radius(double t) const {
    if (!(t > 0.0)) throw DomainError("support radius needs t > 0");
    return std::sqrt(c_ / coef_.a3) * std::pow(t, coef_.a2);
}

double BarenblattProfile::evaluate(std::span<const double> x, double t) const {
    if (!(t > 0.0)) throw DomainError("profile is defined for t > 0");
    double r2 = 0.0;
    for (int a = 0; a < n_; ++a) r2 += x[a] * x[a];
    const double t2a2 = std::pow(t, 2.0 * coef_.a2);
    const double arg = c_ - coef_.a3 * r2 / t2a2;
    return ppow(arg, 1.0 / (m_ - 1.0)) * std::pow(t, -coef_.a1);
}

double BarenblattProfile::evaluate1d(double x, double t) const {
    const double xs[1] = {x};
    return evaluate(std::span<const double>(xs, 1), t);
}

double BarenblattProfile::rescaled_profile(std::span<const double> eta) const {
    double r2 = 0.0;
    for (int a = 0; a < n_; ++a) r2 += eta[a] * eta[a];
    return ppow(c_ - coef_.a3 * r2, 1.0 / (m_ - 1.0));
}

double BarenblattProfile::rescaled_profile1d(double eta) const {
    const double e[1] = {eta};
    return rescaled_profile(std::span<const double>(e, 1));
}

double BarenblattProfile::species_value(std::span<const double> masses, int species,
                                        std::span<const double> x, double t) const {
    if (species < 0 || species >= int(masses.size()))
        throw ParameterError("species index out of range");
    double norm2 = 0.0;
    for (double mi : masses) {
        if (!(mi > 0.0)) throw ParameterError("species masses must be positive");
        norm2 += mi * mi;
    }
    return masses[species] / std::sqrt(norm2) * evaluate(x, t);
}

std::string BarenblattProfile::to_json() const {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "{\"M\":%.17g,\"m\":%.17g,\"n\":%d,\"C_M\":%.17g,"
                  "\"a1\":%.17g,\"a2\":%.17g,\"a3\":%.17g}",
                  mass_, m_, n_, c_, coef_.a1, coef_.a2, coef_.a3);
    return buf;
}

}  // namespace spme
