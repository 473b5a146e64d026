#pragma once

#include <span>
#include <string>

namespace spme {

/// The three self-similarity exponents of the source solution:
/// a1 = n/((m-1)n+2), a2 = a1/n, a3 = a1(m-1)/(2mn).
struct SelfSimilarExponents {
    double a1;
    double a2;
    double a3;
};

/// Exponents for the slow-diffusion range m > 1 in dimension n.
SelfSimilarExponents coefficients(double m, int n);

/// Source-type self-similar solution of u_t = div(m u^{m-1} grad u) with
/// prescribed L1 mass, compactly supported at every positive time:
///
///     B(x, t) = t^{-a1} (C - a3 |x|^2 / t^{2 a2})_+^{1/(m-1)}
///
/// The constant C is calibrated at construction so the integral over R^n
/// equals the requested mass.
class BarenblattProfile {
public:
    BarenblattProfile(double mass, double m, int n);

    double mass() const noexcept { return mass_; }
    double exponent_m() const noexcept { return m_; }
    int dim() const noexcept { return n_; }
    double mass_constant() const noexcept { return c_; }
    const SelfSimilarExponents& exponents() const noexcept { return coef_; }

    /// Radius of the support ball at time t.
    double support_radius(double t) const;

    /// Closed form at a point; zero outside the support ball. t must be > 0.
    double evaluate(std::span<const double> x, double t) const;
    double evaluate1d(double x, double t) const;

    /// Stationary profile in similarity variables,
    /// (C - a3 |eta|^2)_+^{1/(m-1)}; equals evaluate at t = 1.
    double rescaled_profile(std::span<const double> eta) const;
    double rescaled_profile1d(double eta) const;

    /// Species share of a k-species source solution: (M_i/|M|) B_{|M|}.
    /// The profile must carry mass |M| = sqrt(sum M_i^2).
    double species_value(std::span<const double> masses, int species,
                         std::span<const double> x, double t) const;

    /// {"M":..,"m":..,"n":..,"C_M":..,"a1":..,"a2":..,"a3":..}
    std::string to_json() const;

private:
    double value_from_arg(double arg, double t_pow_a1) const;

    double mass_;
    double m_;
    int n_;
    double c_;
    SelfSimilarExponents coef_;
};

/// Constant C such that the profile with that C carries the requested mass,
/// found by bisection against midpoint quadrature of the closed form at
/// t = 1 (relative mass tolerance 1e-12).
double mass_constant(double mass, double m, int n);

/// Midpoint-quadrature mass of the t = 1 profile with a given constant C;
/// exposed because calibration and tests share it.
double profile_quadrature_mass(double c, double m, int n);

}  // namespace spme
