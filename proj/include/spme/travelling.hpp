#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <vector>

#include "spme/field.hpp"

namespace spme {

/// Which closed form the wave takes. LeftMoving is
///   u^i(x,t) = c_i (c_hat t - x.e)_+^{1/(m-1)}   (support grows along +e),
/// RightMoving the mirrored
///   u^i(x,t) = c_i (c_hat t + x.e)_+^{1/(m-1)}.
enum class WaveOrientation { LeftMoving, RightMoving };

/// c_hat = (1/(m-1)) (sum c_i^2)^{(m-1)/2}.
double speed_from_coeffs(std::span<const double> coeffs, double m);

/// One-directional travelling wave: every species shares the direction, the
/// orientation and the speed; amplitudes are tied to the speed by the law
/// above. No mixed-orientation wave exists.
class TravellingWave {
public:
    TravellingWave(int dim, std::array<double, 2> direction, std::vector<double> coeffs,
                   WaveOrientation orientation, double m);

    /// Factory taking per-species orientations; anything non-uniform throws
    /// MixedOrientationError.
    static TravellingWave from_orientations(int dim, std::array<double, 2> direction,
                                            std::vector<double> coeffs,
                                            std::span<const WaveOrientation> orientations,
                                            double m);

    int dim() const noexcept { return dim_; }
    int species_count() const noexcept { return int(coeffs_.size()); }
    const std::array<double, 2>& direction() const noexcept { return e_; }
    std::span<const double> coeffs() const noexcept { return coeffs_; }
    WaveOrientation orientation() const noexcept { return orientation_; }
    double exponent_m() const noexcept { return m_; }
    double speed() const noexcept { return speed_; }

    double evaluate(int species, std::span<const double> x, double t) const;
    double evaluate1d(int species, double x, double t) const;

    /// Profile g^i(s) of the wave, u^i = g^i(phase), with
    /// phase = x.e - c_hat t (LeftMoving) or x.e + c_hat t (RightMoving).
    double profile(int species, double s) const;

    /// Wave sampled on a 1D grid.
    SpeciesState sample(const Grid& grid, double t) const;

private:
    int dim_;
    std::array<double, 2> e_;
    std::vector<double> coeffs_;
    WaveOrientation orientation_;
    double m_;
    double speed_;
};

/// Max over samples and species of the travelling ODE first-integral defect,
/// with the profile derivative taken by centered differences at spacing h_s.
/// Samples inside a band of width 5 h_s around the front are skipped (the
/// continuum derivative blows up there for m > 2).
double ode_residual(const TravellingWave& wave, double m,
                    std::span<const double> s_samples, double h_s);

/// u_eps(x,t) = eps^{1/(m-1)} u(x/eps, t/eps) as a grid operation: values
/// scale by eps^{1/(m-1)}, spacing and time by eps. Travelling waves are
/// fixed points; source-type solutions are not.
SpeciesState epsilon_scale(const SpeciesState& state, double epsilon, double m);

struct WaveErrorRow {
    double h = 0.0;
    double l1 = 0.0;
    double linf = 0.0;
    double order_estimate = 0.0;     // NaN on the first row
    std::vector<double> l1_species;  // per-species split of l1
};

/// Manufactured-solution run: the solver advances the wave on [x_lo, x_hi]
/// from t0 to t_end with time-dependent Dirichlet boundary values from the
/// closed form, once per mesh width in `hs`; returns the error table.
/// Throws ConfigurationError if the front is not inside the domain for the
/// whole window.
std::vector<WaveErrorRow> dirichlet_tw_run(const TravellingWave& wave, double x_lo,
                                           double x_hi, double t0, double t_end,
                                           std::span<const double> hs);

/// `h,L1,Linf,order_estimate` rows.
void write_wave_errors_csv(const std::filesystem::path& path,
                           std::span<const WaveErrorRow> rows);

}  // namespace spme
