#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "spme/field.hpp"

namespace spme {

/// State in similarity variables: theta^i(eta, tau) = t^{a1} u^i(x, t) on the
/// eta = x t^{-a2} grid, tau = log t. The rescaled flow obeys
///     (theta^i)_tau = div( m Theta^{m-1} grad theta^i ) + a2 div(eta theta^i)
/// with Theta = |theta|.
struct RescaledState {
    Grid grid;  // eta-grid
    double tau = 0.0;
    std::vector<std::vector<double>> theta;

    static RescaledState create(Grid grid, std::vector<std::vector<double>> theta,
                                double tau);

    int species_count() const noexcept { return int(theta.size()); }
    std::size_t cells() const noexcept { return grid.cell_count(); }
};

/// Pure coordinate relabeling of a physical state with time > 0.
RescaledState to_selfsimilar(const SpeciesState& state, double m);

/// Combined diffusion/drift stability bound with a safety factor.
double stable_dtau(const RescaledState& state, double m, double safety = 0.9);

/// One forward-Euler update: shared-diffusivity fluxes as in the physical
/// solver plus the confining drift in conservative form, upwinded per face
/// by the sign of eta. Zero-flux at the (padded) boundary.
RescaledState step_theta(const RescaledState& state, double m, double dtau);

/// Entropy H, its two dissipation integrals and (along traces) the measured
/// finite-difference slope of H.
struct EntropyRecord {
    double tau = 0.0;
    double H = 0.0;
    double I1 = 0.0;
    double I2 = 0.0;
    double dH_dtau_numeric = 0.0;  // NaN on the first record of a trace
};

/// Midpoint quadrature of
///   H  = integral( Theta^m/(m-1) + a2/2 |eta|^2 Theta ),
///   I1 = integral( Theta |grad( m/(m-1) Theta^{m-1} + a2/2 |eta|^2 )|^2 ),
///   I2 = m integral( Theta^{m-2} (m/(m-1) Theta^{m-1} + a2/2 |eta|^2)
///                    (sum_i |grad theta^i|^2 - |grad Theta|^2) ).
/// Gradients are centered differences taken on cells where Theta exceeds the
/// support floor; the integrands vanish outside the support.
EntropyRecord entropy(const RescaledState& state, double m);

/// Evolve and record the entropy every `stride` accepted steps plus at
/// tau_end; each record after the first carries the discrete dH/dtau.
std::vector<EntropyRecord> entropy_trace(const RescaledState& initial, double m,
                                         double tau_end, int stride);

/// `tau,H,I1,I2,dH_dtau_numeric` rows.
void write_entropy_csv(const std::filesystem::path& path,
                       std::span<const EntropyRecord> records);

}  // namespace spme
