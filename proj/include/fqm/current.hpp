#ifndef FQM_CURRENT_HPP
#define FQM_CURRENT_HPP

#include "fqm/core.hpp"

namespace fqm {

struct DensityField {
    SpatialGrid grid;
    RealField rho;

    /// \int rho dr.
    double total() const { return rho.sum() * grid.cell_volume(); }
};

struct CurrentField {
    SpatialGrid grid;
    /// One column per spatial component.
    Eigen::ArrayXXd j;
    /// Largest imaginary residue of the defining expression, before it was dropped.
    double imaginary_residue = 0.0;
};

DensityField probability_density(const WaveFunction& psi);

/// j = (D hbar / i) [psi* G psi - psi G psi*], G = (-hbar^2 Laplacian)^{alpha/2 - 1} grad,
/// realized as the momentum multiplier |p|^{alpha-2} (i p / hbar). The p = 0
/// node and each axis' Nyquist plane are mapped to zero. psi and psi* are
/// transformed separately.
CurrentField current_density(const WaveFunction& psi, const PhysicalParams& params);

/// alpha D |p|^{alpha-2} p, zero at p = 0.
Eigen::VectorXd velocity_eigenvalue(const Eigen::VectorXd& momentum, const PhysicalParams& params);

/// sqrt(alpha / 2v) exp(i p.r / hbar) with v = alpha D |p|^{alpha-1}, which
/// carries unit probability flux. p must be a non-zero lattice momentum with
/// no component on the Nyquist node.
WaveFunction plane_wave(const Eigen::VectorXd& momentum, const PhysicalParams& params, const SpatialGrid& grid);

/// Energy carried by a plane wave of momentum p, D |p|^alpha.
double plane_wave_energy(const Eigen::VectorXd& momentum, const PhysicalParams& params);

/// j = (1/alpha) [psi (v psi)* + psi* (v psi)] with the velocity operator
/// alpha D |p|^{alpha-2} p applied spectrally.
CurrentField current_via_velocity(const WaveFunction& psi, const PhysicalParams& params);

/// Spectral divergence of a current field.
RealField divergence(const CurrentField& current, double hbar);

struct ContinuityResidual {
    /// |d/dt \int rho| from the two snapshots.
    double global = 0.0;
    /// L2 norm of (rho(t+dt) - rho(t))/dt + div (j(t) + j(t+dt))/2.
    double pointwise = 0.0;
};

/// Continuity diagnostics between consecutive real-time snapshots. The
/// pointwise value is second order in dt for alpha = 2; for alpha < 2 it is a
/// diagnostic only.
ContinuityResidual continuity_residual(const WaveFunction& psi_t, const WaveFunction& psi_next, double dt,
                                       const PhysicalParams& params);

}  // namespace fqm

#endif  // FQM_CURRENT_HPP
