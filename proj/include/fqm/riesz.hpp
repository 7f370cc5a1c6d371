#ifndef FQM_RIESZ_HPP
#define FQM_RIESZ_HPP

#include "fqm/core.hpp"

namespace fqm {

/// The quantum Riesz derivative (-hbar^2 Laplacian)^{alpha/2} on a periodic
/// grid, diagonal in momentum space with eigenvalue |p|^alpha.
///
/// The zero-momentum node maps to exactly 0 and the Nyquist node uses the
/// positive momentum magnitude, so the multiplier is parity symmetric.
class RieszOperator {
public:
    RieszOperator(PhysicalParams params, SpatialGrid grid);

    const PhysicalParams& params() const noexcept { return params_; }
    const SpatialGrid& grid() const noexcept { return grid_; }
    const RealField& multiplier() const noexcept { return multiplier_; }

private:
    PhysicalParams params_;
    SpatialGrid grid_;
    RealField multiplier_;
};

WaveFunction riesz_apply(const RieszOperator& op, const WaveFunction& psi);

/// d_alpha * riesz_apply(psi) + V psi.
WaveFunction apply_hamiltonian(const RieszOperator& op, const PotentialField& potential,
                               const WaveFunction& psi);

/// <psi|H|psi> including its (round-off) imaginary part.
Complex energy_expectation(const RieszOperator& op, const PotentialField& potential,
                           const WaveFunction& psi);

/// Real expectation value of H for a normalized state. Throws
/// std::invalid_argument if |norm^2 - 1| > 1e-6 and NumericalError if the
/// imaginary part exceeds 1e-10 (relative to max(1, |E|)).
double average_energy(const RieszOperator& op, const PotentialField& potential,
                      const WaveFunction& psi);

/// psi(r) -> psi(-r) through the centred index map; an involution.
WaveFunction parity_flip(const WaveFunction& psi);

}  // namespace fqm

#endif  // FQM_RIESZ_HPP
