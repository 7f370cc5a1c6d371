#ifndef FQM_DYNAMICS_HPP
#define FQM_DYNAMICS_HPP

#include "fqm/core.hpp"
#include "fqm/riesz.hpp"

namespace fqm {

enum class Scheme { RealTime, ImaginaryTime };

/// Precomputed Strang factors for a static potential:
/// half potential step, full kinetic step in momentum space, half potential step.
///
/// Real time uses the unitary phases exp(-i V dt / 2 hbar) and
/// exp(-i D |p|^alpha dt / hbar); imaginary time replaces them by the decay
/// factors exp(-V dt / 2 hbar) and exp(-D |p|^alpha dt / hbar).
class EvolutionPlan {
public:
    EvolutionPlan(PhysicalParams params, PotentialField potential, double dt,
                  Scheme scheme = Scheme::RealTime);

    const PhysicalParams& params() const noexcept { return params_; }
    const SpatialGrid& grid() const noexcept { return potential_.grid(); }
    const PotentialField& potential() const noexcept { return potential_; }
    double dt() const noexcept { return dt_; }
    Scheme scheme() const noexcept { return scheme_; }
    const RieszOperator& riesz() const noexcept { return riesz_; }

    /// One symmetric step applied in place.
    void step(ComplexField& amplitudes) const;

private:
    PhysicalParams params_;
    PotentialField potential_;
    double dt_;
    Scheme scheme_;
    RieszOperator riesz_;
    ComplexField half_potential_;
    ComplexField kinetic_;
};

/// n_steps real-time Strang steps. Every factor is a pure phase in its own
/// basis, so the norm is preserved to rounding. Throws NumericalError as soon
/// as a non-finite amplitude appears.
WaveFunction split_step(const EvolutionPlan& plan, const WaveFunction& psi, long n_steps);

/// L2 norm of H phi - E phi.
double stationary_residual(const RieszOperator& op, const PotentialField& potential,
                           const WaveFunction& phi, double energy);

struct GroundStateResult {
    double energy = 0.0;
    WaveFunction state;
    long iterations = 0;
    double residual = 0.0;
    bool converged = false;
    /// Step size in use when the solver stopped (it halves dt when the
    /// splitting bias, not iteration count, limits the residual).
    double final_dt = 0.0;
};

/// Imaginary-time relaxation with renormalization after every step.
///
/// Converged means |E_k - E_{k-1}| < tol and stationary_residual <= tol. The
/// Strang fixed point carries an O(dt^2) bias in the residual; when the
/// residual stops shrinking the step size is halved. On max_iters the last
/// iterate comes back with converged = false. The returned state has the
/// symmetry of the seed.
GroundStateResult imaginary_time_ground_state(const EvolutionPlan& plan, const WaveFunction& seed,
                                              double tol, long max_iters);

}  // namespace fqm

#endif  // FQM_DYNAMICS_HPP
