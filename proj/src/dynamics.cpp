#include "fqm/dynamics.hpp"

#include <limits>
#include <sstream>

#include "fqm/spectral.hpp"

namespace fqm {

EvolutionPlan::EvolutionPlan(PhysicalParams params, PotentialField potential, double dt, Scheme scheme)
    : params_(params),
      potential_(std::move(potential)),
      dt_(dt),
      scheme_(scheme),
      riesz_(params, potential_.grid()) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw std::invalid_argument("evolution time step must be positive");
    }
    const double hbar = params_.hbar();
    const RealField v_exponent = potential_.values() * (0.5 * dt_ / hbar);
    const RealField t_exponent = riesz_.multiplier() * (params_.d_alpha() * dt_ / hbar);
    if (scheme_ == Scheme::RealTime) {
        half_potential_ = v_exponent.unaryExpr([](double a) { return std::polar(1.0, -a); });
        kinetic_ = t_exponent.unaryExpr([](double a) { return std::polar(1.0, -a); });
    } else {
        half_potential_ = (-v_exponent).exp().cast<Complex>();
        kinetic_ = (-t_exponent).exp().cast<Complex>();
    }
}

void EvolutionPlan::step(ComplexField& amplitudes) const {
    amplitudes *= half_potential_;
    amplitudes = spectral::apply_multiplier(amplitudes, grid(), kinetic_);
    amplitudes *= half_potential_;
}

WaveFunction split_step(const EvolutionPlan& plan, const WaveFunction& psi, long n_steps) {
    if (plan.scheme() != Scheme::RealTime) {
        throw std::invalid_argument("split_step needs a real-time plan");
    }
    if (psi.grid() != plan.grid() || psi.representation() != Representation::Position) {
        throw std::invalid_argument("split_step: wavefunction does not match the plan grid");
    }
    if (n_steps < 0) throw std::invalid_argument("split_step: negative step count");
    ComplexField amplitudes = psi.amplitudes();
    for (long s = 0; s < n_steps; ++s) {
        plan.step(amplitudes);
        if (!amplitudes.real().allFinite() || !amplitudes.imag().allFinite()) {
            std::ostringstream msg;
            msg << "split_step: non-finite amplitude after step " << s + 1 << " (dt = " << plan.dt() << ")";
            throw NumericalError(msg.str());
        }
    }
    return WaveFunction(plan.grid(), std::move(amplitudes));
}

double stationary_residual(const RieszOperator& op, const PotentialField& potential,
                           const WaveFunction& phi, double energy) {
    const WaveFunction h_phi = apply_hamiltonian(op, potential, phi);
    return (h_phi - Complex(energy) * phi).norm();
}

GroundStateResult imaginary_time_ground_state(const EvolutionPlan& plan, const WaveFunction& seed,
                                              double tol, long max_iters) {
    if (plan.scheme() != Scheme::ImaginaryTime) {
        throw std::invalid_argument("imaginary_time_ground_state needs an imaginary-time plan");
    }
    if (!(tol > 0.0)) throw std::invalid_argument("ground-state tolerance must be positive");
    if (max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");

    const RieszOperator& op = plan.riesz();
    const PotentialField& potential = plan.potential();
    const double min_dt = plan.dt() / 4096.0;

    EvolutionPlan current = plan;
    WaveFunction psi = normalize(seed);
    double energy = average_energy(op, potential, psi);
    double last_residual = std::numeric_limits<double>::infinity();
    long check_every = 0;
    long last_check = 0;
    auto reset_check_interval = [&] {
        check_every = std::max<long>(20, static_cast<long>(std::ceil(0.1 / current.dt())));
    };
    reset_check_interval();

    GroundStateResult result;
    for (long it = 1; it <= max_iters; ++it) {
        ComplexField amplitudes = psi.amplitudes();
        current.step(amplitudes);
        if (!amplitudes.real().allFinite() || !amplitudes.imag().allFinite()) {
            std::ostringstream msg;
            msg << "imaginary_time_ground_state: non-finite amplitude at iteration " << it;
            throw NumericalError(msg.str());
        }
        psi = normalize(WaveFunction(plan.grid(), std::move(amplitudes)));
        const double next_energy = average_energy(op, potential, psi);
        const double change = std::abs(next_energy - energy);
        energy = next_energy;
        result.iterations = it;

        if (change < tol && (last_check == 0 || it - last_check >= check_every || it == max_iters)) {
            last_check = it;
            const double residual = stationary_residual(op, potential, psi, energy);
            if (residual <= tol) {
                result.converged = true;
                result.residual = residual;
                break;
            }
            if (residual > 0.99 * last_residual && current.dt() > min_dt) {
                current = EvolutionPlan(plan.params(), potential, 0.5 * current.dt(), Scheme::ImaginaryTime);
                reset_check_interval();
                last_residual = std::numeric_limits<double>::infinity();
            } else {
                last_residual = residual;
            }
        }
    }
    if (!result.converged) {
        result.residual = stationary_residual(op, potential, psi, energy);
    }
    result.energy = energy;
    result.state = psi;
    result.final_dt = current.dt();
    return result;
}

}  // namespace fqm
