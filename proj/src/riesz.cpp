#include "fqm/riesz.hpp"

#include <sstream>

#include "fqm/spectral.hpp"

namespace fqm {

namespace {

void require_operand(const RieszOperator& op, const WaveFunction& psi, const char* what) {
    if (psi.grid() != op.grid()) {
        throw std::invalid_argument(std::string(what) + ": wavefunction grid differs from operator grid");
    }
    if (psi.representation() != Representation::Position) {
        throw std::invalid_argument(std::string(what) + ": expected position representation");
    }
}

}  // namespace

RieszOperator::RieszOperator(PhysicalParams params, SpatialGrid grid)
    : params_(params), grid_(std::move(grid)) {
    const MomentumGrid momenta(grid_, params_.hbar());
    // pow(|p|^2, alpha/2) keeps alpha = 2 exact and gives 0 at p = 0.
    multiplier_ = momenta.squared_magnitude().pow(0.5 * params_.alpha());
}

WaveFunction riesz_apply(const RieszOperator& op, const WaveFunction& psi) {
    require_operand(op, psi, "riesz_apply");
    return WaveFunction(op.grid(), spectral::apply_multiplier(psi.amplitudes(), op.grid(), op.multiplier()));
}

WaveFunction apply_hamiltonian(const RieszOperator& op, const PotentialField& potential,
                               const WaveFunction& psi) {
    require_operand(op, psi, "apply_hamiltonian");
    if (potential.grid() != op.grid()) {
        throw std::invalid_argument("apply_hamiltonian: potential grid differs from operator grid");
    }
    ComplexField out = spectral::apply_multiplier(psi.amplitudes(), op.grid(), op.multiplier());
    out = op.params().d_alpha() * out + potential.values().cast<Complex>() * psi.amplitudes();
    return WaveFunction(op.grid(), std::move(out));
}

Complex energy_expectation(const RieszOperator& op, const PotentialField& potential,
                           const WaveFunction& psi) {
    return inner_product(psi, apply_hamiltonian(op, potential, psi));
}

double average_energy(const RieszOperator& op, const PotentialField& potential,
                      const WaveFunction& psi) {
    const double n2 = psi.norm_squared();
    if (std::abs(n2 - 1.0) > 1e-6) {
        std::ostringstream msg;
        msg << "average_energy: state is not normalized (norm^2 = " << n2 << ")";
        throw std::invalid_argument(msg.str());
    }
    const Complex e = energy_expectation(op, potential, psi);
    if (std::abs(e.imag()) > 1e-10 * std::max(1.0, std::abs(e.real()))) {
        std::ostringstream msg;
        msg << "average_energy: imaginary part " << e.imag() << " breaks hermiticity";
        throw NumericalError(msg.str());
    }
    return e.real();
}

WaveFunction parity_flip(const WaveFunction& psi) {
    const auto& grid = psi.grid();
    ComplexField out(grid.size());
    for (Eigen::Index node = 0; node < grid.size(); ++node) {
        out[node] = psi.amplitudes()[grid.mirror(node)];
    }
    return WaveFunction(grid, std::move(out), psi.representation());
}

}  // namespace fqm
