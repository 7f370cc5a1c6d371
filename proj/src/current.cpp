#include "fqm/current.hpp"

#include <sstream>

#include "fqm/spectral.hpp"

namespace fqm {

namespace {

void require_position(const WaveFunction& psi, const char* what) {
    if (psi.representation() != Representation::Position) {
        throw std::invalid_argument(std::string(what) + ": expected position representation");
    }
}

// |p|^{alpha-2} per node with the p = 0 node set to zero.
RealField radial_factor(const MomentumGrid& momenta, double alpha) {
    const RealField p2 = momenta.squared_magnitude();
    return p2.unaryExpr([alpha](double v) { return v > 0.0 ? std::pow(v, 0.5 * alpha - 1.0) : 0.0; });
}

}  // namespace

DensityField probability_density(const WaveFunction& psi) {
    require_position(psi, "probability_density");
    return DensityField{psi.grid(), psi.amplitudes().abs2()};
}

CurrentField current_density(const WaveFunction& psi, const PhysicalParams& params) {
    require_position(psi, "current_density");
    const SpatialGrid& grid = psi.grid();
    const MomentumGrid momenta(grid, params.hbar());
    const RealField radial = radial_factor(momenta, params.alpha());
    const ComplexField& amp = psi.amplitudes();
    const ComplexField conj = amp.conjugate();
    const ComplexField amp_hat = spectral::forward(amp, grid);
    const ComplexField conj_hat = spectral::forward(conj, grid);

    CurrentField out{grid, Eigen::ArrayXXd(grid.size(), grid.dim()), 0.0};
    const Complex prefactor = params.d_alpha() * params.hbar() / Complex(0.0, 1.0);
    for (int axis = 0; axis < grid.dim(); ++axis) {
        const ComplexField g = Complex(0.0, 1.0 / params.hbar()) * (radial * momenta.odd_component(axis)).cast<Complex>();
        const ComplexField g_psi = spectral::inverse(g * amp_hat, grid);
        const ComplexField g_conj = spectral::inverse(g * conj_hat, grid);
        const ComplexField j = prefactor * (conj * g_psi - amp * g_conj);
        out.j.col(axis) = j.real();
        const double scale = std::max(j.abs().maxCoeff(), std::numeric_limits<double>::min());
        out.imaginary_residue = std::max(out.imaginary_residue, j.imag().abs().maxCoeff() / scale);
    }
    return out;
}

Eigen::VectorXd velocity_eigenvalue(const Eigen::VectorXd& momentum, const PhysicalParams& params) {
    const double p2 = momentum.squaredNorm();
    if (p2 == 0.0) return Eigen::VectorXd::Zero(momentum.size());
    return params.alpha() * params.d_alpha() * std::pow(p2, 0.5 * params.alpha() - 1.0) * momentum;
}

WaveFunction plane_wave(const Eigen::VectorXd& momentum, const PhysicalParams& params, const SpatialGrid& grid) {
    if (momentum.size() != grid.dim()) throw std::invalid_argument("plane_wave: momentum dimension differs from grid");
    const MomentumGrid momenta(grid, params.hbar());
    const double half = static_cast<double>(grid.points_per_axis() / 2);
    for (int axis = 0; axis < grid.dim(); ++axis) {
        const double k = momentum[axis] / momenta.quantum();
        if (std::abs(k - std::round(k)) > 1e-9 * std::max(1.0, std::abs(k))) {
            std::ostringstream msg;
            msg << "plane_wave: momentum component " << momentum[axis] << " is not on the lattice (quantum "
                << momenta.quantum() << ")";
            throw std::invalid_argument(msg.str());
        }
        if (std::abs(std::round(k)) >= half) {
            throw std::invalid_argument("plane_wave: momentum component on or beyond the Nyquist node");
        }
    }
    const double magnitude = momentum.norm();
    if (magnitude == 0.0) throw std::invalid_argument("plane_wave: zero momentum has no flux normalization");
    const double speed = params.alpha() * params.d_alpha() * std::pow(magnitude, params.alpha() - 1.0);
    const double amplitude = std::sqrt(params.alpha() / (2.0 * speed));
    Eigen::Vector3d p = Eigen::Vector3d::Zero();
    p.head(grid.dim()) = momentum;
    const double hbar = params.hbar();
    return WaveFunction::from_function(grid, [&](const Eigen::Vector3d& r) {
        return std::polar(amplitude, p.dot(r) / hbar);
    });
}

double plane_wave_energy(const Eigen::VectorXd& momentum, const PhysicalParams& params) {
    return params.d_alpha() * std::pow(momentum.norm(), params.alpha());
}

CurrentField current_via_velocity(const WaveFunction& psi, const PhysicalParams& params) {
    require_position(psi, "current_via_velocity");
    const SpatialGrid& grid = psi.grid();
    const MomentumGrid momenta(grid, params.hbar());
    const RealField radial = radial_factor(momenta, params.alpha());
    const ComplexField& amp = psi.amplitudes();
    const ComplexField amp_hat = spectral::forward(amp, grid);

    CurrentField out{grid, Eigen::ArrayXXd(grid.size(), grid.dim()), 0.0};
    const double speed_scale = params.alpha() * params.d_alpha();
    for (int axis = 0; axis < grid.dim(); ++axis) {
        const RealField v = speed_scale * radial * momenta.odd_component(axis);
        const ComplexField v_psi = spectral::inverse(v.cast<Complex>() * amp_hat, grid);
        const ComplexField j = (amp * v_psi.conjugate() + amp.conjugate() * v_psi) / params.alpha();
        out.j.col(axis) = j.real();
        const double scale = std::max(j.abs().maxCoeff(), std::numeric_limits<double>::min());
        out.imaginary_residue = std::max(out.imaginary_residue, j.imag().abs().maxCoeff() / scale);
    }
    return out;
}

RealField divergence(const CurrentField& current, double hbar) {
    const SpatialGrid& grid = current.grid;
    const MomentumGrid momenta(grid, hbar);
    ComplexField sum = ComplexField::Zero(grid.size());
    for (int axis = 0; axis < grid.dim(); ++axis) {
        const ComplexField ik = Complex(0.0, 1.0 / hbar) * momenta.odd_component(axis).cast<Complex>();
        const ComplexField column = current.j.col(axis).cast<Complex>();
        sum += ik * spectral::forward(column, grid);
    }
    return spectral::inverse(sum, grid).real();
}

ContinuityResidual continuity_residual(const WaveFunction& psi_t, const WaveFunction& psi_next, double dt,
                                       const PhysicalParams& params) {
    if (psi_t.grid() != psi_next.grid()) throw std::invalid_argument("continuity_residual: snapshots on different grids");
    if (!(dt > 0.0)) throw std::invalid_argument("continuity_residual: dt must be positive");
    const DensityField before = probability_density(psi_t);
    const DensityField after = probability_density(psi_next);
    ContinuityResidual out;
    out.global = std::abs(after.total() - before.total()) / dt;

    CurrentField mean = current_density(psi_t, params);
    mean.j = 0.5 * (mean.j + current_density(psi_next, params).j);
    const RealField local = (after.rho - before.rho) / dt + divergence(mean, params.hbar());
    out.pointwise = std::sqrt(local.square().sum() * psi_t.grid().cell_volume());
    return out;
}

}  // namespace fqm
