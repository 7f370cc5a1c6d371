#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "csv.hpp"
#include "fqm/current.hpp"
#include "fqm/dynamics.hpp"
#include "fqm/kernel.hpp"
#include "fqm/riesz.hpp"
#include "fqm/spectra.hpp"

namespace fqm::cli {

namespace {

namespace fs = std::filesystem;

SpatialGrid grid_of(const RunConfig& config) {
    return make_grid(config.grid.dim, config.grid.points, config.grid.extent);
}

Eigen::VectorXd to_vector(const std::vector<double>& values) {
    return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

// Sum of four random Gaussian packets with random kicks, normalized.
WaveFunction random_state(const SpatialGrid& grid, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    const double half = 0.25 * grid.extent();
    ComplexField sum = ComplexField::Zero(grid.size());
    for (int g = 0; g < 4; ++g) {
        Eigen::Vector3d centre = Eigen::Vector3d::Zero();
        Eigen::Vector3d kick = Eigen::Vector3d::Zero();
        for (int axis = 0; axis < grid.dim(); ++axis) {
            centre[axis] = half * uniform(rng);
            kick[axis] = 3.0 * uniform(rng);
        }
        const double width = 0.8 + 0.5 * (uniform(rng) + 1.0);
        const Complex weight(uniform(rng), uniform(rng));
        for (Eigen::Index node = 0; node < grid.size(); ++node) {
            const Eigen::Vector3d r = grid.position(node) - centre;
            sum[node] += weight * std::exp(Complex(-r.squaredNorm() / (2.0 * width * width), kick.dot(r)));
        }
    }
    return normalize(WaveFunction(grid, sum));
}

WaveFunction gaussian_state(const SpatialGrid& grid, const InitialStateConfig& s, double hbar) {
    Eigen::Vector3d centre = Eigen::Vector3d::Zero();
    Eigen::Vector3d p = Eigen::Vector3d::Zero();
    for (int axis = 0; axis < grid.dim(); ++axis) {
        centre[axis] = s.center[static_cast<std::size_t>(axis)];
        p[axis] = s.momentum[static_cast<std::size_t>(axis)];
    }
    const double w2 = s.width * s.width;
    return normalize(WaveFunction::from_function(grid, [&](const Eigen::Vector3d& r) {
        const Eigen::Vector3d d = r - centre;
        return std::exp(Complex(-d.squaredNorm() / (2.0 * w2), p.dot(d) / hbar));
    }));
}

WaveFunction initial_state(const RunConfig& config, const SpatialGrid& grid) {
    InitialStateConfig s;
    if (config.initial_state) {
        s = *config.initial_state;
    } else {
        s.center.assign(static_cast<std::size_t>(grid.dim()), 0.0);
        s.momentum = s.center;
    }
    if (s.kind == "plane_wave") {
        try {
            return plane_wave(to_vector(s.momentum), config.params, grid);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(config.source, 1, std::string("initial_state.momentum: ") + e.what());
        }
    }
    if (s.kind == "random") {
        std::mt19937_64 rng(config.seed);
        return random_state(grid, rng);
    }
    return gaussian_state(grid, s, config.params.hbar());
}

PotentialField potential_of(const RunConfig& config, const SpatialGrid& grid) {
    return sample_potential(config.potential, grid);
}

void write_units(const RunConfig& config, const fs::path& out) {
    CsvWriter csv(out / "units.csv", {"quantity", "unit"});
    csv.row({std::string("system"), config.units.system});
    csv.row({std::string("length"), config.units.length});
    csv.row({std::string("time"), config.units.time});
    csv.row({std::string("energy"), config.units.energy});
    csv.close();
}

const char* axis_names[] = {"x", "y", "z"};

// Position, amplitude, density and (optionally) current per node.
void write_field(const fs::path& path, const WaveFunction& psi, const PhysicalParams& params, bool with_current) {
    const SpatialGrid& grid = psi.grid();
    std::vector<std::string> header;
    for (int axis = 0; axis < grid.dim(); ++axis) header.push_back(axis_names[axis]);
    for (const char* name : {"re", "im", "rho"}) header.push_back(name);
    CurrentField j;
    if (with_current) {
        j = current_density(psi, params);
        for (int axis = 0; axis < grid.dim(); ++axis) header.push_back(std::string("j_") + axis_names[axis]);
    }
    CsvWriter csv(path, header);
    const ComplexField& a = psi.amplitudes();
    for (Eigen::Index node = 0; node < grid.size(); ++node) {
        std::vector<CsvCell> cells;
        const Eigen::Vector3d r = grid.position(node);
        for (int axis = 0; axis < grid.dim(); ++axis) cells.push_back(r[axis]);
        cells.push_back(a[node].real());
        cells.push_back(a[node].imag());
        cells.push_back(std::norm(a[node]));
        if (with_current) {
            for (int axis = 0; axis < grid.dim(); ++axis) cells.push_back(j.j(node, axis));
        }
        csv.row(cells);
    }
    csv.close();
}

double energy_of(const RieszOperator& op, const PotentialField& v, const WaveFunction& psi) {
    return energy_expectation(op, v, psi).real() / psi.norm_squared();
}

int cmd_evolve(const RunConfig& config, const fs::path& out, std::ostream& log) {
    const EvolveConfig& e = *config.evolve;
    const SpatialGrid grid = grid_of(config);
    const EvolutionPlan plan(config.params, potential_of(config, grid), e.dt);
    WaveFunction psi = initial_state(config, grid);
    const double norm0 = psi.norm();

    CsvWriter diag(out / "diagnostics.csv",
                   {"step", "t", "norm", "energy", "continuity_global", "continuity_pointwise"});
    double worst_drift = 0.0;
    for (long step = 0;; ++step) {
        const double t = static_cast<double>(step) * e.dt;
        if (e.snapshot_every > 0 && step % e.snapshot_every == 0) {
            std::ostringstream name;
            name << "snapshot_" << std::setw(8) << std::setfill('0') << step << ".csv";
            write_field(out / name.str(), psi, config.params, true);
        }
        const double norm = psi.norm();
        worst_drift = std::max(worst_drift, std::abs(norm - norm0) / norm0);
        const double energy = energy_of(plan.riesz(), plan.potential(), psi);
        if (step == e.steps) {
            diag.row({step, t, norm, energy, std::string(), std::string()});
            break;
        }
        const WaveFunction next = split_step(plan, psi, 1);
        const ContinuityResidual c = continuity_residual(psi, next, e.dt, config.params);
        diag.row({step, t, norm, energy, c.global, c.pointwise});
        psi = next;
    }
    diag.close();
    if (worst_drift > 1e-10) {
        log << "norm drift " << worst_drift << " exceeds 1e-10\n";
        return InvariantFailure;
    }
    return Success;
}

int cmd_groundstate(const RunConfig& config, const fs::path& out, std::ostream& log) {
    const GroundStateConfig& g = *config.groundstate;
    const SpatialGrid grid = grid_of(config);
    const EvolutionPlan plan(config.params, potential_of(config, grid), g.dt, Scheme::ImaginaryTime);
    const GroundStateResult result = imaginary_time_ground_state(plan, initial_state(config, grid), g.tol, g.max_iters);

    CsvWriter summary(out / "summary.csv", {"energy", "residual", "iterations", "final_dt", "converged"});
    summary.row({result.energy, result.residual, result.iterations, result.final_dt,
                 std::string(result.converged ? "true" : "false")});
    summary.close();
    write_field(out / "state.csv", result.state, config.params, false);
    if (!result.converged) {
        log << "ground state did not converge in " << result.iterations << " iterations (residual "
            << result.residual << ")\n";
        return NonConvergence;
    }
    return Success;
}

int cmd_spectrum(const RunConfig& config, const fs::path& out, std::ostream& log) {
    const SpectrumConfig& s = *config.spectrum;
    if (s.model == "bohr") {
        const BohrParams bp(config.params, s.coupling);
        CsvWriter levels(out / "levels.csv", {"n", "energy", "radius", "kinetic_energy"});
        for (long n = s.n_min; n <= s.n_max; ++n) {
            levels.row({n, bohr_energy(bp, n), bohr_radius(bp, n), bohr_kinetic_energy(bp, n)});
        }
        levels.close();
        CsvWriter transitions(out / "transitions.csv", {"k", "n", "omega"});
        for (long k = s.n_min; k <= s.n_max; ++k) {
            for (long n = s.n_min; n < k; ++n) transitions.row({k, n, transition_frequency(bp, k, n)});
        }
        transitions.close();
        return Success;
    }

    const OscillatorParams op(config.params, s.q2, s.beta);
    std::vector<std::string> header{"n", "energy"};
    if (s.oracle) {
        header.push_back("quadrature_energy");
        header.push_back("relative_deviation");
    }
    CsvWriter levels(out / "levels.csv", header);
    double worst = 0.0;
    int code = Success;
    for (long n = s.n_min; n <= s.n_max; ++n) {
        const double e = oscillator_level(op, n);
        std::vector<CsvCell> row{n, e};
        if (s.oracle) {
            try {
                const double q = oscillator_level_quadrature(op, n, s.oracle_tol);
                const double dev = std::abs(q - e) / std::abs(e);
                worst = std::max(worst, dev);
                row.push_back(q);
                row.push_back(dev);
            } catch (const ConvergenceError& err) {
                log << "n = " << n << ": " << err.what() << '\n';
                row.push_back(std::string("no_convergence"));
                row.push_back(std::string());
                code = NonConvergence;
            }
        }
        levels.row(row);
    }
    levels.close();
    if (worst > 1e-8) {
        log << "quadrature oracle deviates from the closed form by " << worst << '\n';
        return InvariantFailure;
    }
    return code;
}

int cmd_kernel(const RunConfig& config, const fs::path& out, std::ostream& log) {
    const KernelConfig& k = *config.kernel;
    const int dim = config.grid.dim;
    const bool reference = config.params.alpha() == 2.0;
    auto request_for = [&](double separation, double duration, int slices) {
        KernelRequest r;
        r.params = config.params;
        r.r_a = Eigen::VectorXd::Zero(dim);
        r.r_b = Eigen::VectorXd::Zero(dim);
        r.r_b[0] = separation;
        r.t_b = duration;
        r.slices = slices;
        return r;
    };
    bool failed = false;
    auto report = [&](const std::exception& e) {
        failed = true;
        log << e.what() << '\n';
        return std::string("no_convergence: ") + e.what();
    };

    CsvWriter table(out / "kernel.csv", {"separation", "duration", "re", "im", "magnitude", "phase",
                                         "reference_deviation", "status"});
    for (double t : k.durations) {
        for (double x : k.separations) {
            try {
                const Complex value = free_kernel(request_for(x, t, 1));
                CsvCell deviation = std::string();
                if (reference) {
                    const Complex exact = gaussian_free_kernel(config.params, x, t, dim);
                    deviation = std::abs(value - exact) / std::abs(exact);
                }
                table.row({x, t, value.real(), value.imag(), std::abs(value), std::arg(value), deviation,
                           std::string("ok")});
            } catch (const ConvergenceError& e) {
                table.row({x, t, std::string(), std::string(), std::string(), std::string(), std::string(),
                           report(e)});
            }
        }
    }
    table.close();

    CsvWriter composition(out / "composition.csv",
                          {"separation", "duration", "slices", "re", "im", "relative_difference", "status"});
    for (long n : k.slices) {
        for (double t : k.durations) {
            for (double x : k.separations) {
                try {
                    const Complex single = free_kernel(request_for(x, t, 1));
                    const Complex composed = compose_kernel(request_for(x, t, static_cast<int>(n)));
                    composition.row({x, t, n, composed.real(), composed.imag(),
                                     std::abs(composed - single) / std::abs(single), std::string("ok")});
                } catch (const ConvergenceError& e) {
                    composition.row({x, t, n, std::string(), std::string(), std::string(), report(e)});
                }
            }
        }
    }
    composition.close();

    CsvWriter residual(out / "residual.csv", {"separation", "duration", "probe_dt", "residual", "status"});
    if (k.residual_probe > 0.0) {
        for (double t : k.durations) {
            for (double x : k.separations) {
                try {
                    const double r = kernel_equation_residual(request_for(x, t, 1), k.residual_probe);
                    residual.row({x, t, k.residual_probe, r, std::string("ok")});
                } catch (const ConvergenceError& e) {
                    residual.row({x, t, k.residual_probe, std::string(), report(e)});
                }
            }
        }
    }
    residual.close();
    return failed ? NonConvergence : Success;
}

struct Check {
    std::string name;
    double measured;
    double budget;
    bool applicable = true;
};

int cmd_verify(const RunConfig& config, const fs::path& out, std::ostream& log) {
    const VerifyConfig v = config.verify.value_or(VerifyConfig{});
    const SpatialGrid grid = grid_of(config);
    const PhysicalParams& params = config.params;
    const PotentialField potential = potential_of(config, grid);
    const RieszOperator op(params, grid);
    const MomentumGrid momenta(grid, params.hbar());
    std::mt19937_64 rng(config.seed);
    std::vector<Check> checks;

    // Symmetric operator: <phi|H chi> = <H phi|chi>.
    double hermiticity = 0.0;
    double equivalence = 0.0;
    for (long trial = 0; trial < v.random_states; ++trial) {
        const WaveFunction phi = random_state(grid, rng);
        const WaveFunction chi = random_state(grid, rng);
        const WaveFunction h_phi = apply_hamiltonian(op, potential, phi);
        const WaveFunction h_chi = apply_hamiltonian(op, potential, chi);
        const double scale = phi.norm() * h_chi.norm() + h_phi.norm() * chi.norm();
        hermiticity = std::max(hermiticity, std::abs(inner_product(phi, h_chi) - inner_product(h_phi, chi)) / scale);

        const CurrentField a = current_density(phi, params);
        const CurrentField b = current_via_velocity(phi, params);
        equivalence = std::max(equivalence, (a.j - b.j).abs().maxCoeff() / std::max(1.0, a.j.abs().maxCoeff()));
    }
    checks.push_back({"hermiticity", hermiticity, 1e-10});

    // Every lattice plane wave, or an even stride through them on large grids.
    const Eigen::Index stride = std::max<Eigen::Index>(1, grid.size() / 4096);
    double eigen = 0.0;
    double flux = 0.0;
    for (Eigen::Index node = 0; node < grid.size(); node += stride) {
        const Eigen::Vector3d p = momenta.momentum(node);
        const WaveFunction wave = WaveFunction::from_function(
            grid, [&](const Eigen::Vector3d& r) { return std::exp(Complex(0.0, p.dot(r) / params.hbar())); });
        const double lambda = std::pow(p.norm(), params.alpha());
        const ComplexField diff = riesz_apply(op, wave).amplitudes() - lambda * wave.amplitudes();
        eigen = std::max(eigen, diff.abs().maxCoeff() / std::max(lambda, 1.0));

        bool admissible = p.norm() > 0.0;
        const auto idx = grid.unflatten(node);
        for (int axis = 0; axis < grid.dim(); ++axis) admissible = admissible && !momenta.is_nyquist(idx[axis]);
        if (admissible) {
            const Eigen::VectorXd pv = p.head(grid.dim());
            const CurrentField j = current_density(plane_wave(pv, params, grid), params);
            const Eigen::ArrayXd magnitude = j.j.square().rowwise().sum().sqrt();
            flux = std::max(flux, (magnitude - 1.0).abs().maxCoeff());
        }
    }
    checks.push_back({"eigenfunction", eigen, 1e-12});

    // Opposite-parity component of an even state in an even potential.
    const EvolutionPlan plan(params, potential, v.dt);
    {
        Check parity{"parity", 0.0, 1e-10, potential.is_even()};
        if (parity.applicable) {
            const WaveFunction seed = random_state(grid, rng);
            WaveFunction psi = normalize(seed + parity_flip(seed));
            for (long s = 0; s < v.parity_steps; ++s) {
                psi = split_step(plan, psi, 1);
                parity.measured = std::max(parity.measured, (Complex(0.5) * (psi - parity_flip(psi))).norm());
            }
        } else {
            log << "parity check skipped: potential is not even\n";
        }
        checks.push_back(parity);
    }

    {
        WaveFunction psi = random_state(grid, rng);
        const double norm0 = psi.norm_squared();
        double drift = 0.0;
        double global = 0.0;
        for (long s = 0; s < v.unitarity_steps; ++s) {
            WaveFunction next = split_step(plan, psi, 1);
            global = std::max(global, std::abs(next.norm_squared() - psi.norm_squared()) / v.dt);
            drift = std::max(drift, std::abs(next.norm_squared() - norm0) / norm0);
            psi = std::move(next);
        }
        checks.push_back({"unitarity", drift, 1e-10});
        checks.push_back({"continuity_global", global, 1e-10});
    }
    checks.push_back({"unit_flux", flux, 1e-10});
    checks.push_back({"current_equivalence", equivalence, 1e-10});

    CsvWriter csv(out / "verify.csv", {"invariant", "measured", "budget", "pass"});
    bool all = true;
    for (const Check& c : checks) {
        if (!c.applicable) {
            csv.row({c.name, std::string(), c.budget, std::string("skipped")});
            continue;
        }
        const bool pass = c.measured <= c.budget;
        all = all && pass;
        csv.row({c.name, c.measured, c.budget, std::string(pass ? "true" : "false")});
        if (!pass) log << c.name << ": " << c.measured << " exceeds " << c.budget << '\n';
    }
    csv.close();
    return all ? Success : InvariantFailure;
}

}  // namespace

int run_command(const std::string& subcommand, const RunConfig& config, const fs::path& out, std::ostream& log) {
    require_block(config, subcommand);
    fs::create_directories(out);
    write_units(config, out);
    if (subcommand == "evolve") return cmd_evolve(config, out, log);
    if (subcommand == "groundstate") return cmd_groundstate(config, out, log);
    if (subcommand == "spectrum") return cmd_spectrum(config, out, log);
    if (subcommand == "kernel") return cmd_kernel(config, out, log);
    if (subcommand == "verify") return cmd_verify(config, out, log);
    throw ConfigError(config.source, 1, "unknown subcommand '" + subcommand + "'");
}

}  // namespace fqm::cli
