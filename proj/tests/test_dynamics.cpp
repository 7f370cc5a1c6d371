#include "doctest.h"
#include "fqm/dynamics.hpp"
#include "support.hpp"

using namespace fqm;

namespace {

WaveFunction gaussian(const SpatialGrid& grid, double centre = 0.0, double kick = 0.0) {
    return normalize(WaveFunction::from_function(grid, [=](const Eigen::Vector3d& r) {
        const double x = r[0] - centre;
        return std::exp(Complex(-0.5 * x * x, kick * r[0]));
    }));
}

}  // namespace

TEST_CASE("free alpha = 2 Gaussian follows the analytic spreading law") {
    const SpatialGrid grid = make_grid(1, 512, 40.0);
    const EvolutionPlan plan(PhysicalParams(2.0, 0.5), sample_potential(PotentialSpec::free(), grid), 1e-3);
    const WaveFunction start = WaveFunction::from_function(grid, [](const Eigen::Vector3d& r) {
        return Complex(std::pow(M_PI, -0.25) * std::exp(-0.5 * r.squaredNorm()));
    });
    const WaveFunction end = split_step(plan, start, 1000);
    // psi(x, t) = pi^{-1/4} (1 + i t)^{-1/2} exp(-x^2 / (2 (1 + i t))) at t = 1.
    const WaveFunction exact = WaveFunction::from_function(grid, [](const Eigen::Vector3d& r) {
        const Complex s(1.0, 1.0);
        return std::pow(M_PI, -0.25) / std::sqrt(s) * std::exp(-r.squaredNorm() / (2.0 * s));
    });
    CHECK(test::relative_l2(end.amplitudes(), exact.amplitudes()) < 1e-6);
}

TEST_CASE("plane waves only pick up their energy phase") {
    const SpatialGrid grid = make_grid(1, 64, 2.0 * M_PI);
    for (double alpha : {1.1, 1.5, 1.9, 2.0}) {
        const PhysicalParams params(alpha, 0.6);
        const EvolutionPlan plan(params, sample_potential(PotentialSpec::free(), grid), 0.01);
        const WaveFunction w = WaveFunction::from_function(
            grid, [](const Eigen::Vector3d& r) { return std::polar(1.0, 4.0 * r[0]); });
        const WaveFunction end = split_step(plan, w, 100);
        const Complex phase = std::polar(1.0, -0.6 * std::pow(4.0, alpha) * 1.0);
        CHECK((end.amplitudes() - phase * w.amplitudes()).abs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("split_step bookkeeping") {
    const SpatialGrid grid = make_grid(1, 128, 20.0);
    const EvolutionPlan plan(PhysicalParams(1.5, 1.0), sample_potential(PotentialSpec::power_law(1.0, 1.5), grid), 0.01);
    std::mt19937_64 rng(1);
    const WaveFunction psi = test::random_state(grid, rng);
    CHECK((split_step(plan, psi, 0).amplitudes() == psi.amplitudes()).all());

    // Composition is exact because each call applies the same unfused factors.
    const WaveFunction joined = split_step(plan, psi, 30);
    const WaveFunction split = split_step(plan, split_step(plan, psi, 12), 18);
    CHECK((joined.amplitudes() == split.amplitudes()).all());

    WaveFunction walker = psi;
    for (int s = 0; s < 50; ++s) {
        const double before = walker.norm_squared();
        walker = split_step(plan, walker, 1);
        CHECK(std::abs(walker.norm_squared() - before) < 1e-12);
    }

    CHECK_THROWS_AS(split_step(plan, psi, -1), std::invalid_argument);
    const EvolutionPlan imaginary(plan.params(), plan.potential(), 0.01, Scheme::ImaginaryTime);
    CHECK_THROWS_AS(split_step(imaginary, psi, 1), std::invalid_argument);
    CHECK_THROWS_AS(EvolutionPlan(plan.params(), plan.potential(), 0.0), std::invalid_argument);
}

TEST_CASE("split_step reports non-finite amplitudes") {
    const SpatialGrid grid = make_grid(1, 16, 4.0);
    std::vector<double> huge(16, 1e308);
    // exp(-i V dt / 2) with V dt overflowing to inf yields NaN phases.
    const EvolutionPlan plan(PhysicalParams(), sample_potential(PotentialSpec::tabulated(huge), grid), 1e10);
    const WaveFunction psi(grid, ComplexField::Constant(16, 1.0));
    CHECK_THROWS_AS(split_step(plan, psi, 1), NumericalError);
}

TEST_CASE("energy drift shrinks four-fold when dt halves") {
    const SpatialGrid grid = make_grid(1, 256, 32.0);
    const PhysicalParams params(1.5, 1.0);
    const PotentialField trap = sample_potential(PotentialSpec::power_law(1.0, 2.0), grid);
    const RieszOperator op(params, grid);
    const WaveFunction start = gaussian(grid, 1.0, 0.5);
    auto drift = [&](double dt, long steps) {
        const EvolutionPlan plan(params, trap, dt);
        const double e0 = average_energy(op, trap, start);
        WaveFunction psi = start;
        double worst = 0.0;
        for (long s = 0; s < steps; s += 10) {
            psi = split_step(plan, psi, 10);
            worst = std::max(worst, std::abs(average_energy(op, trap, psi) - e0));
        }
        return worst;
    };
    const double coarse = drift(0.01, 1000);
    const double fine = drift(0.005, 2000);
    CHECK(coarse < 1e-3);
    CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("parity is conserved in an even potential") {
    const SpatialGrid grid = make_grid(1, 256, 32.0);
    const PhysicalParams params(1.5, 1.0);
    const EvolutionPlan plan(params, sample_potential(PotentialSpec::power_law(1.0, 1.5), grid), 0.01);
    const WaveFunction even = normalize(WaveFunction::from_function(grid, [](const Eigen::Vector3d& r) {
        return Complex(std::exp(-0.5 * (r[0] - 2.0) * (r[0] - 2.0)) + std::exp(-0.5 * (r[0] + 2.0) * (r[0] + 2.0)));
    }));
    WaveFunction psi = even;
    double worst = 0.0;
    for (int s = 0; s < 200; ++s) {
        psi = split_step(plan, psi, 1);
        const WaveFunction odd_part = Complex(0.5) * (psi - parity_flip(psi));
        worst = std::max(worst, odd_part.norm());
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("stationary_residual") {
    const SpatialGrid grid = make_grid(1, 64, 2.0 * M_PI);
    const PhysicalParams params(1.5, 1.0);
    const RieszOperator op(params, grid);
    const PotentialField free = sample_potential(PotentialSpec::free(), grid);
    const WaveFunction w = normalize(WaveFunction::from_function(
        grid, [](const Eigen::Vector3d& r) { return std::polar(1.0, 3.0 * r[0]); }));
    const double e = std::pow(3.0, 1.5);
    CHECK(stationary_residual(op, free, w, e) < 1e-12);
    CHECK(std::abs(stationary_residual(op, free, w, e + 1.0) - 1.0) < 1e-12);
}

TEST_CASE("harmonic ground state") {
    const SpatialGrid grid = make_grid(1, 256, 24.0);
    const PhysicalParams params(2.0, 0.5);
    const PotentialField trap = sample_potential(PotentialSpec::power_law(0.5, 2.0), grid);
    const EvolutionPlan plan(params, trap, 0.01, Scheme::ImaginaryTime);
    const GroundStateResult result = imaginary_time_ground_state(plan, gaussian(grid, 0.7, 0.0), 1e-8, 200000);
    REQUIRE(result.converged);
    CHECK(std::abs(result.energy - 0.5) < 1e-6);
    CHECK(result.residual <= 1e-8);
    // Compare up to the global phase.
    WaveFunction exact = gaussian(grid);
    const Complex overlap = inner_product(exact, result.state);
    const WaveFunction aligned = (std::abs(overlap) / overlap) * result.state;
    CHECK((aligned - exact).norm() < 1e-5);

    const RieszOperator op(params, grid);
    CHECK(std::abs(average_energy(op, trap, result.state) - result.energy) < 1e-8);
    CHECK(stationary_residual(op, trap, result.state, result.energy) <= 1e-8);
}

TEST_CASE("ground-state solver flags non-convergence") {
    const SpatialGrid grid = make_grid(1, 128, 20.0);
    const EvolutionPlan plan(PhysicalParams(), sample_potential(PotentialSpec::power_law(0.5, 2.0), grid), 0.01,
                             Scheme::ImaginaryTime);
    const GroundStateResult result = imaginary_time_ground_state(plan, gaussian(grid, 2.0), 1e-10, 1);
    CHECK_FALSE(result.converged);
    CHECK(result.iterations == 1);
    CHECK(std::abs(result.state.norm() - 1.0) < 1e-12);

    const EvolutionPlan real(plan.params(), plan.potential(), 0.01);
    CHECK_THROWS_AS(imaginary_time_ground_state(real, gaussian(grid), 1e-8, 10), std::invalid_argument);
}
