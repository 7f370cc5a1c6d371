#include "doctest.h"
#include "fqm/current.hpp"
#include "fqm/dynamics.hpp"
#include "support.hpp"

using namespace fqm;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> values) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values) v[i++] = x;
    return v;
}

// Eighth-order centred first derivative on a periodic line.
ComplexField stencil_derivative(const ComplexField& f, double h) {
    static const double c[4] = {4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
    const Eigen::Index n = f.size();
    ComplexField out = ComplexField::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int k = 1; k <= 4; ++k) out[i] += c[k - 1] * (f[(i + k) % n] - f[(i - k + n) % n]);
    }
    return out / h;
}

}  // namespace

TEST_CASE("probability density") {
    const SpatialGrid box = make_grid(2, 16, 3.0);
    const WaveFunction flat = normalize(WaveFunction(box, ComplexField::Constant(box.size(), Complex(1.0, 2.0))));
    const DensityField rho = probability_density(flat);
    CHECK((rho.rho - 1.0 / 9.0).abs().maxCoeff() < 1e-15);

    const SpatialGrid line = make_grid(1, 256, 30.0);
    const WaveFunction g = normalize(WaveFunction::from_function(
        line, [](const Eigen::Vector3d& r) { return Complex(std::exp(-0.5 * r.squaredNorm())); }));
    const DensityField gr = probability_density(g);
    CHECK(std::abs(gr.total() - 1.0) < 1e-12);
    CHECK(gr.rho.minCoeff() >= 0.0);
    CHECK(probability_density(WaveFunction::zero(line)).rho.abs().maxCoeff() == 0.0);
}

TEST_CASE("velocity eigenvalue") {
    CHECK(velocity_eigenvalue(vec({3.0}), PhysicalParams(2.0, 0.5))[0] == doctest::Approx(3.0).epsilon(1e-15));
    // 1.5 * 4^{0.5} = 3
    CHECK(velocity_eigenvalue(vec({4.0}), PhysicalParams(1.5, 1.0))[0] == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(velocity_eigenvalue(vec({0.0, 0.0}), PhysicalParams(1.5, 1.0)).norm() == 0.0);
    const Eigen::VectorXd v = velocity_eigenvalue(vec({3.0, 4.0}), PhysicalParams(1.5, 1.0));
    CHECK(v.norm() == doctest::Approx(1.5 * std::sqrt(5.0)).epsilon(1e-15));
    CHECK(v[0] / v[1] == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("plane wave normalization carries unit flux") {
    const SpatialGrid grid = make_grid(1, 32, 2.0 * M_PI);
    const PhysicalParams params(2.0, 0.5);
    const WaveFunction w = plane_wave(vec({1.0}), params, grid);
    CHECK((w.amplitudes().abs() - 1.0).abs().maxCoeff() < 1e-15);
    CHECK(plane_wave_energy(vec({1.0}), params) == 0.5);
    const CurrentField j = current_density(w, params);
    CHECK((j.j.col(0) - 1.0).abs().maxCoeff() < 1e-10);

    CHECK_THROWS_AS(plane_wave(vec({0.0}), params, grid), std::invalid_argument);
    CHECK_THROWS_AS(plane_wave(vec({0.5}), params, grid), std::invalid_argument);
    CHECK_THROWS_AS(plane_wave(vec({-16.0}), params, grid), std::invalid_argument);
    CHECK_THROWS_AS(plane_wave(vec({1.0, 1.0}), params, grid), std::invalid_argument);

    const SpatialGrid square = make_grid(2, 16, 2.0 * M_PI);
    const PhysicalParams levy(1.5, 0.8);
    const Eigen::VectorXd p = vec({3.0, -4.0});
    const CurrentField j2 = current_density(plane_wave(p, levy, square), levy);
    for (Eigen::Index node = 0; node < square.size(); ++node) {
        CHECK(j2.j(node, 0) == doctest::Approx(0.6).epsilon(1e-10));
        CHECK(j2.j(node, 1) == doctest::Approx(-0.8).epsilon(1e-10));
    }
}

TEST_CASE("real states carry no current") {
    const SpatialGrid grid = make_grid(1, 128, 20.0);
    const WaveFunction real = WaveFunction::from_function(grid, [](const Eigen::Vector3d& r) {
        return Complex(std::exp(-0.5 * r.squaredNorm()) * (1.0 + r[0]));
    });
    for (double alpha : {1.3, 2.0}) {
        const PhysicalParams params(alpha, 0.5);
        CHECK(current_density(real, params).j.abs().maxCoeff() < 1e-12);
        CHECK(current_via_velocity(real, params).j.abs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("alpha = 2 current matches the stencil current") {
    const SpatialGrid grid = make_grid(1, 512, 30.0);
    std::mt19937_64 rng(21);
    const WaveFunction psi = test::random_state(grid, rng);
    const PhysicalParams params(2.0, 0.5);
    // Textbook j = (hbar / m) Im(psi* psi'), m = 1.
    const ComplexField d = stencil_derivative(psi.amplitudes(), grid.spacing());
    const RealField textbook = (psi.amplitudes().conjugate() * d).imag();
    const CurrentField j = current_density(psi, params);
    CHECK((j.j.col(0) - textbook).abs().maxCoeff() < 1e-6 * textbook.abs().maxCoeff());
    CHECK(j.imaginary_residue < 1e-10);
}

TEST_CASE("both current constructions agree") {
    const SpatialGrid grid = make_grid(2, 32, 12.0);
    std::mt19937_64 rng(17);
    for (double alpha : {1.2, 1.5, 2.0}) {
        const PhysicalParams params(alpha, 0.7);
        for (int trial = 0; trial < 5; ++trial) {
            const WaveFunction psi = test::random_state(grid, rng);
            const CurrentField a = current_density(psi, params);
            const CurrentField b = current_via_velocity(psi, params);
            CHECK((a.j - b.j).abs().maxCoeff() < 1e-10 * std::max(1.0, a.j.abs().maxCoeff()));
        }
    }
}

TEST_CASE("spectral divergence beats centred differences by an h^2 law") {
    auto field = [](double x) { return std::exp(-0.5 * x * x) * std::sin(2.0 * x); };
    auto derivative = [](double x) {
        return std::exp(-0.5 * x * x) * (2.0 * std::cos(2.0 * x) - x * std::sin(2.0 * x));
    };
    auto errors = [&](Eigen::Index n) {
        const SpatialGrid grid = make_grid(1, n, 24.0);
        CurrentField j{grid, Eigen::ArrayXXd(n, 1), 0.0};
        for (Eigen::Index i = 0; i < n; ++i) j.j(i, 0) = field(grid.coordinate(i));
        const RealField spectral = divergence(j, 1.0);
        double spectral_err = 0.0;
        double fd_err = 0.0;
        const double h = grid.spacing();
        for (Eigen::Index i = 0; i < n; ++i) {
            const double x = grid.coordinate(i);
            const double exact = derivative(x);
            spectral_err = std::max(spectral_err, std::abs(spectral[i] - exact));
            fd_err = std::max(fd_err, std::abs((field(x + h) - field(x - h)) / (2.0 * h) - exact));
        }
        return std::pair{spectral_err, fd_err};
    };
    const auto [s1, f1] = errors(128);
    const auto [s2, f2] = errors(256);
    CHECK(s1 < 1e-12);
    CHECK(s2 < 1e-12);
    CHECK(f1 / f2 == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("continuity residuals") {
    const SpatialGrid grid = make_grid(1, 256, 32.0);
    const PhysicalParams params(1.5, 1.0);
    const EvolutionPlan plan(params, sample_potential(PotentialSpec::power_law(1.0, 1.5), grid), 0.01);
    std::mt19937_64 rng(8);
    WaveFunction psi = test::random_state(grid, rng);
    for (int s = 0; s < 20; ++s) {
        const WaveFunction next = split_step(plan, psi, 1);
        CHECK(continuity_residual(psi, next, 0.01, params).global < 1e-10);
        psi = next;
    }

    // A plane wave is stationary in density with uniform current.
    const SpatialGrid ring = make_grid(1, 64, 2.0 * M_PI);
    const WaveFunction w = plane_wave(vec({3.0}), params, ring);
    const EvolutionPlan free(params, sample_potential(PotentialSpec::free(), ring), 0.01);
    const ContinuityResidual r = continuity_residual(w, split_step(free, w, 1), 0.01, params);
    CHECK(r.global < 1e-10);
    CHECK(r.pointwise < 1e-10);

    CHECK_THROWS_AS(continuity_residual(w, w, 0.0, params), std::invalid_argument);
    CHECK_THROWS_AS(continuity_residual(w, WaveFunction::zero(grid), 0.01, params), std::invalid_argument);
}
