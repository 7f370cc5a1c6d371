#include <cstdlib>

#include "doctest.h"
#include "fqm/core.hpp"
#include "support.hpp"

using namespace fqm;

TEST_CASE("make_grid sizes and spacing") {
    const SpatialGrid line = make_grid(1, 256, 20.0);
    CHECK(line.spacing() == 0.078125);
    CHECK(line.size() == 256);

    const SpatialGrid cube = make_grid(3, 32, 10.0);
    CHECK(cube.size() == 32768);
    CHECK(cube.cell_volume() == doctest::Approx(std::pow(10.0 / 32.0, 3)).epsilon(1e-15));

    CHECK_THROWS_AS(make_grid(1, 100, 20.0), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(1, 4, 20.0), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(4, 32, 20.0), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(1, 64, -1.0), std::invalid_argument);
}

TEST_CASE("coordinates are centred and the parity map is an involution") {
    const SpatialGrid grid = make_grid(2, 16, 8.0);
    CHECK(grid.coordinate(0) == -4.0);
    CHECK(grid.coordinate(8) == 0.0);
    CHECK(grid.coordinate(15) == 3.5);
    for (Eigen::Index node = 0; node < grid.size(); ++node) {
        CHECK(grid.flatten(grid.unflatten(node)) == node);
        CHECK(grid.mirror(grid.mirror(node)) == node);
        const Eigen::Index m = grid.mirror(node);
        const auto idx = grid.unflatten(node);
        // The single unpaired plane sits at -extent/2.
        if (idx[0] != 0 && idx[1] != 0) CHECK(grid.position(m) == -grid.position(node));
    }
}

TEST_CASE("physical parameters are validated") {
    CHECK_THROWS_AS(PhysicalParams(1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(PhysicalParams(2.5, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(PhysicalParams(1.5, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(PhysicalParams(1.5, 1.0, -1.0), std::invalid_argument);
    const PhysicalParams natural;
    CHECK(natural.alpha() == 2.0);
    CHECK(natural.d_alpha() == 0.5);
    CHECK(natural.hbar() == 1.0);
}

TEST_CASE("normalize") {
    const SpatialGrid grid = make_grid(1, 64, 1.0);
    const WaveFunction flat(grid, ComplexField::Constant(grid.size(), 2.0));
    const WaveFunction unit = normalize(flat);
    CHECK((unit.amplitudes() - 1.0).abs().maxCoeff() < 1e-15);

    const SpatialGrid wide = make_grid(1, 256, 30.0);
    const WaveFunction gauss = normalize(WaveFunction::from_function(wide, [](const Eigen::Vector3d& r) {
        return std::exp(Complex(-0.5 * r.squaredNorm(), 0.3 * r[0]));
    }));
    CHECK((normalize(gauss).amplitudes() - gauss.amplitudes()).abs().maxCoeff() < 1e-14);
    CHECK(std::abs(gauss.norm_squared() - 1.0) < 1e-14);

    CHECK_THROWS_AS(normalize(WaveFunction::zero(grid)), std::invalid_argument);
}

TEST_CASE("inner product") {
    const SpatialGrid grid = make_grid(1, 128, 2.0 * M_PI);
    std::mt19937_64 rng(7);
    const WaveFunction psi = test::random_state(grid, rng);
    const Complex self = inner_product(psi, psi);
    CHECK(std::abs(self - 1.0) < 1e-12);
    CHECK(std::abs(inner_product(psi, Complex(0.0, 1.0) * psi) - Complex(0.0, 1.0)) < 1e-12);

    auto wave = [&](int k) {
        return WaveFunction::from_function(grid, [k](const Eigen::Vector3d& r) { return std::polar(1.0, k * r[0]); });
    };
    CHECK(std::abs(inner_product(wave(3), wave(5))) < 1e-12);
    CHECK(std::abs(inner_product(wave(-2), wave(7))) < 1e-12);

    const SpatialGrid other = make_grid(1, 64, 2.0 * M_PI);
    CHECK_THROWS_AS(inner_product(psi, WaveFunction::zero(other)), std::invalid_argument);
}

TEST_CASE("inner product is sesquilinear") {
    const SpatialGrid grid = make_grid(1, 128, 16.0);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        const WaveFunction a = test::random_state(grid, rng);
        const WaveFunction b = test::random_state(grid, rng);
        const WaveFunction c = test::random_state(grid, rng);
        const Complex s(u(rng), u(rng));
        const Complex t(u(rng), u(rng));
        const Complex linear = inner_product(a, s * b + t * c);
        CHECK(std::abs(linear - (s * inner_product(a, b) + t * inner_product(a, c))) < 1e-12);
        const Complex antilinear = inner_product(s * b + t * c, a);
        CHECK(std::abs(antilinear - (std::conj(s) * inner_product(b, a) + std::conj(t) * inner_product(c, a))) < 1e-12);
        CHECK(std::abs(inner_product(a, b) - std::conj(inner_product(b, a))) < 1e-15);
    }
}

TEST_CASE("wavefunctions reject non-finite amplitudes") {
    const SpatialGrid grid = make_grid(1, 8, 1.0);
    ComplexField bad = ComplexField::Zero(8);
    bad[3] = Complex(std::nan(""), 0.0);
    CHECK_THROWS_AS(WaveFunction(grid, bad), NumericalError);
    CHECK_THROWS_AS(WaveFunction(grid, ComplexField::Zero(7)), std::invalid_argument);
}

TEST_CASE("sample_potential") {
    const SpatialGrid grid = make_grid(1, 32, 16.0);
    CHECK(sample_potential(PotentialSpec::free(), grid).values().abs().maxCoeff() == 0.0);

    // Node 20 sits at (20 - 16) * 0.5 = 2, node 24 at 4.
    const PotentialField square = sample_potential(PotentialSpec::power_law(1.0, 2.0), grid);
    CHECK(grid.coordinate(20) == 2.0);
    CHECK(square.values()[20] == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(square.is_even());

    const double expected = 0.5 * (4.0 * 2.0);  // 0.5 * 4^{3/2}
    const PotentialField sub = sample_potential(PotentialSpec::power_law(0.5, 1.5), grid);
    CHECK(sub.values()[24] == doctest::Approx(expected).epsilon(1e-15));

    CHECK_THROWS_AS(PotentialSpec::power_law(1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(PotentialSpec::power_law(0.0, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(sample_potential(PotentialSpec::tabulated(std::vector<double>(31, 0.0)), grid),
                    std::invalid_argument);
    std::vector<double> ramp(32);
    for (int i = 0; i < 32; ++i) ramp[i] = i;
    const PotentialField table = sample_potential(PotentialSpec::tabulated(ramp), grid);
    CHECK(table.values()[31] == 31.0);
    CHECK_FALSE(table.is_even());
}

TEST_CASE("momentum lattice") {
    const SpatialGrid grid = make_grid(1, 16, 2.0 * M_PI);
    const MomentumGrid momenta(grid, 1.0);
    CHECK(momenta.quantum() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(momenta.wavenumber(0) == 0);
    CHECK(momenta.wavenumber(7) == 7);
    CHECK(momenta.wavenumber(8) == -8);
    CHECK(momenta.wavenumber(15) == -1);
    CHECK(momenta.is_nyquist(8));
    const RealField odd = momenta.odd_component(0);
    CHECK(odd[8] == 0.0);
    for (Eigen::Index i = 0; i < 16; ++i) CHECK(odd[momenta.mirror(i)] == -odd[i]);
}

TEST_CASE("parallel_for results do not depend on the thread count") {
    auto run = [] {
        std::vector<double> out(1000);
        parallel_for(1000, [&](Eigen::Index i) { out[i] = std::sin(0.37 * i) * std::exp(-1e-3 * i); });
        return out;
    };
    setenv("FQM_THREADS", "1", 1);
    CHECK(worker_count() == 1);
    const auto serial = run();
    unsetenv("FQM_THREADS");
    CHECK(run() == serial);

    CHECK_THROWS_AS(parallel_for(10, [](Eigen::Index i) {
                        if (i == 7) throw std::runtime_error("boom");
                    }),
                    std::runtime_error);
}
