#ifndef FQM_TEST_SUPPORT_HPP
#define FQM_TEST_SUPPORT_HPP

#include <random>

#include "fqm/core.hpp"

namespace fqm::test {

// Smooth random state: a few random Gaussians with random momenta, so every
// quantity stays resolved on the grid.
inline WaveFunction random_state(const SpatialGrid& grid, std::mt19937_64& rng) {
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

inline double relative_l2(const ComplexField& a, const ComplexField& b) {
    return std::sqrt((a - b).abs2().sum() / b.abs2().sum());
}

}  // namespace fqm::test

#endif
