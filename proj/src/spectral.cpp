#include "fqm/spectral.hpp"

#include <vector>

#include <unsupported/Eigen/FFT>

namespace fqm::spectral {

namespace {

// Eigen::FFT caches plans internally, so each thread keeps its own.
Eigen::FFT<double>& engine() {
    thread_local Eigen::FFT<double> fft;
    return fft;
}

void transform(ComplexField& data, const SpatialGrid& grid, bool inverse) {
    const Eigen::Index n = grid.points_per_axis();
    auto& fft = engine();
    std::vector<Complex> line(static_cast<std::size_t>(n));
    std::vector<Complex> out(static_cast<std::size_t>(n));
    Eigen::Index stride = 1;
    for (int axis = 0; axis < grid.dim(); ++axis) {
        const Eigen::Index block = stride * n;
        for (Eigen::Index outer = 0; outer < data.size(); outer += block) {
            for (Eigen::Index inner = 0; inner < stride; ++inner) {
                const Eigen::Index base = outer + inner;
                for (Eigen::Index i = 0; i < n; ++i) line[i] = data[base + i * stride];
                if (inverse) {
                    fft.inv(out, line);
                } else {
                    fft.fwd(out, line);
                }
                for (Eigen::Index i = 0; i < n; ++i) data[base + i * stride] = out[i];
            }
        }
        stride = block;
    }
}

}  // namespace

ComplexField forward(const ComplexField& values, const SpatialGrid& grid) {
    ComplexField data = values;
    transform(data, grid, false);
    return data;
}

ComplexField inverse(const ComplexField& values, const SpatialGrid& grid) {
    ComplexField data = values;
    transform(data, grid, true);
    return data;
}

ComplexField apply_multiplier(const ComplexField& values, const SpatialGrid& grid,
                              const ComplexField& multiplier) {
    ComplexField data = values;
    transform(data, grid, false);
    data *= multiplier;
    transform(data, grid, true);
    return data;
}

ComplexField apply_multiplier(const ComplexField& values, const SpatialGrid& grid,
                              const RealField& multiplier) {
    ComplexField data = values;
    transform(data, grid, false);
    data *= multiplier.cast<Complex>();
    transform(data, grid, true);
    return data;
}

}  // namespace fqm::spectral
