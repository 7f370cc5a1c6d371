#ifndef FQM_SPECTRAL_HPP
#define FQM_SPECTRAL_HPP

#include "fqm/core.hpp"

namespace fqm::spectral {

// Forward transform carries no prefactor; the inverse divides by n per axis,
// so inverse(forward(f)) == f up to rounding.
ComplexField forward(const ComplexField& values, const SpatialGrid& grid);
ComplexField inverse(const ComplexField& values, const SpatialGrid& grid);

/// inverse(multiplier * forward(values)).
ComplexField apply_multiplier(const ComplexField& values, const SpatialGrid& grid,
                              const ComplexField& multiplier);
ComplexField apply_multiplier(const ComplexField& values, const SpatialGrid& grid,
                              const RealField& multiplier);

}  // namespace fqm::spectral

#endif  // FQM_SPECTRAL_HPP
