#ifndef FQM_CORE_HPP
#define FQM_CORE_HPP

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace fqm {

using Complex = std::complex<double>;
using ComplexField = Eigen::ArrayXcd;
using RealField = Eigen::ArrayXd;

/// Raised when an iterative or quadrature procedure misses its tolerance.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double achieved)
        : std::runtime_error(what), achieved_(achieved) {}
    double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

/// Raised when a NaN or Inf shows up in a field.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Lévy index, generalized diffusion coefficient and Planck constant.
///
/// The defaults are the natural units in which alpha = 2 reproduces
/// atomic-unit quantum mechanics (hbar = 1, d_alpha = 1/2m with m = 1).
class PhysicalParams {
public:
    PhysicalParams() = default;
    PhysicalParams(double alpha, double d_alpha, double hbar = 1.0);

    double alpha() const noexcept { return alpha_; }
    double d_alpha() const noexcept { return d_alpha_; }
    double hbar() const noexcept { return hbar_; }

private:
    double alpha_ = 2.0;
    double d_alpha_ = 0.5;
    double hbar_ = 1.0;
};

/// Uniform periodic sampling of a cubic box centred on the origin.
///
/// Node i along an axis sits at (i - n/2) * spacing, so coordinates span
/// [-extent/2, extent/2) and the parity map i -> (n - i) mod n is an exact
/// grid symmetry. Flattened node index is i0 + n*(i1 + n*i2).
class SpatialGrid {
public:
    SpatialGrid() = default;

    int dim() const noexcept { return dim_; }
    Eigen::Index points_per_axis() const noexcept { return points_; }
    double extent() const noexcept { return extent_; }
    double spacing() const noexcept { return spacing_; }
    Eigen::Index size() const noexcept { return size_; }
    /// spacing^dim, the quadrature weight of one node.
    double cell_volume() const noexcept { return cell_volume_; }
    double volume() const noexcept;

    double coordinate(Eigen::Index axis_index) const noexcept {
        return static_cast<double>(axis_index - points_ / 2) * spacing_;
    }
    /// Per-axis indices of a flattened node.
    std::array<Eigen::Index, 3> unflatten(Eigen::Index node) const noexcept;
    Eigen::Index flatten(const std::array<Eigen::Index, 3>& idx) const noexcept;
    /// Node holding the position -r.
    Eigen::Index mirror(Eigen::Index node) const noexcept;
    Eigen::Vector3d position(Eigen::Index node) const noexcept;
    double radius(Eigen::Index node) const noexcept { return position(node).norm(); }

    bool operator==(const SpatialGrid& other) const noexcept {
        return dim_ == other.dim_ && points_ == other.points_ && extent_ == other.extent_;
    }
    bool operator!=(const SpatialGrid& other) const noexcept { return !(*this == other); }

private:
    friend SpatialGrid make_grid(int, Eigen::Index, double);

    int dim_ = 1;
    Eigen::Index points_ = 0;
    double extent_ = 0.0;
    double spacing_ = 0.0;
    Eigen::Index size_ = 0;
    double cell_volume_ = 0.0;
};

SpatialGrid make_grid(int dim, Eigen::Index points_per_axis, double extent_per_axis);

/// Discrete Fourier dual of a SpatialGrid: p_k = 2 pi hbar k / extent with
/// k in [-n/2, n/2). The single Nyquist node k = -n/2 has no partner.
class MomentumGrid {
public:
    MomentumGrid(const SpatialGrid& grid, double hbar);

    const SpatialGrid& grid() const noexcept { return grid_; }
    double hbar() const noexcept { return hbar_; }
    double quantum() const noexcept { return quantum_; }

    /// Signed integer wavenumber of DFT index i along one axis.
    Eigen::Index wavenumber(Eigen::Index axis_index) const noexcept {
        const auto n = grid_.points_per_axis();
        return axis_index < n / 2 ? axis_index : axis_index - n;
    }
    double axis_momentum(Eigen::Index axis_index) const noexcept {
        return quantum_ * static_cast<double>(wavenumber(axis_index));
    }
    bool is_nyquist(Eigen::Index axis_index) const noexcept {
        return axis_index == grid_.points_per_axis() / 2;
    }
    Eigen::Vector3d momentum(Eigen::Index node) const noexcept;
    /// |p|^2 per node.
    RealField squared_magnitude() const;
    /// One momentum component per node; zero at the Nyquist plane of that
    /// axis so that odd multipliers stay parity-antisymmetric.
    RealField odd_component(int axis) const;
    /// DFT node index holding momentum -p; the index map is the same as for
    /// positions.
    Eigen::Index mirror(Eigen::Index node) const noexcept { return grid_.mirror(node); }

private:
    SpatialGrid grid_;
    double hbar_;
    double quantum_;
};

enum class Representation { Position, Momentum };

/// Complex amplitudes on a SpatialGrid.
class WaveFunction {
public:
    WaveFunction() = default;
    WaveFunction(SpatialGrid grid, ComplexField amplitudes,
                 Representation representation = Representation::Position);

    static WaveFunction zero(const SpatialGrid& grid);
    static WaveFunction from_function(const SpatialGrid& grid,
                                      const std::function<Complex(const Eigen::Vector3d&)>& f);

    const SpatialGrid& grid() const noexcept { return grid_; }
    const ComplexField& amplitudes() const noexcept { return amplitudes_; }
    Representation representation() const noexcept { return representation_; }

    double norm_squared() const;
    double norm() const { return std::sqrt(norm_squared()); }

private:
    SpatialGrid grid_;
    ComplexField amplitudes_;
    Representation representation_ = Representation::Position;
};

WaveFunction normalize(const WaveFunction& psi);
Complex inner_product(const WaveFunction& phi, const WaveFunction& chi);
WaveFunction operator*(Complex factor, const WaveFunction& psi);
WaveFunction operator+(const WaveFunction& a, const WaveFunction& b);
WaveFunction operator-(const WaveFunction& a, const WaveFunction& b);

struct FreePotential {};

/// q2 * |r|^beta with 1 < beta <= 2.
struct PowerLawPotential {
    double q2;
    double beta;
};

/// Explicit node values, flattened in grid order.
struct TabulatedPotential {
    std::vector<double> samples;
};

struct PotentialSpec {
    std::variant<FreePotential, PowerLawPotential, TabulatedPotential> shape;
    std::string label;

    static PotentialSpec free(std::string label = "free");
    static PotentialSpec power_law(double q2, double beta, std::string label = "power_law");
    static PotentialSpec tabulated(std::vector<double> samples, std::string label = "tabulated");
};

class PotentialField {
public:
    PotentialField(SpatialGrid grid, RealField values);

    const SpatialGrid& grid() const noexcept { return grid_; }
    const RealField& values() const noexcept { return values_; }
    /// True when V(-r) == V(r) node by node.
    bool is_even() const;

private:
    SpatialGrid grid_;
    RealField values_;
};

PotentialField sample_potential(const PotentialSpec& spec, const SpatialGrid& grid);

/// Throws NumericalError naming `what` if any entry is NaN or Inf.
void require_finite(const ComplexField& field, const std::string& what);

/// Threads used for embarrassingly parallel loops; FQM_THREADS caps it.
unsigned worker_count();

/// Runs body(i) for i in [0, n). Each index is written independently, so
/// results do not depend on the thread count.
void parallel_for(Eigen::Index n, const std::function<void(Eigen::Index)>& body);

}  // namespace fqm

#endif  // FQM_CORE_HPP
