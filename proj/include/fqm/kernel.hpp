#ifndef FQM_KERNEL_HPP
#define FQM_KERNEL_HPP

#include <functional>
#include <span>

#include "fqm/core.hpp"

namespace fqm {

/// Endpoints and time interval of a free-particle kernel evaluation.
struct KernelRequest {
    PhysicalParams params;
    /// Positions, one coordinate (dim 1) or three (dim 3).
    Eigen::VectorXd r_a = Eigen::VectorXd::Zero(1);
    Eigen::VectorXd r_b = Eigen::VectorXd::Zero(1);
    double t_a = 0.0;
    double t_b = 1.0;
    /// Number of time slices for composed evaluation.
    int slices = 1;

    int dim() const noexcept { return static_cast<int>(r_a.size()); }
    double duration() const noexcept { return t_b - t_a; }
    double slice_duration() const noexcept { return duration() / slices; }
    /// Throws std::invalid_argument unless t_b > t_a, slices >= 1 and the
    /// endpoints share a supported dimension (1 or 3).
    void validate() const;
};

struct QuadratureOptions {
    /// Panel doubling stops when successive estimates agree to this.
    double relative_tolerance = 1e-12;
    /// Bound on the discarded momentum tail relative to the estimate.
    double tail_ratio = 1e-14;
    long max_panels = 1L << 17;
    /// Use the large-separation expansion where the stationary-phase part is negligible.
    bool separation_series = true;
};

struct KernelEvaluation {
    Complex value;
    double error_estimate = 0.0;
    /// Angle by which the momentum ray is turned below the real axis.
    double rotation = 0.0;
    double cutoff = 0.0;
    long panels = 0;
};

/// Free kernel (2 pi)^{-dim} \int d^dim k k^weight exp(i k.z - i c |k|^alpha)
/// for a (possibly complex) separation z along one direction.
///
/// The spreading parameter is c = D_alpha * T * hbar^(alpha - 1) and k = p / hbar.
/// The radial momentum integral runs along the ray k = s exp(-i theta), where
/// exp(-i c k^alpha) decays like exp(-c sin(alpha theta) s^alpha). theta is the
/// largest-decay angle whose exp(|Im k z|) growth stays below e^2.5, the
/// cutoff keeps the discarded tail under tail_ratio of the estimate, and the
/// Gauss-Legendre panel count doubles until self-convergence.
/// Throws ConvergenceError carrying the achieved relative error.
KernelEvaluation evaluate_free_kernel(Complex separation, double spreading, double alpha, int dim,
                                      const QuadratureOptions& options = {}, double weight = 0.0);

/// K_L(r_b t_b | r_a t_a) for V = 0, single slice.
Complex free_kernel(const KernelRequest& request, const QuadratureOptions& options = {});

/// Closed-form alpha = 2 propagator (m / 2 pi i hbar T)^{dim/2} exp(i m r^2 / 2 hbar T)
/// with m = 1 / (2 D_alpha).
Complex gaussian_free_kernel(const PhysicalParams& params, double distance, double duration, int dim);

struct CompositionOptions {
    /// Node spacing along the contour, in units of the slice spreading length c_slice^{1/alpha}.
    double spacing_factor = 0.25;
    /// Initial contour half-width in units of the total spreading length c^{1/alpha}.
    double half_width_factor = 16.0;
    /// The half-width doubles up to this factor while the tail estimate is too large.
    double max_half_width_factor = 4096.0;
    /// Bound on the estimated truncated tail relative to each stage integral.
    double tail_tolerance = 1e-12;
    /// Edge integrand magnitude allowed relative to the peak.
    double boundary_ratio = 1e-6;
    QuadratureOptions quadrature{};
};

/// N-slice time-sliced kernel for V = 0 in one dimension.
///
/// Intermediate positions run along the line m + u exp(i phi) through the
/// endpoint midpoint m, with phi = pi (alpha - 1) / (2 alpha). In that
/// direction the stationary-phase part of each slice kernel decays instead of
/// oscillating, so the trapezoid rule in u converges; what remains is the
/// algebraic |u|^{-1-alpha} tail of each kernel. The half-width doubles until
/// the tail estimate edge * reach / (1 + 2 alpha) and the edge ratio are both
/// within bounds. Throws ConvergenceError when the integrand at the ends of
/// the widest contour still exceeds boundary_ratio of its peak.
Complex compose_kernel(const KernelRequest& request, const CompositionOptions& options = {});

/// psi_f(r_b) = \int dr_a K(r_b t_b | r_a t_a) psi_i(r_a) for V = 0.
///
/// On the periodic box the kernel is the image sum of K_L, i.e. its momentum
/// integral becomes the sum over the box's momentum lattice. The kernel table
/// is built by direct summation and applied as an explicit real-space
/// convolution, O(nodes^2); grids above 2^14 nodes are rejected.
/// Only params and duration of the request are used.
WaveFunction propagate_by_kernel(const WaveFunction& initial, const KernelRequest& request);

/// A kernel as a function of separation and elapsed time.
using KernelField = std::function<Complex(double separation, double elapsed)>;

/// max over sample separations of |i hbar dK/dt - F| with dK/dt from a centred
/// difference of step dt_probe; F is the fractional kinetic term
/// D_alpha (-hbar^2 Laplacian)^{alpha/2} K supplied by the caller.
double kernel_equation_residual(const PhysicalParams& params, const KernelField& kernel,
                                const KernelField& kinetic_term, std::span<const double> separations,
                                double elapsed, double dt_probe);

/// Residual of the kernel equation for the free kernel of `request`, at five
/// points around r_b spaced by half the spreading length. The kinetic term
/// is evaluated by the same momentum quadrature with an extra |p|^alpha
/// weight, so only the time difference contributes (second order in dt_probe).
double kernel_equation_residual(const KernelRequest& request, double dt_probe,
                                const QuadratureOptions& options = {});

}  // namespace fqm

#endif  // FQM_KERNEL_HPP
