#include "fqm/kernel.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

namespace fqm {

namespace {

constexpr double kPi = M_PI;
// exp(2.5): at most about one decimal digit lost to cancellation on the ray.
constexpr double kGrowthBudget = 2.5;

struct Ray {
    double theta;
    double growth;  // A: |z| |sin(arg z - theta)|
    double decay;   // B: c sin(alpha theta)
};

// max_s (A s - B s^alpha)
double peak_exponent(double growth, double decay, double alpha) {
    if (growth <= 0.0) return 0.0;
    const double s0 = std::pow(growth / (alpha * decay), 1.0 / (alpha - 1.0));
    return growth * s0 * (1.0 - 1.0 / alpha);
}

Ray choose_ray(Complex z, double spreading, double alpha) {
    const double modulus = std::abs(z);
    const double arg = modulus > 0.0 ? std::arg(z) : 0.0;
    Ray best{0.0, 0.0, -1.0};
    Ray least_growth{0.0, 0.0, 0.0};
    double least_peak = std::numeric_limits<double>::infinity();
    for (int i = 1; i < 100; ++i) {
        const double theta = kPi / alpha * (i / 100.0);
        const Ray ray{theta, modulus * std::abs(std::sin(arg - theta)), spreading * std::sin(alpha * theta)};
        const double peak = peak_exponent(ray.growth, ray.decay, alpha);
        if (peak <= kGrowthBudget && ray.decay > best.decay) best = ray;
        if (peak < least_peak) {
            least_peak = peak;
            least_growth = ray;
        }
    }
    return best.decay > 0.0 ? best : least_growth;
}

// \int_S^inf s^m exp(-(B s^alpha - A s)) ds, bounded through convexity of the exponent.
double tail_bound(double cutoff, const Ray& ray, double alpha, double m) {
    const double h = ray.decay * std::pow(cutoff, alpha) - ray.growth * cutoff;
    const double slope = alpha * ray.decay * std::pow(cutoff, alpha - 1.0) - ray.growth;
    if (slope <= 0.0) return std::numeric_limits<double>::infinity();
    const double poly = std::pow(2.0, m) * (std::pow(cutoff, m) / slope + std::tgamma(m + 1.0) / std::pow(slope, m + 1.0));
    return std::exp(-h) * poly;
}

using Gauss = boost::math::quadrature::gauss<double, 20>;

// s^alpha is not smooth at s = 0, so the first panel is split geometrically
// towards the origin; elsewhere one Gauss-Legendre panel.
template <class F>
auto integrate_panel(const F& f, double lo, double hi) {
    if (lo > 0.0) return Gauss::integrate(f, lo, hi);
    constexpr double ratio = 0.1;
    constexpr int levels = 14;
    auto sum = Gauss::integrate(f, 0.0, hi * std::pow(ratio, levels));
    double upper = hi;
    for (int j = 0; j < levels; ++j) {
        const double lower = upper * ratio;
        sum += Gauss::integrate(f, lower, upper);
        upper = lower;
    }
    return sum;
}

// Large-separation expansion: expanding exp(-i c k^alpha) term by term gives
// K ~ sum_j (-ic)^j / j! * F_j(z), where F_j is the regularized transform of
// k^{j alpha + weight}. It misses the stationary-phase contribution, so it is
// only used where that contribution is negligible.
std::optional<KernelEvaluation> separation_series(Complex z, double spreading, double alpha, int dim,
                                                  double weight) {
    const double modulus = std::abs(z);
    if (modulus == 0.0) return std::nullopt;
    // Saddle of exp(i k z - i c k^alpha) and a bound on its contribution.
    const Complex saddle = std::pow(z / (alpha * spreading), 1.0 / (alpha - 1.0));
    const double damping = (1.0 - 1.0 / alpha) * (saddle * z).imag();
    const double curvature = spreading * alpha * (alpha - 1.0) * std::pow(std::abs(saddle), alpha - 2.0);
    const double power = weight + (dim == 3 ? 2.0 : 0.0);
    const double saddle_size =
        std::exp(-damping) * std::sqrt(2.0 * kPi / curvature) * std::pow(std::abs(saddle), power) / kPi;

    Complex sum = 0.0;
    Complex coefficient = 1.0;  // (-ic)^j / j!
    double last = std::numeric_limits<double>::infinity();
    for (int j = 0; j < 400; ++j) {
        if (j > 0) coefficient *= Complex(0.0, -spreading) / static_cast<double>(j);
        const double nu = j * alpha + weight;
        // Even powers of k transform to derivatives of the delta function.
        if (std::abs(std::remainder(nu, 2.0)) < 1e-12) continue;
        // (1/pi) \int_0^inf k^nu cos(kz) dk = -Gamma(1+nu) sin(pi nu / 2) / (pi z^{1+nu})
        const double log_gamma = std::lgamma(1.0 + nu);
        Complex term = -coefficient * std::sin(kPi * nu / 2.0) / kPi * std::exp(log_gamma - (1.0 + nu) * std::log(z));
        // In 3-D the radial transform is -(1 / 2 pi z) d/dz of the 1-D one.
        if (dim == 3) term *= (1.0 + nu) / (2.0 * kPi * z * z);
        const double size = std::abs(term);
        if (size > last && j > 2) return std::nullopt;  // diverging before converging
        sum += term;
        last = size;
        if (size != 0.0 && size < 1e-17 * std::abs(sum)) {
            if (!(saddle_size < 1e-17 * std::abs(sum))) return std::nullopt;
            KernelEvaluation out;
            out.value = sum;
            out.error_estimate = size + saddle_size;
            return out;
        }
    }
    return std::nullopt;
}

}  // namespace

void KernelRequest::validate() const {
    if (!(t_b > t_a)) throw std::invalid_argument("kernel request needs t_b > t_a");
    if (slices < 1) throw std::invalid_argument("kernel request needs at least one slice");
    if (r_a.size() != r_b.size()) throw std::invalid_argument("kernel endpoints differ in dimension");
    if (dim() != 1 && dim() != 3) throw std::invalid_argument("kernel evaluation supports dim 1 or 3");
    if (!r_a.allFinite() || !r_b.allFinite()) throw std::invalid_argument("kernel endpoints must be finite");
}

KernelEvaluation evaluate_free_kernel(Complex z, double spreading, double alpha, int dim,
                                      const QuadratureOptions& options, double weight) {
    if (!(spreading > 0.0)) throw std::invalid_argument("kernel spreading must be positive");
    if (dim != 1 && dim != 3) throw std::invalid_argument("kernel evaluation supports dim 1 or 3");
    // Both radial integrands are even in z.
    if (z.real() < 0.0 || (z.real() == 0.0 && z.imag() < 0.0)) z = -z;

    if (alpha < 2.0 && options.separation_series) {
        if (auto series = separation_series(z, spreading, alpha, dim, weight)) return *series;
    }

    const Ray ray = choose_ray(z, spreading, alpha);
    const Complex turn = std::polar(1.0, -ray.theta);
    const Complex kinetic_turn = std::polar(1.0, -alpha * ray.theta);
    const Complex weight_turn = std::polar(1.0, -weight * ray.theta);
    // Power of s multiplying the phaseless magnitude.
    const double power = weight + (dim == 3 ? 2.0 : 0.0);
    const double prefactor = dim == 1 ? 1.0 / kPi : 1.0 / (2.0 * kPi * kPi);

    auto integrand = [&](double s) -> Complex {
        if (s == 0.0) return weight > 0.0 || dim == 3 ? Complex(0.0) : turn;
        const Complex k = s * turn;
        const Complex phase = std::exp(Complex(0.0, -spreading) * std::pow(s, alpha) * kinetic_turn);
        const Complex w = weight == 0.0 ? Complex(1.0) : std::pow(s, weight) * weight_turn;
        if (dim == 1) return std::cos(k * z) * w * phase * turn;
        const Complex kz = k * z;
        const Complex sinc = std::abs(kz) < 1e-4 ? 1.0 - kz * kz / 6.0 : std::sin(kz) / kz;
        return k * k * sinc * w * phase * turn;
    };
    auto magnitude = [&](double s) {
        return std::pow(s, power) * std::exp(ray.growth * s - ray.decay * std::pow(s, alpha));
    };

    // Initial cutoff: exponent beyond its peak and past 36 e-folds.
    double cutoff = std::max(1.0, std::pow(1.0 / ray.decay, 1.0 / alpha));
    while (ray.decay * std::pow(cutoff, alpha) - ray.growth * cutoff < 36.0 + power * std::log1p(cutoff) ||
           alpha * ray.decay * std::pow(cutoff, alpha - 1.0) <= ray.growth) {
        cutoff *= 1.25;
    }

    KernelEvaluation result;
    result.rotation = ray.theta;
    for (int extension = 0; extension < 40; ++extension) {
        const double phase_span = std::abs(z) * cutoff + spreading * std::pow(cutoff, alpha);
        const double wanted = std::ceil(phase_span / kPi);
        if (!(wanted <= static_cast<double>(options.max_panels))) {
            std::ostringstream msg;
            msg << "free kernel quadrature needs about " << wanted << " panels to resolve the phase (limit "
                << options.max_panels << ")";
            throw ConvergenceError(msg.str(), std::numeric_limits<double>::infinity());
        }
        long panels = std::max<long>(8, static_cast<long>(wanted));
        Complex previous(std::numeric_limits<double>::quiet_NaN());
        Complex estimate;
        double l1 = 0.0;
        double error = std::numeric_limits<double>::infinity();
        while (true) {
            estimate = 0.0;
            l1 = 0.0;
            const double width = cutoff / static_cast<double>(panels);
            for (long p = 0; p < panels; ++p) {
                const double lo = p * width;
                const double hi = lo + width;
                estimate += integrate_panel(integrand, lo, hi);
                l1 += integrate_panel(magnitude, lo, hi);
            }
            if (!std::isfinite(estimate.real()) || !std::isfinite(estimate.imag()) || !std::isfinite(l1)) {
                throw ConvergenceError("free kernel quadrature overflowed", std::numeric_limits<double>::infinity());
            }
            if (!std::isnan(previous.real())) {
                error = std::abs(estimate - previous);
                const double floor = 256.0 * std::numeric_limits<double>::epsilon() * l1;
                if (error <= std::max(options.relative_tolerance * std::abs(estimate), floor)) break;
            }
            if (panels * 2 > options.max_panels) {
                const double rel = error / std::max(std::abs(estimate), std::numeric_limits<double>::min());
                std::ostringstream msg;
                msg << "free kernel quadrature did not converge: relative error " << rel << " with "
                    << panels << " panels";
                throw ConvergenceError(msg.str(), rel);
            }
            previous = estimate;
            panels *= 2;
        }
        const double tail = tail_bound(cutoff, ray, alpha, power);
        if (tail <= options.tail_ratio * std::abs(estimate) || tail == 0.0) {
            // In 3-D, k^2 sinc(kz) = k sin(kz) / z already carries the 1/z.
            result.value = prefactor * estimate;
            result.error_estimate = prefactor * (error + tail);
            result.cutoff = cutoff;
            result.panels = panels;
            return result;
        }
        cutoff *= 1.5;
    }
    throw ConvergenceError("free kernel momentum cutoff could not bound the discarded tail",
                           std::numeric_limits<double>::infinity());
}

Complex free_kernel(const KernelRequest& request, const QuadratureOptions& options) {
    request.validate();
    if (request.slices != 1) throw std::invalid_argument("free_kernel evaluates a single slice");
    const auto& pp = request.params;
    const double spreading = pp.d_alpha() * request.duration() * std::pow(pp.hbar(), pp.alpha() - 1.0);
    const double distance = (request.r_b - request.r_a).norm();
    return evaluate_free_kernel(Complex(distance), spreading, pp.alpha(), request.dim(), options).value;
}

Complex gaussian_free_kernel(const PhysicalParams& params, double distance, double duration, int dim) {
    const double mass = 1.0 / (2.0 * params.d_alpha());
    const double hbar = params.hbar();
    const Complex base = mass / (Complex(0.0, 2.0 * kPi * hbar * duration));
    return std::pow(base, 0.5 * dim) *
           std::exp(Complex(0.0, mass * distance * distance / (2.0 * hbar * duration)));
}

namespace {

struct ContourSum {
    Complex value;
    // Edge integrand relative to the peak, worst stage.
    double edge_ratio = 0.0;
    // Estimated truncated tail relative to the stage integral, worst stage.
    double tail_ratio = 0.0;
};

}  // namespace

Complex compose_kernel(const KernelRequest& request, const CompositionOptions& options) {
    request.validate();
    if (request.slices < 2) throw std::invalid_argument("compose_kernel needs at least two slices");
    if (request.dim() != 1) throw std::invalid_argument("compose_kernel supports one dimension");
    if (!(options.spacing_factor > 0.0) || !(options.half_width_factor > 0.0) ||
        options.max_half_width_factor < options.half_width_factor) {
        throw std::invalid_argument("compose_kernel: invalid contour options");
    }

    const auto& pp = request.params;
    const double alpha = pp.alpha();
    const double scale = pp.d_alpha() * std::pow(pp.hbar(), alpha - 1.0);
    const double slice_spreading = scale * request.slice_duration();
    const double total_spreading = scale * request.duration();
    const double x_a = request.r_a[0];
    const double x_b = request.r_b[0];
    const double midpoint = 0.5 * (x_a + x_b);
    const double phi = kPi * (alpha - 1.0) / (2.0 * alpha);
    const Complex direction = std::polar(1.0, phi);
    const double step = options.spacing_factor * std::pow(slice_spreading, 1.0 / alpha);
    const Complex measure = step * direction;
    // Far from the endpoints a product of two kernels falls off like |u|^{-2-2 alpha}.
    const double tail_power = 2.0 + 2.0 * alpha;

    auto slice_kernel = [&](Complex z) {
        return evaluate_free_kernel(z, slice_spreading, alpha, 1, options.quadrature).value;
    };

    auto run = [&](double width_factor) {
        const double half_width =
            width_factor * std::pow(total_spreading, 1.0 / alpha) + 0.5 * std::abs(x_b - x_a);
        const Eigen::Index half = static_cast<Eigen::Index>(std::ceil(half_width / step));
        const Eigen::Index nodes = 2 * half + 1;
        const double reach = static_cast<double>(half) * step;
        auto node = [&](Eigen::Index j) { return midpoint + static_cast<double>(j - half) * measure; };

        ContourSum out;
        auto inspect = [&](const ComplexField& integrand) {
            const double peak = integrand.abs().maxCoeff();
            const double edge = std::max(std::abs(integrand[0]), std::abs(integrand[nodes - 1]));
            const double total = std::abs(integrand.sum() * measure);
            if (peak > 0.0) out.edge_ratio = std::max(out.edge_ratio, edge / peak);
            if (total > 0.0) out.tail_ratio = std::max(out.tail_ratio, 2.0 * edge * reach / (tail_power - 1.0) / total);
        };

        ComplexField carried(nodes);
        parallel_for(nodes, [&](Eigen::Index j) { carried[j] = slice_kernel(node(j) - x_a); });

        if (request.slices > 2) {
            // Differences of contour nodes are (i - j) step exp(i phi); the kernel is even.
            ComplexField toeplitz(nodes);
            parallel_for(nodes, [&](Eigen::Index d) { toeplitz[d] = slice_kernel(static_cast<double>(d) * measure); });
            for (int s = 0; s < request.slices - 2; ++s) {
                // Integrand of the convolution for the central output node.
                ComplexField central(nodes);
                for (Eigen::Index j = 0; j < nodes; ++j) central[j] = toeplitz[std::abs(j - half)] * carried[j];
                inspect(central);
                ComplexField next(nodes);
                parallel_for(nodes, [&](Eigen::Index i) {
                    Complex sum = 0.0;
                    for (Eigen::Index j = 0; j < nodes; ++j) sum += toeplitz[std::abs(i - j)] * carried[j];
                    next[i] = sum * measure;
                });
                carried = std::move(next);
            }
        }

        ComplexField closing(nodes);
        parallel_for(nodes, [&](Eigen::Index j) { closing[j] = slice_kernel(x_b - node(j)); });
        const ComplexField integrand = closing * carried;
        inspect(integrand);
        out.value = integrand.sum() * measure;
        return out;
    };

    double width = options.half_width_factor;
    ContourSum result = run(width);
    while ((result.tail_ratio > options.tail_tolerance || result.edge_ratio > options.boundary_ratio) &&
           2.0 * width <= options.max_half_width_factor) {
        width *= 2.0;
        result = run(width);
    }
    if (result.edge_ratio > options.boundary_ratio) {
        std::ostringstream msg;
        msg << "compose_kernel: integrand at the contour end is " << result.edge_ratio << " of its peak (limit "
            << options.boundary_ratio << ") at the widest contour";
        throw ConvergenceError(msg.str(), result.edge_ratio);
    }
    return result.value;
}

WaveFunction propagate_by_kernel(const WaveFunction& initial, const KernelRequest& request) {
    if (!(request.t_b > request.t_a)) throw std::invalid_argument("kernel request needs t_b > t_a");
    if (initial.representation() != Representation::Position) {
        throw std::invalid_argument("propagate_by_kernel: expected position representation");
    }
    const SpatialGrid& grid = initial.grid();
    if (grid.size() > (1 << 14)) {
        throw std::invalid_argument("propagate_by_kernel: grid too large for the O(N^2) kernel route");
    }
    const auto& pp = request.params;
    const MomentumGrid momenta(grid, pp.hbar());
    const Eigen::Index n = grid.points_per_axis();
    const Eigen::Index size = grid.size();

    // Free evolution phase per lattice momentum.
    const RealField kinetic = momenta.squared_magnitude().pow(0.5 * pp.alpha());
    const double rate = pp.d_alpha() * request.duration() / pp.hbar();
    ComplexField phase(size);
    for (Eigen::Index m = 0; m < size; ++m) phase[m] = std::polar(1.0, -rate * kinetic[m]);

    // Kernel on periodic separations d (per-axis index difference mod n):
    // K(d) = V^{-1} sum_k exp(i k.d) phase(k); index arithmetic keeps the
    // trigonometric arguments reduced exactly.
    std::vector<Complex> unit_roots(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) unit_roots[j] = std::polar(1.0, 2.0 * kPi * j / n);
    ComplexField table(size);
    parallel_for(size, [&](Eigen::Index d) {
        const auto dd = grid.unflatten(d);
        Complex sum = 0.0;
        for (Eigen::Index m = 0; m < size; ++m) {
            const auto mm = grid.unflatten(m);
            Eigen::Index turns = 0;
            for (int axis = 0; axis < grid.dim(); ++axis) turns += momenta.wavenumber(mm[axis]) * dd[axis];
            turns %= n;
            if (turns < 0) turns += n;
            sum += unit_roots[turns] * phase[m];
        }
        table[d] = sum / grid.volume();
    });

    ComplexField result(size);
    const ComplexField& psi = initial.amplitudes();
    const double weight = grid.cell_volume();
    parallel_for(size, [&](Eigen::Index b) {
        const auto bb = grid.unflatten(b);
        Complex sum = 0.0;
        for (Eigen::Index a = 0; a < size; ++a) {
            const auto aa = grid.unflatten(a);
            std::array<Eigen::Index, 3> diff{0, 0, 0};
            for (int axis = 0; axis < grid.dim(); ++axis) diff[axis] = (bb[axis] - aa[axis] + n) % n;
            sum += table[grid.flatten(diff)] * psi[a];
        }
        result[b] = weight * sum;
    });
    return WaveFunction(grid, std::move(result));
}

double kernel_equation_residual(const PhysicalParams& params, const KernelField& kernel,
                                const KernelField& kinetic_term, std::span<const double> separations,
                                double elapsed, double dt_probe) {
    if (!(dt_probe > 0.0) || !(elapsed - dt_probe > 0.0)) {
        throw std::invalid_argument("kernel_equation_residual needs 0 < dt_probe < elapsed");
    }
    double worst = 0.0;
    for (double x : separations) {
        const Complex derivative = (kernel(x, elapsed + dt_probe) - kernel(x, elapsed - dt_probe)) / (2.0 * dt_probe);
        const Complex lhs = Complex(0.0, params.hbar()) * derivative;
        worst = std::max(worst, std::abs(lhs - kinetic_term(x, elapsed)));
    }
    return worst;
}

double kernel_equation_residual(const KernelRequest& request, double dt_probe, const QuadratureOptions& options) {
    request.validate();
    const auto& pp = request.params;
    const double alpha = pp.alpha();
    const double scale = pp.d_alpha() * std::pow(pp.hbar(), alpha - 1.0);
    const int dim = request.dim();
    auto kernel = [&](double x, double t) {
        return evaluate_free_kernel(Complex(x), scale * t, alpha, dim, options).value;
    };
    auto kinetic = [&](double x, double t) {
        return pp.d_alpha() * std::pow(pp.hbar(), alpha) *
               evaluate_free_kernel(Complex(x), scale * t, alpha, dim, options, alpha).value;
    };
    const double centre = (request.r_b - request.r_a).norm();
    const double spacing = 0.5 * std::pow(scale * request.duration(), 1.0 / alpha);
    std::vector<double> samples;
    for (int j = -2; j <= 2; ++j) samples.push_back(std::abs(centre + j * spacing));
    return kernel_equation_residual(pp, kernel, kinetic, samples, request.duration(), dt_probe);
}

}  // namespace fqm
