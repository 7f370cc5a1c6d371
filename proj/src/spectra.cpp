#include "fqm/spectra.hpp"

#include <sstream>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

namespace fqm {

namespace {

void require_level(long n, long lowest) {
    if (n < lowest) {
        std::ostringstream msg;
        msg << "level index must be >= " << lowest << ", got " << n;
        throw std::invalid_argument(msg.str());
    }
}

double orbit_exponent(const PhysicalParams& pp) { return pp.alpha() / (pp.alpha() - 1.0); }

}  // namespace

BohrParams::BohrParams(PhysicalParams params, double coupling) : params_(params), coupling_(coupling) {
    if (!(coupling > 0.0) || !std::isfinite(coupling)) {
        throw std::invalid_argument("Coulomb coupling Ze^2 must be positive");
    }
}

OscillatorParams::OscillatorParams(PhysicalParams params, double q2, double beta)
    : params_(params), q2_(q2), beta_(beta) {
    if (!(q2 > 0.0) || !std::isfinite(q2)) throw std::invalid_argument("oscillator q^2 must be positive");
    if (!(beta > 1.0 && beta <= 2.0)) {
        std::ostringstream msg;
        msg << "oscillator exponent must satisfy 1 < beta <= 2, got " << beta;
        throw std::invalid_argument(msg.str());
    }
}

double OscillatorParams::level_exponent() const noexcept {
    const double a = params_.alpha();
    return a * beta_ / (a + beta_);
}

double bohr_radius(const BohrParams& bp, long n) {
    require_level(n, 1);
    const auto& pp = bp.params();
    const double a = pp.alpha();
    const double a0 = std::pow(a * pp.d_alpha() * std::pow(pp.hbar(), a) / bp.coupling(), 1.0 / (a - 1.0));
    return a0 * std::pow(static_cast<double>(n), orbit_exponent(pp));
}

double bohr_binding_energy(const BohrParams& bp) {
    const auto& pp = bp.params();
    const double a = pp.alpha();
    const double ratio = std::pow(bp.coupling(), a) / (std::pow(a, a) * pp.d_alpha() * std::pow(pp.hbar(), a));
    return std::pow(ratio, 1.0 / (a - 1.0));
}

double bohr_energy(const BohrParams& bp, long n) {
    require_level(n, 1);
    const auto& pp = bp.params();
    return -(pp.alpha() - 1.0) * bohr_binding_energy(bp) * std::pow(static_cast<double>(n), -orbit_exponent(pp));
}

double transition_frequency(const BohrParams& bp, long k, long n) {
    require_level(n, 1);
    if (k <= n) throw std::invalid_argument("transition needs k > n");
    return (bohr_energy(bp, k) - bohr_energy(bp, n)) / bp.params().hbar();
}

double bohr_kinetic_energy(const BohrParams& bp, long n) {
    const auto& pp = bp.params();
    const double momentum = static_cast<double>(n) * pp.hbar() / bohr_radius(bp, n);
    return pp.d_alpha() * std::pow(momentum, pp.alpha());
}

SpectrumResult bohr_spectrum(const BohrParams& bp, long n_first, long n_last) {
    require_level(n_first, 1);
    if (n_last < n_first) throw std::invalid_argument("empty level range");
    SpectrumResult out;
    out.params = bp.params();
    out.strength = bp.coupling();
    out.exponent = 1.0;
    for (long n = n_first; n <= n_last; ++n) out.levels.emplace_back(n, bohr_energy(bp, n));
    return out;
}

double beta_function(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) {
        std::ostringstream msg;
        msg << "beta_function needs positive arguments, got (" << a << ", " << b << ")";
        throw std::invalid_argument(msg.str());
    }
    return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

double oscillator_level(const OscillatorParams& op, long n) {
    require_level(n, 0);
    const auto& pp = op.params();
    const double a = pp.alpha();
    const double b = op.beta();
    const double q = std::sqrt(op.q2());
    const double base = M_PI * pp.hbar() * b * std::pow(pp.d_alpha(), 1.0 / a) * std::pow(q, 2.0 / b) /
                        (2.0 * beta_function(1.0 / b, 1.0 / a + 1.0));
    const double e = op.level_exponent();
    return std::pow(base, e) * std::pow(static_cast<double>(n) + 0.5, e);
}

double oscillator_level_quadrature(const OscillatorParams& op, long n, double quad_tol) {
    require_level(n, 0);
    if (!(quad_tol > 0.0 && quad_tol <= 1e-4)) throw std::invalid_argument("quad_tol must lie in (0, 1e-4]");
    const auto& pp = op.params();
    const double a = pp.alpha();
    const double b = op.beta();
    const double q2 = op.q2();
    const double target = 2.0 * M_PI * pp.hbar() * (static_cast<double>(n) + 0.5);

    // \int_0^{x_m} (E - q^2 x^b)^{1/a} dx = x_m E^{1/a} \int_0^1 (1 - y^b)^{1/a} dy.
    // The unit integral has algebraic singularities at both ends, which the
    // tanh-sinh substitution absorbs.
    boost::math::quadrature::tanh_sinh<double> integrator;
    double unit_error = 0.0;
    const double unit = integrator.integrate(
        [&](double y, double complement) {
            // 1 - y^b computed from the distance to the nearer endpoint.
            const double gap = y > 0.5 ? -std::expm1(b * std::log1p(-complement)) : 1.0 - std::pow(y, b);
            return gap <= 0.0 ? 0.0 : std::pow(gap, 1.0 / a);
        },
        0.0, 1.0, 0.01 * quad_tol, &unit_error);
    if (!(unit_error <= quad_tol * unit)) {
        std::ostringstream msg;
        msg << "oscillator action integral reached only " << unit_error / unit << " relative accuracy";
        throw ConvergenceError(msg.str(), unit_error / unit);
    }
    auto action = [&](double energy) {
        const double turning = std::pow(energy / q2, 1.0 / b);
        return 4.0 / std::pow(pp.d_alpha(), 1.0 / a) * turning * std::pow(energy, 1.0 / a) * unit;
    };
    auto residual = [&](double energy) { return action(energy) - target; };

    double lo = q2 * 1e-3;
    double hi = q2;
    int guard = 0;
    while (residual(lo) > 0.0) {
        lo *= 1e-3;
        if (++guard > 100) throw std::runtime_error("oscillator_level_quadrature: lower bracket not found");
    }
    guard = 0;
    while (residual(hi) < 0.0) {
        hi *= 2.0;
        if (++guard > 2000) {
            std::ostringstream msg;
            msg << "oscillator_level_quadrature: root not bracketed in [" << lo << ", " << hi << "]";
            throw std::runtime_error(msg.str());
        }
    }
    // Bisect until the bracket is within a factor 2, then refine.
    while (hi > 2.0 * lo) {
        const double mid = std::sqrt(lo * hi);
        (residual(mid) < 0.0 ? lo : hi) = mid;
    }
    const double rel = std::min(quad_tol, 1e-14);
    auto converged = [rel](double x, double y) { return std::abs(x - y) <= rel * std::abs(y); };
    std::uintmax_t iterations = 200;
    const auto bracket = boost::math::tools::toms748_solve(residual, lo, hi, converged, iterations);
    return 0.5 * (bracket.first + bracket.second);
}

SpectrumResult oscillator_spectrum(const OscillatorParams& op, long n_max, SpectrumMethod method, double quad_tol) {
    require_level(n_max, 0);
    SpectrumResult out;
    out.params = op.params();
    out.strength = op.q2();
    out.exponent = op.beta();
    out.method = method;
    for (long n = 0; n <= n_max; ++n) {
        const double e = method == SpectrumMethod::ClosedForm ? oscillator_level(op, n)
                                                              : oscillator_level_quadrature(op, n, quad_tol);
        out.levels.emplace_back(n, e);
    }
    return out;
}

double equidistance_defect(const OscillatorParams& op, long n_max) {
    if (n_max < 3) throw std::invalid_argument("equidistance_defect needs n_max >= 3");
    std::vector<double> e;
    for (long n = 0; n <= n_max; ++n) e.push_back(oscillator_level(op, n));
    const double unit = e[1] - e[0];
    double worst = 0.0;
    for (long n = 0; n + 2 <= n_max; ++n) {
        worst = std::max(worst, std::abs((e[n + 2] - e[n + 1]) - (e[n + 1] - e[n])) / unit);
    }
    return worst;
}

}  // namespace fqm
