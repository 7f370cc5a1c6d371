#ifndef FQM_SPECTRA_HPP
#define FQM_SPECTRA_HPP

#include <string>
#include <utility>
#include <vector>

#include "fqm/core.hpp"

namespace fqm {

/// Hydrogen-like atom: kinetic term D_alpha |p|^alpha, potential -Ze^2/|r|.
class BohrParams {
public:
    BohrParams(PhysicalParams params, double coupling);

    const PhysicalParams& params() const noexcept { return params_; }
    /// Ze^2.
    double coupling() const noexcept { return coupling_; }

private:
    PhysicalParams params_;
    double coupling_;
};

/// Semiclassical 1-D oscillator D_alpha |p|^alpha + q^2 |x|^beta.
class OscillatorParams {
public:
    OscillatorParams(PhysicalParams params, double q2, double beta);

    const PhysicalParams& params() const noexcept { return params_; }
    double q2() const noexcept { return q2_; }
    double beta() const noexcept { return beta_; }
    /// alpha beta / (alpha + beta); levels scale as (n + 1/2) to this power.
    double level_exponent() const noexcept;

private:
    PhysicalParams params_;
    double q2_;
    double beta_;
};

enum class SpectrumMethod { ClosedForm, Quadrature };

struct SpectrumResult {
    std::vector<std::pair<long, double>> levels;
    PhysicalParams params;
    /// Ze^2 for the atom, q^2 for the oscillator.
    double strength = 0.0;
    /// Potential exponent: 1 for the Coulomb atom, beta for the oscillator.
    double exponent = 0.0;
    SpectrumMethod method = SpectrumMethod::ClosedForm;
};

/// a_n = a_0 n^{alpha/(alpha-1)}, a_0 = (alpha D hbar^alpha / Ze^2)^{1/(alpha-1)}.
double bohr_radius(const BohrParams& bp, long n);
/// Binding energy E_0 = ((Ze^2)^alpha / (alpha^alpha D hbar^alpha))^{1/(alpha-1)}.
double bohr_binding_energy(const BohrParams& bp);
/// E_n = -(alpha - 1) E_0 n^{-alpha/(alpha-1)}.
double bohr_energy(const BohrParams& bp, long n);
/// Angular frequency of the k -> n transition, (E_k - E_n) / hbar, for k > n >= 1.
double transition_frequency(const BohrParams& bp, long k, long n);
/// Kinetic energy D (n hbar / a_n)^alpha on the n-th orbit.
double bohr_kinetic_energy(const BohrParams& bp, long n);
/// Levels n_first..n_last, closed form.
SpectrumResult bohr_spectrum(const BohrParams& bp, long n_first, long n_last);

/// Euler Beta function through log-Gamma; a, b > 0.
double beta_function(double a, double b);

/// Semiclassical level from the closed form of the Bohr-Sommerfeld rule.
double oscillator_level(const OscillatorParams& op, long n);

/// Same level found by solving 2 pi hbar (n + 1/2) = 4 D^{-1/alpha}
/// \int_0^{x_m} (E - q^2 x^beta)^{1/alpha} dx for E. The action integral is
/// scaled to the unit interval and evaluated by tanh-sinh quadrature, which
/// handles the algebraic endpoint behaviour; the bracket on E grows
/// geometrically until the sign changes, then TOMS 748 refines it.
/// quad_tol must lie in (0, 1e-4]; ConvergenceError if the integral misses it.
double oscillator_level_quadrature(const OscillatorParams& op, long n, double quad_tol = 1e-12);

/// Levels 0..n_max by either route.
SpectrumResult oscillator_spectrum(const OscillatorParams& op, long n_max,
                                   SpectrumMethod method = SpectrumMethod::ClosedForm,
                                   double quad_tol = 1e-12);

/// max_{n <= n_max - 2} |(E_{n+2} - E_{n+1}) - (E_{n+1} - E_n)| / (E_1 - E_0);
/// zero exactly when the ladder is equidistant.
double equidistance_defect(const OscillatorParams& op, long n_max);

}  // namespace fqm

#endif  // FQM_SPECTRA_HPP
