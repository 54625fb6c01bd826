#include <cmath>
#include <string>

#include "ebeam/beam.hpp"
#include "ebeam/constants.hpp"
#include "ebeam/error.hpp"
#include "ebeam/special.hpp"

namespace ebeam {

using namespace constants;

double bunching_parameter(const BeamSpec& spec) {
  spec.validate();
  const double v0 = spec.kin.velocity;
  const double g = spec.kin.gamma;
  const double dE = spec.mod_depth * spec.kin.kinetic_energy_eV * e;
  const double v1 = dE / (g * g * g * m_e * v0);
  const double rb = spec.drift_length * spec.omega0 * v1 / (v0 * v0);
  if (rb >= 1.0)
    throw ValidityError("no_overtaking",
                        "bunching parameter r_b = " + std::to_string(rb) + " >= 1: electrons overtake");
  return rb;
}

ModulatedCurrent modulated_current(const BeamSpec& spec) {
  return {bunching_parameter(spec), spec.current, spec.omega0, spec.kin.velocity, -spec.drift_length};
}

double kepler_theta(double tau, double r_b) {
  if (!(r_b >= 0.0 && r_b < 1.0)) throw DomainError("kepler_theta: r_b must lie in [0, 1)");
  if (r_b == 0.0) return tau;
  const double turns = std::round(tau / two_pi);
  const double t = tau - turns * two_pi;
  // |theta - t| <= r_b brackets the root; f is increasing.
  double lo = t - r_b, hi = t + r_b;
  double th = t + r_b * std::sin(t) / (1.0 - r_b * std::cos(t));
  if (!(th > lo && th < hi)) th = t;
  for (int it = 0; it < 200; ++it) {
    const double f = th - r_b * std::sin(th) - t;
    if (f > 0.0)
      hi = th;
    else
      lo = th;
    if (std::abs(f) <= 1e-15 * (1.0 + std::abs(t))) break;
    const double fp = 1.0 - r_b * std::cos(th);
    double next = th - f / fp;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == th || hi - lo <= 4e-16 * (1.0 + std::abs(t))) {
      th = next;
      break;
    }
    th = next;
  }
  return th + turns * two_pi;
}

double analytic_current(const ModulatedCurrent& mc, double z, double t) {
  const double tau = mc.omega0 * (t - (z - mc.z0) / mc.v0);
  const double th = kepler_theta(tau, mc.r_b);
  return mc.I0 / (1.0 - mc.r_b * std::cos(th));
}

double fourier_coefficient(int n, double r_b, double I0) {
  if (n <= 0) throw DomainError("fourier_coefficient: n must be >= 1 (DC is I0)");
  if (!(r_b >= 0.0 && r_b < 1.0)) throw DomainError("fourier_coefficient: r_b must lie in [0, 1)");
  return 2.0 * I0 * besselj(n, n * r_b);
}

double velocity_spread_effect(const BeamSpec& spec) {
  if (!(spec.energy_spread_eV >= 0.0)) throw DomainError("velocity_spread_effect: negative spread");
  return spec.energy_spread_eV / spec.kin.kinetic_energy_eV;
}

}  // namespace ebeam
