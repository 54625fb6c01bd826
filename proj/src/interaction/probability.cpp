#include <cmath>

#include "ebeam/constants.hpp"
#include "ebeam/error.hpp"
#include "ebeam/interaction.hpp"
#include "ebeam/special.hpp"

namespace ebeam {

using namespace constants;

namespace {

double transverse_radius(double x, double y, const char* who) {
  const double r = std::hypot(x, y);
  if (!(r > 0.0) || !std::isfinite(r))
    throw DomainError(std::string(who) + ": electron must pass off the system (r > 0)");
  return r;
}

}  // namespace

double magnetic_transition_probability(const TwoLevelSystem& sys, const ElectronKinematics& kin,
                                       double x, double y) {
  const double r = transverse_radius(x, y, "magnetic_transition_probability");
  const double gv = kin.gamma * kin.velocity;
  const double arg = sys.omega0 * r / gv;
  const double cross = std::abs(y * sys.mu[0] - x * sys.mu[1]);
  const double amp = mu0 * e * cross * sys.omega0 / (two_pi * hbar * r * gv) * besselk1(arg);
  return amp * amp;
}

double electric_transition_probability(const TwoLevelSystem& sys, const ElectronKinematics& kin,
                                       double x, double y, double dielectric_factor) {
  const double r = transverse_radius(x, y, "electric_transition_probability");
  if (!(dielectric_factor > 0.0 && dielectric_factor <= 1.0))
    throw DomainError("electric_transition_probability: dielectric factor must lie in (0, 1]");
  const double gv = kin.gamma * kin.velocity;
  const double arg = sys.omega0 * r / gv;
  const double d_radial = (sys.dipole[0] * x + sys.dipole[1] * y) / r;
  const double pre = e * arg / (two_pi * eps0 * hbar * r * kin.velocity);
  const double a = d_radial * besselk1(arg);
  const double b = sys.dipole[2] * besselk0(arg) / kin.gamma;
  return pre * pre * (a * a + b * b) * dielectric_factor * dielectric_factor;
}

double dielectric_field_factor(double n) {
  if (!(n >= 1.0)) throw DomainError("dielectric_field_factor: refractive index must be >= 1");
  return 2.0 / (n * n + 1.0);
}

}  // namespace ebeam
