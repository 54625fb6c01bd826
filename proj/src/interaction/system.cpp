#include <cmath>
#include <string>

#include "ebeam/constants.hpp"
#include "ebeam/error.hpp"
#include "ebeam/interaction.hpp"

namespace ebeam {

using namespace constants;

void TwoLevelSystem::validate() const {
  if (!(omega0 > 0.0) || !std::isfinite(omega0))
    throw DomainError("TwoLevelSystem: omega0 must be > 0");
  if (!(gamma1 >= 0.0) || !(gamma2 >= 0.5 * gamma1 * (1.0 - 1e-12)))
    throw DomainError("TwoLevelSystem: need gamma2 >= gamma1 / 2 >= 0, got gamma1=" +
                      std::to_string(gamma1) + " gamma2=" + std::to_string(gamma2));
}

TwoLevelSystem TwoLevelSystem::k41_clock() {
  TwoLevelSystem s;
  s.omega0 = two_pi * 254.0137e6;
  s.kind = SystemKind::k41_hyperfine;
  s.mu = {0.5 * g_S * mu_B, 0.0, 0.0};
  return s;
}

TwoLevelSystem TwoLevelSystem::nv_spin() {
  TwoLevelSystem s;
  s.omega0 = two_pi * 2.87e9;
  s.kind = SystemKind::nv_spin;
  s.mu = {g_S * mu_B / std::sqrt(2.0), 0.0, 0.0};
  s.gamma1 = 1.0 / 6e-3;
  s.gamma2 = 1.0 / 3e-3;
  return s;
}

TwoLevelSystem TwoLevelSystem::nv_zpl() {
  TwoLevelSystem s;
  s.omega0 = 1.945 * e / hbar;
  s.kind = SystemKind::generic;
  s.dipole = {0.0, 2.27 * e * a0, 0.0};
  return s;
}

ScatterChannel ScatterChannel::coherent(double P, double phi) {
  return {P, std::polar(1.0, phi), std::polar(1.0, -2.0 * phi)};
}

double momentum_shift_check(const TwoLevelSystem& sys, const ElectronKinematics& kin,
                            double delta_z0) {
  if (!(delta_z0 >= 0.0)) throw DomainError("momentum_shift_check: delta_z0 must be >= 0");
  if (!(kin.velocity > 0.0)) throw DomainError("momentum_shift_check: velocity must be > 0");
  const double lambda0 = two_pi * kin.velocity / sys.omega0;
  return 4.0 * pi * delta_z0 / lambda0;
}

double lamb_dicke_bound(double delta_p_perp, double mass, double trap_omega) {
  if (!(delta_p_perp >= 0.0) || !(mass > 0.0) || !(trap_omega > 0.0))
    throw DomainError("lamb_dicke_bound: arguments must be positive");
  return delta_p_perp / std::sqrt(2.0 * mass * hbar * trap_omega);
}

double incoherent_loss_fraction(double sigma_tot, double current_density, double t) {
  if (!(sigma_tot >= 0.0) || !(current_density >= 0.0) || !(t >= 0.0))
    throw DomainError("incoherent_loss_fraction: arguments must be >= 0");
  return -std::expm1(-sigma_tot * current_density * t / e);
}

double doppler_detuning(double v_atom, double f0, double v_beam) {
  if (!(v_beam > 0.0)) throw DomainError("doppler_detuning: beam velocity must be > 0");
  if (!(std::abs(v_atom) < 0.01 * v_beam))
    throw DomainError("doppler_detuning: atom velocity must be small against the beam velocity");
  return v_atom * f0 / v_beam;
}

}  // namespace ebeam
