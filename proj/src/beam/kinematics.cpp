#include <cmath>
#include <string>

#include "ebeam/beam.hpp"
#include "ebeam/constants.hpp"
#include "ebeam/error.hpp"

namespace ebeam {

using namespace constants;

double ElectronKinematics::beta() const { return velocity / c; }

double ElectronKinematics::momentum() const { return gamma * m_e * velocity; }

double velocity_from_energy(double kinetic_energy_eV) {
  const double k = kinetic_energy_eV / m_e_c2_eV;
  return c * std::sqrt(k * (k + 2.0)) / (1.0 + k);
}

ElectronKinematics kinematics_from_energy(double kinetic_energy_eV) {
  if (!(kinetic_energy_eV >= 0.0) || !std::isfinite(kinetic_energy_eV))
    throw DomainError("kinematics_from_energy: kinetic energy must be >= 0, got " +
                      std::to_string(kinetic_energy_eV));
  ElectronKinematics k;
  k.kinetic_energy_eV = kinetic_energy_eV;
  k.gamma = 1.0 + kinetic_energy_eV / m_e_c2_eV;
  k.velocity = velocity_from_energy(kinetic_energy_eV);
  return k;
}

void BeamSpec::validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw DomainError(std::string("BeamSpec: ") + what);
  };
  need(current > 0.0, "current must be > 0");
  need(omega0 > 0.0, "modulation frequency must be > 0");
  need(mod_depth >= 0.0 && mod_depth < 1.0, "mod_depth must lie in [0, 1)");
  need(drift_length >= 0.0, "drift_length must be >= 0");
  need(kin.velocity > 0.0 && kin.velocity < c, "electron velocity must lie in (0, c)");
  need(waist > 0.0, "waist must be > 0");
  need(impact_distance > 0.0, "impact_distance must be > 0");
  need(linewidth >= 0.0, "linewidth must be >= 0");
  need(energy_spread_eV >= 0.0, "energy_spread must be >= 0");
}

double BeamSpec::modulation_wavelength() const { return two_pi * kin.velocity / omega0; }

double BeamSpec::period() const { return two_pi / omega0; }

}  // namespace ebeam
