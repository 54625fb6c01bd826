#include <cmath>
#include <string>

#include "ebeam/beam.hpp"
#include "ebeam/constants.hpp"
#include "ebeam/error.hpp"
#include "ebeam/qed.hpp"

namespace ebeam {

using namespace constants;

void WavePacketSpec::validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw DomainError(std::string("WavePacketSpec: ") + what);
  };
  need(delta_r_perp > 0.0, "delta_r_perp must be > 0");
  need(delta_z0 > 0.0, "delta_z0 must be > 0");
  need(kinetic_energy_eV > 0.0, "kinetic energy must be > 0");
  need(total_path >= 0.0, "total_path must be >= 0");
  need(std::isfinite(impact_offset[0]) && std::isfinite(impact_offset[1]), "impact offset must be finite");
}

double WavePacketSpec::delta_pz() const { return hbar / (2.0 * delta_z0); }
double WavePacketSpec::delta_pperp() const { return hbar / (2.0 * delta_r_perp); }

DimensionlessParams dimensionless_params(const WavePacketSpec& wp, double omega0) {
  wp.validate();
  const ElectronKinematics kin = kinematics_from_energy(wp.kinetic_energy_eV);
  const double dpz = wp.delta_pz();
  DimensionlessParams p;
  p.Omega0 = hbar * omega0 / (2.0 * c * dpz);
  p.M = m_e * c / (2.0 * dpz);
  p.xi = wp.delta_pperp() / dpz;
  p.pi_z0 = kin.momentum() / (2.0 * dpz);
  p.rho0 = {wp.impact_offset[0] / wp.delta_r_perp, wp.impact_offset[1] / wp.delta_r_perp};
  p.l_tilde = wp.total_path / wp.delta_z0;
  p.tau = p.l_tilde * c / kin.velocity;
  return p;
}

}  // namespace ebeam
