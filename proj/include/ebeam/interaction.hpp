#pragma once

#include <complex>

#include "ebeam/beam.hpp"
#include "ebeam/state.hpp"
#include "ebeam/vec.hpp"

namespace ebeam {

enum class SystemKind { k41_hyperfine, nv_spin, generic };

struct TwoLevelSystem {
  double omega0 = 0.0;        // rad/s
  SystemKind kind = SystemKind::generic;
  Vec3 mu{0.0, 0.0, 0.0};     // transition magnetic moment, J/T
  Vec3 dipole{0.0, 0.0, 0.0}; // transition electric dipole, C m
  double gamma1 = 0.0;        // 1/s
  double gamma2 = 0.0;        // 1/s

  void validate() const;

  // 41K F=1,mF=0 <-> F=2,mF=0 clock transition; moment g_S mu_B / 2 along x.
  static TwoLevelSystem k41_clock();
  // NV- ms=0 <-> ms=1; moment g_S mu_B / sqrt(2) along x, T1 = 6 ms, T2 = 3 ms.
  static TwoLevelSystem nv_spin();
  // NV- ground state to the 1.945 eV zero-phonon line; |D| = 2.27 e a0 along y.
  static TwoLevelSystem nv_zpl();
};

struct ScatterChannel {
  double P = 0.0;
  std::complex<double> lambda1 = 0.0;
  std::complex<double> lambda2 = 0.0;

  static ScatterChannel incoherent(double P) { return {P, 0.0, 0.0}; }
  // <in|scatt> = i exp(i phi): lambda1 = exp(i phi), lambda2 = exp(-2 i phi).
  static ScatterChannel coherent(double P, double phi);
};

// Electron at (x, y) relative to the system, moving along z.
double magnetic_transition_probability(const TwoLevelSystem& sys, const ElectronKinematics& kin,
                                       double x, double y);

// Field-projected dipole: the in-plane component along (x, y) couples through
// K_1, the z component through K_0 / gamma; multiplied by factor^2.
double electric_transition_probability(const TwoLevelSystem& sys, const ElectronKinematics& kin,
                                       double x, double y, double dielectric_factor = 1.0);

// (2 / (n^2 + 1)): field reduction inside a dielectric of refractive index n.
double dielectric_field_factor(double n);

BlochState single_scatter_update(const BlochState& rho, const ScatterChannel& ch);

// delta p / Delta p_z = 4 pi Delta z0 / lambda0.
double momentum_shift_check(const TwoLevelSystem& sys, const ElectronKinematics& kin, double delta_z0);

double lamb_dicke_bound(double delta_p_perp, double mass, double trap_omega);

double incoherent_loss_fraction(double sigma_tot, double current_density, double t);

double doppler_detuning(double v_atom, double f0, double v_beam);

}  // namespace ebeam
