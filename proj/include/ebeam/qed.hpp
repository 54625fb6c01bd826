#pragma once

#include <complex>
#include <cstdint>
#include <string>

#include "ebeam/vec.hpp"

namespace ebeam {

struct WavePacketSpec {
  double delta_r_perp = 0.0;       // m
  double delta_z0 = 0.0;           // m
  double kinetic_energy_eV = 0.0;
  Vec2 impact_offset{0.0, 0.0};    // packet centre relative to the system, m
  double total_path = 0.0;         // source to interaction region, m

  void validate() const;
  double delta_pz() const;         // hbar / (2 delta_z0)
  double delta_pperp() const;      // hbar / (2 delta_r_perp)
};

struct DimensionlessParams {
  double Omega0 = 0.0;  // hbar omega0 / (2 c dp_z)
  double M = 0.0;       // m c / (2 dp_z)
  double xi = 0.0;      // dp_perp / dp_z
  double pi_z0 = 0.0;   // p_z0 / (2 dp_z)
  Vec2 rho0{0.0, 0.0};  // r_0 / delta_r_perp
  double l_tilde = 0.0; // l_tot / delta_z0
  double tau = 0.0;     // l_tilde c / v
};

DimensionlessParams dimensionless_params(const WavePacketSpec& wp, double omega0);

enum class QedMode {
  qmc,     // randomized Halton points, Cranley-Patterson shifts
  tensor,  // Gauss-Hermite product rule, for cross-checks
};

struct QedOptions {
  QedMode mode = QedMode::qmc;
  int n_angle = 160;          // inner polar rule around the outgoing momentum
  int n_radial = 100;
  int points = 1024;          // QMC points per shift
  int shifts = 8;
  int tensor_nodes = 16;      // per axis in tensor mode
  double truncation = 5.0;    // momenta beyond n widths dropped (contributions < e^{-n^2})
  bool reverse = false;       // g -> e: omega0 -> -omega0
  unsigned workers = 1;
  std::uint64_t seed = 0x5eed;
  double rel_tol = 0.05;      // convergence target on P

  static QedOptions desk() { return {}; }
  static QedOptions fine() {
    QedOptions o;
    o.n_angle = 256;
    o.n_radial = 160;
    o.points = 4096;
    o.shifts = 16;
    o.rel_tol = 0.01;
    return o;
  }
};

struct BackactionResult {
  double P_plus = 0.0;        // initial spin +1/2, both final spins
  double P_minus = 0.0;
  double P_plus_err = 0.0;    // one standard error
  double P_minus_err = 0.0;
  double flip_fraction = 0.0; // spin-flip share of P_plus
  std::complex<double> overlap;  // spin-averaged, normalized
  double overlap_err = 0.0;
  double P_semiclassical = 0.0;
  std::size_t samples = 0;
  bool converged = false;
  std::string grid;           // resolution descriptor

  double ratio() const { return 0.5 * (P_plus + P_minus) / P_semiclassical; }
};

// Magnetic transition moment of size |mu| (J/T) in the transverse plane at
// angle moment_angle from x.
BackactionResult magnetic_backaction(const WavePacketSpec& wp, double omega0, double moment,
                                     const QedOptions& opt = {}, double moment_angle = 0.0);

double scattered_probability_magnetic(const WavePacketSpec& wp, double omega0, double moment,
                                      int spin_sign, const QedOptions& opt = {},
                                      double moment_angle = 0.0);

std::complex<double> overlap_magnetic(const WavePacketSpec& wp, double omega0, double moment,
                                      const QedOptions& opt = {});

struct ElectricBackaction {
  double P_conserving_plus = 0.0, P_conserving_minus = 0.0;
  double P_flip_plus = 0.0, P_flip_minus = 0.0;
  double P_plus_err = 0.0, P_minus_err = 0.0;
  double P_semiclassical = 0.0;
  std::size_t samples = 0;
  bool converged = false;
  std::string grid;

  double P_plus() const { return P_conserving_plus + P_flip_plus; }
  double P_minus() const { return P_conserving_minus + P_flip_minus; }
};

// Electric transition dipole (C m) of a transition at omega_eg.
ElectricBackaction scattered_probability_electric(const WavePacketSpec& wp, double omega_eg,
                                                  const Vec3& dipole, const QedOptions& opt = {});

}  // namespace ebeam
