#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ebeam/vec.hpp"

namespace ebeam {

struct ElectronKinematics {
  double kinetic_energy_eV = 0.0;
  double velocity = 0.0;  // m/s
  double gamma = 1.0;

  double beta() const;
  double momentum() const;  // kg m/s
};

ElectronKinematics kinematics_from_energy(double kinetic_energy_eV);

// v(E) = c sqrt(k (k + 2)) / (1 + k), k = E / (m_e c^2); stable at small k.
double velocity_from_energy(double kinetic_energy_eV);

struct BeamSpec {
  double current = 0.0;          // I0, A
  double omega0 = 0.0;           // rad/s
  double mod_depth = 0.0;        // dE/E
  double drift_length = 0.0;     // m
  ElectronKinematics kin;
  double waist = 0.0;            // m
  double impact_distance = 0.0;  // m
  double linewidth = 0.0;        // FWHM, rad/s
  double energy_spread_eV = 0.0;

  // Structural checks; overtaking is reported by bunching_parameter.
  void validate() const;
  double modulation_wavelength() const;  // 2 pi v0 / omega0
  double period() const;                 // 2 pi / omega0
};

struct ModulatedCurrent {
  double r_b = 0.0;
  double I0 = 0.0;
  double omega0 = 0.0;
  double v0 = 0.0;
  double z0 = 0.0;  // plane of the energy modulation
};

// l omega0 v1 / v0^2 with v1 = dE / (gamma^3 m_e v0). Throws ValidityError
// ("no_overtaking") once r_b >= 1.
double bunching_parameter(const BeamSpec& spec);

// Interaction plane at z = 0, modulator at z0 = -l.
ModulatedCurrent modulated_current(const BeamSpec& spec);

// Unique theta with theta - r_b sin(theta) = tau, 0 <= r_b < 1.
double kepler_theta(double tau, double r_b);

double analytic_current(const ModulatedCurrent& mc, double z, double t);

// I_{n omega0} = 2 I0 J_n(n r_b), n >= 1.
double fourier_coefficient(int n, double r_b, double I0);

// Relative bunching-parameter spread dr_b / r_b = dE_spread / E.
double velocity_spread_effect(const BeamSpec& spec);

// Field of an infinitely thin beam at (x, y) relative to the beam axis.
Vec3 thin_beam_field(double current, double x, double y);

// Field of a Gaussian beam (intensity ~ exp(-2 r^2 / w^2)) at (x, y).
Vec3 gaussian_beam_field(double current, double waist, double x, double y, double rel_tol = 1e-8);

// Beam-centre path over one modulation period, parametrised by phase in [0, 2 pi).
using Trajectory = std::function<Vec2(double)>;
// Current relative to I0 along the same phase; nullptr means constant.
using CurrentShape = std::function<double(double)>;

struct RabiProfileOptions {
  int samples_per_period = 2048;
  double moment = 0.0;  // transition-moment factor, J/T; 0 gives |B_n| per ampere
  CurrentShape current_shape;
};

// Rabi frequency per ampere (rad/s/A) at each target from the harmonic-th
// Fourier component of the thin-beam field along the trajectory.
std::vector<double> rabi_profile(const Trajectory& path, std::span<const Vec2> targets, int harmonic,
                                 const RabiProfileOptions& opt = {});

}  // namespace ebeam
