#pragma once

#include <complex>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ebeam/beam.hpp"
#include "ebeam/ensemble.hpp"
#include "ebeam/interaction.hpp"
#include "ebeam/ode.hpp"
#include "ebeam/rng.hpp"
#include "ebeam/state.hpp"

namespace ebeam {

enum class DriveVariant { mean_rwa, shot_noise, spike_train };

struct DriveSpec {
  DriveVariant variant = DriveVariant::mean_rwa;
  double rabi = 0.0;                   // Omega, rad/s
  double b = 0.0;                      // phase-noise dephasing, 1/s
  double a = 0.0;                      // shot-noise damping P I0 / e, 1/s
  double second_harmonic_ratio = 0.0;  // I_{2 omega0} / (2 I0)
  double detuning = 0.0;               // drive minus transition frequency, rad/s

  void validate() const;
};

struct BlochTrajectory {
  std::vector<double> t;
  std::vector<BlochState> states;
  std::vector<std::string> warnings;
};

// Signed matrix element T_ge (J) for a field component B (T) along the moment axis.
double transition_moment(const TwoLevelSystem& sys, double B);

// Omega for the thin-beam field amplitude mu0 I_omega0 / (2 pi d).
double rabi_from_current(const TwoLevelSystem& sys, double I_omega0, double d);

// b = FWHM / 2.
double linewidth_to_b(double fwhm);

// a = P I0 / e with P the magnetic probability at distance d.
double shot_noise_damping(const TwoLevelSystem& sys, const ElectronKinematics& kin, double d,
                          double I0);

// Generator acting on (rho_eg, rho_ge, rho_ee, rho_gg). For mean_rwa the
// shot-noise entries are ignored; for shot_noise b is still honoured.
Eigen::Matrix4cd bloch_generator(const TwoLevelSystem& sys, const DriveSpec& drive);

BlochTrajectory solve_mean_rwa(const TwoLevelSystem& sys, const DriveSpec& drive,
                               const BlochState& rho0, std::span<const double> t_grid,
                               const OdeOptions& opt = {});

BlochTrajectory solve_shot_noise(const TwoLevelSystem& sys, const DriveSpec& drive,
                                 const BlochState& rho0, std::span<const double> t_grid,
                                 const OdeOptions& opt = {});

// Rotating-frame equations without RWA for a real coupling T(t) (J):
// h = T e^{i omega0 t} / hbar drives rho_eg' = -G2 rho_eg + i h (rho_ee - rho_gg).
BlochTrajectory solve_time_dependent(const TwoLevelSystem& sys,
                                     const std::function<double(double)>& coupling,
                                     const BlochState& rho0, std::span<const double> t_grid,
                                     const OdeOptions& opt = {});

enum class SpikeIntegrator {
  kick,      // exact unitary for the window-integrated pulse, aggregated per block
  resolved,  // RK4 through each (merged) window with a Richardson check
};

struct SpikeOptions {
  double window_factor = 5.0;  // window length in units of d / (gamma v)
  SpikeIntegrator integrator = SpikeIntegrator::kick;
  int substeps = 64;           // RK4 steps per window (resolved)
  double richardson_tol = 1e-10;
  double block_periods = 1.0;  // kick aggregation block, modulation periods
  int realizations = 12;
  EnsembleOptions ensemble;
  double noise_step = 0.0;     // phase-noise grid step; 0 picks period / 4
};

struct SpikeContext {
  double d = 0.0;              // beam centre to system
  double gv = 0.0;             // nominal gamma v
  double omega_mod = 0.0;      // modulation frequency, sets the block length
};

// One realization for a fixed, time-sorted electron set.
BlochTrajectory evolve_spike_train(const TwoLevelSystem& sys, const ElectronBatch& electrons,
                                   const SpikeContext& ctx, const BlochState& rho0,
                                   std::span<const double> t_grid, const SpikeOptions& opt = {});

// Realizations r = 0..n-1 use rng.split(r): phase noise from split 0, the
// electron stream from split 1. Averaged in realization order.
BlochTrajectory solve_spike_train(const TwoLevelSystem& sys, const BeamSpec& spec,
                                  const BlochState& rho0, std::span<const double> t_grid,
                                  const RngStream& rng, const SpikeOptions& opt = {});

// One realization with a caller-provided phase-noise path.
BlochTrajectory spike_realization(const TwoLevelSystem& sys, const BeamSpec& spec,
                                  const PhaseNoisePath& noise, const BlochState& rho0,
                                  std::span<const double> t_grid, const RngStream& electron_rng,
                                  const SpikeOptions& opt = {});

}  // namespace ebeam
