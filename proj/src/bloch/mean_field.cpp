#include <cmath>
#include <string>

#include "ebeam/bloch.hpp"
#include "ebeam/constants.hpp"
#include "ebeam/error.hpp"

namespace ebeam {

using namespace constants;
using cd = std::complex<double>;

void DriveSpec::validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw DomainError(std::string("DriveSpec: ") + what);
  };
  need(rabi >= 0.0 && std::isfinite(rabi), "rabi must be finite and >= 0");
  need(b >= 0.0 && std::isfinite(b), "b must be finite and >= 0");
  need(a >= 0.0 && std::isfinite(a), "a must be finite and >= 0");
  need(std::isfinite(second_harmonic_ratio), "second_harmonic_ratio must be finite");
  need(std::isfinite(detuning), "detuning must be finite");
}

double transition_moment(const TwoLevelSystem& sys, double B) {
  switch (sys.kind) {
    case SystemKind::k41_hyperfine:
      return -0.5 * g_S * mu_B * B;
    case SystemKind::nv_spin:
      return g_S * mu_B * B / std::sqrt(2.0);
    case SystemKind::generic: {
      const double m = norm(sys.mu);
      if (!(m > 0.0)) throw DomainError("transition_moment: generic system needs a magnetic moment");
      return -m * B;
    }
  }
  throw DomainError("transition_moment: unknown system kind");
}

double rabi_from_current(const TwoLevelSystem& sys, double I_omega0, double d) {
  if (!(d > 0.0)) throw DomainError("rabi_from_current: d must be > 0");
  if (!(I_omega0 >= 0.0)) throw DomainError("rabi_from_current: I_omega0 must be >= 0");
  const double B = mu0 * I_omega0 / (two_pi * d);
  return std::abs(transition_moment(sys, B)) / hbar;
}

double linewidth_to_b(double fwhm) {
  if (!(fwhm >= 0.0)) throw DomainError("linewidth_to_b: linewidth must be >= 0");
  return 0.5 * fwhm;
}

double shot_noise_damping(const TwoLevelSystem& sys, const ElectronKinematics& kin, double d,
                          double I0) {
  return magnetic_transition_probability(sys, kin, 0.0, d) * I0 / e;
}

Eigen::Matrix4cd bloch_generator(const TwoLevelSystem& sys, const DriveSpec& drive) {
  const bool shot = drive.variant == DriveVariant::shot_noise;
  const double a = shot ? drive.a : 0.0;
  const double h2 = shot ? drive.second_harmonic_ratio : 0.0;
  const cd i(0.0, 1.0);
  const cd half = 0.5 * i * drive.rabi;
  const cd dec = -(sys.gamma2 + drive.b + a) + i * drive.detuning;
  Eigen::Matrix4cd m;
  // clang-format off
  m << dec,          a * h2,           -half,               half,
       a * h2,       std::conj(dec),    half,              -half,
       -half,        half,             -(sys.gamma1 + a),   a,
       half,        -half,              sys.gamma1 + a,    -a;
  // clang-format on
  return m;
}

namespace {

BlochState from_vector(const Eigen::Vector4cd& y) {
  BlochState s;
  s.rho_eg = y[0];
  s.rho_ee = y[2].real();
  s.rho_gg = y[3].real();
  return s;
}

Eigen::Vector4cd to_vector(const BlochState& s) {
  return {s.rho_eg, std::conj(s.rho_eg), cd(s.rho_ee), cd(s.rho_gg)};
}

void check_inputs(const BlochState& rho0, std::span<const double> t_grid, const char* who) {
  if (!rho0.valid(1e-9)) throw DomainError(std::string(who) + ": rho0 is not a density matrix");
  if (t_grid.empty()) throw DomainError(std::string(who) + ": empty time grid");
  for (std::size_t k = 1; k < t_grid.size(); ++k)
    if (!(t_grid[k] >= t_grid[k - 1]))
      throw DomainError(std::string(who) + ": time grid must be non-decreasing");
}

BlochTrajectory integrate_linear(const Eigen::Matrix4cd& m, const BlochState& rho0,
                                 std::span<const double> t_grid, const OdeOptions& opt) {
  auto rhs = [&](double, const Eigen::Vector4cd& y, Eigen::Vector4cd& dy) { dy.noalias() = m * y; };
  const auto sol = integrate_ode(rhs, t_grid.front(), t_grid.back(), to_vector(rho0), opt, t_grid);
  BlochTrajectory out;
  out.t.assign(t_grid.begin(), t_grid.end());
  out.states.reserve(sol.y.size());
  for (const auto& y : sol.y) out.states.push_back(from_vector(y));
  return out;
}

}  // namespace

BlochTrajectory solve_mean_rwa(const TwoLevelSystem& sys, const DriveSpec& drive,
                               const BlochState& rho0, std::span<const double> t_grid,
                               const OdeOptions& opt) {
  sys.validate();
  drive.validate();
  if (drive.variant != DriveVariant::mean_rwa)
    throw DomainError("solve_mean_rwa: drive variant must be mean_rwa");
  check_inputs(rho0, t_grid, "solve_mean_rwa");
  return integrate_linear(bloch_generator(sys, drive), rho0, t_grid, opt);
}

BlochTrajectory solve_shot_noise(const TwoLevelSystem& sys, const DriveSpec& drive,
                                 const BlochState& rho0, std::span<const double> t_grid,
                                 const OdeOptions& opt) {
  sys.validate();
  drive.validate();
  if (drive.variant != DriveVariant::shot_noise)
    throw DomainError("solve_shot_noise: drive variant must be shot_noise");
  check_inputs(rho0, t_grid, "solve_shot_noise");
  auto out = integrate_linear(bloch_generator(sys, drive), rho0, t_grid, opt);
  if (drive.a > drive.rabi / 100.0)
    out.warnings.push_back("shot_noise_damping: a = " + std::to_string(drive.a) +
                           " 1/s exceeds Omega / 100");
  return out;
}

BlochTrajectory solve_time_dependent(const TwoLevelSystem& sys,
                                     const std::function<double(double)>& coupling,
                                     const BlochState& rho0, std::span<const double> t_grid,
                                     const OdeOptions& opt) {
  sys.validate();
  check_inputs(rho0, t_grid, "solve_time_dependent");
  const cd i(0.0, 1.0);
  const double g1 = sys.gamma1, g2 = sys.gamma2, w0 = sys.omega0;
  auto rhs = [&](double t, const Eigen::Vector4cd& y, Eigen::Vector4cd& dy) {
    const cd h = coupling(t) / hbar * std::polar(1.0, w0 * t);
    const cd flow = i * std::conj(h) * y[0] - i * h * y[1];
    dy[0] = -g2 * y[0] + i * h * (y[2] - y[3]);
    dy[1] = std::conj(dy[0]);
    dy[2] = flow - g1 * y[2];
    dy[3] = -dy[2];
  };
  const auto sol = integrate_ode(rhs, t_grid.front(), t_grid.back(), to_vector(rho0), opt, t_grid);
  BlochTrajectory out;
  out.t.assign(t_grid.begin(), t_grid.end());
  for (const auto& y : sol.y) out.states.push_back(from_vector(y));
  return out;
}

}  // namespace ebeam
