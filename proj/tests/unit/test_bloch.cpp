#include <doctest.h>

#include <cmath>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "ebeam/bloch.hpp"
#include "ebeam/constants.hpp"
#include "ebeam/error.hpp"

using namespace ebeam;
using namespace ebeam::constants;

namespace {

std::vector<double> grid(double T, int n) {
  std::vector<double> t(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) t[std::size_t(k)] = T * k / (n - 1);
  return t;
}

TwoLevelSystem clean(double f = 254e6) {
  TwoLevelSystem s = TwoLevelSystem::k41_clock();
  s.omega0 = two_pi * f;
  return s;
}

BeamSpec nv_beam() {
  BeamSpec b;
  b.current = 50e-9;
  b.omega0 = two_pi * 2.87e9;
  b.mod_depth = 0.05;
  b.drift_length = 0.03;
  b.kin = kinematics_from_energy(2000);
  b.waist = 10e-9;
  b.impact_distance = 70e-9;
  b.linewidth = two_pi * 300;
  return b;
}

}  // namespace

TEST_SUITE("bloch") {

TEST_CASE("rabi frequency from the modulation current") {
  const auto k41 = TwoLevelSystem::k41_clock();
  // Omega = |mu| B / hbar with the wire field B = mu0 I / (2 pi d).
  auto oracle = [](double mu, double I, double d) { return mu * mu0 * I / (two_pi * d) / hbar; };
  CHECK(rabi_from_current(k41, 48.45e-6, 250e-6) == doctest::Approx(oracle(g_S * mu_B / 2, 48.45e-6, 250e-6)).epsilon(1e-12));
  CHECK(rabi_from_current(k41, 48.45e-6, 250e-6) / two_pi == doctest::Approx(543.12).epsilon(1e-4));
  CHECK(rabi_from_current(k41, 48.45e-6, 250e-6) / two_pi == doctest::Approx(540.0).epsilon(0.02));
  const auto nv = TwoLevelSystem::nv_spin();
  CHECK(rabi_from_current(nv, 24.2e-9, 70e-9) == doctest::Approx(oracle(g_S * mu_B / std::sqrt(2.0), 24.2e-9, 70e-9)).epsilon(1e-12));
  CHECK(rabi_from_current(nv, 24.2e-9, 70e-9) == doctest::Approx(8609.1).epsilon(1e-4));
  CHECK(linewidth_to_b(two_pi * 25) == doctest::Approx(pi * 25));
  CHECK(linewidth_to_b(1e-7 * two_pi * 2.87e9) == doctest::Approx(two_pi * 143.5));
  CHECK_THROWS_AS(rabi_from_current(k41, 1e-6, 0.0), DomainError);
}

TEST_CASE("undamped resonant and detuned rabi oscillation") {
  const auto s = clean();
  DriveSpec d;
  d.rabi = two_pi * 540;
  const auto t = grid(5e-3, 101);
  const auto tr = solve_mean_rwa(s, d, BlochState::ground(), t);
  for (std::size_t k = 0; k < t.size(); ++k)
    CHECK(tr.states[k].inversion() == doctest::Approx(-std::cos(d.rabi * t[k])).epsilon(1e-8).scale(1.0));

  d.detuning = two_pi * 300;
  const double W = std::hypot(d.rabi, d.detuning);
  const auto td = solve_mean_rwa(s, d, BlochState::ground(), t);
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double sn = std::sin(0.5 * W * t[k]);
    CHECK(td.states[k].rho_ee == doctest::Approx(d.rabi * d.rabi / (W * W) * sn * sn).epsilon(1e-8).scale(1.0));
  }
}

TEST_CASE("solver matches the matrix exponential") {
  TwoLevelSystem s = TwoLevelSystem::nv_spin();
  DriveSpec d;
  d.rabi = 8600;
  d.b = pi * 300;
  d.detuning = 1500;
  const auto t = grid(4e-3, 41);
  const BlochState rho0{0.2, 0.8, {0.1, 0.3}};
  const auto tr = solve_mean_rwa(s, d, rho0, t);
  const Eigen::Matrix4cd G = bloch_generator(s, d);
  const Eigen::Vector4cd y0(rho0.rho_eg, std::conj(rho0.rho_eg), rho0.rho_ee, rho0.rho_gg);
  double worst = 0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const Eigen::Vector4cd y = (G * t[k]).exp() * y0;
    worst = std::max(worst, std::abs(y[0] - tr.states[k].rho_eg));
    worst = std::max(worst, std::abs(y[2].real() - tr.states[k].rho_ee));
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("free decay rates") {
  TwoLevelSystem s = clean();
  s.gamma1 = 100;
  s.gamma2 = 80;
  DriveSpec d;
  d.b = 30;
  const auto t = grid(0.02, 21);
  const auto tr = solve_mean_rwa(s, d, BlochState{1.0, 0.0, 0.0}, t);
  for (std::size_t k = 0; k < t.size(); ++k) CHECK(tr.states[k].rho_ee == doctest::Approx(std::exp(-100 * t[k])).epsilon(1e-8));
  const auto tc = solve_mean_rwa(s, d, BlochState{0.5, 0.5, 0.5}, t);
  for (std::size_t k = 0; k < t.size(); ++k)
    CHECK(std::abs(tc.states[k].rho_eg) == doctest::Approx(0.5 * std::exp(-110 * t[k])).epsilon(1e-8));
}

TEST_CASE("trace and positivity along damped trajectories") {
  TwoLevelSystem s = TwoLevelSystem::nv_spin();
  for (double b : {0.0, 300.0, 3000.0}) {
    DriveSpec d;
    d.rabi = 8600;
    d.b = b;
    const auto tr = solve_mean_rwa(s, d, BlochState::ground(), grid(5e-3, 201));
    for (const auto& st : tr.states) {
      CHECK(st.trace() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(st.positivity_margin() >= -1e-10);
    }
  }
}

TEST_CASE("shot-noise terms vanish with a = 0 and stay tiny for the atom") {
  const auto s = TwoLevelSystem::k41_clock();
  DriveSpec d;
  d.variant = DriveVariant::shot_noise;
  d.rabi = two_pi * 540;
  d.second_harmonic_ratio = 0.11;
  const auto t = grid(0.02, 201);
  DriveSpec m = d;
  m.variant = DriveVariant::mean_rwa;
  const auto a0 = solve_shot_noise(s, d, BlochState::ground(), t);
  const auto ref = solve_mean_rwa(s, m, BlochState::ground(), t);
  for (std::size_t k = 0; k < t.size(); ++k) CHECK(a0.states[k].rho_ee == doctest::Approx(ref.states[k].rho_ee).scale(1.0).epsilon(1e-12));

  d.a = shot_noise_damping(s, kinematics_from_energy(18000), 250e-6, 100e-6);
  CHECK(d.a > 0.0);
  CHECK(d.a < 1e-6);
  const auto sn = solve_shot_noise(s, d, BlochState::ground(), t);
  double dev = 0;
  for (std::size_t k = 0; k < t.size(); ++k) dev = std::max(dev, std::abs(sn.states[k].rho_ee - ref.states[k].rho_ee));
  CHECK(dev < 1e-6);
  CHECK(sn.warnings.empty());
  CHECK_THROWS_AS(solve_shot_noise(s, m, BlochState::ground(), t), DomainError);
}

TEST_CASE("full time-dependent drive reduces to the rotating-wave result") {
  TwoLevelSystem s = clean(2e5);
  const double rabi = two_pi * 500;
  const auto t = grid(1e-3, 11);
  OdeOptions o;
  o.rel_tol = 1e-9;
  o.abs_tol = 1e-11;
  const auto full = solve_time_dependent(s, [&](double tt) { return hbar * rabi * std::cos(s.omega0 * tt); },
                                         BlochState::ground(), t, o);
  DriveSpec d;
  d.rabi = rabi;
  const auto rwa = solve_mean_rwa(s, d, BlochState::ground(), t);
  for (std::size_t k = 0; k < t.size(); ++k)
    CHECK(full.states[k].rho_ee == doctest::Approx(rwa.states[k].rho_ee).scale(1.0).epsilon(0.01));
}

TEST_CASE("input validation") {
  const auto s = clean();
  DriveSpec d;
  d.rabi = -1;
  const auto t = grid(1e-3, 3);
  CHECK_THROWS_AS(solve_mean_rwa(s, d, BlochState::ground(), t), DomainError);
  d.rabi = 1;
  CHECK_THROWS_AS(solve_mean_rwa(s, d, BlochState{0.9, 0.9, 0.0}, t), DomainError);
  std::vector<double> bad{0.0, 2.0, 1.0};
  CHECK_THROWS_AS(solve_mean_rwa(s, d, BlochState::ground(), bad), DomainError);
}

TEST_CASE("spike train: kick and resolved integrators agree") {
  const auto sys = TwoLevelSystem::nv_spin();
  const BeamSpec b = nv_beam();
  const auto t = grid(2e-6, 5);
  SpikeOptions k;
  k.realizations = 1;
  SpikeOptions r = k;
  r.integrator = SpikeIntegrator::resolved;
  const RngStream rng(17, 0);
  const auto a = solve_spike_train(sys, b, BlochState::ground(), t, rng, k);
  const auto c = solve_spike_train(sys, b, BlochState::ground(), t, rng, r);
  // The resolved path keeps the counter-rotating terms, of relative size Omega / omega0 per amplitude.
  for (std::size_t i = 1; i < t.size(); ++i) {
    CHECK(a.states[i].rho_ee == doctest::Approx(c.states[i].rho_ee).epsilon(1e-3));
    CHECK(std::abs(a.states[i].rho_eg - c.states[i].rho_eg) < 1e-6);
  }
  CHECK(a.states.back().rho_ee > 0.0);
}

TEST_CASE("spike train is reproducible across worker counts") {
  const auto sys = TwoLevelSystem::nv_spin();
  const BeamSpec b = nv_beam();
  const auto t = grid(4e-6, 5);
  SpikeOptions o;
  o.realizations = 2;
  o.ensemble.chunk_electrons = 2000;
  SpikeOptions p = o;
  p.ensemble.workers = 3;
  const auto a = solve_spike_train(sys, b, BlochState::ground(), t, RngStream(5, 0), o);
  const auto c = solve_spike_train(sys, b, BlochState::ground(), t, RngStream(5, 0), p);
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(a.states[i].rho_ee == c.states[i].rho_ee);
    CHECK(a.states[i].rho_eg == c.states[i].rho_eg);
    CHECK(a.states[i].valid(1e-12));
  }
}

TEST_CASE("spike train on a hand-made electron set") {
  const auto sys = TwoLevelSystem::nv_spin();
  const auto kin = kinematics_from_energy(2000);
  SpikeContext ctx{70e-9, kin.gamma * kin.velocity, sys.omega0};
  ElectronBatch e;
  e.resize(3);
  for (int j = 0; j < 3; ++j) {
    e.t_emit[j] = 0;
    e.t_arrive[j] = 1e-9 * (j + 1);
    e.velocity[j] = kin.velocity;
    e.x[j] = e.y[j] = 0.0;
  }
  const auto t = grid(5e-9, 3);
  const auto tr = evolve_spike_train(sys, e, ctx, BlochState::ground(), t);
  CHECK(tr.states.back().rho_ee > 0.0);
  CHECK(tr.states.back().valid(1e-12));
  std::swap(e.t_arrive[0], e.t_arrive[2]);
  CHECK_THROWS_AS(evolve_spike_train(sys, e, ctx, BlochState::ground(), t), DomainError);
}

}  // TEST_SUITE
