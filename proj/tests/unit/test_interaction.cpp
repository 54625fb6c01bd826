#include <doctest.h>

#include <cmath>
#include <complex>
#include <functional>

#include <boost/math/quadrature/ooura_fourier_integrals.hpp>

#include "ebeam/constants.hpp"
#include "ebeam/error.hpp"
#include "ebeam/interaction.hpp"

using namespace ebeam;
using namespace ebeam::constants;

namespace {

// Time integrals over the pass in units of r / (gamma v), evaluated on [0, inf)
// with the double-exponential Fourier quadrature.
double fourier_cos(const std::function<double(double)>& f, double w) {
  static boost::math::quadrature::ooura_fourier_cos<double> q(1e-13);
  return 2.0 * q.integrate(f, w).first;
}

double fourier_sin(const std::function<double(double)>& f, double w) {
  static boost::math::quadrature::ooura_fourier_sin<double> q(1e-13);
  return 2.0 * q.integrate(f, w).first;
}

// |(1/hbar) int T(t) e^{i w t} dt|^2 for the field of a point charge passing at (x, y).
double magnetic_oracle(const TwoLevelSystem& s, const ElectronKinematics& k, double x, double y) {
  const double r = std::hypot(x, y), gv = k.gamma * k.velocity, tau = r / gv;
  auto coupling = [&](double u) {
    const double den = std::pow(r * r * (1 + u * u), 1.5);
    // B circulates: B = mu0 e gamma v (y, -x) / (4 pi den) for the electron at (x, y).
    const double bx = mu0 * e * gv * y / (4 * pi * den);
    const double by = mu0 * e * gv * (-x) / (4 * pi * den);
    return tau * (s.mu[0] * bx + s.mu[1] * by);
  };
  const double re = fourier_cos(coupling, s.omega0 * tau);
  return re * re / (hbar * hbar);
}

double electric_oracle(const TwoLevelSystem& s, const ElectronKinematics& k, double x, double y) {
  const double r = std::hypot(x, y), gv = k.gamma * k.velocity, tau = r / gv;
  auto den = [&](double u) { return 4 * pi * eps0 * std::pow(r * r * (1 + u * u), 1.5); };
  const double dr = (s.dipole[0] * x + s.dipole[1] * y) / r;
  const double re = fourier_cos([&](double u) { return tau * dr * e * k.gamma * r / den(u); }, s.omega0 * tau);
  const double im = fourier_sin([&](double u) { return tau * s.dipole[2] * e * gv * tau * u / den(u); }, s.omega0 * tau);
  return (re * re + im * im) / (hbar * hbar);
}

TwoLevelSystem bohr_x(double f) {
  TwoLevelSystem s;
  s.omega0 = two_pi * f;
  s.mu = {mu_B, 0.0, 0.0};
  return s;
}

}  // namespace

TEST_SUITE("interaction") {

TEST_CASE("presets") {
  const auto k = TwoLevelSystem::k41_clock();
  CHECK(norm(k.mu) == doctest::Approx(0.5 * g_S * mu_B));
  const auto nv = TwoLevelSystem::nv_spin();
  CHECK(norm(nv.mu) == doctest::Approx(g_S * mu_B / std::sqrt(2.0)));
  CHECK(nv.gamma2 >= nv.gamma1 / 2);
  CHECK_NOTHROW(nv.validate());
  TwoLevelSystem bad = nv;
  bad.gamma2 = 0.1 * bad.gamma1;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("magnetic probability far from the pulse cut-off") {
  const auto kin = kinematics_from_energy(18000);
  const auto s = bohr_x(254.0137e6);
  const double P = magnetic_transition_probability(s, kin, 0.0, 250e-6);
  CHECK(std::sqrt(P) == doctest::Approx(r_e / 250e-6).epsilon(1e-4));
  CHECK(std::sqrt(P) == doctest::Approx(1.13e-11).epsilon(3e-3));
  TwoLevelSystem sy = s;
  sy.mu = {0.0, mu_B, 0.0};
  CHECK(magnetic_transition_probability(sy, kin, 0.0, 250e-6) == 0.0);
  CHECK_THROWS_AS(magnetic_transition_probability(s, kin, 0.0, 0.0), DomainError);
}

TEST_CASE("magnetic probability agrees with the time-domain field integral") {
  const auto kin = kinematics_from_energy(2000);
  TwoLevelSystem s = TwoLevelSystem::nv_spin();
  s.mu = {1.1e-23, -0.4e-23, 0.0};
  for (double r : {20e-9, 70e-9, 400e-9})
    for (double ang : {0.3, 1.9})
      CHECK(magnetic_transition_probability(s, kin, r * std::cos(ang), r * std::sin(ang)) ==
            doctest::Approx(magnetic_oracle(s, kin, r * std::cos(ang), r * std::sin(ang))).epsilon(1e-8));
}

TEST_CASE("magnetic probability cut-off at omega r / (gamma v) = 5") {
  const auto kin = kinematics_from_energy(2000);
  TwoLevelSystem s = bohr_x(2.87e9);
  const double r = 5.0 * kin.gamma * kin.velocity / s.omega0;
  const double P = magnetic_transition_probability(s, kin, 0.0, r);
  const double P_static = std::pow(mu0 * e * mu_B / (two_pi * hbar * r), 2);
  // K1(x) x ~ sqrt(pi x / 2) e^{-x} for large x.
  const double asym = P_static * (pi * 5.0 / 2.0) * std::exp(-10.0);
  CHECK(P == doctest::Approx(asym).epsilon(0.2));
}

TEST_CASE("magnetic probability is rotation invariant") {
  const auto kin = kinematics_from_energy(2000);
  TwoLevelSystem s = bohr_x(2.87e9);
  s.mu = {0.7 * mu_B, 0.2 * mu_B, 0.0};
  const double x = 30e-9, y = 55e-9;
  const double P0 = magnetic_transition_probability(s, kin, x, y);
  for (double a : {0.4, 2.2, -1.3}) {
    const double c = std::cos(a), sn = std::sin(a);
    TwoLevelSystem r = s;
    r.mu = {c * s.mu[0] - sn * s.mu[1], sn * s.mu[0] + c * s.mu[1], 0.0};
    CHECK(magnetic_transition_probability(r, kin, c * x - sn * y, sn * x + c * y) ==
          doctest::Approx(P0).epsilon(1e-12));
  }
}

TEST_CASE("electric probability") {
  const auto kin = kinematics_from_energy(2000);
  const auto zpl = TwoLevelSystem::nv_zpl();
  const double P = electric_transition_probability(zpl, kin, 0.0, 70e-9);
  CHECK(P == doctest::Approx(electric_oracle(zpl, kin, 0.0, 70e-9)).epsilon(1e-7));
  CHECK(P == doctest::Approx(1.8466e-13).epsilon(1e-3));
  CHECK(P > 0.5e-13);
  CHECK(P < 2e-13);

  TwoLevelSystem tilted = zpl;
  tilted.dipole = {0.3 * e * a0, 1.2 * e * a0, 1.7 * e * a0};
  for (double r : {15e-9, 70e-9})
    CHECK(electric_transition_probability(tilted, kin, 0.6 * r, 0.8 * r) ==
          doctest::Approx(electric_oracle(tilted, kin, 0.6 * r, 0.8 * r)).epsilon(1e-7));

  TwoLevelSystem none = zpl;
  none.dipole = {0, 0, 0};
  CHECK(electric_transition_probability(none, kin, 0.0, 70e-9) == 0.0);

  const double f = dielectric_field_factor(2.4);
  CHECK(f == doctest::Approx(0.296).epsilon(2e-3));
  CHECK(electric_transition_probability(zpl, kin, 0.0, 70e-9, f) / P == doctest::Approx(0.0877).epsilon(3e-3));
  CHECK_THROWS_AS(electric_transition_probability(zpl, kin, 0.0, 70e-9, 1.5), DomainError);
}

TEST_CASE("scatter update: incoherent, coherent and identity") {
  const double P = 1e-8;
  const BlochState up = single_scatter_update(BlochState::excited(), ScatterChannel::incoherent(P));
  CHECK(up.rho_ee == doctest::Approx(1 - P));
  CHECK(up.rho_gg == doctest::Approx(P));

  BlochState half{0.5, 0.5, std::polar(0.5, -pi / 2)};
  const BlochState h = single_scatter_update(half, ScatterChannel::coherent(P, 0.0));
  CHECK(h.inversion() - half.inversion() == doctest::Approx(-2 * std::sqrt(P)).epsilon(1e-12));

  BlochState any{0.3, 0.7, {0.1, -0.2}};
  const BlochState same = single_scatter_update(any, ScatterChannel::coherent(0.0, 1.2));
  CHECK(same.rho_ee == any.rho_ee);
  CHECK(same.rho_eg == any.rho_eg);

  CHECK_THROWS_AS(single_scatter_update(any, {1.5, 0.0, 0.0}), DomainError);
  CHECK_THROWS_AS(single_scatter_update(BlochState{0.9, 0.9, 0.0}, ScatterChannel::incoherent(P)), DomainError);
}

TEST_CASE("scatter update preserves trace and positivity") {
  // Pure states: the map is positive up to P^2, inside the repair band for small P.
  // Mixed states keep a margin at any P.
  for (double P : {1e-12, 1e-8, 1e-7, 1e-4, 0.05})
    for (double len : {1.0, 0.99, 0.9})
      for (double phi : {0.0, 0.7, 2.9})
        for (double th : {0.0, 0.9, 2.0, pi})
          for (double ph : {0.0, 1.1, -2.5}) {
            if (len == 1.0 && P > 1e-7) continue;
            const BlochState s{0.5 * (1 + len * std::cos(th)), 0.5 * (1 - len * std::cos(th)),
                               std::polar(0.5 * len * std::sin(th), ph)};
            for (const auto& ch : {ScatterChannel::coherent(P, phi), ScatterChannel::incoherent(P)}) {
              const BlochState o = single_scatter_update(s, ch);
              CHECK(o.trace() == doctest::Approx(1.0).epsilon(1e-15));
              CHECK(o.valid(1e-12));
            }
          }
}

TEST_CASE("scatter update rejects a violation beyond the repair band") {
  const BlochState half{0.5, 0.5, std::polar(0.5, 0.3)};
  try {
    single_scatter_update(half, ScatterChannel::coherent(1e-3, 0.0));
    FAIL("expected a positivity violation");
  } catch (const ValidityError& e) {
    CHECK(e.condition() == "density_matrix");
  }
  CHECK_NOTHROW(single_scatter_update(half, ScatterChannel::incoherent(1e-3)));
}

TEST_CASE("maximum inversion change: 2 sqrt(P) coherent, 2P incoherent") {
  const double P = 1e-8;
  double best_c = 0, best_i = 0;
  for (int a = 0; a <= 64; ++a)
    for (int b = 0; b < 64; ++b) {
      const double th = pi * a / 64, ph = two_pi * b / 64;
      const BlochState s{0.5 * (1 + std::cos(th)), 0.5 * (1 - std::cos(th)), std::polar(0.5 * std::sin(th), ph)};
      best_c = std::max(best_c, std::abs(single_scatter_update(s, ScatterChannel::coherent(P, 0.0)).inversion() -
                                         s.inversion()));
      best_i = std::max(best_i, std::abs(single_scatter_update(s, ScatterChannel::incoherent(P)).inversion() -
                                         s.inversion()));
    }
  CHECK(best_c == doctest::Approx(2 * std::sqrt(P)).epsilon(1e-3));
  CHECK(best_i == doctest::Approx(2 * P).epsilon(1e-9));
}

TEST_CASE("momentum shift, Lamb-Dicke, loss and Doppler") {
  const auto k18 = kinematics_from_energy(18000);
  auto k41 = TwoLevelSystem::k41_clock();
  CHECK(momentum_shift_check(k41, k18, 100e-9) == doctest::Approx(4.1e-6).epsilon(0.03));
  CHECK(momentum_shift_check(k41, k18, 0.0) == 0.0);
  TwoLevelSystem nv = TwoLevelSystem::nv_spin();
  CHECK(momentum_shift_check(nv, kinematics_from_energy(2000), 400e-9) == doctest::Approx(5.5e-4).epsilon(0.03));

  const double eta = lamb_dicke_bound(2e-30, mass_K41, two_pi * 300e3);
  CHECK(eta == doctest::Approx(3.8e-4).epsilon(0.02));
  CHECK(lamb_dicke_bound(0.0, mass_K41, 1.0) == 0.0);
  CHECK(lamb_dicke_bound(2e-30, mass_K41, 2 * two_pi * 300e3) == doctest::Approx(eta / std::sqrt(2.0)));

  const double j = 1e-3 * 2 * 100e-6 / (pi * 50e-6 * 50e-6);
  CHECK(j == doctest::Approx(25.46).epsilon(1e-3));
  CHECK(incoherent_loss_fraction(1.5e-21, j, 20e-3) < 0.01);
  CHECK(incoherent_loss_fraction(1.5e-21, 25.5, 20e-3) == doctest::Approx(0.0048).epsilon(0.01));
  CHECK(incoherent_loss_fraction(1.5e-21, 25.5, 0.0) == 0.0);

  CHECK(doppler_detuning(0.12, 254e6, c / 4) == doctest::Approx(0.41).epsilon(0.01));
  CHECK(doppler_detuning(0.24, 254e6, c / 4) == doctest::Approx(2 * doppler_detuning(0.12, 254e6, c / 4)));
  CHECK(doppler_detuning(0.0, 254e6, c / 4) == 0.0);
}

}  // TEST_SUITE
