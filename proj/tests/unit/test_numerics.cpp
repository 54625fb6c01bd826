#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <boost/math/special_functions/bessel.hpp>

#include "ebeam/constants.hpp"
#include "ebeam/fourier.hpp"
#include "ebeam/ode.hpp"
#include "ebeam/quadrature.hpp"
#include "ebeam/rng.hpp"
#include "ebeam/simd.hpp"
#include "ebeam/special.hpp"

using namespace ebeam;
using constants::pi;

namespace {

// Power series J_n(x) = sum_k (-1)^k (x/2)^{2k+n} / (k! (n+k)!), long double.
double series_j(int n, double x) {
  long double term = 1.0L;
  for (int i = 1; i <= n; ++i) term *= (long double)x / 2.0L / i;
  long double sum = term;
  const long double q = -(long double)x * x / 4.0L;
  for (int k = 1; k < 200; ++k) {
    term *= q / ((long double)k * (n + k));
    sum += term;
    if (std::fabs((double)term) < 1e-22 * std::fabs((double)sum)) break;
  }
  return double(sum);
}

}  // namespace

TEST_SUITE("numerics") {

TEST_CASE("bessel J matches the power series and Boost") {
  for (int n = 0; n <= 6; ++n)
    for (double x : {0.05, 0.3, 0.5, 1.0, 2.5, 4.5, 7.0}) {
      CHECK(besselj(n, x) == doctest::Approx(series_j(n, x)).epsilon(1e-12));
      CHECK(besselj(n, x) == doctest::Approx(boost::math::cyl_bessel_j(n, x)).epsilon(1e-12));
    }
  for (double x : {25.0, 110.0, 650.0})
    CHECK(besselj(3, x) == doctest::Approx(boost::math::cyl_bessel_j(3, x)).epsilon(1e-9).scale(1e-3));
  CHECK(besselj(1, 0.5) == doctest::Approx(0.2422684577).epsilon(1e-9));
  CHECK(besselj(2, 1.0) == doctest::Approx(0.1149034849).epsilon(1e-9));
  CHECK(besselj(0, 0.0) == 1.0);
  CHECK(besselj(4, 0.0) == 0.0);
  CHECK_THROWS_AS(bessel_j(-1, 1.0), DomainError);
  CHECK_THROWS_AS(bessel_j(1, 800.0), DomainError);
}

TEST_CASE("bessel J recurrence J_{n-1} + J_{n+1} = 2n/x J_n") {
  for (double x : {0.2, 1.3, 3.7, 9.0, 40.0})
    for (int n = 1; n <= 8; ++n) {
      const double lhs = besselj(n - 1, x) + besselj(n + 1, x);
      CHECK(lhs == doctest::Approx(2.0 * n / x * besselj(n, x)).epsilon(1e-10).scale(1e-12));
    }
}

TEST_CASE("bessel K against Boost and the Wronskian") {
  for (double x : {1e-3, 0.1, 0.7, 1.0, 2.0, 7.79, 30.0, 200.0}) {
    CHECK(besselk0(x) == doctest::Approx(boost::math::cyl_bessel_k(0, x)).epsilon(1e-12));
    CHECK(besselk1(x) == doctest::Approx(boost::math::cyl_bessel_k(1, x)).epsilon(1e-12));
  }
  CHECK(besselk0(1.0) == doctest::Approx(0.4210244382).epsilon(1e-9));
  CHECK(besselk1(1.0) == doctest::Approx(0.6019072302).epsilon(1e-9));
  CHECK(besselk1(7.79) == doctest::Approx(1.94461e-4).epsilon(1e-5));
  CHECK_THROWS_AS(bessel_k(1, 0.0), DomainError);
  CHECK_THROWS_AS(bessel_k(2, 1.0), DomainError);
}

TEST_CASE("bessel error estimate is reported") {
  const auto r = bessel_j(2, 3.0);
  CHECK(r.est_abs_error >= 0.0);
  CHECK(r.est_abs_error < 1e-12);
}

TEST_CASE("philox4x64-10 known answers") {
  using A4 = std::array<std::uint64_t, 4>;
  CHECK(philox4x64_10({0, 0, 0, 0}, {0, 0}) ==
        A4{0x16554d9eca36314cULL, 0xdb20fe9d672d0fdcULL, 0xd7e772cee186176bULL, 0x7e68b68aec7ba23bULL});
  CHECK(philox4x64_10({~0ULL, ~0ULL, ~0ULL, ~0ULL}, {~0ULL, ~0ULL}) ==
        A4{0x87b092c3013fe90bULL, 0x438c3c67be8d0224ULL, 0x9cc7d7c69cd777b6ULL, 0xa09caebf594f0ba0ULL});
  CHECK(philox4x64_10({0x243f6a8885a308d3ULL, 0x13198a2e03707344ULL, 0xa4093822299f31d0ULL, 0x082efa98ec4e6c89ULL},
                      {0x452821e638d01377ULL, 0xbe5466cf34e90c6cULL}) ==
        A4{0xa528f45403e61d95ULL, 0x38c72dbd566e9788ULL, 0xa5a1610e72fd18b5ULL, 0x57bd43b5e52b7fe6ULL});
}

TEST_CASE("rng streams are reproducible and splittable") {
  RngStream a(42, 3), b(42, 3);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  RngStream c = RngStream(42, 3).split(1), d = RngStream(42, 3).split(2);
  int same = 0;
  for (int i = 0; i < 100; ++i) same += c.next_u64() == d.next_u64();
  CHECK(same == 0);
  CHECK(RngStream(42, 3).split(7).next_u64() == RngStream(42, 3).split(7).next_u64());

  RngStream s(9, 0);
  s.seek_block(5);
  const auto first = s.next_u64();
  CHECK(first == philox4x64_10({5, 0, 0, 0}, {9, 0})[0]);
}

TEST_CASE("fill_uniform equals repeated uniform()") {
  for (std::size_t n : {1u, 3u, 15u, 16u, 17u, 63u, 1000u}) {
    RngStream a(7, 1), b(7, 1);
    a.uniform();  // leave a partial buffer behind
    b.uniform();
    std::vector<double> v(n);
    a.fill_uniform(v);
    for (std::size_t i = 0; i < n; ++i) CHECK(v[i] == b.uniform());
    CHECK(a.uniform() == b.uniform());
  }
}

TEST_CASE("uniform and normal moments") {
  RngStream r(123, 0);
  const int n = 200000;
  double su = 0, su2 = 0, sn = 0, sn2 = 0, se = 0;
  double umin = 1, umax = 0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    umin = std::min(umin, u);
    umax = std::max(umax, u);
    su += u;
    su2 += u * u;
    const double g = r.normal();
    sn += g;
    sn2 += g * g;
    se += r.exponential();
  }
  CHECK(umin > 0.0);
  CHECK(umax < 1.0);
  CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(su2 / n - (su / n) * (su / n) == doctest::Approx(1.0 / 12).epsilon(0.01));
  CHECK(std::abs(sn / n) < 0.01);
  CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.01));
  CHECK(se / n == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("fft matches the direct sum for awkward lengths") {
  std::mt19937_64 g(5);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int n : {1, 2, 7, 12, 64, 97, 360}) {
    std::vector<cplx> x(static_cast<std::size_t>(n));
    for (auto& v : x) v = {U(g), U(g)};
    for (int sign : {-1, 1}) {
      const auto X = fft(x, sign);
      double err = 0, scale = 0;
      for (int j = 0; j < n; ++j) {
        cplx acc = 0;
        for (int k = 0; k < n; ++k) acc += x[std::size_t(k)] * std::polar(1.0, sign * 2.0 * pi * j * k / n);
        err = std::max(err, std::abs(acc - X[std::size_t(j)]));
        scale = std::max(scale, std::abs(acc));
      }
      CHECK(err <= 1e-12 * std::max(1.0, scale));
    }
  }
}

TEST_CASE("dft obeys Parseval") {
  std::mt19937_64 g(11);
  std::normal_distribution<double> N;
  FieldTrace tr;
  tr.dt = 1e-9;
  tr.t_start = 3e-7;
  for (int k = 0; k < 1000; ++k) tr.samples.push_back(N(g));
  const Spectrum s = dft(tr);
  double time_side = 0, freq_side = 0;
  for (double v : tr.samples) time_side += v * v * tr.dt;
  for (const auto& a : s.amplitude) freq_side += std::norm(a) * s.d_omega();
  CHECK(freq_side == doctest::Approx(time_side).epsilon(1e-10));
  CHECK(s.omega.size() == tr.samples.size());
  CHECK(std::is_sorted(s.omega.begin(), s.omega.end()));
  CHECK(s.d_omega() == doctest::Approx(2.0 * pi / (1000 * tr.dt)));
}

TEST_CASE("dft of a pure tone peaks in its bin with the stated normalisation") {
  const double dt = 0.01, w0 = 2.0 * pi * 5.0;  // exactly on bin 50 of 1000
  std::vector<double> v(1000);
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = std::cos(w0 * k * dt);
  const cplx b = dft_bin(v, dt, 0.0, w0);
  CHECK(std::abs(b) == doctest::Approx(dt / std::sqrt(2 * pi) * 500.0).epsilon(1e-10));
  std::vector<double> t(v.size());
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = k * dt;
  const Spectrum s = dft(t, v);
  std::size_t best = 0;
  for (std::size_t k = 0; k < s.omega.size(); ++k)
    if (s.omega[k] > 0 && std::abs(s.amplitude[k]) > std::abs(s.amplitude[best])) best = k;
  CHECK(s.omega[best] == doctest::Approx(w0));
  t[3] += 1e-4;
  CHECK_THROWS_AS(dft(t, v), DomainError);
}

TEST_CASE("gauss rules integrate polynomials exactly") {
  const QuadRule gl = gauss_legendre(12);
  double s = 0;
  for (std::size_t i = 0; i < gl.x.size(); ++i) s += gl.w[i] * std::pow(gl.x[i], 22);
  CHECK(s == doctest::Approx(2.0 / 23).epsilon(1e-13));
  const QuadRule gh = gauss_hermite(16);
  double m0 = 0, m2 = 0, m8 = 0;
  for (std::size_t i = 0; i < gh.x.size(); ++i) {
    m0 += gh.w[i];
    m2 += gh.w[i] * gh.x[i] * gh.x[i];
    m8 += gh.w[i] * std::pow(gh.x[i], 8);
  }
  CHECK(m0 == doctest::Approx(std::sqrt(pi)).epsilon(1e-13));
  CHECK(m2 == doctest::Approx(std::sqrt(pi) / 2).epsilon(1e-13));
  CHECK(m8 == doctest::Approx(105.0 / 16 * std::sqrt(pi)).epsilon(1e-12));
}

TEST_CASE("adaptive quadrature") {
  auto r = integrate_adaptive([](double x) { return 1.0 / (1e-4 + x * x); }, -1, 1, 1e-12, 1e-12);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(2.0 / 1e-2 * std::atan(1.0 / 1e-2)).epsilon(1e-10));
  auto bad = integrate_adaptive([](double x) { return 1.0 / std::sqrt(std::abs(x)); }, -1, 1, 1e-14, 1e-14, 8);
  CHECK_FALSE(bad.converged);
}

TEST_CASE("radical inverse") {
  CHECK(radical_inverse(1, 2) == 0.5);
  CHECK(radical_inverse(3, 2) == 0.75);
  CHECK(radical_inverse(5, 3) == doctest::Approx(7.0 / 9));
}

TEST_CASE("ode integrator reaches tolerance on a harmonic oscillator") {
  using V = Eigen::Vector2d;
  auto rhs = [](double, const V& y, V& dy) { dy = V(y[1], -y[0]); };
  std::vector<double> out{1.0, 5.0, 20.0};
  OdeOptions o;
  o.rel_tol = 1e-11;
  o.abs_tol = 1e-13;
  const auto sol = integrate_ode(rhs, 0.0, 20.0, V(1.0, 0.0), o, out);
  REQUIRE(sol.y.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(sol.y[i][0] == doctest::Approx(std::cos(out[i])).epsilon(1e-9).scale(1.0));
    CHECK(sol.y[i][1] == doctest::Approx(-std::sin(out[i])).epsilon(1e-9).scale(1.0));
  }
  CHECK_THROWS_AS(integrate_ode(rhs, 1.0, 0.0, V(1.0, 0.0)), DomainError);
  OdeOptions tight;
  tight.max_steps = 10;
  try {
    integrate_ode(rhs, 0.0, 100.0, V(1.0, 0.0), tight);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.last_good() > 0.0);
    CHECK(e.last_good() < 100.0);
  }
}

}  // TEST_SUITE
