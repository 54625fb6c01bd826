#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "ebeam/constants.hpp"
#include "ebeam/simd.hpp"

using namespace ebeam;

namespace {

struct Inputs {
  std::vector<double> u1, u2, t, x, y, amp;
};

Inputs make_inputs(std::size_t n, unsigned seed) {
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> U(1e-12, 1.0 - 1e-12);
  Inputs in;
  for (std::size_t i = 0; i < n; ++i) {
    in.u1.push_back(U(g));
    in.u2.push_back(U(g));
    in.t.push_back(1e-6 * U(g) + 3e-3);
    in.x.push_back(4e-8 * (U(g) - 0.5));
    in.y.push_back(4e-8 * (U(g) - 0.5));
    in.amp.push_back(U(g) - 0.5);
  }
  return in;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1e-300, std::max(std::abs(a), std::abs(b))); }

}  // namespace

TEST_SUITE("simd") {

TEST_CASE("dispatch picks a table") {
  const simd::Kernels& k = simd::kernels();
  CHECK(k.name != nullptr);
  CHECK(simd::scalar_kernels().neg_log != nullptr);
  MESSAGE("active kernels: " << k.name);
}

TEST_CASE("avx2 kernels agree with the scalar reference") {
  const simd::Kernels* v = simd::avx2_kernels();
  if (!v) {
    MESSAGE("AVX2 unavailable, equivalence not exercised");
    return;
  }
  const simd::Kernels& s = simd::scalar_kernels();
  // Odd sizes cover the scalar tails of the vector loops.
  for (std::size_t n : {1u, 3u, 4u, 7u, 64u, 1001u}) {
    const Inputs in = make_inputs(n, unsigned(n));
    std::vector<double> a(n), b(n), a2(n), b2(n), a3(n), b3(n), a4(n), b4(n);

    s.neg_log(in.u1.data(), a.data(), n);
    v->neg_log(in.u1.data(), b.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(rel(a[i], b[i]) < 1e-14);

    s.transverse(in.u1.data(), in.u2.data(), a.data(), a2.data(), a3.data(), n, 2.5e-9, 0.99);
    v->transverse(in.u1.data(), in.u2.data(), b.data(), b2.data(), b3.data(), n, 2.5e-9, 0.99);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(rel(a[i], b[i]) < 1e-14);
      CHECK(std::abs(a2[i] - b2[i]) < 1e-15);
      CHECK(std::abs(a3[i] - b3[i]) < 1e-15);
    }

    const simd::DriftParams dp{2.0 * constants::pi * 2.87e9, 2000.0 / constants::m_e_c2_eV,
                               100.0 / constants::m_e_c2_eV, 0.03};
    std::vector<double> phase(n, 0.3);
    s.drift(in.t.data(), phase.data(), a.data(), a2.data(), n, dp);
    v->drift(in.t.data(), phase.data(), b.data(), b2.data(), n, dp);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(a[i] - b[i]) <= 1e-15 * std::abs(a[i]) + 1e-21);
      CHECK(rel(a2[i], b2[i]) < 1e-14);
    }

    std::vector<double> ta(200, 0.0), tb(200, 0.0);
    for (std::size_t i = 0; i < std::min<std::size_t>(n, 50); ++i) {
      const double tj = 1e-9 * (i % 17);
      s.pulse_accumulate(ta.data(), 3, 197, 0.0, 1e-10, tj, 2.6e7, 4.9e-15, in.amp[i]);
      v->pulse_accumulate(tb.data(), 3, 197, 0.0, 1e-10, tj, 2.6e7, 4.9e-15, in.amp[i]);
    }
    double scale = 0;
    for (double q : ta) scale = std::max(scale, std::abs(q));
    for (std::size_t k = 0; k < ta.size(); ++k) CHECK(std::abs(ta[k] - tb[k]) <= 1e-13 * scale);

    const auto ps = s.phasor_sum(in.amp.data(), n, 0.01, 0.2);
    const auto pv = v->phasor_sum(in.amp.data(), n, 0.01, 0.2);
    CHECK(std::abs(ps - pv) <= 1e-12 * (1.0 + std::abs(ps)));

    s.phasors(in.t.data(), in.amp.data(), a.data(), a2.data(), n, 1.8e10, 3e-3);
    v->phasors(in.t.data(), in.amp.data(), b.data(), b2.data(), n, 1.8e10, 3e-3);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(a[i] - b[i]) < 1e-12);
      CHECK(std::abs(a2[i] - b2[i]) < 1e-12);
    }

    simd::KickParams kp{7e-8, 5 * 7e-8, 2.0 * constants::pi * 2.87e9 / 2.6e7, 1.3, 1.8e10, 3e-3, 1.0, 0.0};
    s.window_kicks(in.t.data(), in.x.data(), in.y.data(), a.data(), a2.data(), n, kp);
    v->window_kicks(in.t.data(), in.x.data(), in.y.data(), b.data(), b2.data(), n, kp);
    for (std::size_t i = 0; i < n; ++i) {
      const double m = std::hypot(a[i], a2[i]);
      CHECK(std::abs(a[i] - b[i]) <= 1e-12 * m);
      CHECK(std::abs(a2[i] - b2[i]) <= 1e-12 * m);
    }
  }
}

TEST_CASE("reduce_2pi") {
  for (double x : {0.0, 1.0, -3.5, 1e6, 5e9 * 1e-3, -7.25e4})
    CHECK(std::cos(simd::reduce_2pi(x)) == doctest::Approx(std::cos(x)).epsilon(1e-9).scale(1.0));
  CHECK(std::abs(simd::reduce_2pi(1e6)) <= constants::pi);
}

}  // TEST_SUITE
