#include "ebeam/special.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ebeam/constants.hpp"
#include "ebeam/error.hpp"

namespace ebeam {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kEulerGamma = 0.57721566490153286060651209;

// Power series; exact enough while (x/2)^2 stays small against n+1.
SpecialFnResult jn_series(int n, double x) {
  const double h = 0.5 * x;
  const double q = -h * h;
  double term = 1.0;
  for (int k = 1; k <= n; ++k) term *= h / k;
  double sum = term;
  for (int k = 1; k < 500; ++k) {
    term *= q / (double(k) * double(k + n));
    sum += term;
    if (std::abs(term) <= 0.25 * kEps * std::abs(sum)) break;
  }
  return {sum, 4.0 * kEps * std::abs(sum)};
}

// Miller's backward recurrence normalised with J_0 + 2 sum J_2k = 1.
SpecialFnResult jn_miller(int n, double x) {
  const double ax = std::abs(x);
  const double m = std::max<double>(n, ax);
  int start = 2 * ((int(m) + 20 + int(std::sqrt(60.0 * m))) / 2);
  const double tox = 2.0 / ax;
  double jp = 0.0, j = 1.0, ans = 0.0, norm = 0.0;
  for (int k = start; k > 0; --k) {
    const double jm = k * tox * j - jp;
    jp = j;
    j = jm;
    if (std::abs(j) > 1e250) {
      j *= 1e-250;
      jp *= 1e-250;
      ans *= 1e-250;
      norm *= 1e-250;
    }
    if (k - 1 == n) ans = j;
    if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0 * j;
  }
  norm += j;
  const double v = ans / norm;
  return {v, 16.0 * kEps * std::max(1.0, std::sqrt(ax)) * std::max(std::abs(v), 1.0 / (1.0 + ax))};
}

// x <= 2: ascending series for K_0 and K_1 via I_0, I_1 and digamma sums.
void k_series(double x, double& k0v, double& k1v) {
  const double h = 0.5 * x;
  const double q = h * h;
  const double lg = std::log(h);
  double i0 = 0.0, i1 = 0.0, s0 = 0.0, s1 = 0.0;
  double t0 = 1.0;  // q^k / (k!)^2
  double t1 = 1.0;  // q^k / (k! (k+1)!)
  double hk = 0.0;  // harmonic number H_k
  double psi1 = -kEulerGamma;        // psi(k+1)
  double psi2 = 1.0 - kEulerGamma;   // psi(k+2)
  for (int k = 0; k < 200; ++k) {
    if (k > 0) {
      t0 *= q / (double(k) * k);
      t1 *= q / (double(k) * (k + 1));
      hk += 1.0 / k;
      psi1 += 1.0 / k;
      psi2 += 1.0 / (k + 1);
    }
    i0 += t0;
    i1 += t1;
    s0 += t0 * hk;
    s1 += t1 * (psi1 + psi2);
    if (t0 < 0.25 * kEps * i0 && k > 2) break;
  }
  i1 *= h;
  k0v = -(lg + kEulerGamma) * i0 + s0;
  k1v = 1.0 / x + lg * i1 - 0.5 * h * s1;
}

// x > 2: Steed's continued fraction (Temme's CF2) for nu = 0.
void k_cf2(double x, double& k0v, double& k1v) {
  double b = 2.0 * (1.0 + x);
  double d = 1.0 / b;
  double hh = d, delh = d;
  double q1 = 0.0, q2 = 1.0;
  const double a1 = 0.25;
  double q = a1, c = a1, a = -a1;
  double s = 1.0 + q * delh;
  for (int i = 1; i < 100000; ++i) {
    a -= 2 * i;
    c = -a * c / (i + 1.0);
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    hh += delh;
    const double dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < 0.5 * kEps) break;
  }
  hh *= a1;
  k0v = std::sqrt(constants::pi / (2.0 * x)) * std::exp(-x) / s;
  k1v = k0v * (x + 0.5 - hh) / x;
}

}  // namespace

SpecialFnResult bessel_j(int n, double x) {
  if (n < 0) throw DomainError("bessel_j: negative order " + std::to_string(n));
  if (!std::isfinite(x) || std::abs(x) > 700.0)
    throw DomainError("bessel_j: |x| must be <= 700, got " + std::to_string(x));
  if (x == 0.0) return {n == 0 ? 1.0 : 0.0, 0.0};
  const double sign = (x < 0.0 && (n & 1)) ? -1.0 : 1.0;
  const double ax = std::abs(x);
  SpecialFnResult r = (ax * ax < 0.25 * (n + 1) || ax < 1.0) ? jn_series(n, ax) : jn_miller(n, ax);
  r.value *= sign;
  return r;
}

SpecialFnResult bessel_k(int order, double x) {
  if (order != 0 && order != 1) throw DomainError("bessel_k: order must be 0 or 1");
  if (!(x > 0.0) || !std::isfinite(x))
    throw DomainError("bessel_k: x must be positive and finite, got " + std::to_string(x));
  double v0 = 0.0, v1 = 0.0;
  if (x <= 2.0)
    k_series(x, v0, v1);
  else
    k_cf2(x, v0, v1);
  const double v = order == 0 ? v0 : v1;
  return {v, 8.0 * kEps * std::abs(v)};
}

}  // namespace ebeam
