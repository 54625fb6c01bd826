#include "ebeam/fourier.hpp"

#include <cmath>
#include <cstdint>
#include <string>

#include "ebeam/constants.hpp"
#include "ebeam/error.hpp"
#include "ebeam/simd.hpp"

namespace ebeam {
namespace {

bool is_pow2(std::size_t n) { return n && !(n & (n - 1)); }

void fft_radix2(std::vector<cplx>& a, int sign) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    // Twiddles computed directly per stage to avoid drift from recurrences.
    std::vector<cplx> w(half);
    for (std::size_t k = 0; k < half; ++k) {
      const double ang = sign * constants::two_pi * double(k) / double(len);
      w[k] = {std::cos(ang), std::sin(ang)};
    }
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const cplx u = a[i + k];
        const cplx v = a[i + k + half] * w[k];
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
}

std::vector<cplx> bluestein(const std::vector<cplx>& x, int sign) {
  const std::size_t n = x.size();
  std::size_t m = 1;
  while (m < 2 * n - 1) m <<= 1;
  std::vector<cplx> chirp(n);
  const std::uint64_t two_n = 2 * n;
  for (std::size_t k = 0; k < n; ++k) {
    const std::uint64_t k2 = (std::uint64_t(k) * k) % two_n;
    const double ang = sign * constants::pi * double(k2) / double(n);
    chirp[k] = {std::cos(ang), std::sin(ang)};
  }
  std::vector<cplx> a(m, 0.0), b(m, 0.0);
  for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * chirp[k];
  b[0] = std::conj(chirp[0]);
  for (std::size_t k = 1; k < n; ++k) b[k] = b[m - k] = std::conj(chirp[k]);
  fft_radix2(a, 1);
  fft_radix2(b, 1);
  for (std::size_t k = 0; k < m; ++k) a[k] *= b[k];
  fft_radix2(a, -1);
  std::vector<cplx> out(n);
  const double inv = 1.0 / double(m);
  for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * inv * chirp[k];
  return out;
}

Spectrum dft_uniform(std::span<const double> values, double dt, double t_start) {
  const std::size_t n = values.size();
  if (n < 2) throw DomainError("dft: need at least 2 samples");
  if (!(dt > 0.0)) throw DomainError("dft: dt must be positive");
  std::vector<cplx> x(values.begin(), values.end());
  x = fft(std::move(x), +1);
  Spectrum s;
  s.omega.resize(n);
  s.amplitude.resize(n);
  const double norm = dt / std::sqrt(constants::two_pi);
  const double dw = constants::two_pi / (double(n) * dt);
  const long long half = static_cast<long long>(n / 2);
  for (std::size_t j = 0; j < n; ++j) {
    const long long m = static_cast<long long>(j) - half;
    const std::size_t idx = static_cast<std::size_t>((m % (long long)n + (long long)n) % (long long)n);
    const double w = double(m) * dw;
    s.omega[j] = w;
    const double ph = w * t_start;
    s.amplitude[j] = norm * x[idx] * cplx(std::cos(ph), std::sin(ph));
  }
  return s;
}

}  // namespace

std::vector<cplx> fft(std::vector<cplx> x, int sign) {
  if (sign != 1 && sign != -1) throw DomainError("fft: sign must be +1 or -1");
  if (x.size() <= 1) return x;
  if (is_pow2(x.size())) {
    fft_radix2(x, sign);
    return x;
  }
  return bluestein(x, sign);
}

Spectrum dft(const FieldTrace& trace) { return dft_uniform(trace.samples, trace.dt, trace.t_start); }

Spectrum dft(std::span<const double> times, std::span<const double> values) {
  if (times.size() != values.size()) throw DomainError("dft: times/values length mismatch");
  if (times.size() < 2) throw DomainError("dft: need at least 2 samples");
  const double dt = (times.back() - times.front()) / double(times.size() - 1);
  if (!(dt > 0.0)) throw DomainError("dft: times must increase");
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double step = times[k] - times[k - 1];
    if (std::abs(step - dt) > 1e-9 * dt)
      throw DomainError("dft: non-uniform sampling at index " + std::to_string(k));
  }
  return dft_uniform(values, dt, times.front());
}

cplx dft_bin(std::span<const double> values, double dt, double t_start, double omega) {
  const double norm = dt / std::sqrt(constants::two_pi);
  return norm * simd::kernels().phasor_sum(values.data(), values.size(), omega * dt, omega * t_start);
}

}  // namespace ebeam
