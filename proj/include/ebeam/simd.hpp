#pragma once

#include <complex>
#include <cstddef>

namespace ebeam::simd {

struct DriftParams {
  double omega0;     // rad/s
  double k0;         // mean kinetic energy / (m_e c^2)
  double dk;         // modulation amplitude / (m_e c^2)
  double length;     // m
};

// Rotating-frame kick of one electron pulse truncated to |s| <= half_window
// along the beam (s = gamma v tau):
//   Z = coef * (Y mx - X my) * int (r^2 + s^2)^{-3/2} cos(kappa s) ds * exp(i omega0 (t - t_ref)),
// with X = x, Y = d + y and the cosine expanded to second order in kappa.
struct KickParams {
  double d;
  double half_window;  // m
  double kappa;        // omega0 / (gamma v), 1/m
  double coef;
  double omega0;
  double t_ref;
  double mx, my;       // unit moment direction in the transverse plane
};

// Hot loops of the ensemble and spectral code. Each table entry has a scalar
// reference implementation; the AVX2 table must agree with it to rounding.
struct Kernels {
  const char* name;

  // out = -log(u)
  void (*neg_log)(const double* u, double* out, std::size_t n);

  // r = scale * sqrt(-log(1 - u_r * trunc)); (s, c) = (sin, cos)(2 pi u_phi)
  void (*transverse)(const double* u_r, const double* u_phi, double* r, double* s, double* c,
                     std::size_t n, double scale, double trunc);

  // Exact relativistic drift of energy-modulated electrons:
  // E = E0 + dE sin(omega0 t + phase); t_arrive = t + l / v(E).
  void (*drift)(const double* t_emit, const double* phase, double* t_arrive, double* velocity,
                std::size_t n, const DriftParams& p);

  // trace[k] += amp / (r2 + (gv (t_k - tj))^2)^{3/2}, t_k = t0 + k dt, k in [k_begin, k_end)
  void (*pulse_accumulate)(double* trace, std::size_t k_begin, std::size_t k_end, double t0,
                           double dt, double tj, double gv, double r2, double amp);

  // sum_k v_k exp(i (phi0 + k dphi))
  std::complex<double> (*phasor_sum)(const double* v, std::size_t n, double dphi, double phi0);

  // (re, im) = amp * exp(i omega (t - t_ref))
  void (*phasors)(const double* t, const double* amp, double* re, double* im, std::size_t n,
                  double omega, double t_ref);

  void (*window_kicks)(const double* t, const double* x, const double* y, double* re, double* im,
                       std::size_t n, const KickParams& p);
};

const Kernels& scalar_kernels();
// nullptr when the CPU or the build lacks AVX2.
const Kernels* avx2_kernels();
// Best available table; EBEAM_SIMD=scalar forces the reference path.
const Kernels& kernels();

// Reduce x to [-pi, pi] with a two-term Cody-Waite split of 2 pi.
inline double reduce_2pi(double x) {
  constexpr double inv = 0.15915494309189533577;
  constexpr double hi = 6.28318530717958623200;
  constexpr double lo = 2.44929359829470635445e-16;
  const double q = __builtin_rint(x * inv);
  return (x - q * hi) - q * lo;
}

}  // namespace ebeam::simd
