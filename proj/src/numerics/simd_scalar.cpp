#include <cmath>

#include "ebeam/constants.hpp"
#include "ebeam/simd.hpp"

namespace ebeam::simd {
namespace {

void neg_log(const double* u, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = -std::log(u[i]);
}

void transverse(const double* u_r, const double* u_phi, double* r, double* s, double* c,
                std::size_t n, double scale, double trunc) {
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = scale * std::sqrt(-std::log1p(-u_r[i] * trunc));
    const double phi = reduce_2pi(constants::two_pi * u_phi[i]);
    s[i] = std::sin(phi);
    c[i] = std::cos(phi);
  }
}

void drift(const double* t_emit, const double* phase, double* t_arrive, double* velocity,
           std::size_t n, const DriftParams& p) {
  for (std::size_t i = 0; i < n; ++i) {
    const double arg = reduce_2pi(p.omega0 * t_emit[i] + phase[i]);
    const double k = p.k0 + p.dk * std::sin(arg);
    const double v = constants::c * std::sqrt(k * (k + 2.0)) / (1.0 + k);
    velocity[i] = v;
    t_arrive[i] = t_emit[i] + p.length / v;
  }
}

void pulse_accumulate(double* trace, std::size_t k_begin, std::size_t k_end, double t0, double dt,
                      double tj, double gv, double r2, double amp) {
  for (std::size_t k = k_begin; k < k_end; ++k) {
    const double u = gv * ((t0 + double(k) * dt) - tj);
    const double s = r2 + u * u;
    trace[k] += amp / (s * std::sqrt(s));
  }
}

std::complex<double> phasor_sum(const double* v, std::size_t n, double dphi, double phi0) {
  double re = 0.0, im = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double ph = reduce_2pi(phi0 + double(k) * dphi);
    re += v[k] * std::cos(ph);
    im += v[k] * std::sin(ph);
  }
  return {re, im};
}

void phasors(const double* t, const double* amp, double* re, double* im, std::size_t n,
             double omega, double t_ref) {
  for (std::size_t i = 0; i < n; ++i) {
    const double ph = reduce_2pi(omega * (t[i] - t_ref));
    re[i] = amp[i] * std::cos(ph);
    im[i] = amp[i] * std::sin(ph);
  }
}

void window_kicks(const double* t, const double* x, const double* y, double* re, double* im,
                  std::size_t n, const KickParams& p) {
  const double H = p.half_window;
  const double h2 = H * H;
  const double k2 = 0.5 * p.kappa * p.kappa;
  for (std::size_t i = 0; i < n; ++i) {
    const double X = x[i];
    const double Y = p.d + y[i];
    const double r2 = X * X + Y * Y;
    const double q = std::sqrt(r2 + h2);
    const double i0 = 2.0 * H / (r2 * q);
    const double i2 = 2.0 * (std::asinh(H / std::sqrt(r2)) - H / q);
    const double amp = p.coef * (Y * p.mx - X * p.my) * (i0 - k2 * i2);
    const double ph = reduce_2pi(p.omega0 * (t[i] - p.t_ref));
    re[i] = amp * std::cos(ph);
    im[i] = amp * std::sin(ph);
  }
}

}  // namespace

const Kernels& scalar_kernels() {
  static const Kernels k{"scalar",   neg_log,    transverse, drift,       pulse_accumulate,
                         phasor_sum, phasors,    window_kicks};
  return k;
}

}  // namespace ebeam::simd
