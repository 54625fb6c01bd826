#include <immintrin.h>

#include <cmath>

#include "ebeam/constants.hpp"
#include "ebeam/simd.hpp"

extern "C" {
__m256d _ZGVdN4v_sin(__m256d);
__m256d _ZGVdN4v_cos(__m256d);
__m256d _ZGVdN4v_log(__m256d);
__m256d _ZGVdN4v_log1p(__m256d);
__m256d _ZGVdN4v_asinh(__m256d);
}

namespace ebeam::simd {
namespace {

inline __m256d vsin(__m256d x) { return _ZGVdN4v_sin(x); }
inline __m256d vcos(__m256d x) { return _ZGVdN4v_cos(x); }

inline __m256d vreduce(__m256d x) {
  const __m256d inv = _mm256_set1_pd(0.15915494309189533577);
  const __m256d hi = _mm256_set1_pd(6.28318530717958623200);
  const __m256d lo = _mm256_set1_pd(2.44929359829470635445e-16);
  const __m256d q = _mm256_round_pd(_mm256_mul_pd(x, inv), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  return _mm256_sub_pd(_mm256_sub_pd(x, _mm256_mul_pd(q, hi)), _mm256_mul_pd(q, lo));
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void neg_log(const double* u, double* out, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_sub_pd(zero, _ZGVdN4v_log(_mm256_loadu_pd(u + i))));
  scalar_kernels().neg_log(u + i, out + i, n - i);
}

void transverse(const double* u_r, const double* u_phi, double* r, double* s, double* c,
                std::size_t n, double scale, double trunc) {
  const __m256d vscale = _mm256_set1_pd(scale);
  const __m256d vntrunc = _mm256_set1_pd(-trunc);
  const __m256d twopi = _mm256_set1_pd(constants::two_pi);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d l = _ZGVdN4v_log1p(_mm256_mul_pd(_mm256_loadu_pd(u_r + i), vntrunc));
    _mm256_storeu_pd(r + i, _mm256_mul_pd(vscale, _mm256_sqrt_pd(_mm256_sub_pd(zero, l))));
    const __m256d phi = vreduce(_mm256_mul_pd(twopi, _mm256_loadu_pd(u_phi + i)));
    _mm256_storeu_pd(s + i, vsin(phi));
    _mm256_storeu_pd(c + i, vcos(phi));
  }
  scalar_kernels().transverse(u_r + i, u_phi + i, r + i, s + i, c + i, n - i, scale, trunc);
}

void drift(const double* t_emit, const double* phase, double* t_arrive, double* velocity,
           std::size_t n, const DriftParams& p) {
  const __m256d w = _mm256_set1_pd(p.omega0);
  const __m256d k0 = _mm256_set1_pd(p.k0);
  const __m256d dk = _mm256_set1_pd(p.dk);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d cc = _mm256_set1_pd(constants::c);
  const __m256d len = _mm256_set1_pd(p.length);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d t = _mm256_loadu_pd(t_emit + i);
    const __m256d arg = vreduce(_mm256_add_pd(_mm256_mul_pd(w, t), _mm256_loadu_pd(phase + i)));
    const __m256d k = _mm256_add_pd(k0, _mm256_mul_pd(dk, vsin(arg)));
    const __m256d v = _mm256_div_pd(_mm256_mul_pd(cc, _mm256_sqrt_pd(_mm256_mul_pd(k, _mm256_add_pd(k, two)))),
                                    _mm256_add_pd(one, k));
    _mm256_storeu_pd(velocity + i, v);
    _mm256_storeu_pd(t_arrive + i, _mm256_add_pd(t, _mm256_div_pd(len, v)));
  }
  scalar_kernels().drift(t_emit + i, phase + i, t_arrive + i, velocity + i, n - i, p);
}

void pulse_accumulate(double* trace, std::size_t k_begin, std::size_t k_end, double t0, double dt,
                      double tj, double gv, double r2, double amp) {
  const __m256d vgv = _mm256_set1_pd(gv);
  const __m256d vr2 = _mm256_set1_pd(r2);
  const __m256d vamp = _mm256_set1_pd(amp);
  const __m256d vt0 = _mm256_set1_pd(t0);
  const __m256d vdt = _mm256_set1_pd(dt);
  const __m256d vtj = _mm256_set1_pd(tj);
  const __m256d step = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
  std::size_t k = k_begin;
  for (; k + 4 <= k_end; k += 4) {
    const __m256d kk = _mm256_add_pd(_mm256_set1_pd(double(k)), step);
    const __m256d tk = _mm256_add_pd(vt0, _mm256_mul_pd(kk, vdt));
    const __m256d u = _mm256_mul_pd(vgv, _mm256_sub_pd(tk, vtj));
    const __m256d s = _mm256_add_pd(vr2, _mm256_mul_pd(u, u));
    const __m256d val = _mm256_div_pd(vamp, _mm256_mul_pd(s, _mm256_sqrt_pd(s)));
    _mm256_storeu_pd(trace + k, _mm256_add_pd(_mm256_loadu_pd(trace + k), val));
  }
  scalar_kernels().pulse_accumulate(trace, k, k_end, t0, dt, tj, gv, r2, amp);
}

std::complex<double> phasor_sum(const double* v, std::size_t n, double dphi, double phi0) {
  __m256d re = _mm256_setzero_pd(), im = _mm256_setzero_pd();
  const __m256d vd = _mm256_set1_pd(dphi);
  const __m256d vp0 = _mm256_set1_pd(phi0);
  const __m256d step = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d kk = _mm256_add_pd(_mm256_set1_pd(double(k)), step);
    const __m256d ph = vreduce(_mm256_add_pd(vp0, _mm256_mul_pd(kk, vd)));
    const __m256d x = _mm256_loadu_pd(v + k);
    re = _mm256_add_pd(re, _mm256_mul_pd(x, vcos(ph)));
    im = _mm256_add_pd(im, _mm256_mul_pd(x, vsin(ph)));
  }
  std::complex<double> acc(hsum(re), hsum(im));
  for (; k < n; ++k) {
    const double ph = reduce_2pi(phi0 + double(k) * dphi);
    acc += std::complex<double>(v[k] * std::cos(ph), v[k] * std::sin(ph));
  }
  return acc;
}

void phasors(const double* t, const double* amp, double* re, double* im, std::size_t n,
             double omega, double t_ref) {
  const __m256d w = _mm256_set1_pd(omega);
  const __m256d tr = _mm256_set1_pd(t_ref);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d ph = vreduce(_mm256_mul_pd(w, _mm256_sub_pd(_mm256_loadu_pd(t + i), tr)));
    const __m256d a = _mm256_loadu_pd(amp + i);
    _mm256_storeu_pd(re + i, _mm256_mul_pd(a, vcos(ph)));
    _mm256_storeu_pd(im + i, _mm256_mul_pd(a, vsin(ph)));
  }
  scalar_kernels().phasors(t + i, amp + i, re + i, im + i, n - i, omega, t_ref);
}

void window_kicks(const double* t, const double* x, const double* y, double* re, double* im,
                  std::size_t n, const KickParams& p) {
  const __m256d H = _mm256_set1_pd(p.half_window);
  const __m256d h2 = _mm256_set1_pd(p.half_window * p.half_window);
  const __m256d k2 = _mm256_set1_pd(0.5 * p.kappa * p.kappa);
  const __m256d d = _mm256_set1_pd(p.d);
  const __m256d mx = _mm256_set1_pd(p.mx);
  const __m256d my = _mm256_set1_pd(p.my);
  const __m256d coef = _mm256_set1_pd(p.coef);
  const __m256d w = _mm256_set1_pd(p.omega0);
  const __m256d tref = _mm256_set1_pd(p.t_ref);
  const __m256d two = _mm256_set1_pd(2.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d X = _mm256_loadu_pd(x + i);
    const __m256d Y = _mm256_add_pd(d, _mm256_loadu_pd(y + i));
    const __m256d r2 = _mm256_add_pd(_mm256_mul_pd(X, X), _mm256_mul_pd(Y, Y));
    const __m256d q = _mm256_sqrt_pd(_mm256_add_pd(r2, h2));
    const __m256d i0 = _mm256_div_pd(_mm256_mul_pd(two, H), _mm256_mul_pd(r2, q));
    const __m256d as = _ZGVdN4v_asinh(_mm256_div_pd(H, _mm256_sqrt_pd(r2)));
    const __m256d i2 = _mm256_mul_pd(two, _mm256_sub_pd(as, _mm256_div_pd(H, q)));
    const __m256d proj = _mm256_sub_pd(_mm256_mul_pd(Y, mx), _mm256_mul_pd(X, my));
    const __m256d amp =
        _mm256_mul_pd(_mm256_mul_pd(coef, proj), _mm256_sub_pd(i0, _mm256_mul_pd(k2, i2)));
    const __m256d ph = vreduce(_mm256_mul_pd(w, _mm256_sub_pd(_mm256_loadu_pd(t + i), tref)));
    _mm256_storeu_pd(re + i, _mm256_mul_pd(amp, vcos(ph)));
    _mm256_storeu_pd(im + i, _mm256_mul_pd(amp, vsin(ph)));
  }
  scalar_kernels().window_kicks(t + i, x + i, y + i, re + i, im + i, n - i, p);
}

}  // namespace

const Kernels& avx2_table() {
  static const Kernels k{"avx2",     neg_log, transverse,  drift, pulse_accumulate,
                         phasor_sum, phasors, window_kicks};
  return k;
}

}  // namespace ebeam::simd
