#include <cmath>
#include <string>

#include "ebeam/constants.hpp"
#include "ebeam/ensemble.hpp"
#include "ebeam/error.hpp"
#include "ebeam/fourier.hpp"

namespace ebeam {

using namespace constants;

SpectrumStats spectrum_statistics(const Spectrum& s, double omega0, int n_harmonics,
                                  int exclude_halfwidth) {
  const std::size_t n = s.omega.size();
  if (n < 4) throw DomainError("spectrum_statistics: spectrum too short");
  const double dw = s.d_omega();
  const double w_nyq = std::abs(s.omega.front());
  SpectrumStats st;
  double best = -1.0;
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double w = s.omega[j];
    if (w <= 0.0) continue;
    const double mag = std::abs(s.amplitude[j]);
    if (mag > best) {
      best = mag;
      st.peak_index = j;
      st.peak_omega = w;
    }
    if (w > 0.5 * w_nyq) continue;
    const double h = w / omega0;
    const double dist_bins = std::abs(h - std::round(h)) * omega0 / dw;
    if (dist_bins <= exclude_halfwidth + 0.5) continue;
    acc += std::norm(s.amplitude[j]);
    ++st.floor_bins;
  }
  st.floor_variance = st.floor_bins ? acc / double(st.floor_bins) : 0.0;
  const double w0 = s.omega.front();
  for (int h = 1; h <= n_harmonics; ++h) {
    const double target = h * omega0;
    const long long j = std::llround((target - w0) / dw);
    if (j < 0 || j >= (long long)n) break;
    st.harmonics.push_back({h, s.omega[std::size_t(j)], s.amplitude[std::size_t(j)]});
  }
  return st;
}

NoiseFloor noise_floor(const FieldTrace& trace, double omega0, double mean_current, double d,
                       int exclude_halfwidth) {
  const double T = double(trace.samples.size()) * trace.dt;
  const double periods = T * omega0 / two_pi;
  if (periods < 100.0 - 1e-9)
    throw DomainError("noise_floor: trace spans " + std::to_string(periods) + " periods, need >= 100");
  const Spectrum s = dft(trace);
  const SpectrumStats st = spectrum_statistics(s, omega0, 0, exclude_halfwidth);
  if (st.floor_bins < 16) throw DomainError("noise_floor: insufficient off-harmonic bins");
  NoiseFloor nf;
  nf.bins = st.floor_bins;
  nf.empirical = st.floor_variance;
  nf.n_electrons = mean_current * T / e;
  const double a = e * mu0 / (two_pi * d);
  nf.theoretical = a * a * nf.n_electrons / two_pi;
  return nf;
}

double continuity_condition(const BeamSpec& spec) {
  const double rb = bunching_parameter(spec);
  const double i_min = spec.current / (1.0 + rb);
  return spec.kin.gamma * spec.kin.velocity * e / (i_min * spec.impact_distance);
}

}  // namespace ebeam
