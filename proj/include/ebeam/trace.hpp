#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace ebeam {

// Uniformly sampled B_y(t) series.
struct FieldTrace {
  std::vector<double> samples;  // T
  double dt = 0.0;              // s
  double t_start = 0.0;         // s
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  std::string config_digest;

  double time(std::size_t k) const { return t_start + double(k) * dt; }
};

inline constexpr const char* kSpectrumConvention =
    "s_hat(w) = dt/sqrt(2 pi) * sum_k s(t_k) exp(+i w t_k); two-sided, ascending w";

struct Spectrum {
  std::vector<double> omega;                     // rad/s, uniform, ascending
  std::vector<std::complex<double>> amplitude;   // signal units * s
  std::string convention = kSpectrumConvention;

  double d_omega() const { return omega.size() > 1 ? omega[1] - omega[0] : 0.0; }
};

}  // namespace ebeam
