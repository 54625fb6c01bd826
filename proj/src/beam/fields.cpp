#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "ebeam/beam.hpp"
#include "ebeam/constants.hpp"
#include "ebeam/error.hpp"
#include "ebeam/quadrature.hpp"

namespace ebeam {

using namespace constants;

Vec3 thin_beam_field(double current, double x, double y) {
  const double d2 = x * x + y * y;
  if (d2 == 0.0) throw DomainError("thin_beam_field: field point on the beam axis");
  const double s = mu0 * current / (two_pi * d2);
  return {s * y, -s * x, 0.0};
}

Vec3 gaussian_beam_field(double current, double waist, double x, double y, double rel_tol) {
  if (!(waist > 0.0)) throw DomainError("gaussian_beam_field: waist must be > 0");
  const double d = std::hypot(x, y);
  if (d == 0.0) return {0.0, 0.0, 0.0};
  // Polar coordinates about the beam centre. The azimuthal integral of the
  // line-current kernel over a ring of radius rho is 2 pi / d for rho < d and
  // zero outside, which leaves the radial current density up to d.
  const double w2 = waist * waist;
  auto ring = [w2](double rho) { return 4.0 * rho / w2 * std::exp(-2.0 * rho * rho / w2); };
  const double upper = std::min(d, 10.0 * waist);
  QuadResult q = integrate_adaptive(ring, 0.0, upper, 1e-300, rel_tol);
  if (!q.converged)
    throw ConvergenceError("gaussian_beam_field: radial quadrature did not converge", q.value);
  const double enclosed = current * q.value;
  const double s = mu0 * enclosed / (two_pi * d * d);
  return {s * y, -s * x, 0.0};
}

std::vector<double> rabi_profile(const Trajectory& path, std::span<const Vec2> targets, int harmonic,
                                 const RabiProfileOptions& opt) {
  if (harmonic != 1 && harmonic != 2) throw DomainError("rabi_profile: harmonic must be 1 or 2");
  const int n = opt.samples_per_period;
  if (n < 1024) throw DomainError("rabi_profile: need >= 1024 samples per period");
  std::vector<Vec2> pts(n);
  std::vector<double> cur(n, 1.0);
  double scale = 0.0;
  for (int k = 0; k < n; ++k) {
    const double ph = two_pi * k / n;
    pts[k] = path(ph);
    if (opt.current_shape) cur[k] = opt.current_shape(ph);
    scale = std::max(scale, norm(pts[k]));
  }
  const double factor = opt.moment > 0.0 ? opt.moment / hbar : 1.0;
  std::vector<double> out(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    std::complex<double> cx = 0.0, cy = 0.0;
    for (int k = 0; k < n; ++k) {
      const double rx = targets[i][0] - pts[k][0];
      const double ry = targets[i][1] - pts[k][1];
      const double r = std::hypot(rx, ry);
      if (r <= 1e-9 * std::max(scale, norm(targets[i])))
        throw DomainError("rabi_profile: target " + std::to_string(i) + " lies on the trajectory");
      const Vec3 b = thin_beam_field(cur[k], rx, ry);
      const double ph = -two_pi * double(harmonic) * k / n;
      const std::complex<double> e(std::cos(ph), std::sin(ph));
      cx += b[0] * e;
      cy += b[1] * e;
    }
    // Amplitude of the cos(n omega0 t) component.
    const double amp = 2.0 / n * std::sqrt(std::norm(cx) + std::norm(cy));
    out[i] = factor * amp;
  }
  return out;
}

}  // namespace ebeam
