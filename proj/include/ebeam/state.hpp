#pragma once

#include <complex>

namespace ebeam {

// Two-level density matrix in the rotating frame; rho_ge = conj(rho_eg).
struct BlochState {
  double rho_ee = 0.0;
  double rho_gg = 1.0;
  std::complex<double> rho_eg = 0.0;

  static BlochState ground() { return {0.0, 1.0, 0.0}; }
  static BlochState excited() { return {1.0, 0.0, 0.0}; }

  double inversion() const { return rho_ee - rho_gg; }
  double trace() const { return rho_ee + rho_gg; }
  // rho_ee rho_gg - |rho_eg|^2; negative means the state is not positive.
  double positivity_margin() const { return rho_ee * rho_gg - std::norm(rho_eg); }
  bool valid(double tol = 1e-9) const {
    return std::abs(trace() - 1.0) <= tol && positivity_margin() >= -tol && rho_ee >= -tol &&
           rho_gg >= -tol;
  }
};

}  // namespace ebeam
