#pragma once

namespace ebeam {

struct SpecialFnResult {
  double value = 0.0;
  double est_abs_error = 0.0;
};

// J_n(x) for integer n >= 0 and |x| <= 700.
SpecialFnResult bessel_j(int n, double x);

// K_0(x) or K_1(x) for x > 0.
SpecialFnResult bessel_k(int order, double x);

inline double besselj(int n, double x) { return bessel_j(n, x).value; }
inline double besselk0(double x) { return bessel_k(0, x).value; }
inline double besselk1(double x) { return bessel_k(1, x).value; }

}  // namespace ebeam
