#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace ebeam {

struct QuadRule {
  std::vector<double> x;
  std::vector<double> w;
};

// Nodes and weights on [-1, 1].
QuadRule gauss_legendre(int n);
// Weight exp(-x^2) on the real line.
QuadRule gauss_hermite(int n);

struct QuadResult {
  double value = 0.0;
  double abs_error = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

// Adaptive Gauss-Kronrod 7/15 with interval bisection.
QuadResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                              double abs_tol, double rel_tol, std::size_t max_intervals = 4000);

// Radical inverse of i in the given prime base.
double radical_inverse(std::uint64_t i, int base);

inline constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29};

}  // namespace ebeam
