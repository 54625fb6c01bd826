#pragma once

// Dormand-Prince 5(4), FSAL, local extrapolation.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ebeam/error.hpp"

namespace ebeam {

struct OdeOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double initial_step = 0.0;  // 0: pick from the derivative at t0
  double max_step = 0.0;      // 0: unbounded
  std::size_t max_steps = 50'000'000;
};

template <class Vec>
struct OdeSolution {
  std::vector<double> t;
  std::vector<Vec> y;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

namespace detail {

template <class Vec>
double error_norm(const Vec& err, const Vec& y0, const Vec& y1, double rtol, double atol) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double r = std::abs(err[i]) / sc;
    acc += r * r;
  }
  return std::sqrt(acc / double(std::max<Eigen::Index>(1, err.size())));
}

}  // namespace detail

// rhs(t, y, dydt). Returns y at every requested output time (sorted, inside
// [t0, t1]); with no output times, every accepted step is returned.
template <class Vec, class Rhs>
OdeSolution<Vec> integrate_ode(Rhs&& rhs, double t0, double t1, const Vec& y0,
                               const OdeOptions& opt = {}, std::span<const double> t_out = {}) {
  if (!(opt.rel_tol > 0.0) || !(opt.abs_tol > 0.0))
    throw DomainError("integrate_ode: tolerances must be positive");
  if (!(t1 >= t0)) throw DomainError("integrate_ode: t1 < t0");

  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                   b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  OdeSolution<Vec> sol;
  std::vector<double> outs(t_out.begin(), t_out.end());
  for (double to : outs)
    if (to < t0 || to > t1) throw DomainError("integrate_ode: output time outside interval");
  std::sort(outs.begin(), outs.end());
  std::size_t next_out = 0;
  const bool dense_all = outs.empty();

  Vec y = y0;
  double t = t0;
  auto emit = [&](double tt, const Vec& yy) {
    sol.t.push_back(tt);
    sol.y.push_back(yy);
  };
  while (next_out < outs.size() && outs[next_out] <= t0) {
    emit(outs[next_out], y);
    ++next_out;
  }
  if (dense_all) emit(t, y);
  if (t1 == t0) return sol;

  Vec k1(y.size()), k2(y.size()), k3(y.size()), k4(y.size()), k5(y.size()), k6(y.size()),
      k7(y.size()), ytmp(y.size()), ynew(y.size()), err(y.size());
  rhs(t, y, k1);

  double h = opt.initial_step;
  if (!(h > 0.0)) {
    double d0 = 0.0, d1 = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double sc = opt.abs_tol + opt.rel_tol * std::abs(y[i]);
      d0 = std::max(d0, std::abs(y[i]) / sc);
      d1 = std::max(d1, std::abs(k1[i]) / sc);
    }
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * (t1 - t0) : 0.01 * d0 / d1;
    h = std::min(h, t1 - t0);
  }
  if (opt.max_step > 0.0) h = std::min(h, opt.max_step);

  const double span = t1 - t0;
  while (t < t1) {
    if (sol.accepted + sol.rejected >= opt.max_steps)
      throw ConvergenceError("integrate_ode: step budget exhausted at t=" + std::to_string(t), t);
    double target = (next_out < outs.size()) ? outs[next_out] : t1;
    bool hit = false;
    const double h_try = h;
    if (t + h >= target) {
      h = target - t;
      hit = true;
    }
    if (h <= 1e-14 * std::max(std::abs(t), span))
      throw ConvergenceError("integrate_ode: step size underflow at t=" + std::to_string(t), t);

    ytmp = y + h * (a21 * k1);
    rhs(t + c2 * h, ytmp, k2);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    rhs(t + c3 * h, ytmp, k3);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(t + c4 * h, ytmp, k4);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(t + c5 * h, ytmp, k5);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(t + h, ytmp, k6);
    ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    rhs(t + h, ynew, k7);
    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    const double en = detail::error_norm(err, y, ynew, opt.rel_tol, opt.abs_tol);
    if (!std::isfinite(en))
      throw ConvergenceError("integrate_ode: non-finite state at t=" + std::to_string(t), t);
    if (en <= 1.0) {
      t = hit ? target : t + h;
      y = ynew;
      k1 = k7;
      ++sol.accepted;
      if (dense_all) emit(t, y);
      while (next_out < outs.size() && outs[next_out] <= t) {
        emit(outs[next_out], y);
        ++next_out;
      }
      const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
      h = hit ? std::max(h_try, h * fac) : h * fac;
    } else {
      ++sol.rejected;
      h *= std::max(0.2, 0.9 * std::pow(en, -0.25));
    }
    if (opt.max_step > 0.0) h = std::min(h, opt.max_step);
  }
  return sol;
}

}  // namespace ebeam
