#include <algorithm>
#include <cmath>
#include <string>

#include "ebeam/bloch.hpp"
#include "ebeam/constants.hpp"
#include "ebeam/error.hpp"
#include "ebeam/quadrature.hpp"
#include "ebeam/simd.hpp"

namespace ebeam {

using namespace constants;
using cd = std::complex<double>;

namespace {

void free_evolve(BlochState& s, double dt, double g1, double g2) {
  if (dt <= 0.0) return;
  const double tr = s.rho_ee + s.rho_gg;
  s.rho_ee *= std::exp(-g1 * dt);
  s.rho_gg = tr - s.rho_ee;
  s.rho_eg *= std::exp(-g2 * dt);
}

// rho -> U rho U^dagger with U = exp(-i [[0, Z], [Z*, 0]]).
void apply_kick(BlochState& s, cd z) {
  const double a = std::abs(z);
  if (a == 0.0) return;
  const double c = std::cos(a);
  const cd u = z * (std::sin(a) / a);
  const cd i(0.0, 1.0);
  const double tr = s.rho_ee + s.rho_gg;
  const cd eg = s.rho_eg;
  const cd ge = std::conj(eg);
  const double ee = s.rho_ee, gg = s.rho_gg;
  const double ee2 = c * c * ee + std::norm(u) * gg + 2.0 * c * (i * std::conj(u) * eg).real();
  s.rho_eg = i * c * u * (ee - gg) + c * c * eg + u * u * ge;
  s.rho_ee = ee2;
  s.rho_gg = tr - ee2;
}

struct Coupling {
  double coef = 0.0;  // kicks: Z = coef * proj * J; pulses: h = coef * gv * proj / (...)^{3/2}
  double mx = 0.0, my = 0.0;
};

Coupling make_coupling(const TwoLevelSystem& sys) {
  Coupling c;
  c.coef = transition_moment(sys, 1.0) * mu0 * e / (4.0 * pi * hbar);
  const double m = std::hypot(sys.mu[0], sys.mu[1]);
  if (m > 0.0) {
    c.mx = sys.mu[0] / m;
    c.my = sys.mu[1] / m;
  }
  return c;
}

// int_{-H}^{H} (r2 + s^2)^{-3/2} cos(kappa s) ds by composite Gauss-Legendre.
double window_integral(double r2, double H, double kappa) {
  static const QuadRule gl = gauss_legendre(32);
  const int panels = 16;
  const double w = 2.0 * H / panels;
  double acc = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = -H + (p + 0.5) * w;
    for (std::size_t k = 0; k < gl.x.size(); ++k) {
      const double s = mid + 0.5 * w * gl.x[k];
      const double q = r2 + s * s;
      acc += gl.w[k] * std::cos(kappa * s) / (q * std::sqrt(q));
    }
  }
  return 0.5 * w * acc;
}

struct Kicks {
  std::vector<double> t, re, im;
};

void compute_kicks(const ElectronBatch& b, const TwoLevelSystem& sys, const SpikeContext& ctx,
                   double half_window, Kicks& out) {
  const std::size_t n = b.size();
  out.t.assign(b.t_arrive.begin(), b.t_arrive.end());
  out.re.resize(n);
  out.im.resize(n);
  const Coupling cp = make_coupling(sys);
  simd::KickParams p{};
  p.d = ctx.d;
  p.half_window = ctx.gv * half_window;
  p.kappa = sys.omega0 / ctx.gv;
  p.coef = cp.coef;
  p.omega0 = sys.omega0;
  p.t_ref = 0.0;
  p.mx = cp.mx;
  p.my = cp.my;
  if (p.kappa * p.half_window <= 0.05) {
    simd::kernels().window_kicks(b.t_arrive.data(), b.x.data(), b.y.data(), out.re.data(),
                                 out.im.data(), n, p);
    return;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double X = b.x[i], Y = ctx.d + b.y[i];
    const double amp = p.coef * (Y * p.mx - X * p.my) * window_integral(X * X + Y * Y, p.half_window, p.kappa);
    const double ph = simd::reduce_2pi(p.omega0 * b.t_arrive[i]);
    out.re[i] = amp * std::cos(ph);
    out.im[i] = amp * std::sin(ph);
  }
}

// Outputs at t_grid; kicks summed per segment and applied at the segment
// midpoint. Segments are the block grid t0 + k L refined by output times.
class KickEvolver {
 public:
  KickEvolver(const TwoLevelSystem& sys, const BlochState& rho0, std::span<const double> t_grid,
              double block)
      : g1_(sys.gamma1), g2_(sys.gamma2), grid_(t_grid), block_(block), state_(rho0) {
    t0_ = grid_.front();
    t_state_ = t_seg_ = t0_;
    out_.reserve(grid_.size());
    while (next_out_ < grid_.size() && grid_[next_out_] <= t0_) {
      out_.push_back(state_);
      ++next_out_;
    }
    next_edge_ = 1;
  }

  void add(double t, cd z) {
    if (t < t0_ || next_out_ >= grid_.size() || t >= grid_.back()) return;
    for (double nb = boundary(); t >= nb; nb = boundary()) advance(nb);
    pending_ += z;
  }

  std::vector<BlochState> finish() {
    while (next_out_ < grid_.size()) advance(boundary());
    return std::move(out_);
  }

 private:
  double edge() const { return t0_ + double(next_edge_) * block_; }
  double boundary() const {
    return next_out_ < grid_.size() ? std::min(edge(), grid_[next_out_]) : edge();
  }

  void advance(double tb) {
    if (pending_ != 0.0) {
      const double mid = 0.5 * (t_seg_ + tb);
      free_evolve(state_, mid - t_state_, g1_, g2_);
      apply_kick(state_, pending_);
      t_state_ = mid;
      pending_ = 0.0;
    }
    t_seg_ = tb;
    if (edge() <= tb) ++next_edge_;
    while (next_out_ < grid_.size() && grid_[next_out_] <= tb) {
      BlochState s = state_;
      free_evolve(s, grid_[next_out_] - t_state_, g1_, g2_);
      out_.push_back(s);
      ++next_out_;
    }
  }

  double g1_, g2_;
  std::span<const double> grid_;
  double block_;
  BlochState state_;
  double t0_ = 0.0, t_state_ = 0.0, t_seg_ = 0.0;
  std::size_t next_out_ = 0;
  std::uint64_t next_edge_ = 1;
  cd pending_ = 0.0;
  std::vector<BlochState> out_;
};

struct Pulse {
  double t, amp, r2;  // h(t) = amp / (r2 + (gv (t - tj))^2)^{3/2} e^{i omega0 t}
};

// Windows of width 2 hw around each electron; overlapping windows merge and
// are integrated with fixed-step RK4 between window edges.
class ResolvedEvolver {
 public:
  ResolvedEvolver(const TwoLevelSystem& sys, const SpikeContext& ctx, const BlochState& rho0,
                  std::span<const double> t_grid, double half_window, const SpikeOptions& opt)
      : sys_(sys), ctx_(ctx), grid_(t_grid), hw_(half_window), opt_(opt), state_(rho0) {
    cp_ = make_coupling(sys);
    t_state_ = grid_.front();
    period_ = two_pi / ctx.omega_mod;
    record_until(t_state_);
  }

  void add(double t, double x, double y) {
    if (t + hw_ < grid_.front() || t - hw_ >= grid_.back()) return;
    if (!group_.empty() && t - hw_ > group_end_) flush();
    if (group_.empty()) group_begin_ = t - hw_;
    const double X = x, Y = ctx_.d + y;
    group_.push_back({t, cp_.coef * ctx_.gv * (Y * cp_.mx - X * cp_.my), X * X + Y * Y});
    group_end_ = t + hw_;
    if (group_end_ - group_begin_ > period_)
      throw ValidityError("window_merge", "solve_spike_train: merged interaction windows exceed one "
                                          "modulation period; lower the current or the window");
  }

  std::vector<BlochState> finish() {
    if (!group_.empty()) flush();
    propagate_free(grid_.back());
    return std::move(out_);
  }

 private:
  void record_until(double t) {
    while (next_out_ < grid_.size() && grid_[next_out_] <= t) {
      BlochState s = state_;
      free_evolve(s, grid_[next_out_] - t_state_, sys_.gamma1, sys_.gamma2);
      out_.push_back(s);
      ++next_out_;
    }
  }

  void propagate_free(double t) {
    record_until(t);
    free_evolve(state_, t - t_state_, sys_.gamma1, sys_.gamma2);
    t_state_ = t;
  }

  cd coupling(double t) const {
    double acc = 0.0;
    for (const auto& p : group_) {
      const double tau = t - p.t;
      if (std::abs(tau) > hw_) continue;
      const double u = ctx_.gv * tau;
      const double q = p.r2 + u * u;
      acc += p.amp / (q * std::sqrt(q));
    }
    return acc * std::polar(1.0, simd::reduce_2pi(sys_.omega0 * t));
  }

  void deriv(double t, const BlochState& s, cd& d_eg, double& d_ee) const {
    const cd h = coupling(t);
    const cd i(0.0, 1.0);
    d_eg = -sys_.gamma2 * s.rho_eg + i * h * (s.rho_ee - s.rho_gg);
    d_ee = -2.0 * (std::conj(h) * s.rho_eg).imag() - sys_.gamma1 * s.rho_ee;
  }

  BlochState rk4(BlochState s, double ta, double tb, int n) const {
    const double dt = (tb - ta) / n;
    for (int k = 0; k < n; ++k) {
      const double t = ta + k * dt;
      cd e1, e2, e3, e4;
      double p1, p2, p3, p4;
      auto shifted = [&](double f, cd de, double dp) {
        BlochState x = s;
        x.rho_eg += f * de;
        x.rho_ee += f * dp;
        x.rho_gg -= f * dp;
        return x;
      };
      deriv(t, s, e1, p1);
      deriv(t + 0.5 * dt, shifted(0.5 * dt, e1, p1), e2, p2);
      deriv(t + 0.5 * dt, shifted(0.5 * dt, e2, p2), e3, p3);
      deriv(t + dt, shifted(dt, e3, p3), e4, p4);
      const cd de = (e1 + 2.0 * e2 + 2.0 * e3 + e4) / 6.0;
      const double dp = (p1 + 2.0 * p2 + 2.0 * p3 + p4) / 6.0;
      s.rho_eg += dt * de;
      s.rho_ee += dt * dp;
      s.rho_gg -= dt * dp;
    }
    return s;
  }

  void integrate(double ta, double tb) {
    if (tb <= ta) return;
    int n = std::max(2, int(std::ceil(opt_.substeps * (tb - ta) / (2.0 * hw_))));
    BlochState coarse = rk4(state_, ta, tb, n);
    for (int iter = 0;; ++iter) {
      BlochState fine = rk4(state_, ta, tb, 2 * n);
      const double diff = std::max(std::abs(fine.rho_eg - coarse.rho_eg),
                                   std::abs(fine.rho_ee - coarse.rho_ee));
      if (diff <= opt_.richardson_tol) {
        state_ = fine;
        break;
      }
      if (iter >= 12)
        throw ConvergenceError("solve_spike_train: window integration did not converge", ta);
      coarse = fine;
      n *= 2;
    }
    t_state_ = tb;
  }

  void flush() {
    const double lo = std::max(group_begin_, grid_.front());
    const double hi = std::min(group_end_, grid_.back());
    if (hi > lo) {
      propagate_free(lo);
      std::vector<double> cuts;
      for (const auto& p : group_) {
        cuts.push_back(p.t - hw_);
        cuts.push_back(p.t + hw_);
      }
      for (std::size_t k = next_out_; k < grid_.size() && grid_[k] < hi; ++k) cuts.push_back(grid_[k]);
      cuts.push_back(hi);
      std::sort(cuts.begin(), cuts.end());
      for (double c : cuts) {
        if (c <= t_state_ || c > hi) continue;
        integrate(t_state_, c);
        record_until(c);
      }
    }
    group_.clear();
  }

  const TwoLevelSystem& sys_;
  SpikeContext ctx_;
  Coupling cp_;
  std::span<const double> grid_;
  double hw_;
  const SpikeOptions& opt_;
  BlochState state_;
  double t_state_ = 0.0;
  double period_ = 0.0;
  std::size_t next_out_ = 0;
  std::vector<Pulse> group_;
  double group_begin_ = 0.0, group_end_ = 0.0;
  std::vector<BlochState> out_;
};

void check_spike_inputs(const TwoLevelSystem& sys, const SpikeContext& ctx, const BlochState& rho0,
                        std::span<const double> t_grid, const SpikeOptions& opt) {
  sys.validate();
  if (!rho0.valid(1e-9)) throw DomainError("solve_spike_train: rho0 is not a density matrix");
  if (t_grid.empty()) throw DomainError("solve_spike_train: empty time grid");
  for (std::size_t k = 1; k < t_grid.size(); ++k)
    if (!(t_grid[k] >= t_grid[k - 1])) throw DomainError("solve_spike_train: unsorted time grid");
  if (!(ctx.d > 0.0) || !(ctx.gv > 0.0) || !(ctx.omega_mod > 0.0))
    throw DomainError("solve_spike_train: d, gamma v and the modulation frequency must be > 0");
  if (!(opt.window_factor > 0.0) || opt.substeps < 2 || !(opt.block_periods > 0.0))
    throw DomainError("solve_spike_train: bad window, substep or block settings");
  if (opt.window_factor * ctx.d / ctx.gv > two_pi / ctx.omega_mod)
    throw ValidityError("window_merge",
                        "solve_spike_train: a single interaction window exceeds the modulation period");
}

double half_window(const SpikeContext& ctx, const SpikeOptions& opt) {
  return 0.5 * opt.window_factor * ctx.d / ctx.gv;
}

}  // namespace

BlochTrajectory evolve_spike_train(const TwoLevelSystem& sys, const ElectronBatch& electrons,
                                   const SpikeContext& ctx, const BlochState& rho0,
                                   std::span<const double> t_grid, const SpikeOptions& opt) {
  check_spike_inputs(sys, ctx, rho0, t_grid, opt);
  for (std::size_t i = 1; i < electrons.size(); ++i)
    if (electrons.t_arrive[i] < electrons.t_arrive[i - 1])
      throw DomainError("evolve_spike_train: electrons must be time-sorted");
  const double hw = half_window(ctx, opt);
  BlochTrajectory out;
  out.t.assign(t_grid.begin(), t_grid.end());
  if (opt.integrator == SpikeIntegrator::kick) {
    Kicks k;
    compute_kicks(electrons, sys, ctx, hw, k);
    KickEvolver ev(sys, rho0, t_grid, opt.block_periods * two_pi / ctx.omega_mod);
    for (std::size_t i = 0; i < k.t.size(); ++i) ev.add(k.t[i], {k.re[i], k.im[i]});
    out.states = ev.finish();
  } else {
    ResolvedEvolver ev(sys, ctx, rho0, t_grid, hw, opt);
    for (std::size_t i = 0; i < electrons.size(); ++i)
      ev.add(electrons.t_arrive[i], electrons.x[i], electrons.y[i]);
    out.states = ev.finish();
  }
  return out;
}

BlochTrajectory spike_realization(const TwoLevelSystem& sys, const BeamSpec& spec,
                                  const PhaseNoisePath& noise, const BlochState& rho0,
                                  std::span<const double> t_grid, const RngStream& electron_rng,
                                  const SpikeOptions& opt) {
  spec.validate();
  bunching_parameter(spec);
  const SpikeContext ctx{spec.impact_distance, spec.kin.gamma * spec.kin.velocity, spec.omega0};
  check_spike_inputs(sys, ctx, rho0, t_grid, opt);
  const double hw = half_window(ctx, opt);
  const ChunkPlan plan = plan_chunks(spec, t_grid.front() - hw, t_grid.back() + hw, opt.ensemble);

  BlochTrajectory out;
  out.t.assign(t_grid.begin(), t_grid.end());
  if (opt.integrator == SpikeIntegrator::kick) {
    KickEvolver ev(sys, rho0, t_grid, opt.block_periods * two_pi / ctx.omega_mod);
    for_each_chunk<Kicks>(
        spec, noise, plan, electron_rng, opt.ensemble,
        [&](std::size_t, ElectronBatch& b, Kicks& k) { compute_kicks(b, sys, ctx, hw, k); },
        [&](std::size_t, const Kicks& k) {
          for (std::size_t i = 0; i < k.t.size(); ++i) ev.add(k.t[i], {k.re[i], k.im[i]});
        });
    out.states = ev.finish();
  } else {
    ResolvedEvolver ev(sys, ctx, rho0, t_grid, hw, opt);
    for_each_chunk<ElectronBatch>(
        spec, noise, plan, electron_rng, opt.ensemble,
        [](std::size_t, ElectronBatch& b, ElectronBatch& slot) { std::swap(b, slot); },
        [&](std::size_t, const ElectronBatch& b) {
          for (std::size_t i = 0; i < b.size(); ++i) ev.add(b.t_arrive[i], b.x[i], b.y[i]);
        });
    out.states = ev.finish();
  }
  return out;
}

BlochTrajectory solve_spike_train(const TwoLevelSystem& sys, const BeamSpec& spec,
                                  const BlochState& rho0, std::span<const double> t_grid,
                                  const RngStream& rng, const SpikeOptions& opt) {
  if (opt.realizations < 1) throw DomainError("solve_spike_train: need at least one realization");
  spec.validate();
  const double hw = 0.5 * opt.window_factor * spec.impact_distance / (spec.kin.gamma * spec.kin.velocity);
  const ChunkPlan plan = plan_chunks(spec, t_grid.front() - hw, t_grid.back() + hw, opt.ensemble);
  const double b = linewidth_to_b(spec.linewidth);
  const double period = two_pi / spec.omega0;
  double step = opt.noise_step;
  if (step <= 0.0) {
    const double span = plan.emit_end - plan.emit_begin;
    step = b > 0.0 ? std::clamp(2.5e-5 / b, 0.25 * period, std::max(0.25 * period, 1e-3 * span))
                   : span;
  }

  BlochTrajectory avg;
  avg.t.assign(t_grid.begin(), t_grid.end());
  avg.states.assign(t_grid.size(), BlochState{0.0, 0.0, 0.0});
  for (int r = 0; r < opt.realizations; ++r) {
    const RngStream rr = rng.split(std::uint64_t(r));
    const PhaseNoisePath noise =
        make_phase_noise(b, plan.emit_begin - step, plan.emit_end + step, step, rr.split(0));
    const BlochTrajectory one = spike_realization(sys, spec, noise, rho0, t_grid, rr.split(1), opt);
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
      avg.states[k].rho_ee += one.states[k].rho_ee;
      avg.states[k].rho_gg += one.states[k].rho_gg;
      avg.states[k].rho_eg += one.states[k].rho_eg;
    }
    for (const auto& w : one.warnings) avg.warnings.push_back(w);
  }
  const double inv = 1.0 / opt.realizations;
  for (auto& s : avg.states) {
    s.rho_ee *= inv;
    s.rho_gg *= inv;
    s.rho_eg *= inv;
  }
  return avg;
}

}  // namespace ebeam
