#include <algorithm>
#include <cmath>

#include "ebeam/constants.hpp"
#include "ebeam/ensemble.hpp"
#include "ebeam/error.hpp"
#include "ebeam/simd.hpp"

namespace ebeam {

using namespace constants;

namespace {

struct LocalTrace {
  std::ptrdiff_t k0 = 0;
  std::vector<double> v;
};

bool use_resolved(const TraceGeometry& g, double gv, double dt) {
  switch (g.mode) {
    case DepositMode::resolved:
      return true;
    case DepositMode::delta:
      return false;
    default:
      return dt <= 0.25 * g.d / gv;
  }
}

// Deposit electrons [i0, i1) of b into out, whose sample 0 sits at t0.
void deposit(const ElectronBatch& b, const TraceGeometry& g, double t0, double dt, bool resolved,
             double* out, std::ptrdiff_t n) {
  const auto& k = simd::kernels();
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double Y = g.d + b.y[i];
    const double r2 = b.x[i] * b.x[i] + Y * Y;
    const double v = b.velocity[i];
    const double beta = v / c;
    const double gam = 1.0 / std::sqrt((1.0 - beta) * (1.0 + beta));
    const double tj = b.t_arrive[i];
    if (resolved) {
      const double gv = gam * v;
      const double half = g.truncation * std::sqrt(r2) / gv;
      std::ptrdiff_t lo = static_cast<std::ptrdiff_t>(std::ceil((tj - half - t0) / dt));
      std::ptrdiff_t hi = static_cast<std::ptrdiff_t>(std::floor((tj + half - t0) / dt)) + 1;
      lo = std::max<std::ptrdiff_t>(lo, 0);
      hi = std::min<std::ptrdiff_t>(hi, n);
      if (hi <= lo) continue;
      const double amp = mu0 * e * gv * Y / (4.0 * pi);
      k.pulse_accumulate(out, std::size_t(lo), std::size_t(hi), t0, dt, tj, gv, r2, amp);
    } else {
      const std::ptrdiff_t idx = static_cast<std::ptrdiff_t>(std::llround((tj - t0) / dt));
      if (idx < 0 || idx >= n) continue;
      out[idx] += mu0 * e * Y / (two_pi * r2) / dt;
    }
  }
}

}  // namespace

FieldTrace synthesize_trace(const ElectronBatch& samples, const TraceGeometry& geom, double t_start,
                            std::size_t n_samples, double dt) {
  if (!(dt > 0.0)) throw DomainError("synthesize_trace: dt must be > 0");
  if (!(geom.d > 0.0)) throw DomainError("synthesize_trace: d must be > 0");
  FieldTrace tr;
  tr.dt = dt;
  tr.t_start = t_start;
  tr.samples.assign(n_samples, 0.0);
  if (samples.size() == 0) return tr;
  const double v = samples.velocity[0];
  const double gam = 1.0 / std::sqrt(1.0 - (v / c) * (v / c));
  const bool resolved = use_resolved(geom, gam * v, dt);
  deposit(samples, geom, t_start, dt, resolved, tr.samples.data(), std::ptrdiff_t(n_samples));
  return tr;
}

FieldTrace synthesize_beam_trace(const BeamSpec& spec, const PhaseNoisePath& noise,
                                 const TraceRequest& req, const RngStream& rng,
                                 std::uint64_t* n_electrons) {
  if (!(req.dt > 0.0) || req.n_samples < 2) throw DomainError("synthesize_beam_trace: bad sampling");
  const double period = spec.period();
  if (req.dt * 32.0 > period * (1.0 + 1e-12))
    throw DomainError("synthesize_beam_trace: need >= 32 samples per modulation period");
  const TraceGeometry& g = req.geom;
  const double gv = spec.kin.gamma * spec.kin.velocity;
  const bool resolved = use_resolved(g, gv, req.dt);
  EnsembleOptions opt = req.ensemble;
  const double r_max = opt.r_max_waists * spec.waist;
  const double t_end = req.t_start + double(req.n_samples) * req.dt;
  // Pulses of electrons arriving just outside the window still reach it.
  opt.arrival_margin = resolved ? g.truncation * (g.d + r_max) / (0.9 * gv) : req.dt;
  const ChunkPlan plan = plan_chunks(spec, req.t_start, t_end, opt);

  FieldTrace tr;
  tr.dt = req.dt;
  tr.t_start = req.t_start;
  tr.seed = rng.seed();
  tr.stream_id = rng.stream_id();
  tr.samples.assign(req.n_samples, 0.0);
  const std::ptrdiff_t n = std::ptrdiff_t(req.n_samples);
  const double pad = opt.arrival_margin + 2.0 * req.dt;

  // Each chunk deposits into its own buffer and counts arrivals inside the
  // nominal window; buffers are added to the trace in chunk order.
  using Slot = std::pair<std::uint64_t, LocalTrace>;
  auto produce = [&](std::size_t, ElectronBatch& b, Slot& out) {
    out.first = 0;
    out.second.v.clear();
    if (b.size() == 0) return;
    for (double t : b.t_arrive) out.first += (t >= req.t_start && t < t_end);
    std::ptrdiff_t lo = std::ptrdiff_t(std::floor((b.t_arrive.front() - pad - req.t_start) / req.dt));
    std::ptrdiff_t hi = std::ptrdiff_t(std::ceil((b.t_arrive.back() + pad - req.t_start) / req.dt)) + 1;
    lo = std::clamp<std::ptrdiff_t>(lo, 0, n);
    hi = std::clamp<std::ptrdiff_t>(hi, 0, n);
    LocalTrace& lt = out.second;
    lt.k0 = lo;
    lt.v.assign(std::size_t(std::max<std::ptrdiff_t>(hi - lo, 0)), 0.0);
    if (hi > lo) deposit(b, g, req.t_start + double(lo) * req.dt, req.dt, resolved, lt.v.data(), hi - lo);
  };
  std::uint64_t delivered = 0;
  auto consume = [&](std::size_t, const Slot& r) {
    delivered += r.first;
    const LocalTrace& lt = r.second;
    for (std::size_t k = 0; k < lt.v.size(); ++k) tr.samples[std::size_t(lt.k0) + k] += lt.v[k];
  };
  for_each_chunk<Slot>(spec, noise, plan, rng, opt, produce, consume);
  if (n_electrons) *n_electrons = delivered;
  return tr;
}

}  // namespace ebeam
