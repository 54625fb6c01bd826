#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ebeam/constants.hpp"
#include "ebeam/ensemble.hpp"
#include "ebeam/error.hpp"
#include "ebeam/simd.hpp"

namespace ebeam {

using namespace constants;

void ElectronBatch::resize(std::size_t n) {
  t_emit.resize(n);
  t_arrive.resize(n);
  x.resize(n);
  y.resize(n);
  velocity.resize(n);
}

double PhaseNoisePath::at(double t) const {
  if (phases.empty()) return 0.0;
  const double u = (t - t0) / step;
  if (u <= 0.0) return phases.front();
  const std::size_t last = phases.size() - 1;
  if (u >= double(last)) return phases.back();
  const std::size_t i = static_cast<std::size_t>(u);
  const double f = u - double(i);
  return phases[i] + f * (phases[i + 1] - phases[i]);
}

std::vector<double> PhaseNoisePath::times() const {
  std::vector<double> t(phases.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = t0 + double(i) * step;
  return t;
}

PhaseNoisePath PhaseNoisePath::shifted(double dt, double dphi) const {
  PhaseNoisePath p = *this;
  p.t0 += dt;
  for (double& v : p.phases) v += dphi;
  if (p.phases.empty() && dphi != 0.0) p.phases = {dphi, dphi};
  return p;
}

PhaseNoisePath make_phase_noise(double b, double t_begin, double t_end, double step, RngStream rng) {
  if (!(b >= 0.0)) throw DomainError("make_phase_noise: b must be >= 0");
  if (!(step > 0.0) || !(t_end > t_begin)) throw DomainError("make_phase_noise: bad grid");
  PhaseNoisePath p;
  p.t0 = t_begin;
  p.step = step;
  if (b == 0.0) return p;
  const std::size_t n = static_cast<std::size_t>(std::ceil((t_end - t_begin) / step)) + 2;
  p.phases.resize(n);
  const double s = std::sqrt(2.0 * b * step);
  p.phases[0] = 0.0;
  for (std::size_t i = 1; i < n; ++i) p.phases[i] = p.phases[i - 1] + s * rng.normal();
  return p;
}

namespace {

constexpr std::size_t kBlock = 2048;

// Appends Poisson times on [a, b) to out.
void poisson_times(double rate, double a, double b, RngStream& rng, std::vector<double>& out) {
  const auto& k = simd::kernels();
  double u[kBlock], g[kBlock];
  const double inv = 1.0 / rate;
  double t = a;
  while (true) {
    rng.fill_uniform(u);
    k.neg_log(u, g, kBlock);
    for (std::size_t i = 0; i < kBlock; ++i) {
      t += g[i] * inv;
      if (t >= b) return;
      out.push_back(t);
    }
  }
}

}  // namespace

std::vector<double> sample_arrivals(double I0, double duration, RngStream& rng, double t0) {
  if (!(I0 > 0.0)) throw DomainError("sample_arrivals: current must be > 0");
  if (!(duration >= 0.0)) throw DomainError("sample_arrivals: negative duration");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(I0 * duration / e * 1.01 + 16));
  poisson_times(I0 / e, t0, t0 + duration, rng, out);
  return out;
}

double transverse_radius(double u, double w, double r_max) {
  if (!(w > 0.0) || !(r_max > 0.0)) throw DomainError("transverse_radius: w, r_max must be > 0");
  const double trunc = -std::expm1(-2.0 * r_max * r_max / (w * w));
  return w / std::sqrt(2.0) * std::sqrt(-std::log1p(-u * trunc));
}

Vec2 sample_transverse(double w, double r_max, RngStream& rng) {
  const double r = transverse_radius(rng.uniform(), w, r_max);
  const double phi = two_pi * rng.uniform();
  return {r * std::cos(phi), r * std::sin(phi)};
}

namespace {

// Per-thread scratch; capacity survives between chunks.
struct Scratch {
  std::vector<double> em, ur, up, r, s, c, phase;
};

Scratch& scratch() {
  thread_local Scratch s;
  return s;
}

void fill_transverse(ElectronBatch& b, double w, double r_max, RngStream& rng) {
  const std::size_t n = b.size();
  Scratch& sc = scratch();
  auto& ur = sc.ur;
  auto& up = sc.up;
  auto& r = sc.r;
  auto& s = sc.s;
  auto& c = sc.c;
  ur.resize(n);
  up.resize(n);
  r.resize(n);
  s.resize(n);
  c.resize(n);
  rng.fill_uniform(ur);
  rng.fill_uniform(up);
  const double trunc = -std::expm1(-2.0 * r_max * r_max / (w * w));
  simd::kernels().transverse(ur.data(), up.data(), r.data(), s.data(), c.data(), n,
                             w / std::sqrt(2.0), trunc);
  for (std::size_t i = 0; i < n; ++i) {
    b.x[i] = r[i] * c[i];
    b.y[i] = r[i] * s[i];
  }
}

void drift_batch(ElectronBatch& b, const BeamSpec& spec, const PhaseNoisePath& noise, RngStream* rng) {
  const std::size_t n = b.size();
  auto& phase = scratch().phase;
  phase.resize(n);
  for (std::size_t i = 0; i < n; ++i) phase[i] = noise.at(b.t_emit[i]);
  const double E0 = spec.kin.kinetic_energy_eV;
  simd::DriftParams p{spec.omega0, E0 / m_e_c2_eV, spec.mod_depth * E0 / m_e_c2_eV, spec.drift_length};
  if (spec.energy_spread_eV > 0.0 && rng) {
    for (std::size_t i = 0; i < n; ++i) {
      simd::DriftParams pi = p;
      pi.k0 = (E0 + spec.energy_spread_eV * rng->normal()) / m_e_c2_eV;
      simd::scalar_kernels().drift(&b.t_emit[i], &phase[i], &b.t_arrive[i], &b.velocity[i], 1, pi);
    }
  } else {
    simd::kernels().drift(b.t_emit.data(), phase.data(), b.t_arrive.data(), b.velocity.data(), n, p);
  }
}

void check_order(const ElectronBatch& b) {
  for (std::size_t i = 1; i < b.size(); ++i)
    if (b.t_arrive[i] < b.t_arrive[i - 1])
      throw ValidityError("no_overtaking",
                          "arrival order inverted at electron " + std::to_string(i) + " (overtaking)");
}

void sort_by_arrival(ElectronBatch& b) {
  std::vector<std::size_t> idx(b.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return b.t_arrive[i] < b.t_arrive[j]; });
  ElectronBatch s;
  s.resize(b.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    s.t_emit[k] = b.t_emit[idx[k]];
    s.t_arrive[k] = b.t_arrive[idx[k]];
    s.x[k] = b.x[idx[k]];
    s.y[k] = b.y[idx[k]];
    s.velocity[k] = b.velocity[idx[k]];
  }
  b = std::move(s);
}

}  // namespace

namespace {

void modulate_into(std::span<const double> emissions, const BeamSpec& spec,
                   const PhaseNoisePath& noise, RngStream* rng, double r_max_waists,
                   ElectronBatch& b) {
  bunching_parameter(spec);
  b.resize(emissions.size());
  std::copy(emissions.begin(), emissions.end(), b.t_emit.begin());
  if (rng) {
    fill_transverse(b, spec.waist, r_max_waists * spec.waist, *rng);
  } else {
    std::fill(b.x.begin(), b.x.end(), 0.0);
    std::fill(b.y.begin(), b.y.end(), 0.0);
  }
  drift_batch(b, spec, noise, rng);
  if (spec.energy_spread_eV > 0.0 && rng)
    sort_by_arrival(b);
  else
    check_order(b);
}

}  // namespace

ElectronBatch modulate_and_drift(std::span<const double> emissions, const BeamSpec& spec,
                                 const PhaseNoisePath& noise, RngStream* rng, double r_max_waists) {
  ElectronBatch b;
  modulate_into(emissions, spec, noise, rng, r_max_waists, b);
  return b;
}

ChunkPlan plan_chunks(const BeamSpec& spec, double t_begin, double t_end, const EnsembleOptions& opt) {
  bunching_parameter(spec);
  if (!(t_end > t_begin)) throw DomainError("plan_chunks: empty time window");
  const double E0 = spec.kin.kinetic_energy_eV;
  const double spread = 6.0 * spec.energy_spread_eV;
  const double e_lo = std::max(1e-9 * E0, E0 * (1.0 - spec.mod_depth) - spread);
  const double e_hi = E0 * (1.0 + spec.mod_depth) + spread;
  const double v_min = velocity_from_energy(e_lo), v_max = velocity_from_energy(e_hi);
  ChunkPlan p;
  p.keep_begin = t_begin - opt.arrival_margin;
  p.keep_end = t_end + opt.arrival_margin;
  p.emit_begin = p.keep_begin - spec.drift_length / v_min;
  p.emit_end = p.keep_end - spec.drift_length / v_max;
  p.chunk_length = opt.chunk_electrons * e / spec.current;
  p.n_chunks = static_cast<std::size_t>(std::ceil((p.emit_end - p.emit_begin) / p.chunk_length));
  return p;
}

void generate_chunk(const BeamSpec& spec, const PhaseNoisePath& noise, const ChunkPlan& plan,
                    std::size_t chunk, const RngStream& rng, double r_max_waists, ElectronBatch& out) {
  RngStream s = rng.split(chunk);
  const double a = plan.emit_begin + double(chunk) * plan.chunk_length;
  const double b = std::min(plan.emit_end, a + plan.chunk_length);
  auto& em = scratch().em;
  em.clear();
  poisson_times(spec.current / e, a, b, s, em);
  modulate_into(em, spec, noise, &s, r_max_waists, out);
  // Keep arrivals inside the window; order is preserved.
  std::size_t k = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out.t_arrive[i] < plan.keep_begin || out.t_arrive[i] >= plan.keep_end) continue;
    out.t_emit[k] = out.t_emit[i];
    out.t_arrive[k] = out.t_arrive[i];
    out.x[k] = out.x[i];
    out.y[k] = out.y[i];
    out.velocity[k] = out.velocity[i];
    ++k;
  }
  out.resize(k);
}

ElectronBatch generate_chunk(const BeamSpec& spec, const PhaseNoisePath& noise, const ChunkPlan& plan,
                             std::size_t chunk, const RngStream& rng, double r_max_waists) {
  ElectronBatch out;
  generate_chunk(spec, noise, plan, chunk, rng, r_max_waists, out);
  return out;
}

}  // namespace ebeam
