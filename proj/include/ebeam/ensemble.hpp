#pragma once

#include <algorithm>
#include <complex>
#include <exception>
#include <thread>
#include <type_traits>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ebeam/beam.hpp"
#include "ebeam/rng.hpp"
#include "ebeam/trace.hpp"

namespace ebeam {

struct ElectronSample {
  double t_emit;
  double t_arrive;
  double x;  // offset from the beam axis, m
  double y;
  double velocity;
};

// Structure-of-arrays batch; element i mirrors ElectronSample.
struct ElectronBatch {
  std::vector<double> t_emit, t_arrive, x, y, velocity;

  std::size_t size() const { return t_arrive.size(); }
  void resize(std::size_t n);
  void clear() { resize(0); }
  ElectronSample operator[](std::size_t i) const {
    return {t_emit[i], t_arrive[i], x[i], y[i], velocity[i]};
  }
};

// Modulation phase on a uniform grid; Var(phi(a) - phi(b)) = 2 b |a - b|.
struct PhaseNoisePath {
  double t0 = 0.0;
  double step = 1.0;
  std::vector<double> phases;  // empty: phi = 0 everywhere

  double at(double t) const;
  std::vector<double> times() const;
  PhaseNoisePath shifted(double dt, double dphi = 0.0) const;
};

PhaseNoisePath make_phase_noise(double b, double t_begin, double t_end, double step, RngStream rng);

// Homogeneous Poisson emission times on [t0, t0 + duration) at rate I0 / e.
std::vector<double> sample_arrivals(double I0, double duration, RngStream& rng, double t0 = 0.0);

// Inverse CDF of the truncated radial Gaussian (sigma = w / 2).
double transverse_radius(double u, double w, double r_max);
Vec2 sample_transverse(double w, double r_max, RngStream& rng);

// Exact drift of energy-modulated electrons. With rng, offsets are drawn
// from the truncated Gaussian profile and the energy spread is applied;
// otherwise all electrons travel on axis with the nominal energy.
ElectronBatch modulate_and_drift(std::span<const double> emissions, const BeamSpec& spec,
                                 const PhaseNoisePath& noise, RngStream* rng = nullptr,
                                 double r_max_waists = 5.0);

struct EnsembleOptions {
  double r_max_waists = 5.0;
  double chunk_electrons = 65536.0;  // expected electrons per chunk
  unsigned workers = 1;
  double arrival_margin = 0.0;  // keep arrivals this far outside [t_begin, t_end)
};

// Emission is split into fixed time chunks; chunk c draws from rng.split(c)
// and holds the electrons whose arrival lies in [keep_begin, keep_end).
struct ChunkPlan {
  double emit_begin = 0.0;
  double emit_end = 0.0;
  double chunk_length = 0.0;
  std::size_t n_chunks = 0;
  double keep_begin = 0.0;
  double keep_end = 0.0;
};

ChunkPlan plan_chunks(const BeamSpec& spec, double t_begin, double t_end, const EnsembleOptions& opt);

ElectronBatch generate_chunk(const BeamSpec& spec, const PhaseNoisePath& noise, const ChunkPlan& plan,
                             std::size_t chunk, const RngStream& rng, double r_max_waists);
// Same, reusing the storage of out.
void generate_chunk(const BeamSpec& spec, const PhaseNoisePath& noise, const ChunkPlan& plan,
                    std::size_t chunk, const RngStream& rng, double r_max_waists, ElectronBatch& out);

// produce(c, batch, R& slot) runs on up to `workers` threads; consume(c, R&)
// is called in ascending chunk order, so reductions are independent of the
// worker count. Batches and result slots are reused between chunks.
template <class R, class Produce, class Consume>
void for_each_chunk(const BeamSpec& spec, const PhaseNoisePath& noise, const ChunkPlan& plan,
                    const RngStream& rng, const EnsembleOptions& opt, Produce&& produce,
                    Consume&& consume) {
  const std::size_t wave = std::max<unsigned>(1, opt.workers);
  std::vector<ElectronBatch> batches(wave);
  std::vector<R> slots(wave);
  for (std::size_t base = 0; base < plan.n_chunks; base += wave) {
    const std::size_t count = std::min(wave, plan.n_chunks - base);
    auto job = [&](std::size_t j) {
      generate_chunk(spec, noise, plan, base + j, rng, opt.r_max_waists, batches[j]);
      produce(base + j, batches[j], slots[j]);
    };
    if (count == 1) {
      job(0);
    } else {
      std::vector<std::thread> pool;
      std::vector<std::exception_ptr> errs(count);
      for (std::size_t j = 0; j < count; ++j)
        pool.emplace_back([&, j] {
          try {
            job(j);
          } catch (...) {
            errs[j] = std::current_exception();
          }
        });
      for (auto& t : pool) t.join();
      for (auto& e : errs)
        if (e) std::rethrow_exception(e);
    }
    for (std::size_t j = 0; j < count; ++j) consume(base + j, slots[j]);
  }
}

enum class DepositMode { automatic, resolved, delta };

struct TraceGeometry {
  double d = 0.0;  // beam axis to system, along y
  double truncation = 10.0;  // pulse support in units of r / (gamma v)
  DepositMode mode = DepositMode::automatic;
};

// B_y(t) = sum_j mu0 e gamma v y_j / (4 pi (r_j^2 + gamma^2 v^2 (t - t_j)^2)^{3/2}),
// electron j at (x_j, d + y_j) relative to the system.
FieldTrace synthesize_trace(const ElectronBatch& samples, const TraceGeometry& geom, double t_start,
                            std::size_t n_samples, double dt);

struct TraceRequest {
  double t_start = 0.0;
  std::size_t n_samples = 0;
  double dt = 0.0;
  TraceGeometry geom;
  EnsembleOptions ensemble;
};

// Streamed generation plus synthesis; the trace of per-chunk buffers is
// merged in chunk order.
FieldTrace synthesize_beam_trace(const BeamSpec& spec, const PhaseNoisePath& noise,
                                 const TraceRequest& req, const RngStream& rng,
                                 std::uint64_t* n_electrons = nullptr);

struct HarmonicLine {
  int n = 0;
  double omega = 0.0;
  std::complex<double> amplitude;
};

struct SpectrumStats {
  double floor_variance = 0.0;  // mean |s_hat|^2 over off-harmonic bins
  std::size_t floor_bins = 0;
  std::size_t peak_index = 0;   // largest positive-frequency bin
  double peak_omega = 0.0;
  std::vector<HarmonicLine> harmonics;
};

// Off-harmonic bins: 0 < omega <= 0.5 omega_Nyquist and more than
// exclude_halfwidth bins away from every multiple of omega0.
SpectrumStats spectrum_statistics(const Spectrum& s, double omega0, int n_harmonics,
                                  int exclude_halfwidth = 1);

struct NoiseFloor {
  double empirical = 0.0;    // T^2 s^2
  double theoretical = 0.0;  // (e mu0 / 2 pi d)^2 N / (2 pi)
  double n_electrons = 0.0;
  std::size_t bins = 0;
  double ratio() const { return empirical / theoretical; }
};

NoiseFloor noise_floor(const FieldTrace& trace, double omega0, double mean_current, double d,
                       int exclude_halfwidth = 1);

// gamma v e / (I_min d) with I_min the minimum of the bunched current.
double continuity_condition(const BeamSpec& spec);

}  // namespace ebeam
