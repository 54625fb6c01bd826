#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <ctime>
#include <fstream>
#include <optional>

#include <fmt/format.h>
#include <json.hpp>

#include "ebeam/bloch.hpp"
#include "ebeam/constants.hpp"
#include "ebeam/ensemble.hpp"
#include "ebeam/error.hpp"
#include "ebeam/fourier.hpp"
#include "ebeam/quadrature.hpp"
#include "ebeam/runner.hpp"
#include "ebeam/simd.hpp"
#include "ebeam/special.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>

namespace ebeam::runner {

using namespace constants;
using json = nlohmann::json;
namespace fs = std::filesystem;

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> n = {"kepler-current", "spectrum",    "bloch-mean",
                                             "bloch-shot",     "bloch-spikes", "probability",
                                             "overlap",        "rabi-profile", "loss-estimate"};
  return n;
}

namespace {

struct Ctx {
  const ScenarioConfig& cfg;
  fs::path dir;
  std::vector<fs::path>& files;
  bool non_converged = false;

  void csv(const std::string& name, const std::vector<std::string>& header,
           const std::vector<std::vector<double>>& cols) {
    const fs::path p = dir / name;
    write_csv(p, header, cols);
    files.push_back(p);
  }
};

const BeamSpec& need_beam(const ScenarioConfig& c) {
  if (!c.beam) throw ConfigError(fmt::format("config: scenario '{}' needs a beam section", c.scenario));
  return *c.beam;
}

const WavePacketSpec& need_packet(const ScenarioConfig& c) {
  if (!c.packet) throw ConfigError(fmt::format("config: scenario '{}' needs a packet section", c.scenario));
  return *c.packet;
}

void cap_electrons(const ScenarioConfig& c, double expected) {
  if (!c.full && expected > c.solver.max_electrons)
    throw ConfigError(fmt::format("config: run needs ~{:.3g} electrons, above solver.max_electrons = {:.3g}; "
                                  "raise the cap or pass --full",
                                  expected, c.solver.max_electrons));
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(std::size_t(std::max(n, 1)));
  for (int i = 0; i < n; ++i) v[std::size_t(i)] = n > 1 ? a + (b - a) * i / (n - 1) : a;
  return v;
}

double noise_step(double b, double period, double span) {
  return b > 0.0 ? std::clamp(2.5e-5 / b, 0.25 * period, std::max(0.25 * period, 1e-3 * span)) : span;
}

void write_trajectory(Ctx& ctx, const std::string& name, const BlochTrajectory& tr) {
  std::vector<double> ee, gg, re, im, inv;
  for (const auto& s : tr.states) {
    ee.push_back(s.rho_ee);
    gg.push_back(s.rho_gg);
    re.push_back(s.rho_eg.real());
    im.push_back(s.rho_eg.imag());
    inv.push_back(s.inversion());
  }
  ctx.csv(name, {"t_s", "rho_ee", "rho_gg", "re_rho_eg", "im_rho_eg", "inversion"}, {tr.t, ee, gg, re, im, inv});
}

json first_maximum(const BlochTrajectory& tr) {
  // First local maximum of the inversion after it rises above zero.
  std::size_t k = 0;
  while (k < tr.states.size() && tr.states[k].inversion() <= 0.0) ++k;
  while (k + 1 < tr.states.size() && tr.states[k + 1].inversion() >= tr.states[k].inversion()) ++k;
  if (k >= tr.states.size()) return {{"found", false}};
  return {{"found", true}, {"t_s", tr.t[k]}, {"inversion", tr.states[k].inversion()}};
}

double mean_field_rabi(const ScenarioConfig& c, const BeamSpec& b, double rb) {
  const double I1 = fourier_coefficient(1, rb, b.current);
  double omega = std::abs(rabi_from_current(c.system, I1, b.impact_distance));
  if (c.solver.field_model == "gaussian") {
    const Vec3 g = gaussian_beam_field(1.0, b.waist, 0.0, b.impact_distance);
    const Vec3 t = thin_beam_field(1.0, 0.0, b.impact_distance);
    omega *= std::abs(g[0] / t[0]);
  }
  return omega;
}

std::vector<double> out_grid(const ScenarioConfig& c, double def_duration, int def_points) {
  const double T = c.solver.duration > 0.0 ? c.solver.duration : def_duration;
  const int n = c.solver.points > 0 ? c.solver.points : def_points;
  if (n < 2) throw ConfigError("config: solver.points must be >= 2");
  return linspace(0.0, T, n);
}

OdeOptions ode_options(const ScenarioConfig& c) {
  OdeOptions o;
  o.rel_tol = c.solver.rel_tol;
  o.abs_tol = c.solver.abs_tol;
  return o;
}

json kepler_current(Ctx& ctx) {
  const BeamSpec& b = need_beam(ctx.cfg);
  const ModulatedCurrent mc = modulated_current(b);
  const double period = b.period();
  std::vector<double> t, ph, I;
  for (int k = 0; k <= 1024; ++k) {
    const double tt = 2.0 * period * k / 1024;
    t.push_back(tt);
    ph.push_back(b.omega0 * tt);
    I.push_back(analytic_current(mc, 0.0, tt));
  }
  ctx.csv("current.csv", {"t_s", "phase_rad", "current_A"}, {t, ph, I});

  std::vector<double> rbs, ns, an, num, dev;
  double worst = 0.0;
  const int N = 4096;
  for (double rb : ctx.cfg.scan.r_b) {
    const ModulatedCurrent m{rb, b.current, 1.0, 1.0, 0.0};
    std::vector<double> v(N);
    for (int k = 0; k < N; ++k) v[std::size_t(k)] = analytic_current(m, 0.0, two_pi * k / N);
    for (int n = 1; n <= ctx.cfg.scan.harmonics; ++n) {
      std::complex<double> acc = 0.0;
      for (int k = 0; k < N; ++k) acc += v[std::size_t(k)] * std::polar(1.0, -two_pi * n * k / N);
      const double x = 2.0 * std::abs(acc) / N;
      const double a = fourier_coefficient(n, rb, b.current);
      rbs.push_back(rb);
      ns.push_back(n);
      an.push_back(a);
      num.push_back(x);
      dev.push_back(std::abs(x - a) / std::abs(a));
      worst = std::max(worst, dev.back());
    }
  }
  ctx.csv("harmonics.csv", {"r_b", "n", "analytic_A", "numeric_A", "rel_dev"}, {rbs, ns, an, num, dev});
  return {{"r_b", mc.r_b},
          {"I_omega0_A", fourier_coefficient(1, mc.r_b, b.current)},
          {"max_rel_dev", worst}};
}

json spectrum(Ctx& ctx) {
  const ScenarioConfig& c = ctx.cfg;
  const BeamSpec& b = need_beam(c);
  const double rb = bunching_parameter(b);
  const double period = b.period();
  const double duration = c.solver.periods * period;
  cap_electrons(c, b.current / e * duration);
  const std::size_t n = std::size_t(std::llround(c.solver.periods * c.solver.samples_per_period));

  TraceRequest req;
  req.t_start = 0.0;
  req.n_samples = n;
  req.dt = period / c.solver.samples_per_period;
  req.geom.d = b.impact_distance;
  req.ensemble.workers = c.workers;
  const ChunkPlan plan = plan_chunks(b, 0.0, duration, req.ensemble);
  const double bn = linewidth_to_b(b.linewidth);
  const double step = noise_step(bn, period, plan.emit_end - plan.emit_begin);
  const RngStream root(c.seed, 0);
  const PhaseNoisePath noise = make_phase_noise(bn, plan.emit_begin - step, plan.emit_end + step, step, root.split(0));
  std::uint64_t count = 0;
  FieldTrace tr = synthesize_beam_trace(b, noise, req, root.split(1), &count);
  tr.config_digest = c.digest;

  const Spectrum s = dft(tr);
  const SpectrumStats st = spectrum_statistics(s, b.omega0, c.scan.harmonics);
  std::optional<NoiseFloor> nf;
  if (c.solver.periods >= 100.0) nf = noise_floor(tr, b.omega0, b.current, b.impact_distance);

  std::vector<double> w, f, mag, re, im;
  for (std::size_t k = 0; k < s.omega.size(); ++k) {
    if (s.omega[k] < 0.0) continue;
    w.push_back(s.omega[k]);
    f.push_back(s.omega[k] / two_pi);
    mag.push_back(std::abs(s.amplitude[k]));
    re.push_back(s.amplitude[k].real());
    im.push_back(s.amplitude[k].imag());
  }
  ctx.csv("spectrum.csv", {"omega_rad_s", "f_hz", "abs_T_s", "re_T_s", "im_T_s"}, {w, f, mag, re, im});

  json h = json::array();
  const double a1 = st.harmonics.empty() ? 0.0 : std::abs(st.harmonics[0].amplitude);
  for (const auto& line : st.harmonics)
    h.push_back({{"n", line.n},
                 {"abs", std::abs(line.amplitude)},
                 {"ratio", a1 > 0.0 ? std::abs(line.amplitude) / a1 : 0.0},
                 {"expected_ratio", besselj(line.n, line.n * rb) / besselj(1, rb)}});
  return {{"r_b", rb},
          {"electrons", count},
          {"peak_hz", st.peak_omega / two_pi},
          {"bin_hz", s.d_omega() / two_pi},
          {"harmonics", h},
          {"floor_empirical", nf ? json(nf->empirical) : json()},
          {"floor_theory", nf ? json(nf->theoretical) : json()},
          {"floor_ratio", nf ? json(nf->ratio()) : json()}};
}

json bloch_mean(Ctx& ctx) {
  const ScenarioConfig& c = ctx.cfg;
  const BeamSpec& b = need_beam(c);
  const double rb = bunching_parameter(b);
  DriveSpec d;
  d.rabi = mean_field_rabi(c, b, rb);
  d.b = linewidth_to_b(b.linewidth);
  d.detuning = two_pi * c.solver.detuning_hz;
  const auto t = out_grid(c, 20e-3, 2001);
  const BlochTrajectory tr = solve_mean_rwa(c.system, d, BlochState{}, t, ode_options(c));
  write_trajectory(ctx, "trajectory.csv", tr);
  return {{"r_b", rb}, {"rabi_rad_s", d.rabi}, {"rabi_hz", d.rabi / two_pi}, {"b", d.b},
          {"first_maximum", first_maximum(tr)}, {"warnings", tr.warnings}};
}

json bloch_shot(Ctx& ctx) {
  const ScenarioConfig& c = ctx.cfg;
  const BeamSpec& b = need_beam(c);
  const double rb = bunching_parameter(b);
  DriveSpec d;
  d.variant = DriveVariant::shot_noise;
  d.rabi = mean_field_rabi(c, b, rb);
  d.b = linewidth_to_b(b.linewidth);
  d.a = shot_noise_damping(c.system, b.kin, b.impact_distance, b.current);
  d.second_harmonic_ratio = fourier_coefficient(2, rb, b.current) / (2.0 * b.current);
  d.detuning = two_pi * c.solver.detuning_hz;
  const auto t = out_grid(c, 20e-3, 2001);
  const BlochTrajectory shot = solve_shot_noise(c.system, d, BlochState{}, t, ode_options(c));
  DriveSpec m = d;
  m.variant = DriveVariant::mean_rwa;
  m.a = 0.0;
  const BlochTrajectory mean = solve_mean_rwa(c.system, m, BlochState{}, t, ode_options(c));
  double dev = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    dev = std::max(dev, std::abs(shot.states[k].rho_ee - mean.states[k].rho_ee));
    dev = std::max(dev, std::abs(shot.states[k].rho_eg - mean.states[k].rho_eg));
  }
  write_trajectory(ctx, "trajectory.csv", shot);
  return {{"rabi_rad_s", d.rabi}, {"a", d.a}, {"second_harmonic_ratio", d.second_harmonic_ratio},
          {"max_deviation_from_mean", dev}, {"warnings", shot.warnings}};
}

json bloch_spikes(Ctx& ctx) {
  const ScenarioConfig& c = ctx.cfg;
  const BeamSpec& b = need_beam(c);
  const double rb = bunching_parameter(b);
  const auto t = out_grid(c, 2.5e-3, 501);
  cap_electrons(c, b.current / e * t.back() * c.solver.realizations);
  SpikeOptions o;
  o.window_factor = c.solver.window_factor;
  o.integrator = c.solver.integrator == "kick" ? SpikeIntegrator::kick : SpikeIntegrator::resolved;
  o.block_periods = c.solver.block_periods;
  o.realizations = c.solver.realizations;
  o.ensemble.workers = c.workers;
  const BlochTrajectory tr = solve_spike_train(c.system, b, BlochState{}, t, RngStream(c.seed, 0), o);
  write_trajectory(ctx, "trajectory.csv", tr);
  const double omega = std::abs(rabi_from_current(c.system, fourier_coefficient(1, rb, b.current), b.impact_distance));
  return {{"r_b", rb}, {"rabi_from_current", omega}, {"realizations", o.realizations},
          {"first_maximum", first_maximum(tr)}, {"warnings", tr.warnings}};
}

std::vector<double> scan_distances(const ScenarioConfig& c) {
  if (!c.scan.distances.empty()) return c.scan.distances;
  if (c.packet) {
    std::vector<double> v;
    for (double r : {4.0, 6.0, 8.0, 10.0, 12.0, 14.0}) v.push_back(r * c.packet->delta_r_perp);
    return v;
  }
  throw ConfigError("config: set scan.distances or a packet section");
}

QedOptions qed_options(const ScenarioConfig& c) {
  QedOptions q = c.qed;
  q.workers = c.workers;
  q.seed = c.seed;
  if (c.full) {
    const QedOptions f = QedOptions::fine();
    q.points = std::max(q.points, f.points);
    q.shifts = std::max(q.shifts, f.shifts);
    q.n_angle = std::max(q.n_angle, f.n_angle);
    q.n_radial = std::max(q.n_radial, f.n_radial);
    q.rel_tol = std::min(q.rel_tol, f.rel_tol);
  }
  return q;
}

double moment_size(const TwoLevelSystem& s) { return std::hypot(s.mu[0], s.mu[1]); }
double dipole_size(const TwoLevelSystem& s) {
  return std::sqrt(s.dipole[0] * s.dipole[0] + s.dipole[1] * s.dipole[1] + s.dipole[2] * s.dipole[2]);
}

ElectronKinematics scan_kinematics(const ScenarioConfig& c) {
  if (c.packet) return kinematics_from_energy(c.packet->kinetic_energy_eV);
  if (c.beam) return c.beam->kin;
  throw ConfigError("config: need packet.energy_eV or a beam section for the electron energy");
}

json probability(Ctx& ctx) {
  const ScenarioConfig& c = ctx.cfg;
  const auto dist = scan_distances(c);
  const ElectronKinematics kin = scan_kinematics(c);
  const QedOptions q = qed_options(c);
  json out{{"grid", ""}};
  if (moment_size(c.system) > 0.0) {
    std::vector<double> r, sc, pp, pm, err, ratio, flip;
    for (double d : dist) {
      r.push_back(d);
      sc.push_back(magnetic_transition_probability(c.system, kin, 0.0, d));
      if (c.packet) {
        WavePacketSpec wp = *c.packet;
        wp.impact_offset = {0.0, d};
        const double ang = std::atan2(c.system.mu[1], c.system.mu[0]);
        const BackactionResult b = magnetic_backaction(wp, c.system.omega0, moment_size(c.system), q, ang);
        pp.push_back(b.P_plus);
        pm.push_back(b.P_minus);
        err.push_back(std::max(b.P_plus_err, b.P_minus_err));
        ratio.push_back(b.ratio());
        flip.push_back(b.flip_fraction);
        ctx.non_converged |= !b.converged;
        out["grid"] = b.grid;
      }
    }
    if (c.packet)
      ctx.csv("probability_magnetic.csv",
              {"distance_m", "P_semiclassical", "P_qed_plus", "P_qed_minus", "P_qed_err", "ratio", "flip_fraction"},
              {r, sc, pp, pm, err, ratio, flip});
    else
      ctx.csv("probability_magnetic.csv", {"distance_m", "P_semiclassical"}, {r, sc});
    out["magnetic_ratio"] = ratio;
  }
  if (dipole_size(c.system) > 0.0) {
    std::vector<double> r, sc, cp, cm, fp, err, ratio;
    for (double d : dist) {
      r.push_back(d);
      sc.push_back(electric_transition_probability(c.system, kin, 0.0, d));
      if (c.packet) {
        WavePacketSpec wp = *c.packet;
        wp.impact_offset = {0.0, d};
        const ElectricBackaction b = scattered_probability_electric(wp, c.system.omega0, c.system.dipole, q);
        cp.push_back(b.P_conserving_plus);
        cm.push_back(b.P_conserving_minus);
        fp.push_back(b.P_flip_plus);
        err.push_back(std::max(b.P_plus_err, b.P_minus_err));
        ratio.push_back(b.P_plus() / b.P_semiclassical);
        ctx.non_converged |= !b.converged;
        out["grid"] = b.grid;
      }
    }
    if (c.packet)
      ctx.csv("probability_electric.csv",
              {"distance_m", "P_semiclassical", "P_qed_conserving_plus", "P_qed_conserving_minus",
               "P_qed_flip_plus", "P_qed_err", "ratio"},
              {r, sc, cp, cm, fp, err, ratio});
    else
      ctx.csv("probability_electric.csv", {"distance_m", "P_semiclassical"}, {r, sc});
    out["electric_semiclassical"] = sc;
    out["electric_ratio"] = ratio;
  }
  if (moment_size(c.system) == 0.0 && dipole_size(c.system) == 0.0)
    throw ConfigError("config: system has neither a magnetic moment nor an electric dipole");
  return out;
}

json overlap(Ctx& ctx) {
  const ScenarioConfig& c = ctx.cfg;
  const WavePacketSpec& base = need_packet(c);
  if (moment_size(c.system) == 0.0) throw ConfigError("config: overlap needs a magnetic moment");
  const QedOptions q = qed_options(c);
  std::vector<double> r, rho, re, im, mag, err, sqrtp;
  std::string grid;
  for (double d : scan_distances(c)) {
    WavePacketSpec wp = base;
    wp.impact_offset = {0.0, d};
    const double ang = std::atan2(c.system.mu[1], c.system.mu[0]);
    const BackactionResult b = magnetic_backaction(wp, c.system.omega0, moment_size(c.system), q, ang);
    r.push_back(d);
    rho.push_back(d / wp.delta_r_perp);
    re.push_back(b.overlap.real());
    im.push_back(b.overlap.imag());
    mag.push_back(std::abs(b.overlap));
    err.push_back(b.overlap_err);
    sqrtp.push_back(std::sqrt(0.5 * (b.P_plus + b.P_minus)));
    ctx.non_converged |= !b.converged;
    grid = b.grid;
  }
  ctx.csv("overlap.csv", {"distance_m", "rho", "re", "im", "abs", "err", "sqrt_P"}, {r, rho, re, im, mag, err, sqrtp});
  return {{"abs", mag}, {"grid", grid}};
}

Trajectory make_path(const std::string& kind, double d) {
  if (kind == "linear") return [d](double ph) { return Vec2{d * (3.0 + 2.0 * std::cos(ph)), 0.0}; };
  if (kind == "circle")
    return [d](double ph) {
      const double s = std::sin(ph);
      return Vec2{d * (1.0 + 0.5 * s * s), 2.0 * d * s};
    };
  return [d](double) { return Vec2{d, 0.0}; };
}

double fwhm(const std::vector<double>& x, const std::vector<double>& y) {
  const auto it = std::max_element(y.begin(), y.end());
  const std::size_t k = std::size_t(it - y.begin());
  const double half = 0.5 * *it;
  std::size_t lo = k, hi = k;
  while (lo > 0 && y[lo] > half) --lo;
  while (hi + 1 < y.size() && y[hi] > half) ++hi;
  if (y[lo] > half || y[hi] > half) return NAN;
  auto cross = [&](std::size_t a, std::size_t b) { return x[a] + (half - y[a]) * (x[b] - x[a]) / (y[b] - y[a]); };
  return cross(hi - 1, hi) - cross(lo, lo + 1);
}

json rabi_profile_scenario(Ctx& ctx) {
  const ScenarioConfig& c = ctx.cfg;
  const ProfileConfig& p = c.profile;
  const double moment = std::abs(transition_moment(c.system, 1.0));
  if (!(moment > 0.0)) throw ConfigError("config: rabi-profile needs a magnetic transition moment");
  std::vector<Vec2> targets;
  std::vector<double> ys = linspace(-p.span, p.span, p.points);
  for (double y : ys) targets.push_back({0.0, y});

  const ModulatedCurrent unit{p.r_b, 1.0, 1.0, 1.0, 0.0};
  const CurrentShape shape = [unit](double ph) { return analytic_current(unit, 0.0, ph); };

  // Electric excitation per Rabi flop at the array point nearest the beam.
  TwoLevelSystem zpl = TwoLevelSystem::nv_zpl();
  zpl.omega0 = p.zpl_eV * e / hbar;
  if (dipole_size(c.system) > 0.0) zpl.dipole = c.system.dipole;
  const ElectronKinematics kin = kinematics_from_energy(p.energy_eV);
  const double factor = dielectric_field_factor(p.refractive_index);
  const QuadRule gh = gauss_hermite(16);
  const double sig = p.waist / 2.0;

  std::vector<std::string> header{"y_m"};
  std::vector<std::vector<double>> cols{ys};
  json curves = json::object();
  for (const auto& kind : p.trajectories) {
    const Trajectory path = make_path(kind, p.d);
    RabiProfileOptions o;
    o.moment = moment;
    if (kind == "static") o.current_shape = shape;
    const int harmonic = kind == "circle" ? 2 : 1;
    json entry;
    for (int h = 1; h <= 2; ++h) {
      if (kind == "static" && h == 2) continue;
      const auto v = rabi_profile(path, targets, h, o);
      header.push_back(fmt::format("{}_h{}", kind, h));
      cols.push_back(v);
      entry[fmt::format("h{}_peak_rad_s_per_A", h)] = *std::max_element(v.begin(), v.end());
      entry[fmt::format("h{}_fwhm_m", h)] = fwhm(ys, v);
    }
    // Average P over the period and the Gaussian beam profile at y = 0.
    const Vec2 target{0.0, 0.0};
    const double omega_per_A = rabi_profile(path, std::span<const Vec2>(&target, 1), harmonic, o)[0];
    const int nph = 256;
    double pbar = 0.0, wsum = 0.0;
    for (int k = 0; k < nph; ++k) {
      const double ph = two_pi * (k + 0.5) / nph;
      const Vec2 centre = path(ph);
      const double wk = kind == "static" ? shape(ph) : 1.0;
      double acc = 0.0;
      for (std::size_t i = 0; i < gh.x.size(); ++i)
        for (std::size_t j = 0; j < gh.x.size(); ++j) {
          const double x = centre[0] + std::sqrt(2.0) * sig * gh.x[i];
          const double y = centre[1] + std::sqrt(2.0) * sig * gh.x[j];
          acc += gh.w[i] * gh.w[j] / pi * electric_transition_probability(zpl, kin, x, y, factor);
        }
      pbar += wk * acc;
      wsum += wk;
    }
    pbar /= wsum;
    const double electrons_per_flop = pi / (omega_per_A * e);
    entry["harmonic"] = harmonic;
    entry["rabi_per_A_at_centre"] = omega_per_A;
    entry["electrons_per_flop"] = electrons_per_flop;
    entry["mean_P_electric"] = pbar;
    entry["no_excitation_per_flop"] = std::exp(-electrons_per_flop * pbar);
    curves[kind] = entry;
  }
  ctx.csv("profile.csv", header, cols);
  return {{"d", p.d}, {"dielectric_factor", factor}, {"curves", curves}};
}

json loss_estimate(Ctx& ctx) {
  const ScenarioConfig& c = ctx.cfg;
  const BeamSpec& b = need_beam(c);
  const double j_peak = 2.0 * b.current / (pi * b.waist * b.waist);
  const double j = c.loss.density_fraction * j_peak;
  const auto t = out_grid(c, 20e-3, 201);
  std::vector<double> f;
  for (double tt : t) f.push_back(incoherent_loss_fraction(c.loss.sigma, j, tt));
  ctx.csv("loss.csv", {"t_s", "fraction"}, {t, f});
  const double mass = c.system.kind == SystemKind::k41_hyperfine ? mass_K41 : 0.0;
  json out{{"current_density", j},
           {"final_fraction", f.back()},
           {"doppler_hz", doppler_detuning(c.loss.v_atom, c.system.omega0 / two_pi, b.kin.velocity)}};
  if (mass > 0.0) out["lamb_dicke"] = lamb_dicke_bound(c.loss.delta_p_perp, mass, two_pi * c.loss.trap_hz);
  return out;
}

json validity_json(const ValidityReport& r) {
  json a = json::array();
  for (const auto& c : r.conditions)
    a.push_back({{"name", c.name}, {"value", c.value}, {"threshold", c.threshold},
                 {"status", to_string(c.status)}, {"note", c.note}});
  return a;
}

void write_json(const fs::path& p, const json& j, std::vector<fs::path>& files) {
  std::ofstream out(p);
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("cannot write " + p.string());
  files.push_back(p);
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

}  // namespace

RunResult run(const ScenarioConfig& cfg) {
  RunResult res;
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir(cfg.output);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    res.exit_code = 2;
    res.message = fmt::format("cannot create output directory '{}': {}", dir.string(), ec.message());
    return res;
  }
  Ctx ctx{cfg, dir, res.files};
  json summary;
  json validity;
  try {
    const ValidityReport rep = validity_report(cfg);
    validity = validity_json(rep);
    if (const Condition* c = rep.find("no_overtaking"); c && c->status == Status::fail)
      throw ValidityError("no_overtaking", fmt::format("r_b = {:.6g} >= 1: electrons overtake", c->value));
    if (cfg.scenario == "kepler-current") summary = kepler_current(ctx);
    else if (cfg.scenario == "spectrum") summary = spectrum(ctx);
    else if (cfg.scenario == "bloch-mean") summary = bloch_mean(ctx);
    else if (cfg.scenario == "bloch-shot") summary = bloch_shot(ctx);
    else if (cfg.scenario == "bloch-spikes") summary = bloch_spikes(ctx);
    else if (cfg.scenario == "probability") summary = probability(ctx);
    else if (cfg.scenario == "overlap") summary = overlap(ctx);
    else if (cfg.scenario == "rabi-profile") summary = rabi_profile_scenario(ctx);
    else if (cfg.scenario == "loss-estimate") summary = loss_estimate(ctx);
    else throw ConfigError(fmt::format("unknown scenario '{}'", cfg.scenario));
    if (ctx.non_converged) {
      res.exit_code = 4;
      res.message = "integration error above qed.rel_tol; partial results written";
    }
  } catch (const ConfigError& e) {
    res.exit_code = 2;
    res.message = e.what();
  } catch (const DomainError& e) {
    res.exit_code = 2;
    res.message = e.what();
  } catch (const ValidityError& e) {
    res.exit_code = 3;
    res.message = fmt::format("[{}] {}", e.condition(), e.what());
  } catch (const ConvergenceError& e) {
    res.exit_code = 4;
    res.message = fmt::format("{} (last good {:.6g})", e.what(), e.last_good());
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  summary["exit_code"] = res.exit_code;
  if (!res.message.empty()) summary["message"] = res.message;
  res.summary_json = summary.dump(2);

  json meta{{"scenario", cfg.scenario},
            {"version", kVersion},
            {"config_digest", cfg.digest},
            {"config", cfg.canonical},
            {"seed", cfg.seed},
            {"workers", cfg.workers},
            {"full", cfg.full},
            {"simd", simd::kernels().name},
            {"compiler", __VERSION__},
            {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
            {"boost", BOOST_LIB_VERSION},
            {"fmt", FMT_VERSION},
            {"started_utc", utc_now()},
            {"wall_time_s", wall},
            {"exit_code", res.exit_code}};
  try {
    write_json(dir / "summary.json", summary, res.files);
    write_json(dir / "validity.json", validity, res.files);
    json names = json::array();
    for (const auto& f : res.files) names.push_back(f.filename().string());
    meta["files"] = names;
    write_json(dir / "meta.json", meta, res.files);
  } catch (const std::exception& e) {
    if (res.exit_code == 0) res.exit_code = 2;
    res.message = e.what();
  }
  return res;
}

}  // namespace ebeam::runner
