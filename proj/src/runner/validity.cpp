#include <cmath>

#include <fmt/format.h>

#include "ebeam/bloch.hpp"
#include "ebeam/constants.hpp"
#include "ebeam/ensemble.hpp"
#include "ebeam/runner.hpp"
#include "ebeam/special.hpp"

namespace ebeam::runner {

using namespace constants;

const char* to_string(Status s) {
  switch (s) {
    case Status::pass: return "pass";
    case Status::warn: return "warn";
    case Status::fail: return "fail";
    case Status::advisory: return "advisory";
  }
  return "?";
}

Status grade(double ratio) {
  if (!(ratio < 0.1)) return Status::fail;
  return ratio < 0.01 ? Status::pass : Status::warn;
}

const Condition* ValidityReport::find(const std::string& name) const {
  for (const auto& c : conditions)
    if (c.name == name) return &c;
  return nullptr;
}

bool ValidityReport::any_fail() const {
  for (const auto& c : conditions)
    if (c.status == Status::fail) return true;
  return false;
}

namespace {

// r_b is linear in the modulation depth; evaluating at a tiny depth never
// trips the overtaking check.
double raw_bunching(const BeamSpec& b) {
  BeamSpec t = b;
  t.mod_depth = 1e-9;
  return bunching_parameter(t) * (b.mod_depth / 1e-9);
}

double default_duration(const ScenarioConfig& c) {
  if (c.solver.duration > 0.0) return c.solver.duration;
  if (c.scenario == "bloch-spikes") return 2.5e-3;
  return 20e-3;
}

}  // namespace

ValidityReport validity_report(const ScenarioConfig& cfg) {
  ValidityReport rep;
  auto add = [&](std::string name, double value, double threshold, Status st, std::string note) {
    rep.conditions.push_back({std::move(name), value, threshold, st, std::move(note)});
  };

  if (cfg.beam) {
    const BeamSpec& b = *cfg.beam;
    const double rb = raw_bunching(b);
    add("no_overtaking", rb, 1.0, rb < 1.0 ? Status::pass : Status::fail,
        "bunching parameter r_b must stay below 1");
    if (rb < 1.0) {
      const double d = b.impact_distance;
      const double gv = b.kin.gamma * b.kin.velocity;
      const double I1 = fourier_coefficient(1, rb, b.current);

      const double cont = continuity_condition(b);
      Condition cc{"continuity", cont, 0.01, grade(cont), "gamma v e / (I_min d) << 1"};
      if (cc.status == Status::fail) cc.note += "; spike regime, use bloch-spikes";
      rep.conditions.push_back(cc);

      const double T = default_duration(cfg);
      if (I1 > 0.0 && (cfg.system.mu[0] != 0.0 || cfg.system.mu[1] != 0.0)) {
        const double omega = std::abs(rabi_from_current(cfg.system, I1, d));
        const double ratio = omega > 0.0 ? pi / (omega * T) : INFINITY;
        add("field_strength", ratio, 1.0, ratio <= 1.0 ? Status::pass : Status::advisory,
            ratio <= 1.0 ? "at least one Rabi flop within the run"
                         : "field too weak: less than one Rabi flop within the run");
      }

      if (I1 > 0.0) {
        const double r1 = 2.0 * r_e * b.current / (I1 * d);
        add("negative_damping_radius", r1, 0.01, grade(r1), "d >> 2 r_e I0 / I_w0");
      }
      const double i_max = b.current / (1.0 - rb);
      const double lam = lambda_C * alpha_fs / two_pi;
      const double r2 = lam * lam * i_max / (e * gv * d);
      add("negative_damping_compton", r2, 0.01, grade(r2), "d >> (lambda_C alpha / 2 pi)^2 I_max / (e gamma v)");

      const double div = cfg.beam_divergence / (b.kin.gamma / 5.0);
      add("divergence", div, 0.01, grade(div), "theta << gamma / 5");

      if (b.energy_spread_eV > 0.0)
        add("velocity_spread", velocity_spread_effect(b), 0.1, Status::advisory,
            "relative bunching-parameter spread dE / E");

      if (cfg.scenario == "bloch-spikes") {
        const double w = cfg.solver.window_factor * d / gv / (two_pi / b.omega0);
        add("window_merge", w, 1.0, w < 1.0 ? Status::pass : Status::fail,
            "single interaction window shorter than one modulation period");
      }
      if (cfg.scenario == "bloch-shot") {
        const double a = shot_noise_damping(cfg.system, b.kin, d, b.current);
        const double omega = std::abs(rabi_from_current(cfg.system, I1, d));
        const double r = omega > 0.0 ? a / omega : INFINITY;
        add("shot_noise_damping", r, 0.01, r <= 0.01 ? Status::pass : Status::warn, "a << Omega");
      }
    }
  }

  if (cfg.packet) {
    const WavePacketSpec& p = *cfg.packet;
    const ElectronKinematics kin = kinematics_from_energy(p.kinetic_energy_eV);
    const double m = momentum_shift_check(cfg.system, kin, p.delta_z0);
    add("momentum_shift", m, 0.01, grade(m), "delta p << Delta p_z");
    const double lambda0 = two_pi * kin.velocity / cfg.system.omega0;
    const double l = p.delta_z0 / lambda0;
    add("packet_length", l, 0.01, grade(l), "Delta z << lambda_0");
  }
  return rep;
}

}  // namespace ebeam::runner
