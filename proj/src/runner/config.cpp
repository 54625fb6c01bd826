#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "ebeam/constants.hpp"
#include "ebeam/error.hpp"
#include "ebeam/runner.hpp"

namespace ebeam::runner {

using namespace constants;

const std::vector<KeyDoc>& schema() {
  static const std::vector<KeyDoc> keys = {
      {"scenario", "string", "required", "subcommand to run (see `ebeam --help`)"},
      {"seed", "u64", "1", "root seed; every stochastic stream is split from it"},
      {"output", "string", "out", "output directory"},
      {"workers", "int", "1", "worker threads; results do not depend on it"},

      {"system.preset", "string", "required", "k41 | nv_spin | nv_zpl | generic"},
      {"system.frequency_hz", "double", "-", "transition frequency, Hz (overrides the preset)"},
      {"system.moment", "vec3", "-", "transition magnetic moment, J/T"},
      {"system.dipole", "vec3", "-", "transition electric dipole, C m"},
      {"system.T1", "double", "-", "population lifetime, s; 0 means none"},
      {"system.T2", "double", "-", "coherence time, s; 0 means none"},

      {"beam.current", "double", "required*", "mean current I0, A"},
      {"beam.mod_frequency_hz", "double", "-", "modulation frequency, Hz; defaults to the transition"},
      {"beam.mod_depth", "double", "required*", "energy modulation depth dE/E"},
      {"beam.drift_length", "double", "required*", "modulator to interaction plane, m"},
      {"beam.energy_eV", "double", "required*", "kinetic energy, eV"},
      {"beam.waist", "double", "required*", "beam waist w (intensity ~ exp(-2 r^2/w^2)), m"},
      {"beam.impact_distance", "double", "required*", "beam axis to system, m"},
      {"beam.linewidth_hz", "double", "0", "FWHM linewidth of the modulation, Hz"},
      {"beam.energy_spread_eV", "double", "0", "Gaussian energy spread (sigma), eV"},
      {"beam.divergence", "double", "0", "beam half-angle divergence, rad"},

      {"packet.delta_r_perp", "double", "required*", "transverse packet width, m"},
      {"packet.delta_z0", "double", "required*", "longitudinal packet width, m"},
      {"packet.energy_eV", "double", "required*", "packet kinetic energy, eV"},
      {"packet.offset", "vec2", "[0, 0]", "packet centre relative to the system, m"},
      {"packet.total_path", "double", "0", "source to interaction region, m"},

      {"solver.duration", "double", "0", "simulated time, s; 0 picks the scenario default"},
      {"solver.points", "int", "0", "output samples; 0 picks the scenario default"},
      {"solver.rel_tol", "double", "1e-10", "ODE relative tolerance"},
      {"solver.abs_tol", "double", "1e-12", "ODE absolute tolerance"},
      {"solver.realizations", "int", "12", "spike-train realizations"},
      {"solver.periods", "double", "1000", "spectrum length, modulation periods"},
      {"solver.samples_per_period", "int", "64", "trace samples per modulation period (>= 32)"},
      {"solver.window_factor", "double", "5", "spike window, units of d/(gamma v)"},
      {"solver.integrator", "string", "kick", "spike integrator: kick | resolved"},
      {"solver.block_periods", "double", "1", "kick aggregation block, modulation periods"},
      {"solver.field_model", "string", "thin", "mean-field beam model: thin | gaussian"},
      {"solver.detuning_hz", "double", "0", "drive minus transition frequency, Hz"},
      {"solver.max_electrons", "double", "2e10", "desk cap on simulated electrons (lifted by --full)"},

      {"qed.mode", "string", "qmc", "qmc | tensor"},
      {"qed.points", "int", "1024", "QMC points per shift"},
      {"qed.shifts", "int", "8", "randomized shifts (error from their spread)"},
      {"qed.tensor_nodes", "int", "16", "Gauss-Hermite nodes per axis (tensor mode)"},
      {"qed.n_angle", "int", "160", "inner angular nodes"},
      {"qed.n_radial", "int", "100", "inner radial nodes"},
      {"qed.truncation", "double", "5", "momentum cut-off, packet widths"},
      {"qed.rel_tol", "double", "0.05", "relative error target on P"},
      {"qed.reverse", "bool", "false", "g -> e instead of e -> g"},

      {"scan.distances", "double[]", "-", "impact parameters for probability/overlap scans, m"},
      {"scan.r_b", "double[]", "[0.1, ..., 0.9]", "bunching parameters for kepler-current"},
      {"scan.harmonics", "int", "5", "highest harmonic reported"},

      {"profile.trajectories", "string[]", "[static, linear, circle]", "beam paths for rabi-profile"},
      {"profile.d", "double", "1.5e-8", "minimal beam to array distance, m"},
      {"profile.span", "double", "1.5e-7", "targets along the array on [-span, span], m"},
      {"profile.points", "int", "301", "targets along the array"},
      {"profile.refractive_index", "double", "2.4", "host refractive index for the dielectric factor"},
      {"profile.zpl_eV", "double", "1.945", "electric-dipole transition energy, eV"},
      {"profile.r_b", "double", "0.5", "bunching parameter of the static modulated beam"},
      {"profile.waist", "double", "5e-9", "beam waist for the electric-excitation average, m"},
      {"profile.energy_eV", "double", "200", "beam energy for the electric-excitation estimate, eV"},

      {"loss.sigma", "double", "1.5e-21", "total scattering cross-section, m^2"},
      {"loss.density_fraction", "double", "1e-3", "current density at the atoms / Gaussian peak"},
      {"loss.v_atom", "double", "0.12", "atomic velocity spread for the Doppler estimate, m/s"},
      {"loss.trap_hz", "double", "3e5", "trap frequency for the Lamb-Dicke bound, Hz"},
      {"loss.delta_p_perp", "double", "2e-30", "transverse momentum kick, kg m/s"},
  };
  return keys;
}

std::string schema_markdown() {
  std::string s =
      "# Configuration schema\n\n"
      "YAML with the nested sections below. Unknown keys are rejected. Keys marked\n"
      "`required*` are required once their section is present; scenarios that need\n"
      "a section report it by name. `--override key=value` takes the dotted key.\n\n"
      "| key | type | default | meaning |\n|---|---|---|---|\n";
  auto cell = [](std::string t) {
    for (std::size_t p = t.find('|'); p != std::string::npos; p = t.find('|', p + 2)) t.insert(p, "\\");
    return t;
  };
  for (const auto& k : schema())
    s += fmt::format("| `{}` | {} | {} | {} |\n", k.key, k.type, cell(k.fallback), cell(k.doc));
  return s;
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

using Flat = std::map<std::string, YAML::Node>;

const KeyDoc* lookup(const std::string& key) {
  for (const auto& k : schema())
    if (k.key == key) return &k;
  return nullptr;
}

bool is_section(const std::string& key) {
  const std::string pre = key + ".";
  for (const auto& k : schema())
    if (k.key.compare(0, pre.size(), pre) == 0) return true;
  return false;
}

void flatten(const YAML::Node& n, const std::string& prefix, Flat& out) {
  for (auto it = n.begin(); it != n.end(); ++it) {
    const std::string key = (prefix.empty() ? "" : prefix + ".") + it->first.as<std::string>();
    if (it->second.IsMap()) {
      if (!is_section(key)) throw ConfigError(fmt::format("config: unknown section '{}'", key));
      flatten(it->second, key, out);
    } else {
      if (!lookup(key)) throw ConfigError(fmt::format("config: unknown key '{}'", key));
      out[key] = it->second;
    }
  }
}

template <class T>
T scalar(const Flat& f, const std::string& key) {
  const YAML::Node& n = f.at(key);
  try {
    if (!n.IsScalar()) throw YAML::Exception(YAML::Mark::null_mark(), "not a scalar");
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(fmt::format("config: '{}' must be a {}", key, lookup(key)->type));
  }
}

std::vector<double> seq(const Flat& f, const std::string& key, std::size_t exact = 0) {
  const YAML::Node& n = f.at(key);
  std::vector<double> v;
  try {
    if (!n.IsSequence()) throw YAML::Exception(YAML::Mark::null_mark(), "not a sequence");
    for (const auto& x : n) v.push_back(x.as<double>());
  } catch (const YAML::Exception&) {
    throw ConfigError(fmt::format("config: '{}' must be a {}", key, lookup(key)->type));
  }
  if (exact && v.size() != exact)
    throw ConfigError(fmt::format("config: '{}' needs {} entries, got {}", key, exact, v.size()));
  return v;
}

std::vector<std::string> str_seq(const Flat& f, const std::string& key) {
  const YAML::Node& n = f.at(key);
  std::vector<std::string> v;
  try {
    if (!n.IsSequence()) throw YAML::Exception(YAML::Mark::null_mark(), "not a sequence");
    for (const auto& x : n) v.push_back(x.as<std::string>());
  } catch (const YAML::Exception&) {
    throw ConfigError(fmt::format("config: '{}' must be a list of strings", key));
  }
  return v;
}

void check_type(const Flat& f, const std::string& key) {
  const std::string& t = lookup(key)->type;
  if (t == "double") scalar<double>(f, key);
  else if (t == "int") scalar<int>(f, key);
  else if (t == "u64") scalar<std::uint64_t>(f, key);
  else if (t == "bool") scalar<bool>(f, key);
  else if (t == "string") scalar<std::string>(f, key);
  else if (t == "vec2") seq(f, key, 2);
  else if (t == "vec3") seq(f, key, 3);
  else if (t == "double[]") seq(f, key);
  else if (t == "string[]") str_seq(f, key);
}

bool has_section(const Flat& f, const std::string& sec) {
  const std::string pre = sec + ".";
  return std::any_of(f.begin(), f.end(), [&](const auto& kv) { return kv.first.compare(0, pre.size(), pre) == 0; });
}

void require(const Flat& f, const std::vector<std::string>& keys, const std::string& what) {
  std::vector<std::string> missing;
  for (const auto& k : keys)
    if (!f.count(k)) missing.push_back(k);
  if (missing.empty()) return;
  std::string list;
  for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
  throw ConfigError(fmt::format("config: {}missing required keys: {}", what.empty() ? "" : what + " ", list));
}

template <class T>
void maybe(const Flat& f, const std::string& key, T& dst) {
  if (f.count(key)) dst = scalar<T>(f, key);
}

TwoLevelSystem make_system(const Flat& f, std::string& preset) {
  preset = scalar<std::string>(f, "system.preset");
  TwoLevelSystem s;
  if (preset == "k41") s = TwoLevelSystem::k41_clock();
  else if (preset == "nv_spin") s = TwoLevelSystem::nv_spin();
  else if (preset == "nv_zpl") s = TwoLevelSystem::nv_zpl();
  else if (preset == "generic") s.kind = SystemKind::generic;
  else throw ConfigError("config: system.preset must be one of k41, nv_spin, nv_zpl, generic");
  if (f.count("system.frequency_hz")) s.omega0 = two_pi * scalar<double>(f, "system.frequency_hz");
  if (f.count("system.moment")) {
    const auto v = seq(f, "system.moment", 3);
    s.mu = {v[0], v[1], v[2]};
  }
  if (f.count("system.dipole")) {
    const auto v = seq(f, "system.dipole", 3);
    s.dipole = {v[0], v[1], v[2]};
  }
  auto rate = [&](const char* key, double& dst) {
    if (!f.count(key)) return;
    const double T = scalar<double>(f, key);
    if (T < 0.0) throw ConfigError(fmt::format("config: '{}' must be >= 0", key));
    dst = T > 0.0 ? 1.0 / T : 0.0;
  };
  rate("system.T1", s.gamma1);
  rate("system.T2", s.gamma2);
  try {
    s.validate();
  } catch (const DomainError& e) {
    throw ConfigError(fmt::format("config: system: {}", e.what()));
  }
  return s;
}

BeamSpec make_beam(const Flat& f, const TwoLevelSystem& sys) {
  require(f, {"beam.current", "beam.mod_depth", "beam.drift_length", "beam.energy_eV", "beam.waist",
              "beam.impact_distance"},
          "beam:");
  BeamSpec b;
  b.current = scalar<double>(f, "beam.current");
  b.omega0 = f.count("beam.mod_frequency_hz") ? two_pi * scalar<double>(f, "beam.mod_frequency_hz") : sys.omega0;
  b.mod_depth = scalar<double>(f, "beam.mod_depth");
  b.drift_length = scalar<double>(f, "beam.drift_length");
  const double E = scalar<double>(f, "beam.energy_eV");
  if (!(E > 0.0)) throw ConfigError("config: 'beam.energy_eV' must be > 0");
  b.kin = kinematics_from_energy(E);
  b.waist = scalar<double>(f, "beam.waist");
  b.impact_distance = scalar<double>(f, "beam.impact_distance");
  if (f.count("beam.linewidth_hz")) b.linewidth = two_pi * scalar<double>(f, "beam.linewidth_hz");
  maybe(f, "beam.energy_spread_eV", b.energy_spread_eV);
  try {
    b.validate();
  } catch (const DomainError& e) {
    throw ConfigError(fmt::format("config: beam: {}", e.what()));
  }
  return b;
}

WavePacketSpec make_packet(const Flat& f) {
  require(f, {"packet.delta_r_perp", "packet.delta_z0", "packet.energy_eV"}, "packet:");
  WavePacketSpec p;
  p.delta_r_perp = scalar<double>(f, "packet.delta_r_perp");
  p.delta_z0 = scalar<double>(f, "packet.delta_z0");
  p.kinetic_energy_eV = scalar<double>(f, "packet.energy_eV");
  if (f.count("packet.offset")) {
    const auto v = seq(f, "packet.offset", 2);
    p.impact_offset = {v[0], v[1]};
  }
  maybe(f, "packet.total_path", p.total_path);
  try {
    p.validate();
  } catch (const DomainError& e) {
    throw ConfigError(fmt::format("config: packet: {}", e.what()));
  }
  return p;
}

std::string canonical_text(const Flat& f) {
  std::string s;
  for (const auto& [k, v] : f) {
    YAML::Emitter em;
    em << YAML::Flow << v;
    s += k + ": " + em.c_str() + "\n";
  }
  return s;
}

}  // namespace

ScenarioConfig load_config(const std::string& yaml_text, const std::vector<std::string>& overrides) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("config: YAML parse error: {}", e.what()));
  }
  Flat f;
  if (root.IsMap()) flatten(root, "", f);
  else if (root.IsDefined() && !root.IsNull()) throw ConfigError("config: top level must be a mapping");

  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError(fmt::format("override '{}': expected key=value", o));
    const std::string key = o.substr(0, eq);
    if (!lookup(key)) throw ConfigError(fmt::format("override: unknown key '{}'", key));
    try {
      f[key] = YAML::Load(o.substr(eq + 1));
    } catch (const YAML::Exception& e) {
      throw ConfigError(fmt::format("override '{}': {}", key, e.what()));
    }
  }

  std::vector<std::string> required;
  for (const auto& k : schema())
    if (k.fallback == "required") required.push_back(k.key);
  require(f, required, "");
  for (const auto& kv : f) check_type(f, kv.first);

  ScenarioConfig c;
  c.scenario = scalar<std::string>(f, "scenario");
  const auto& names = scenario_names();
  if (std::find(names.begin(), names.end(), c.scenario) == names.end())
    throw ConfigError(fmt::format("config: unknown scenario '{}'", c.scenario));
  maybe(f, "seed", c.seed);
  maybe(f, "output", c.output);
  if (f.count("workers")) {
    const int w = scalar<int>(f, "workers");
    if (w < 1) throw ConfigError("config: 'workers' must be >= 1");
    c.workers = unsigned(w);
  }

  c.system = make_system(f, c.system_preset);
  if (has_section(f, "beam")) c.beam = make_beam(f, c.system);
  maybe(f, "beam.divergence", c.beam_divergence);
  if (has_section(f, "packet")) c.packet = make_packet(f);

  SolverConfig& s = c.solver;
  maybe(f, "solver.duration", s.duration);
  maybe(f, "solver.points", s.points);
  maybe(f, "solver.rel_tol", s.rel_tol);
  maybe(f, "solver.abs_tol", s.abs_tol);
  maybe(f, "solver.realizations", s.realizations);
  maybe(f, "solver.periods", s.periods);
  maybe(f, "solver.samples_per_period", s.samples_per_period);
  maybe(f, "solver.window_factor", s.window_factor);
  maybe(f, "solver.integrator", s.integrator);
  maybe(f, "solver.block_periods", s.block_periods);
  maybe(f, "solver.field_model", s.field_model);
  maybe(f, "solver.detuning_hz", s.detuning_hz);
  maybe(f, "solver.max_electrons", s.max_electrons);
  if (s.integrator != "kick" && s.integrator != "resolved")
    throw ConfigError("config: solver.integrator must be kick or resolved");
  if (s.field_model != "thin" && s.field_model != "gaussian")
    throw ConfigError("config: solver.field_model must be thin or gaussian");
  if (s.realizations < 1) throw ConfigError("config: solver.realizations must be >= 1");
  if (s.samples_per_period < 32) throw ConfigError("config: solver.samples_per_period must be >= 32");
  if (s.duration < 0.0 || s.points < 0) throw ConfigError("config: solver.duration and solver.points must be >= 0");

  QedOptions& q = c.qed;
  if (f.count("qed.mode")) {
    const auto m = scalar<std::string>(f, "qed.mode");
    if (m == "qmc") q.mode = QedMode::qmc;
    else if (m == "tensor") q.mode = QedMode::tensor;
    else throw ConfigError("config: qed.mode must be qmc or tensor");
  }
  maybe(f, "qed.points", q.points);
  maybe(f, "qed.shifts", q.shifts);
  maybe(f, "qed.tensor_nodes", q.tensor_nodes);
  maybe(f, "qed.n_angle", q.n_angle);
  maybe(f, "qed.n_radial", q.n_radial);
  maybe(f, "qed.truncation", q.truncation);
  maybe(f, "qed.rel_tol", q.rel_tol);
  maybe(f, "qed.reverse", q.reverse);

  if (f.count("scan.distances")) c.scan.distances = seq(f, "scan.distances");
  if (f.count("scan.r_b")) c.scan.r_b = seq(f, "scan.r_b");
  maybe(f, "scan.harmonics", c.scan.harmonics);

  ProfileConfig& p = c.profile;
  if (f.count("profile.trajectories")) p.trajectories = str_seq(f, "profile.trajectories");
  for (const auto& t : p.trajectories)
    if (t != "static" && t != "linear" && t != "circle")
      throw ConfigError(fmt::format("config: profile.trajectories: unknown path '{}'", t));
  maybe(f, "profile.d", p.d);
  maybe(f, "profile.span", p.span);
  maybe(f, "profile.points", p.points);
  maybe(f, "profile.refractive_index", p.refractive_index);
  maybe(f, "profile.zpl_eV", p.zpl_eV);
  maybe(f, "profile.r_b", p.r_b);
  maybe(f, "profile.waist", p.waist);
  maybe(f, "profile.energy_eV", p.energy_eV);

  maybe(f, "loss.sigma", c.loss.sigma);
  maybe(f, "loss.density_fraction", c.loss.density_fraction);
  maybe(f, "loss.v_atom", c.loss.v_atom);
  maybe(f, "loss.trap_hz", c.loss.trap_hz);
  maybe(f, "loss.delta_p_perp", c.loss.delta_p_perp);

  c.canonical = canonical_text(f);
  c.digest = fmt::format("{:016x}", fnv1a64(c.canonical));
  return c;
}

ScenarioConfig load_config_file(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("config: cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_config(ss.str(), overrides);
}

}  // namespace ebeam::runner
