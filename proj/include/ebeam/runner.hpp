#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ebeam/beam.hpp"
#include "ebeam/interaction.hpp"
#include "ebeam/qed.hpp"

namespace ebeam::runner {

inline constexpr const char* kVersion = "0.4.0";

struct SolverConfig {
  double duration = 0.0;          // s; 0 picks the scenario default
  int points = 0;                 // output samples; 0 picks the default
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  int realizations = 12;
  double periods = 1000.0;        // spectrum length in modulation periods
  int samples_per_period = 64;
  double window_factor = 5.0;
  std::string integrator = "kick";
  double block_periods = 1.0;
  std::string field_model = "thin";  // thin | gaussian
  double detuning_hz = 0.0;
  double max_electrons = 2e10;    // desk cap, lifted by --full
};

struct ScanConfig {
  std::vector<double> distances;  // m
  std::vector<double> r_b{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  int harmonics = 5;
};

struct ProfileConfig {
  std::vector<std::string> trajectories{"static", "linear", "circle"};
  double d = 15e-9;
  double span = 150e-9;           // targets on [-span, span] along the array
  int points = 301;
  double refractive_index = 2.4;
  double zpl_eV = 1.945;
  double r_b = 0.5;               // current modulation of the static beam
  double waist = 5e-9;            // m
  double energy_eV = 200.0;
};

struct LossConfig {
  double sigma = 1.5e-21;         // m^2
  double density_fraction = 1e-3; // of the Gaussian peak current density
  double v_atom = 0.12;           // m/s
  double trap_hz = 300e3;
  double delta_p_perp = 2e-30;    // kg m/s
};

struct ScenarioConfig {
  std::string scenario;
  std::uint64_t seed = 1;
  std::string output = "out";
  unsigned workers = 1;
  bool full = false;

  std::string system_preset;
  TwoLevelSystem system;
  std::optional<BeamSpec> beam;
  double beam_divergence = 0.0;  // rad
  std::optional<WavePacketSpec> packet;
  SolverConfig solver;
  QedOptions qed;
  ScanConfig scan;
  ProfileConfig profile;
  LossConfig loss;

  std::string canonical;  // effective config, canonical YAML
  std::string digest;     // FNV-1a 64 of canonical, hex
};

struct KeyDoc {
  std::string key;
  std::string type;
  std::string fallback;  // default, "required" or "-" (optional, no default)
  std::string doc;
};

// Every accepted key; anything else is rejected.
const std::vector<KeyDoc>& schema();
std::string schema_markdown();

// Strict load: unknown keys, wrong types and missing required keys raise
// ConfigError naming the key path. Overrides are "dotted.key=value".
ScenarioConfig load_config(const std::string& yaml_text, const std::vector<std::string>& overrides = {});
ScenarioConfig load_config_file(const std::filesystem::path& path,
                                const std::vector<std::string>& overrides = {});

enum class Status { pass, warn, fail, advisory };
const char* to_string(Status s);

struct Condition {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  Status status = Status::pass;
  std::string note;
};

struct ValidityReport {
  std::vector<Condition> conditions;
  const Condition* find(const std::string& name) const;
  bool any_fail() const;
};

// Ratios r of "x << 1" conditions: r < 0.01 pass, r < 0.1 warn, else fail.
Status grade(double ratio);

ValidityReport validity_report(const ScenarioConfig& cfg);

struct RunResult {
  int exit_code = 0;
  std::vector<std::filesystem::path> files;
  std::string summary_json;  // scenario summary
  std::string message;
};

const std::vector<std::string>& scenario_names();

// Runs cfg.scenario, writes CSVs, summary.json, validity.json and meta.json
// under cfg.output. Library errors map to exit codes 2, 3 and 4.
RunResult run(const ScenarioConfig& cfg);

// CSV with >= 12 significant digits.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

std::uint64_t fnv1a64(const std::string& s);

}  // namespace ebeam::runner
