#include <cstdint>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "ebeam/error.hpp"
#include "ebeam/runner.hpp"

namespace rn = ebeam::runner;

int main(int argc, char** argv) {
  CLI::App app{"Near-field driving of two-level systems by modulated electron beams"};
  app.set_version_flag("--version", rn::kVersion);
  app.require_subcommand(1);

  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> workers;
  bool full = false;
  std::vector<std::string> overrides;

  for (const auto& name : rn::scenario_names()) {
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " scenario");
    sub->add_option("--config", config, "YAML config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "RNG seed (u64)");
    sub->add_option("--out", out, "output directory");
    sub->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--full", full, "lift desk-scale caps (electron count, QMC samples)");
    sub->add_option("--override", overrides, "dotted.key=value, repeatable");
  }
  CLI::App* schema = app.add_subcommand("schema", "print the config schema as markdown");

  CLI11_PARSE(app, argc, argv);

  if (schema->parsed()) {
    std::cout << rn::schema_markdown();
    return 0;
  }
  const std::string scenario = app.get_subcommands().front()->get_name();
  std::vector<std::string> ov{"scenario=" + scenario};
  if (seed) ov.push_back("seed=" + std::to_string(*seed));
  if (out) ov.push_back("output=\"" + *out + "\"");
  if (workers) ov.push_back("workers=" + std::to_string(*workers));
  ov.insert(ov.end(), overrides.begin(), overrides.end());

  rn::ScenarioConfig cfg;
  try {
    cfg = config.empty() ? rn::load_config("", ov) : rn::load_config_file(config, ov);
  } catch (const ebeam::ConfigError& e) {
    std::cerr << "ebeam: " << e.what() << "\n";
    return 2;
  } catch (const ebeam::DomainError& e) {
    std::cerr << "ebeam: config: " << e.what() << "\n";
    return 2;
  }
  cfg.full = full;

  const rn::RunResult r = rn::run(cfg);
  std::cout << r.summary_json << "\n";
  for (const auto& f : r.files) std::cerr << "wrote " << f.string() << "\n";
  if (!r.message.empty()) std::cerr << "ebeam: " << r.message << "\n";
  return r.exit_code;
}
