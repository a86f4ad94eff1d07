// Command-line driver: tertius [global flags] <command> [command flags]

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tertius/common.hpp"
#include "tertius/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Match-maker detection, null model and impact/lifecycle analytics"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", tertius::kToolVersion);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
  std::vector<std::string> sets;
  app.add_option("--config", config_path, "Flat key = value config file");
  app.add_option("--seed", seed, "Master seed");
  app.add_option("--out", out, "Output directory");
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--set", sets, "Override any config key (key=value), repeatable");

  std::optional<std::string> input, jcr, active, strata;
  std::optional<std::size_t> replicates;

  auto* ingest = app.add_subcommand("ingest", "Validate and index the corpus, write the snapshot");
  ingest->add_option("--input", input, "Directory with publications/authorships/citations/venues TSVs");
  ingest->add_option("--jcr", jcr, "Journal quartile table (issn, eissn, name, quartile)");
  auto* detect = app.add_subcommand("detect", "Detect match-maker events and prevalence tables");
  detect->add_option("--active", active, "Active-author definition: default|min3_in_year|p90_threshold");
  auto* null_run = app.add_subcommand("null-run", "Configuration null model ensemble");
  null_run->add_option("--replicates", replicates, "Number of randomized replicates");
  null_run->add_option("--strata", strata, "Randomization strata: field_year|year|none");
  app.add_subcommand("metrics", "Citation windows, disruption, novelty, percentiles, matching");
  app.add_subcommand("lifecycle", "Abandonment, benefits and career profiles");
  app.add_subcommand("report", "Collect figure-ready tables");
  auto* all = app.add_subcommand("all", "Run every stage in order");
  all->add_option("--input", input, "Directory with the corpus TSVs");
  all->add_option("--jcr", jcr, "Journal quartile table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? tertius::kExitOk : tertius::kExitInput;
  }

  tertius::RunConfig config;
  try {
    tertius::ConfigMap values;
    if (!config_path.empty()) values = tertius::read_config_file(config_path);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw tertius::InputError("--set expects key=value, got '" + s + "'");
      }
      values[s.substr(0, eq)] = s.substr(eq + 1);
    }
    if (seed) values["seed"] = std::to_string(*seed);
    if (out) values["out"] = *out;
    if (threads) values["threads"] = std::to_string(*threads);
    if (input) values["input"] = *input;
    if (jcr) values["jcr"] = *jcr;
    if (active) values["active.definition"] = *active;
    if (replicates) values["null.replicates"] = std::to_string(*replicates);
    if (strata) values["null.strata"] = *strata;
    config = tertius::make_config(values);
  } catch (const tertius::InputError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return tertius::kExitInput;
  }

  const auto command = app.get_subcommands().front()->get_name();
  return tertius::run_command(command, config, std::cout, std::cerr);
}
