#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tertius/corpus.hpp"
#include "tertius/impact_metrics.hpp"
#include "tertius/matchmaker.hpp"
#include "tertius/nullmodel.hpp"
#include "tertius/table.hpp"
#include "tertius/temporal_graph.hpp"

namespace tertius {

inline constexpr const char* kToolVersion = "tertius 0.1.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitInput = 2,
  kExitInvariant = 3,
  kExitMissingStage = 4,
};

// An upstream stage has not produced its artifacts yet.
class MissingStage : public std::runtime_error {
 public:
  MissingStage(std::string stage, const std::string& what)
      : std::runtime_error(what), stage_(std::move(stage)) {}
  [[nodiscard]] const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

using ConfigMap = std::map<std::string, std::string>;

// Flat "key = value" lines; '#' starts a comment. Errors name the line.
ConfigMap parse_config_text(std::string_view text, const std::string& origin = "config");
ConfigMap read_config_file(const std::filesystem::path& path);

struct RunConfig {
  std::filesystem::path input;  // directory holding the four corpus TSVs
  std::filesystem::path publications, authorships, citations, venues;  // per-file overrides
  std::filesystem::path jcr;    // optional quartile table
  std::filesystem::path out = "tertius-out";
  std::uint64_t seed = 0;
  unsigned threads = 1;

  FilterConfig filters = [] {
    FilterConfig f;
    f.single_matchmaker_only = true;
    return f;
  }();
  ActiveDefinition active = ActiveDefinition::Default;  // for annual_rate; variants always written
  int rate_first_year = 1980;
  int rate_last_year = 2019;

  NullModelConfig null;

  bool novelty = true;
  bool psm = true;
  IndicatorOptions indicators;
  PsmConfig psm_config;

  int lifecycle_max_event_year = 2015;

  [[nodiscard]] CorpusPaths corpus_paths() const;
};

// Unknown keys and malformed values raise InputError.
RunConfig make_config(const ConfigMap& values);
// Every recognised key with its default.
const std::vector<std::string>& config_keys();

enum class Stage { Ingest, Detect, Null, Metrics, Lifecycle, Report };
std::string to_string(Stage stage);
std::optional<Stage> parse_stage(std::string_view name);  // accepts "null-run"
std::filesystem::path stage_dir(const RunConfig& config, Stage stage);

struct StageOutcome {
  Stage stage = Stage::Ingest;
  bool skipped = false;  // manifest matched, outputs untouched
  std::filesystem::path manifest;
};

// Runs one stage, or skips it when its manifest already records the same
// configuration, the same upstream hashes and intact outputs.
StageOutcome run_stage(Stage stage, const RunConfig& config, std::ostream& log);

// Runs a command ("ingest", "detect", "null-run", "metrics", "lifecycle",
// "report" or "all") and maps failures to exit codes.
int run_command(std::string_view command, const RunConfig& config, std::ostream& log,
                std::ostream& err);

// Shared by detect and null-run so observed and null tables line up.
TableSet matchmaker_analyses(const Corpus& corpus, const TemporalGraph& graph,
                             const std::vector<MatchmakerEvent>& events_all,
                             const RunConfig& config);
// Subset of analyses repeated on every null replicate.
TableSet null_analyses(const Corpus& corpus, const RunConfig& config);

// Reads an events table written by events_table back against its corpus.
std::vector<MatchmakerEvent> read_events(const std::filesystem::path& path, const Corpus& corpus,
                                         const TemporalGraph& graph);

}  // namespace tertius
