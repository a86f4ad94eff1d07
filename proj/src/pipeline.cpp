#include "tertius/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tertius/hashing.hpp"
#include "tertius/lifecycle.hpp"
#include "tertius/random.hpp"

namespace tertius {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

}  // namespace

ConfigMap parse_config_text(std::string_view text, const std::string& origin) {
  ConfigMap out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const auto where = origin + ":" + std::to_string(line_no) + ": ";
    if (eq == std::string_view::npos) throw InputError(where + "expected key = value");
    const auto key = std::string(trim(line.substr(0, eq)));
    if (key.empty()) throw InputError(where + "empty key");
    if (!out.emplace(key, std::string(trim(line.substr(eq + 1)))).second) {
      throw InputError(where + "duplicate key '" + key + "'");
    }
  }
  return out;
}

ConfigMap read_config_file(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw InputError("config file not found: " + path.string());
  return parse_config_text(read_text_file(path), path.string());
}

CorpusPaths RunConfig::corpus_paths() const {
  CorpusPaths paths = corpus_paths_in(input);
  if (!publications.empty()) paths.publications = publications;
  if (!authorships.empty()) paths.authorships = authorships;
  if (!citations.empty()) paths.citations = citations;
  if (!venues.empty()) paths.venues = venues;
  return paths;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "input",
      "publications",
      "authorships",
      "citations",
      "venues",
      "jcr",
      "out",
      "seed",
      "threads",
      "filter.single_matchmaker_only",
      "filter.min_bc_academic_age",
      "filter.min_prior_copubs",
      "filter.max_event_year",
      "active.definition",
      "rate.first_year",
      "rate.last_year",
      "null.replicates",
      "null.strata",
      "null.max_repair_sweeps",
      "metrics.novelty",
      "metrics.psm",
      "di.min_references",
      "di.min_citations",
      "novelty.replicates",
      "psm.caliper",
      "psm.trajectory_years",
      "lifecycle.max_event_year",
  };
  return keys;
}

namespace {

template <typename T>
T parse_integer(const std::string& key, const std::string& value) {
  T out{};
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || value.empty()) {
    throw InputError("config key '" + key + "': invalid integer '" + value + "'");
  }
  return out;
}

template <typename T>
std::optional<T> parse_optional(const std::string& key, const std::string& value) {
  if (value.empty() || value == "none") return std::nullopt;
  return parse_integer<T>(key, value);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw InputError("config key '" + key + "': expected true/false, got '" + value + "'");
}

double parse_real(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (value.empty() || *end != '\0' || !std::isfinite(v)) {
    throw InputError("config key '" + key + "': invalid number '" + value + "'");
  }
  return v;
}

template <typename T>
std::string optional_text(const std::optional<T>& v) {
  return v ? std::to_string(*v) : std::string("none");
}

std::string real_text(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

RunConfig make_config(const ConfigMap& values) {
  RunConfig c;
  const std::set<std::string> known(config_keys().begin(), config_keys().end());
  for (const auto& [key, value] : values) {
    if (!known.contains(key)) throw InputError("unknown config key '" + key + "'");
    if (key == "input") c.input = value;
    else if (key == "publications") c.publications = value;
    else if (key == "authorships") c.authorships = value;
    else if (key == "citations") c.citations = value;
    else if (key == "venues") c.venues = value;
    else if (key == "jcr") c.jcr = value;
    else if (key == "out") c.out = value;
    else if (key == "seed") c.seed = parse_integer<std::uint64_t>(key, value);
    else if (key == "threads") c.threads = parse_integer<unsigned>(key, value);
    else if (key == "filter.single_matchmaker_only") c.filters.single_matchmaker_only = parse_bool(key, value);
    else if (key == "filter.min_bc_academic_age") c.filters.min_bc_academic_age = parse_optional<int>(key, value);
    else if (key == "filter.min_prior_copubs") c.filters.min_prior_copubs = parse_optional<std::uint32_t>(key, value);
    else if (key == "filter.max_event_year") c.filters.max_event_year = parse_optional<int>(key, value);
    else if (key == "active.definition") c.active = parse_active_definition(value);
    else if (key == "rate.first_year") c.rate_first_year = parse_integer<int>(key, value);
    else if (key == "rate.last_year") c.rate_last_year = parse_integer<int>(key, value);
    else if (key == "null.replicates") c.null.replicates = parse_integer<std::size_t>(key, value);
    else if (key == "null.strata") c.null.strata = parse_strata(value);
    else if (key == "null.max_repair_sweeps") c.null.max_repair_sweeps = parse_integer<std::size_t>(key, value);
    else if (key == "metrics.novelty") c.novelty = parse_bool(key, value);
    else if (key == "metrics.psm") c.psm = parse_bool(key, value);
    else if (key == "di.min_references") c.indicators.disruption.min_references = parse_integer<std::size_t>(key, value);
    else if (key == "di.min_citations") c.indicators.disruption.min_citations = parse_integer<std::size_t>(key, value);
    else if (key == "novelty.replicates") c.indicators.novelty.replicates = parse_integer<std::size_t>(key, value);
    else if (key == "psm.caliper") c.psm_config.caliper = parse_real(key, value);
    else if (key == "psm.trajectory_years") c.psm_config.trajectory_years = parse_integer<int>(key, value);
    else if (key == "lifecycle.max_event_year") c.lifecycle_max_event_year = parse_integer<int>(key, value);
  }
  if (c.threads < 1) throw InputError("threads must be >= 1");
  if (c.null.replicates < 1) throw InputError("null.replicates must be >= 1");
  if (c.indicators.novelty.replicates < 1) throw InputError("novelty.replicates must be >= 1");
  if (c.psm_config.caliper < 0) throw InputError("psm.caliper must be >= 0");
  if (c.psm_config.trajectory_years < 0) throw InputError("psm.trajectory_years must be >= 0");
  if (c.rate_first_year > c.rate_last_year) throw InputError("rate.first_year after rate.last_year");
  c.null.seed = c.seed;
  c.indicators.novelty.seed = derive_seed(c.seed, 0x6e6f76656c7479ULL);
  c.indicators.compute_novelty = c.novelty;
  return c;
}

std::string to_string(Stage stage) {
  switch (stage) {
    case Stage::Ingest: return "ingest";
    case Stage::Detect: return "detect";
    case Stage::Null: return "null";
    case Stage::Metrics: return "metrics";
    case Stage::Lifecycle: return "lifecycle";
    case Stage::Report: return "report";
  }
  return "?";
}

std::optional<Stage> parse_stage(std::string_view name) {
  if (name == "ingest") return Stage::Ingest;
  if (name == "detect") return Stage::Detect;
  if (name == "null" || name == "null-run") return Stage::Null;
  if (name == "metrics") return Stage::Metrics;
  if (name == "lifecycle") return Stage::Lifecycle;
  if (name == "report") return Stage::Report;
  return std::nullopt;
}

fs::path stage_dir(const RunConfig& config, Stage stage) { return config.out / to_string(stage); }

// ---------------------------------------------------------------------------
// Analyses

TableSet matchmaker_analyses(const Corpus& /*corpus*/, const TemporalGraph& graph,
                             const std::vector<MatchmakerEvent>& events_all,
                             const RunConfig& config) {
  auto unrestricted = config.filters;
  unrestricted.single_matchmaker_only = false;
  const auto pre = apply_filters(events_all, unrestricted);
  const auto events = apply_filters(events_all, config.filters);
  const auto& careers = graph.careers();

  TableSet out;
  out["matchmakers_per_publication"] =
      histogram_table(matchmakers_per_publication(pre), "matchmakers", "publications");
  const auto curve = prevalence_vs_pubcount(events, careers);
  out["prevalence"] = prevalence_table(curve);
  out["prevalence_cdf"] = prevalence_cdf_table(curve);
  const std::pair<const char*, ActiveDefinition> defs[] = {
      {"annual_rate", config.active},
      {"annual_rate_min3", ActiveDefinition::Min3InYear},
      {"annual_rate_p90", ActiveDefinition::P90Threshold}};
  for (const auto& [name, def] : defs) {
    out[name] = annual_rate_table(annual_matchmaker_rate(events, graph, def, config.rate_first_year,
                                                         config.rate_last_year));
  }
  out["team_size_single"] =
      histogram_table(team_size_distribution(pre, TeamSizeMode::SingleMatchmaker), "team_size");
  out["team_size_multi"] =
      histogram_table(team_size_distribution(pre, TeamSizeMode::MultiMatchmaker), "team_size");

  auto profile = career_profile(events, careers);
  out["career_sequence_probability"] = std::move(profile.sequence_probability);
  out["career_first_event_age"] = std::move(profile.first_event_age);
  out["career_first_event_joint"] = std::move(profile.first_event_joint);
  out["career_copub_joint"] = std::move(profile.copub_joint);
  out["career_copub_conditional"] = std::move(profile.copub_conditional);

  std::set<AuthorIdx> matchmakers;
  std::set<PubIdx> pubs;
  for (const auto& e : events) {
    matchmakers.insert(e.matchmaker);
    pubs.insert(e.pub);
  }
  Table summary;
  summary.columns = {"statistic", "value"};
  summary.add_row({std::string("events_detected"), static_cast<std::int64_t>(events_all.size())});
  summary.add_row({std::string("events"), static_cast<std::int64_t>(events.size())});
  summary.add_row({std::string("matchmakers"), static_cast<std::int64_t>(matchmakers.size())});
  summary.add_row({std::string("publications"), static_cast<std::int64_t>(pubs.size())});
  out["event_summary"] = std::move(summary);
  return out;
}

namespace {

std::vector<MatchmakerEvent> abandonment_window(const std::vector<MatchmakerEvent>& events,
                                                const RunConfig& config) {
  FilterConfig f;
  f.max_event_year = config.lifecycle_max_event_year;
  return apply_filters(events, f);
}

void add_abandonment_curves(TableSet& out, const std::vector<AbandonmentRecord>& records,
                            const std::vector<MatchmakerEvent>& events, const Careers& careers) {
  auto curves = abandonment_curves(records, events, careers);
  out["abandonment_by_pubcount"] = std::move(curves.by_pubcount);
  out["exclusion_share"] = std::move(curves.exclusion_share);
  out["abandonment_by_intensity"] = std::move(curves.by_intensity);
  out["abandonment_lag"] = std::move(curves.lag);
  out["abandonment_by_career_stage"] = std::move(curves.by_career_stage);
}

}  // namespace

TableSet null_analyses(const Corpus& corpus, const RunConfig& config) {
  const TemporalGraph graph(corpus);
  const auto events_all = detect_matchmakers(corpus, graph);
  auto full = matchmaker_analyses(corpus, graph, events_all, config);
  TableSet out;
  for (const char* name : {"matchmakers_per_publication", "prevalence", "annual_rate",
                           "career_sequence_probability", "career_first_event_age",
                           "event_summary"}) {
    out[name] = std::move(full[name]);
  }
  const auto events = apply_filters(events_all, config.filters);
  const auto window = abandonment_window(events, config);
  TableSet curves;
  add_abandonment_curves(curves, abandonment_all(window, graph), window, graph.careers());
  for (const char* name : {"abandonment_by_pubcount", "exclusion_share", "abandonment_by_intensity"}) {
    out[name] = std::move(curves[name]);
  }
  return out;
}

std::vector<MatchmakerEvent> read_events(const fs::path& path, const Corpus& corpus,
                                         const TemporalGraph& graph) {
  const auto text = read_text_file(path);
  std::vector<MatchmakerEvent> events;
  std::size_t line_no = 0;
  std::size_t start = 0;
  auto fail = [&](const std::string& what) {
    throw InvariantError(path.string() + ":" + std::to_string(line_no) + ": " + what);
  };
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    const std::string_view line(text.data() + start, end - start);
    start = end + 1;
    ++line_no;
    std::vector<std::string_view> f;
    for (std::size_t s = 0;;) {
      const auto tab = line.find('\t', s);
      f.push_back(line.substr(s, tab == std::string_view::npos ? tab : tab - s));
      if (tab == std::string_view::npos) break;
      s = tab + 1;
    }
    if (f.size() != 12) fail("expected 12 columns");
    if (line_no == 1) {
      if (f[0] != "pub_id" || f[2] != "matchmaker_id") fail("not an events table");
      continue;
    }
    auto num = [&](std::string_view s) {
      long v = 0;
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size()) fail("bad integer '" + std::string(s) + "'");
      return v;
    };
    auto author = [&](std::string_view id) {
      auto a = corpus.find_author(id);
      if (!a) fail("unknown author '" + std::string(id) + "'");
      return *a;
    };
    MatchmakerEvent e;
    const auto pub = corpus.find_pub(f[0]);
    if (!pub) fail("unknown publication '" + std::string(f[0]) + "'");
    e.pub = *pub;
    e.position = graph.timeline().position_of(e.pub);
    e.year = corpus.year(e.pub);
    e.matchmaker = author(f[2]);
    e.b = author(f[3]);
    e.c = author(f[4]);
    e.copubs_a_b = static_cast<std::uint32_t>(num(f[5]));
    e.copubs_a_c = static_cast<std::uint32_t>(num(f[6]));
    e.team_size = static_cast<std::uint32_t>(num(f[7]));
    e.a_sequence_index = static_cast<std::uint32_t>(num(f[8]));
    e.a_age = static_cast<int>(num(f[9]));
    e.b_age = static_cast<int>(num(f[10]));
    e.c_age = static_cast<int>(num(f[11]));
    events.push_back(e);
  }
  return events;
}

// ---------------------------------------------------------------------------
// Manifests and stages

namespace {

const char* kManifest = "manifest.json";

Json stage_config(const RunConfig& c, Stage stage) {
  Json j = Json::object();
  auto detect_keys = [&] {
    j["filter.single_matchmaker_only"] = c.filters.single_matchmaker_only ? "true" : "false";
    j["filter.min_bc_academic_age"] = optional_text(c.filters.min_bc_academic_age);
    j["filter.min_prior_copubs"] = optional_text(c.filters.min_prior_copubs);
    j["filter.max_event_year"] = optional_text(c.filters.max_event_year);
    j["active.definition"] = to_string(c.active);
    j["rate.first_year"] = std::to_string(c.rate_first_year);
    j["rate.last_year"] = std::to_string(c.rate_last_year);
  };
  switch (stage) {
    case Stage::Ingest:
      j["jcr"] = c.jcr.empty() ? "none" : "given";
      break;
    case Stage::Detect:
      detect_keys();
      break;
    case Stage::Null:
      detect_keys();
      j["lifecycle.max_event_year"] = std::to_string(c.lifecycle_max_event_year);
      j["null.replicates"] = std::to_string(c.null.replicates);
      j["null.strata"] = to_string(c.null.strata);
      j["null.max_repair_sweeps"] = std::to_string(c.null.max_repair_sweeps);
      break;
    case Stage::Metrics:
      j["metrics.novelty"] = c.novelty ? "true" : "false";
      j["metrics.psm"] = c.psm ? "true" : "false";
      j["di.min_references"] = std::to_string(c.indicators.disruption.min_references);
      j["di.min_citations"] = std::to_string(c.indicators.disruption.min_citations);
      j["novelty.replicates"] = std::to_string(c.indicators.novelty.replicates);
      j["psm.caliper"] = real_text(c.psm_config.caliper);
      j["psm.trajectory_years"] = std::to_string(c.psm_config.trajectory_years);
      break;
    case Stage::Lifecycle:
      j["lifecycle.max_event_year"] = std::to_string(c.lifecycle_max_event_year);
      break;
    case Stage::Report:
      break;
  }
  return j;
}

std::vector<Stage> required_upstream(Stage stage) {
  switch (stage) {
    case Stage::Ingest: return {};
    case Stage::Detect: return {Stage::Ingest};
    case Stage::Null: return {Stage::Ingest};
    case Stage::Metrics: return {Stage::Ingest, Stage::Detect};
    case Stage::Lifecycle: return {Stage::Ingest, Stage::Detect};
    case Stage::Report: return {Stage::Detect, Stage::Metrics, Stage::Lifecycle};
  }
  return {};
}

Json read_manifest(const fs::path& path) {
  try {
    return Json::parse(read_text_file(path));
  } catch (const Json::exception& e) {
    throw InvariantError("corrupt manifest " + path.string() + ": " + e.what());
  }
}

// Relative generic paths of every regular file under dir except the manifest.
std::vector<std::string> list_outputs(const fs::path& dir) {
  std::vector<std::string> files;
  if (!fs::exists(dir)) return files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto rel = fs::relative(entry.path(), dir).generic_string();
    if (rel == kManifest || rel.ends_with(".tmp")) continue;
    files.push_back(std::move(rel));
  }
  std::sort(files.begin(), files.end());
  return files;
}

bool outputs_intact(const fs::path& dir, const Json& manifest) {
  if (!manifest.contains("outputs")) return false;
  const auto& outputs = manifest["outputs"];
  std::vector<std::string> recorded;
  for (const auto& [name, hash] : outputs.items()) {
    recorded.push_back(name);
    const auto path = dir / name;
    if (!fs::is_regular_file(path) || sha256_file(path) != hash.get<std::string>()) return false;
  }
  return recorded == list_outputs(dir);
}

// Verifies an upstream stage and returns the hash of its manifest.
std::string upstream_hash(const RunConfig& config, Stage stage) {
  const auto dir = stage_dir(config, stage);
  const auto path = dir / kManifest;
  if (!fs::is_regular_file(path)) {
    throw MissingStage(to_string(stage), "missing upstream stage '" + to_string(stage) +
                                             "': " + path.string() + " not found");
  }
  if (!outputs_intact(dir, read_manifest(path))) {
    throw InvariantError("outputs of stage '" + to_string(stage) +
                         "' no longer match its manifest; rerun that stage");
  }
  return sha256_file(path);
}

Json stage_key(Stage stage, const RunConfig& config, const Json& inputs) {
  Json j;
  j["stage"] = to_string(stage);
  j["tool_version"] = kToolVersion;
  j["seed"] = config.seed;
  j["config"] = stage_config(config, stage);
  j["inputs"] = inputs;
  return j;
}

Json stage_inputs(Stage stage, const RunConfig& config) {
  Json inputs = Json::object();
  if (stage == Stage::Ingest) {
    const auto paths = config.corpus_paths();
    const std::pair<const char*, fs::path> files[] = {{"publications", paths.publications},
                                                      {"authorships", paths.authorships},
                                                      {"citations", paths.citations},
                                                      {"venues", paths.venues},
                                                      {"jcr", config.jcr}};
    for (const auto& [name, path] : files) {
      if (path.empty()) continue;
      if (!fs::is_regular_file(path)) {
        throw InputError("input file not found: " + path.string());
      }
      inputs[name] = sha256_file(path);
    }
    return inputs;
  }
  for (Stage up : required_upstream(stage)) {
    inputs[to_string(up) + "/" + kManifest] = upstream_hash(config, up);
  }
  if (stage == Stage::Report && fs::is_regular_file(stage_dir(config, Stage::Null) / kManifest)) {
    inputs[std::string("null/") + kManifest] = upstream_hash(config, Stage::Null);
  }
  return inputs;
}

void write_tables(const TableSet& tables, const fs::path& dir, const std::string& prefix = "") {
  for (const auto& [name, table] : tables) write_tsv(table, dir / (prefix + name + ".tsv"));
}

struct Loaded {
  Corpus corpus;
  TemporalGraph graph;
};

Loaded load_ingested(const RunConfig& config) {
  const auto dir = stage_dir(config, Stage::Ingest);
  Loaded l{load_corpus(corpus_paths_in(dir)), TemporalGraph::load(dir / "snapshot.bin")};
  if (l.graph.corpus_fingerprint() != l.corpus.fingerprint()) {
    throw InvariantError("snapshot does not belong to the ingested corpus; rerun ingest");
  }
  return l;
}

void run_ingest(const RunConfig& config, const fs::path& dir, std::ostream& log) {
  auto tables = read_corpus_tables(config.corpus_paths());
  auto corpus = Corpus::build(std::move(tables));
  if (!config.jcr.empty()) {
    auto venues = corpus.venues();
    const auto jcr = read_jcr(config.jcr);
    const auto report = match_quartiles(venues, jcr);
    corpus = corpus.with_venues(std::move(venues));
    Json j;
    j["venues"] = report.venues;
    j["matched"] = report.matched;
    j["by_issn"] = report.by_issn;
    j["by_eissn"] = report.by_eissn;
    j["by_name"] = report.by_name;
    j["match_rate"] = report.match_rate();
    write_text_file(dir / "quartile_match.json", j.dump(2) + "\n");
    log << "quartiles matched for " << report.matched << " of " << report.venues << " venues\n";
  }
  // Rebuild from canonical tables so later stages reading the TSVs see the
  // same indices the snapshot was built from.
  const auto canonical = Corpus::build(corpus.tables());
  write_corpus_tsv(canonical, dir);
  write_text_file(dir / "validation.json", validate_corpus(canonical).to_json());
  const TemporalGraph graph(canonical);
  graph.save(dir / "snapshot.bin");
  log << "ingested " << canonical.publication_count() << " publications, "
      << canonical.authorship_count() << " authorships, " << canonical.citation_count()
      << " citations\n";
}

void run_detect(const RunConfig& config, const fs::path& dir, std::ostream& log) {
  const auto [corpus, graph] = load_ingested(config);
  const auto events_all = detect_matchmakers(corpus, graph);
  const auto events = apply_filters(events_all, config.filters);
  write_tsv(events_table(events_all, corpus, graph), dir / "events_all.tsv");
  write_tsv(events_table(events, corpus, graph), dir / "events.tsv");

  auto tables = matchmaker_analyses(corpus, graph, events_all, config);
  std::erase_if(tables, [](const auto& kv) { return kv.first.starts_with("career_"); });
  write_tables(tables, dir);

  // Robustness variants: young b/c excluded, then additionally weak ties.
  struct Variant {
    const char* name;
    std::optional<std::uint32_t> min_prior;
  };
  for (const Variant v : {Variant{"s6", std::nullopt}, Variant{"s7", 3u}}) {
    RunConfig variant = config;
    variant.filters.min_bc_academic_age = 5;
    variant.filters.min_prior_copubs = v.min_prior;
    write_tables(matchmaker_analyses(corpus, graph, events_all, variant), dir / "robustness",
                 std::string(v.name) + "_");
  }
  log << "detected " << events_all.size() << " events, " << events.size()
      << " after filters\n";
}

void run_null(const RunConfig& config, const fs::path& dir, std::ostream& log) {
  const auto [corpus, graph] = load_ingested(config);
  const auto result = null_ensemble(
      corpus, config.null, [&](const Corpus& c) { return null_analyses(c, config); },
      config.threads);
  for (std::size_t r = 0; r < result.replicates.size(); ++r) {
    char name[32];
    std::snprintf(name, sizeof name, "r%03zu", r);
    write_tables(result.replicates[r], dir / "replicates" / name);
  }
  write_tables(result.bands, dir / "bands");
  write_text_file(dir / "bands.json", bands_json(result.bands));
  log << "null model: " << result.replicates.size() << " replicates ("
      << to_string(config.null.strata) << " strata)\n";
}

std::vector<PubIdx> event_publications(const std::vector<MatchmakerEvent>& events) {
  std::set<PubIdx> pubs;
  for (const auto& e : events) pubs.insert(e.pub);
  return {pubs.begin(), pubs.end()};
}

void run_metrics(const RunConfig& config, const fs::path& dir, std::ostream& log) {
  const auto [corpus, graph] = load_ingested(config);
  const auto events = read_events(stage_dir(config, Stage::Detect) / "events.tsv", corpus, graph);
  IndicatorTallies tallies;
  const auto records = compute_indicators(corpus, config.indicators, &tallies);
  write_tsv(indicators_table(records, corpus), dir / "indicators.tsv");

  std::vector<PercentileTable> tables;
  for (Metric m : {Metric::C3, Metric::C5, Metric::C10, Metric::DI, Metric::Novelty}) {
    if (m == Metric::Novelty && !config.novelty) continue;
    tables.push_back(stratified_percentiles(records, m));
  }
  write_tsv(percentiles_table(tables, corpus), dir / "percentiles.tsv");

  ProfileInputs inputs;
  inputs.records = &records;
  inputs.c3 = &tables[0];
  inputs.c5 = &tables[1];
  inputs.c10 = &tables[2];
  inputs.di = &tables[3];
  inputs.novelty = config.novelty ? &tables[4] : nullptr;
  const auto treated = event_publications(events);
  std::vector<PubIdx> everything(corpus.publication_count());
  for (PubIdx p = 0; p < everything.size(); ++p) everything[p] = p;
  write_tsv(impact_profile(treated, inputs), dir / "profile_matchmaker.tsv");
  write_tsv(impact_profile(everything, inputs), dir / "profile_baseline.tsv");

  if (config.psm) {
    const auto psm = psm_compare(corpus, graph, treated, everything, config.psm_config);
    write_tsv(psm.matches_table, dir / "psm_matches.tsv");
    write_tsv(psm.quartiles, dir / "psm_quartiles.tsv");
    write_tsv(psm.trajectories, dir / "psm_trajectories.tsv");
    write_tsv(psm.summary, dir / "psm_summary.tsv");
  }

  Json j;
  j["anachronistic_citations"] = tallies.anachronistic_citations;
  j["novelty_skipped_pairs"] = tallies.novelty_skipped_pairs;
  Json strata = Json::object();
  for (const auto& t : tables) {
    strata[to_string(t.metric)] = {{"strata", t.strata}, {"degenerate", t.degenerate_strata}};
  }
  j["percentile_strata"] = strata;
  write_text_file(dir / "tallies.json", j.dump(2) + "\n");
  log << "metrics for " << records.size() << " publications, " << treated.size()
      << " with match-makers\n";
}

void run_lifecycle(const RunConfig& config, const fs::path& dir, std::ostream& log) {
  const auto [corpus, graph] = load_ingested(config);
  const auto events = read_events(stage_dir(config, Stage::Detect) / "events.tsv", corpus, graph);
  const auto window = abandonment_window(events, config);
  const auto records = abandonment_all(window, graph);
  write_tsv(abandonment_table(records, window, corpus), dir / "abandonment.tsv");
  TableSet tables;
  add_abandonment_curves(tables, records, window, graph.careers());

  const auto benefits = benefit_metrics(events, graph.careers());
  tables["benefits_researcher"] = researcher_benefit_table(benefits, corpus);
  tables["benefits_matchmaker"] = matchmaker_benefit_table(benefits, corpus);
  tables["benefits_by_matchmakers"] = researcher_benefit_by_matchmakers(benefits);
  tables["benefits_by_pubcount"] = matchmaker_benefit_by_pubcount(benefits);

  auto profile = career_profile(events, graph.careers());
  tables["career_sequence_probability"] = std::move(profile.sequence_probability);
  tables["career_first_event_age"] = std::move(profile.first_event_age);
  tables["career_first_event_joint"] = std::move(profile.first_event_joint);
  tables["career_copub_joint"] = std::move(profile.copub_joint);
  tables["career_copub_conditional"] = std::move(profile.copub_conditional);
  write_tables(tables, dir);
  log << "lifecycle: " << records.size() << " events in the abandonment window\n";
}

// Adds null_mean / null_p2_5 / null_p97_5 for one column from a bands table.
Table with_band(Table observed, const Table* band, const std::string& column) {
  if (!band) return observed;
  std::map<std::string, std::vector<Cell>> by_key;
  for (const auto& row : band->rows) {
    if (format_cell(row[1]) == column) by_key[format_cell(row[0])] = {row[3], row[4], row[5]};
  }
  observed.columns.push_back("null_mean");
  observed.columns.push_back("null_p2_5");
  observed.columns.push_back("null_p97_5");
  for (auto& row : observed.rows) {
    auto it = by_key.find(format_cell(row.at(0)));
    for (std::size_t i = 0; i < 3; ++i) {
      row.push_back(it == by_key.end() ? Cell{} : it->second[i]);
    }
  }
  return observed;
}

// Selected columns of `table`, with the same columns from `baseline` (joined
// on the first column) appended under a baseline_ prefix.
Table select_with_baseline(const Table& table, const Table& baseline,
                           const std::vector<std::string>& columns) {
  Table out;
  out.columns = {table.columns.at(0), "publications"};
  for (const auto& c : columns) out.columns.push_back(c);
  for (const auto& c : columns) out.columns.push_back("baseline_" + c);
  std::map<std::string, const std::vector<Cell>*> base;
  for (const auto& row : baseline.rows) base[format_cell(row.at(0))] = &row;
  const auto pubs_col = table.column_index("publications");
  for (const auto& row : table.rows) {
    std::vector<Cell> r{row.at(0), row.at(pubs_col)};
    for (const auto& c : columns) r.push_back(row.at(table.column_index(c)));
    auto it = base.find(format_cell(row.at(0)));
    for (const auto& c : columns) {
      r.push_back(it == base.end() ? Cell{} : it->second->at(baseline.column_index(c)));
    }
    out.add_row(std::move(r));
  }
  return out;
}

void run_report(const RunConfig& config, const fs::path& dir, std::ostream& log) {
  const auto detect = stage_dir(config, Stage::Detect);
  const auto metrics = stage_dir(config, Stage::Metrics);
  const auto lifecycle = stage_dir(config, Stage::Lifecycle);
  const auto null_dir = stage_dir(config, Stage::Null);
  const bool have_null = fs::is_regular_file(null_dir / kManifest);

  std::map<std::string, Table> bands;
  auto band = [&](const std::string& name) -> const Table* {
    if (!have_null) return nullptr;
    auto it = bands.find(name);
    if (it == bands.end()) {
      const auto path = null_dir / "bands" / (name + ".tsv");
      if (!fs::is_regular_file(path)) return nullptr;
      it = bands.emplace(name, read_tsv_table(path)).first;
    }
    return &it->second;
  };
  std::size_t written = 0;
  auto emit = [&](const std::string& figure, const Table& table) {
    write_tsv(table, dir / (figure + ".tsv"));
    ++written;
  };
  auto copy = [&](const std::string& figure, const fs::path& source) {
    if (!fs::is_regular_file(source)) return;
    write_text_file(dir / (figure + ".tsv"), read_text_file(source));
    ++written;
  };
  auto banded = [&](const std::string& figure, const fs::path& stage, const std::string& name,
                    const std::string& column) {
    emit(figure, with_band(read_tsv_table(stage / (name + ".tsv")), band(name), column));
  };

  banded("fig1b", detect, "matchmakers_per_publication", "share");
  banded("fig1c", detect, "prevalence", "probability");
  copy("fig1c_cdf", detect / "prevalence_cdf.tsv");
  banded("fig1d", detect, "annual_rate", "rate");
  copy("fig1e", detect / "team_size_single.tsv");
  copy("fig1e_inset", detect / "team_size_multi.tsv");

  const auto profile = read_tsv_table(metrics / "profile_matchmaker.tsv");
  const auto baseline = read_tsv_table(metrics / "profile_baseline.tsv");
  emit("fig2a", select_with_baseline(profile, baseline,
                                     {"q1_share", "top10_c3_share", "top10_c5_share",
                                      "top10_c10_share"}));
  emit("fig2b", select_with_baseline(profile, baseline, {"top10_di_share", "di_positive_share"}));
  emit("fig2c",
       select_with_baseline(profile, baseline, {"low10_novelty_share", "novelty_negative_share"}));
  copy("fig2d", lifecycle / "benefits_by_matchmakers.tsv");
  copy("fig2e", lifecycle / "benefits_by_pubcount.tsv");

  banded("fig3a", lifecycle, "career_sequence_probability", "probability");
  banded("fig3b", lifecycle, "career_first_event_age", "share");
  copy("fig3c", lifecycle / "career_first_event_joint.tsv");
  copy("fig3d", lifecycle / "career_copub_joint.tsv");
  copy("fig3d_inset", lifecycle / "career_copub_conditional.tsv");

  banded("fig4a", lifecycle, "abandonment_by_pubcount", "rate");
  banded("fig4b", lifecycle, "exclusion_share", "mean_exclusion_share");
  banded("fig4c", lifecycle, "abandonment_by_intensity", "rate");
  copy("fig4d", lifecycle / "abandonment_lag.tsv");
  copy("fig4e", lifecycle / "abandonment_by_career_stage.tsv");

  copy("s3a", detect / "annual_rate_min3.tsv");
  copy("s3b", detect / "annual_rate_p90.tsv");
  copy("s4", metrics / "psm_quartiles.tsv");
  copy("s4_summary", metrics / "psm_summary.tsv");
  copy("s5", metrics / "psm_trajectories.tsv");

  const std::pair<const char*, const char*> panels[] = {
      {"a", "matchmakers_per_publication"}, {"b", "prevalence"},
      {"c", "career_sequence_probability"}, {"d", "career_first_event_age"},
      {"e", "career_first_event_joint"},     {"f", "career_copub_joint"},
      {"g", "annual_rate"},          {"h", "team_size_single"}};
  for (const char* variant : {"s6", "s7"}) {
    for (const auto& [panel, name] : panels) {
      copy(std::string(variant) + panel,
           detect / "robustness" / (std::string(variant) + "_" + name + ".tsv"));
    }
  }
  log << "report: " << written << " tables" << (have_null ? "" : " (no null bands)") << "\n";
}

}  // namespace

StageOutcome run_stage(Stage stage, const RunConfig& config, std::ostream& log) {
  const auto dir = stage_dir(config, stage);
  const auto manifest_path = dir / kManifest;
  const auto key = stage_key(stage, config, stage_inputs(stage, config));

  if (fs::is_regular_file(manifest_path)) {
    auto existing = read_manifest(manifest_path);
    auto recorded_key = existing;
    recorded_key.erase("outputs");
    if (recorded_key == key && outputs_intact(dir, existing)) {
      log << to_string(stage) << ": up to date, skipped\n";
      return {stage, true, manifest_path};
    }
  }

  fs::remove_all(dir);
  fs::create_directories(dir);
  switch (stage) {
    case Stage::Ingest: run_ingest(config, dir, log); break;
    case Stage::Detect: run_detect(config, dir, log); break;
    case Stage::Null: run_null(config, dir, log); break;
    case Stage::Metrics: run_metrics(config, dir, log); break;
    case Stage::Lifecycle: run_lifecycle(config, dir, log); break;
    case Stage::Report: run_report(config, dir, log); break;
  }

  Json manifest = key;
  Json outputs = Json::object();
  for (const auto& rel : list_outputs(dir)) outputs[rel] = sha256_file(dir / rel);
  manifest["outputs"] = outputs;
  write_text_file(manifest_path, manifest.dump(2) + "\n");
  return {stage, false, manifest_path};
}

int run_command(std::string_view command, const RunConfig& config, std::ostream& log,
                std::ostream& err) {
  std::vector<Stage> stages;
  if (command == "all") {
    stages = {Stage::Ingest, Stage::Detect,    Stage::Null,
              Stage::Metrics, Stage::Lifecycle, Stage::Report};
  } else if (auto s = parse_stage(command)) {
    stages = {*s};
  } else {
    err << "error: unknown command '" << command << "'\n";
    return kExitInput;
  }
  try {
    for (Stage s : stages) run_stage(s, config, log);
    return kExitOk;
  } catch (const MissingStage& e) {
    err << "error: " << e.what() << " (run '" << (e.stage() == "null" ? "null-run" : e.stage())
        << "' first)\n";
    return kExitMissingStage;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const StratumInfeasible& e) {
    err << "invariant violation: stratum " << e.stratum() << ": " << e.what() << "\n";
    return kExitInvariant;
  } catch (const InvariantError& e) {
    err << "invariant violation: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const fs::filesystem_error& e) {
    err << "filesystem error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace tertius
