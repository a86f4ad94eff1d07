#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "tertius/corpus.hpp"
#include "tertius/table.hpp"
#include "tertius/temporal_graph.hpp"

namespace tertius {

// Cumulative citations within N years, inclusive of year 0 and year N.
struct CitationWindows {
  std::uint32_t c3 = 0;
  std::uint32_t c5 = 0;
  std::uint32_t c10 = 0;
};

// `anachronistic` counts citers dated before the cited publication; they are
// excluded from every window.
CitationWindows citation_windows(const Corpus& corpus, PubIdx pub,
                                 std::size_t* anachronistic = nullptr);

struct DisruptionOptions {
  std::size_t min_references = 5;
  std::size_t min_citations = 5;  // applied to |F| + |B|
};

// F: citers of the focal pub citing none of its references. B: citers citing
// at least one reference. R: pubs citing a reference but not the focal pub.
// Only publications from years after the focal year take part.
struct DisruptionCounts {
  std::size_t f = 0;
  std::size_t b = 0;
  std::size_t r = 0;
};

// Reusable scratch space for computing many indices over one corpus.
class DisruptionCalculator {
 public:
  explicit DisruptionCalculator(const Corpus& corpus);
  DisruptionCounts counts(PubIdx pub);
  std::optional<double> index(PubIdx pub, const DisruptionOptions& options = {});

 private:
  const Corpus& corpus_;
  std::vector<std::uint32_t> ref_mark_;
  std::vector<std::uint32_t> seen_mark_;
  std::uint32_t stamp_ = 0;
};

std::optional<double> disruption_index(const Corpus& corpus, PubIdx pub,
                                       const DisruptionOptions& options = {});

// (observed - null mean) / null sd.
constexpr double novelty_z(double observed, double null_mean, double null_sd) {
  return (observed - null_mean) / null_sd;
}

struct NoveltyConfig {
  std::size_t replicates = 10;
  std::uint64_t seed = 0;
};

struct NoveltyScores {
  std::vector<std::optional<double>> novelty;  // indexed by PubIdx
  std::size_t skipped_pairs = 0;               // pair occurrences with zero null sd
};

// Venue-pair atypicality. Per citing year, the venue labels of resolvable
// references are permuted across all reference slots of that year, keeping
// every citing publication's reference count and every venue's citation
// count. A publication's novelty is the 10th percentile of the z-scores of
// its reference pairs.
NoveltyScores novelty_scores(const Corpus& corpus, const NoveltyConfig& config);
std::optional<double> novelty_index(const Corpus& corpus, PubIdx pub, const NoveltyConfig& config);

struct IndicatorRecord {
  PubIdx pub = 0;
  std::uint32_t c3 = 0;
  std::uint32_t c5 = 0;
  std::uint32_t c10 = 0;
  std::optional<bool> q1;
  std::optional<double> di;
  std::optional<double> novelty;
  std::size_t team_size = 0;
  int year = 0;
  std::size_t reference_count = 0;
};

struct IndicatorOptions {
  DisruptionOptions disruption;
  bool compute_novelty = true;
  NoveltyConfig novelty;
};

struct IndicatorTallies {
  std::size_t anachronistic_citations = 0;
  std::size_t novelty_skipped_pairs = 0;
};

// One record per publication, indexed by PubIdx.
std::vector<IndicatorRecord> compute_indicators(const Corpus& corpus,
                                                const IndicatorOptions& options,
                                                IndicatorTallies* tallies = nullptr);
Table indicators_table(const std::vector<IndicatorRecord>& records, const Corpus& corpus);

enum class Metric { C3, C5, C10, DI, Novelty };
std::string to_string(Metric metric);

enum class StrataScheme { YearTeam, YearTeamRefBin };
StrataScheme default_scheme(Metric metric);

// [5,10) [10,20) [20,40) [40,inf); counts below 5 land in [0,5).
std::string reference_bin(std::size_t reference_count);

struct PercentileEntry {
  PubIdx pub = 0;
  std::string stratum;
  double rank_fraction = 0.0;
  bool flagged = false;
};

// Rank fraction = share of the stratum strictly better than the publication
// (greater values, or smaller for novelty). Flag = fraction < 0.10.
struct PercentileTable {
  Metric metric = Metric::C10;
  std::vector<PercentileEntry> entries;  // grouped by stratum, then ascending PubIdx
  std::size_t strata = 0;
  std::size_t degenerate_strata = 0;  // every value equal (includes size 1)
  std::unordered_map<PubIdx, std::size_t> index;

  [[nodiscard]] const PercentileEntry* find(PubIdx pub) const;
};

PercentileTable stratified_percentiles(const std::vector<IndicatorRecord>& records, Metric metric);
PercentileTable stratified_percentiles(const std::vector<IndicatorRecord>& records, Metric metric,
                                       StrataScheme scheme);
Table percentiles_table(const std::vector<PercentileTable>& tables, const Corpus& corpus);

// Propensity-style matching: exact year, nearest mean academic age.
struct PsmCovariates {
  std::string id;
  int year = 0;
  double mean_age = 0.0;
};

struct PsmPair {
  std::size_t treated = 0;  // index into the treated input
  std::size_t control = 0;  // index into the pool input
  double age_distance = 0.0;
};

// 1:1 nearest neighbour without replacement, treated processed by ascending
// id. Ties go to the smaller pool id. Treated with no pool entry within the
// caliper stay unmatched.
std::vector<PsmPair> psm_match(const std::vector<PsmCovariates>& treated,
                               const std::vector<PsmCovariates>& pool, double caliper);

// Mean academic age of the byline at the publication; nullopt for no authors.
std::optional<double> mean_academic_age(const Corpus& corpus, const TemporalGraph& graph,
                                        PubIdx pub);

struct PsmConfig {
  double caliper = 2.0;
  int trajectory_years = 10;
};

struct PsmResult {
  std::vector<std::pair<PubIdx, PubIdx>> matches;
  std::vector<double> age_distance;
  std::size_t unmatched = 0;
  Table matches_table;
  Table quartiles;     // distribution, treated vs control
  Table trajectories;  // mean cumulative citations by years since publication
  Table summary;
};

// Pool members that are also treated are dropped.
PsmResult psm_compare(const Corpus& corpus, const TemporalGraph& graph,
                      const std::vector<PubIdx>& treated, std::vector<PubIdx> pool,
                      const PsmConfig& config);

struct ProfileInputs {
  const std::vector<IndicatorRecord>* records = nullptr;
  const PercentileTable* c3 = nullptr;
  const PercentileTable* c5 = nullptr;
  const PercentileTable* c10 = nullptr;
  const PercentileTable* di = nullptr;
  const PercentileTable* novelty = nullptr;
};

// Shares per team size over the given publications, plus an "all" row.
Table impact_profile(const std::vector<PubIdx>& pubs, const ProfileInputs& inputs);

}  // namespace tertius
