#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tertius/corpus.hpp"
#include "tertius/random.hpp"
#include "tertius/table.hpp"

namespace tertius {

// Grouping inside which author-publication links are shuffled. Publications
// without a field label form their own per-year group under FieldYear.
enum class StrataSpec { FieldYear, Year, None };
StrataSpec parse_strata(const std::string& text);  // field_year|year|none
std::string to_string(StrataSpec spec);

struct NullModelConfig {
  std::size_t replicates = 10;
  std::uint64_t seed = 0;
  StrataSpec strata = StrataSpec::FieldYear;
  std::size_t max_repair_sweeps = 100;
};

struct RandomizedCorpus {
  Corpus corpus;
  std::uint64_t seed = 0;
  std::size_t replicate = 0;
  std::size_t repair_swaps = 0;
};

std::string stratum_label(const Corpus& corpus, PubIdx pub, StrataSpec spec);

// Matches author stubs (one per in-stratum publication of the author) to the
// publication slots of one stratum: uniform shuffle, then random pairwise
// swaps until no publication lists an author twice. A few reshuffles are tried
// before falling back to a greedy simple assignment scrambled by valid swaps.
// Throws StratumInfeasible when no simple assignment exists (Gale-Ryser).
// `swaps` accumulates accepted swaps.
std::vector<std::vector<AuthorIdx>> assign_stratum(std::span<const std::size_t> team_sizes,
                                                   std::vector<AuthorIdx> stubs, Rng& rng,
                                                   std::size_t max_sweeps,
                                                   const std::string& label,
                                                   std::size_t* swaps = nullptr);

// Degree-preserving randomization of the authorship links. Publication dates,
// venues, and citations are shared with the original unchanged.
RandomizedCorpus randomize(const Corpus& corpus, const NullModelConfig& config,
                           std::size_t replicate);

// True iff per stratum both degree multisets match and no publication lists an
// author twice.
bool verify_degrees(const Corpus& original, const Corpus& randomized, StrataSpec spec);

using Analysis = std::function<TableSet(const Corpus&)>;

struct EnsembleResult {
  std::vector<TableSet> replicates;
  // Per analysis table: key, column, n, mean, p2_5, p97_5.
  TableSet bands;
};

// Runs `analysis` on each replicate, concurrently across `threads`.
// Aggregation is independent of scheduling.
EnsembleResult null_ensemble(const Corpus& corpus, const NullModelConfig& config,
                             const Analysis& analysis, unsigned threads = 1);

// Mean and 2.5/97.5 percentile bands over replicate tables, keyed by the first
// column. Non-numeric and missing cells are skipped.
TableSet ensemble_bands(const std::vector<TableSet>& replicates);
std::string bands_json(const TableSet& bands);

// Linear-interpolation quantile of sorted values, q in [0,1].
double quantile_sorted(std::span<const double> sorted, double q);

}  // namespace tertius
