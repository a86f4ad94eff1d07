#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tertius/corpus.hpp"
#include "tertius/table.hpp"
#include "tertius/temporal_graph.hpp"

namespace tertius {

// A publication where a bridges the first collaboration of x and y (x < y).
struct PairEvent {
  Position position = 0;
  PubIdx pub = 0;
  AuthorIdx a = 0;
  AuthorIdx x = 0;
  AuthorIdx y = 0;

  friend auto operator<=>(const PairEvent&, const PairEvent&) = default;
};

struct MatchmakerEvent {
  Position position = 0;
  PubIdx pub = 0;
  AuthorIdx matchmaker = 0;
  AuthorIdx b = 0;  // the more frequent prior collaborator of the match-maker
  AuthorIdx c = 0;
  std::uint32_t copubs_a_b = 0;
  std::uint32_t copubs_a_c = 0;
  std::uint32_t team_size = 0;
  std::uint32_t a_sequence_index = 0;
  int a_age = 0;
  int b_age = 0;
  int c_age = 0;
  int year = 0;

  friend bool operator==(const MatchmakerEvent&, const MatchmakerEvent&) = default;
};

// Every (publication, a, {x,y}) with x, y prior collaborators of a and no
// prior collaboration between x and y. Sorted by (position, a, x, y).
std::vector<PairEvent> detect_events(const Corpus& corpus, const TemporalGraph& graph);

// b gets strictly more prior copubs with a; ties go to the earlier first
// meeting date with a, then to the smaller author id.
MatchmakerEvent assign_roles(const PairEvent& event, const Corpus& corpus,
                             const TemporalGraph& graph);

// detect_events followed by assign_roles.
std::vector<MatchmakerEvent> detect_matchmakers(const Corpus& corpus, const TemporalGraph& graph);

struct FilterConfig {
  bool single_matchmaker_only = false;
  std::optional<int> min_bc_academic_age;  // drop when min(b_age, c_age) <= value
  std::optional<std::uint32_t> min_prior_copubs;  // drop when min(copubs) < value
  std::optional<int> max_event_year;              // drop when year > value
};

std::vector<MatchmakerEvent> apply_filters(const std::vector<MatchmakerEvent>& events,
                                           const FilterConfig& config);

// Distinct match-makers per event-bearing publication -> number of publications.
std::map<std::size_t, std::size_t> matchmakers_per_publication(
    const std::vector<MatchmakerEvent>& events);

// Publication-count bins: 1..50 singly, then width 10 up to 150, then 151+.
struct CountBin {
  std::size_t lo = 0;
  std::optional<std::size_t> hi;  // inclusive; nullopt = open-ended
  [[nodiscard]] std::string label() const;
  friend auto operator<=>(const CountBin&, const CountBin&) = default;
};
CountBin publication_count_bin(std::size_t count);

struct PrevalencePoint {
  CountBin bin;
  std::size_t authors = 0;              // authors whose total falls in the bin
  std::size_t matchmakers = 0;
  std::size_t authors_at_least = 0;     // authors with total >= bin.lo
  std::size_t matchmakers_at_least = 0;
  [[nodiscard]] std::optional<double> probability() const;
  [[nodiscard]] std::optional<double> probability_at_least() const;
};

struct PrevalenceCurve {
  std::vector<PrevalencePoint> points;
  // Match-maker career totals: (total publications, cumulative share of match-makers).
  std::vector<std::pair<std::size_t, double>> matchmaker_count_cdf;
};

PrevalenceCurve prevalence_vs_pubcount(const std::vector<MatchmakerEvent>& events,
                                       const Careers& careers);
// Optional null curve adds a mean-probability column per bin.
Table prevalence_table(const PrevalenceCurve& observed, const PrevalenceCurve* null = nullptr);
Table prevalence_cdf_table(const PrevalenceCurve& curve);

enum class ActiveDefinition { Default, Min3InYear, P90Threshold };
ActiveDefinition parse_active_definition(const std::string& text);  // throws InputError
std::string to_string(ActiveDefinition def);

struct AnnualRate {
  int year = 0;
  std::size_t active = 0;
  std::size_t active_matchmakers = 0;
  std::optional<std::size_t> threshold;  // p90 yearly count threshold
  [[nodiscard]] std::optional<double> rate() const;
};

std::vector<AnnualRate> annual_matchmaker_rate(const std::vector<MatchmakerEvent>& events,
                                               const TemporalGraph& graph,
                                               ActiveDefinition definition, int first_year = 1980,
                                               int last_year = 2019);
Table annual_rate_table(const std::vector<AnnualRate>& rates);

enum class TeamSizeMode { SingleMatchmaker, MultiMatchmaker };
std::map<std::size_t, std::size_t> team_size_distribution(const std::vector<MatchmakerEvent>& events,
                                                          TeamSizeMode mode);

Table histogram_table(const std::map<std::size_t, std::size_t>& histogram,
                      const std::string& key_column, const std::string& value_column = "count");

Table events_table(const std::vector<MatchmakerEvent>& events, const Corpus& corpus,
                   const TemporalGraph& graph);

}  // namespace tertius
