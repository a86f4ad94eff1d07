#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tertius/corpus.hpp"
#include "tertius/matchmaker.hpp"
#include "tertius/table.hpp"
#include "tertius/temporal_graph.hpp"

namespace tertius {

// What happened to a bridged pair after the event publication.
struct AbandonmentRecord {
  std::size_t event = 0;     // index into the event list
  std::uint32_t n_abc = 0;   // later pubs with a, b and c
  std::uint32_t n_bc = 0;    // later pubs with b and c but not a
  bool abandoned = false;    // n_bc > n_abc
  std::optional<int> first_abandonment_lag;  // years to the first b,c-without-a pub
};

// Counts publications strictly after the event position.
AbandonmentRecord abandonment(const MatchmakerEvent& event, const TemporalGraph& graph,
                              std::size_t event_index = 0);
std::vector<AbandonmentRecord> abandonment_all(const std::vector<MatchmakerEvent>& events,
                                               const TemporalGraph& graph);
Table abandonment_table(const std::vector<AbandonmentRecord>& records,
                        const std::vector<MatchmakerEvent>& events, const Corpus& corpus);

// Subsequent-intensity bins for n_abc + n_bc: 0, 1, 2, 3-5, 6-10, 11+.
std::string intensity_bin(std::uint32_t subsequent);

// Career stage: decile (1..10) of sequence index over career total.
int career_decile(std::uint32_t sequence_index, std::size_t career_total);

struct AbandonmentCurves {
  Table by_pubcount;      // rate vs match-maker total publications
  Table exclusion_share;  // n_bc / (n_bc + n_abc) where n_bc + n_abc >= 3
  Table by_intensity;     // rate vs n_bc + n_abc
  Table lag;              // mean / median first-abandonment lag by intensity
  Table by_career_stage;  // rate vs sequence-index decile at the event
};

AbandonmentCurves abandonment_curves(const std::vector<AbandonmentRecord>& records,
                                     const std::vector<MatchmakerEvent>& events,
                                     const Careers& careers);

struct ResearcherBenefit {
  AuthorIdx author = 0;
  std::size_t distinct_matchmakers = 0;
  std::size_t distinct_new_collaborators = 0;
  std::size_t events = 0;
};

struct MatchmakerBenefit {
  AuthorIdx author = 0;
  std::size_t total_publications = 0;
  std::size_t distinct_beneficiaries = 0;
  std::size_t events = 0;
};

struct BenefitTables {
  std::vector<ResearcherBenefit> researchers;  // ascending author index
  std::vector<MatchmakerBenefit> matchmakers;  // ascending author index
};

// b and c roles are pooled on the researcher side.
BenefitTables benefit_metrics(const std::vector<MatchmakerEvent>& events, const Careers& careers);
Table researcher_benefit_table(const BenefitTables& tables, const Corpus& corpus);
Table matchmaker_benefit_table(const BenefitTables& tables, const Corpus& corpus);
// New collaborators per researcher, grouped by distinct match-makers met.
Table researcher_benefit_by_matchmakers(const BenefitTables& tables);
// Beneficiaries per match-maker, grouped by career publication-count bin.
Table matchmaker_benefit_by_pubcount(const BenefitTables& tables);

struct CareerProfile {
  Table sequence_probability;  // P(pub n of an author is one where they act as match-maker)
  Table first_event_age;       // histogram of a's academic age at first event
  Table first_event_joint;     // (sequence index, academic age) at first event
  Table copub_joint;           // (copubs_a_b, copubs_a_c) histogram
  Table copub_conditional;     // mean copubs_a_c given copubs_a_b
};

CareerProfile career_profile(const std::vector<MatchmakerEvent>& events, const Careers& careers);

}  // namespace tertius
