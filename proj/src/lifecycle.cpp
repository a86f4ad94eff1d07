#include "tertius/lifecycle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace tertius {

AbandonmentRecord abandonment(const MatchmakerEvent& event, const TemporalGraph& graph,
                              std::size_t event_index) {
  AbandonmentRecord rec;
  rec.event = event_index;
  const auto history = graph.collab().history(event.b, event.c);
  const auto after = std::upper_bound(history.begin(), history.end(), event.position);
  for (auto it = after; it != history.end(); ++it) {
    if (graph.careers().on_publication(event.matchmaker, *it)) {
      ++rec.n_abc;
    } else {
      if (rec.n_bc == 0) rec.first_abandonment_lag = graph.year_at(*it) - graph.year_at(event.position);
      ++rec.n_bc;
    }
  }
  rec.abandoned = rec.n_bc > rec.n_abc;
  return rec;
}

std::vector<AbandonmentRecord> abandonment_all(const std::vector<MatchmakerEvent>& events,
                                               const TemporalGraph& graph) {
  std::vector<AbandonmentRecord> out;
  out.reserve(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) out.push_back(abandonment(events[i], graph, i));
  return out;
}

Table abandonment_table(const std::vector<AbandonmentRecord>& records,
                        const std::vector<MatchmakerEvent>& events, const Corpus& corpus) {
  Table t;
  t.columns = {"pub_id", "matchmaker_id", "b_id", "c_id", "n_abc", "n_bc", "abandoned", "lag_years"};
  for (const auto& r : records) {
    const auto& e = events.at(r.event);
    t.add_row({corpus.pub_id(e.pub), corpus.author_id(e.matchmaker), corpus.author_id(e.b),
               corpus.author_id(e.c), static_cast<std::int64_t>(r.n_abc),
               static_cast<std::int64_t>(r.n_bc), static_cast<std::int64_t>(r.abandoned ? 1 : 0),
               optional_cell(r.first_abandonment_lag)});
  }
  return t;
}

std::string intensity_bin(std::uint32_t subsequent) {
  if (subsequent <= 2) return std::to_string(subsequent);
  if (subsequent <= 5) return "3-5";
  if (subsequent <= 10) return "6-10";
  return "11+";
}

int career_decile(std::uint32_t sequence_index, std::size_t career_total) {
  if (career_total == 0) return 1;
  const auto d = static_cast<int>((10 * static_cast<std::size_t>(sequence_index) + career_total - 1) /
                                  career_total);
  return std::clamp(d, 1, 10);
}

namespace {

int intensity_rank(std::uint32_t subsequent) {
  if (subsequent <= 2) return static_cast<int>(subsequent);
  if (subsequent <= 5) return 3;
  if (subsequent <= 10) return 4;
  return 5;
}

struct RateAcc {
  std::size_t records = 0;
  std::size_t abandoned = 0;
  void add(bool a) {
    ++records;
    abandoned += a;
  }
  [[nodiscard]] Cell rate() const {
    if (records == 0) return std::monostate{};
    return static_cast<double>(abandoned) / static_cast<double>(records);
  }
};

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

AbandonmentCurves abandonment_curves(const std::vector<AbandonmentRecord>& records,
                                     const std::vector<MatchmakerEvent>& events,
                                     const Careers& careers) {
  std::map<CountBin, RateAcc> by_count;
  std::map<CountBin, std::vector<double>> exclusion;
  std::vector<double> exclusion_all;
  std::map<int, RateAcc> by_intensity;
  std::map<int, std::vector<double>> lags;
  std::map<int, RateAcc> by_stage;
  RateAcc overall;
  for (const auto& r : records) {
    const auto& e = events.at(r.event);
    const auto total = careers.total_publications(e.matchmaker);
    const auto bin = publication_count_bin(total);
    by_count[bin].add(r.abandoned);
    overall.add(r.abandoned);
    const auto subsequent = r.n_abc + r.n_bc;
    if (subsequent >= 3) {
      const double share = static_cast<double>(r.n_bc) / static_cast<double>(subsequent);
      exclusion[bin].push_back(share);
      exclusion_all.push_back(share);
    }
    const int rank = intensity_rank(subsequent);
    by_intensity[rank].add(r.abandoned);
    lags[rank];  // keep every bin with records visible
    if (r.first_abandonment_lag) lags[rank].push_back(*r.first_abandonment_lag);
    by_stage[career_decile(e.a_sequence_index, total)].add(r.abandoned);
  }

  static const char* kIntensity[] = {"0", "1", "2", "3-5", "6-10", "11+"};
  AbandonmentCurves out;

  out.by_pubcount.columns = {"bin", "bin_lo", "records", "abandoned", "rate"};
  for (const auto& [bin, acc] : by_count) {
    out.by_pubcount.add_row({bin.label(), static_cast<std::int64_t>(bin.lo),
                             static_cast<std::int64_t>(acc.records),
                             static_cast<std::int64_t>(acc.abandoned), acc.rate()});
  }
  if (overall.records) {
    out.by_pubcount.add_row({std::string("all"), Cell{}, static_cast<std::int64_t>(overall.records),
                             static_cast<std::int64_t>(overall.abandoned), overall.rate()});
  }

  out.exclusion_share.columns = {"bin", "bin_lo", "records", "mean_exclusion_share",
                                 "median_exclusion_share"};
  for (const auto& [bin, shares] : exclusion) {
    double sum = 0;
    for (double s : shares) sum += s;
    out.exclusion_share.add_row({bin.label(), static_cast<std::int64_t>(bin.lo),
                                 static_cast<std::int64_t>(shares.size()),
                                 sum / static_cast<double>(shares.size()), median_of(shares)});
  }
  if (!exclusion_all.empty()) {
    double sum = 0;
    for (double s : exclusion_all) sum += s;
    out.exclusion_share.add_row({std::string("all"), Cell{},
                                 static_cast<std::int64_t>(exclusion_all.size()),
                                 sum / static_cast<double>(exclusion_all.size()),
                                 median_of(exclusion_all)});
  }

  out.by_intensity.columns = {"subsequent_pair_pubs", "records", "abandoned", "rate"};
  for (const auto& [rank, acc] : by_intensity) {
    out.by_intensity.add_row({std::string(kIntensity[rank]), static_cast<std::int64_t>(acc.records),
                              static_cast<std::int64_t>(acc.abandoned), acc.rate()});
  }

  out.lag.columns = {"subsequent_pair_pubs", "records_with_lag", "mean_lag_years",
                     "median_lag_years"};
  for (const auto& [rank, values] : lags) {
    if (values.empty()) {
      out.lag.add_row({std::string(kIntensity[rank]), std::int64_t{0}, Cell{}, Cell{}});
      continue;
    }
    double sum = 0;
    for (double v : values) sum += v;
    out.lag.add_row({std::string(kIntensity[rank]), static_cast<std::int64_t>(values.size()),
                     sum / static_cast<double>(values.size()), median_of(values)});
  }

  out.by_career_stage.columns = {"career_decile", "records", "abandoned", "rate"};
  for (const auto& [decile, acc] : by_stage) {
    out.by_career_stage.add_row({static_cast<std::int64_t>(decile),
                                 static_cast<std::int64_t>(acc.records),
                                 static_cast<std::int64_t>(acc.abandoned), acc.rate()});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Benefits

BenefitTables benefit_metrics(const std::vector<MatchmakerEvent>& events, const Careers& careers) {
  struct Researcher {
    std::set<AuthorIdx> matchmakers;
    std::set<AuthorIdx> partners;
    std::size_t events = 0;
  };
  struct Broker {
    std::set<AuthorIdx> beneficiaries;
    std::size_t events = 0;
  };
  std::map<AuthorIdx, Researcher> researchers;
  std::map<AuthorIdx, Broker> brokers;
  for (const auto& e : events) {
    auto& rb = researchers[e.b];
    rb.matchmakers.insert(e.matchmaker);
    rb.partners.insert(e.c);
    ++rb.events;
    auto& rc = researchers[e.c];
    rc.matchmakers.insert(e.matchmaker);
    rc.partners.insert(e.b);
    ++rc.events;
    auto& m = brokers[e.matchmaker];
    m.beneficiaries.insert(e.b);
    m.beneficiaries.insert(e.c);
    ++m.events;
  }
  BenefitTables out;
  for (const auto& [a, r] : researchers) {
    out.researchers.push_back({a, r.matchmakers.size(), r.partners.size(), r.events});
  }
  for (const auto& [a, m] : brokers) {
    out.matchmakers.push_back({a, careers.total_publications(a), m.beneficiaries.size(), m.events});
  }
  return out;
}

Table researcher_benefit_table(const BenefitTables& tables, const Corpus& corpus) {
  Table t;
  t.columns = {"author_id", "distinct_matchmakers", "distinct_new_collaborators", "events"};
  for (const auto& r : tables.researchers) {
    t.add_row({corpus.author_id(r.author), static_cast<std::int64_t>(r.distinct_matchmakers),
               static_cast<std::int64_t>(r.distinct_new_collaborators),
               static_cast<std::int64_t>(r.events)});
  }
  return t;
}

Table matchmaker_benefit_table(const BenefitTables& tables, const Corpus& corpus) {
  Table t;
  t.columns = {"author_id", "total_publications", "distinct_beneficiaries", "events"};
  for (const auto& m : tables.matchmakers) {
    t.add_row({corpus.author_id(m.author), static_cast<std::int64_t>(m.total_publications),
               static_cast<std::int64_t>(m.distinct_beneficiaries),
               static_cast<std::int64_t>(m.events)});
  }
  return t;
}

Table researcher_benefit_by_matchmakers(const BenefitTables& tables) {
  std::map<std::size_t, std::vector<double>> groups;
  for (const auto& r : tables.researchers) {
    groups[r.distinct_matchmakers].push_back(static_cast<double>(r.distinct_new_collaborators));
  }
  Table t;
  t.columns = {"distinct_matchmakers", "researchers", "mean_new_collaborators",
               "median_new_collaborators"};
  for (const auto& [k, v] : groups) {
    double sum = 0;
    for (double x : v) sum += x;
    t.add_row({static_cast<std::int64_t>(k), static_cast<std::int64_t>(v.size()),
               sum / static_cast<double>(v.size()), median_of(v)});
  }
  return t;
}

Table matchmaker_benefit_by_pubcount(const BenefitTables& tables) {
  std::map<CountBin, std::vector<double>> groups;
  for (const auto& m : tables.matchmakers) {
    groups[publication_count_bin(m.total_publications)].push_back(
        static_cast<double>(m.distinct_beneficiaries));
  }
  Table t;
  t.columns = {"bin", "bin_lo", "matchmakers", "mean_beneficiaries", "median_beneficiaries"};
  for (const auto& [bin, v] : groups) {
    double sum = 0;
    for (double x : v) sum += x;
    t.add_row({bin.label(), static_cast<std::int64_t>(bin.lo), static_cast<std::int64_t>(v.size()),
               sum / static_cast<double>(v.size()), median_of(v)});
  }
  return t;
}

// ---------------------------------------------------------------------------
// Career profile

CareerProfile career_profile(const std::vector<MatchmakerEvent>& events, const Careers& careers) {
  std::set<std::pair<AuthorIdx, Position>> matchmaking;
  std::map<AuthorIdx, const MatchmakerEvent*> first;
  for (const auto& e : events) {
    matchmaking.emplace(e.matchmaker, e.position);
    auto [it, inserted] = first.emplace(e.matchmaker, &e);
    if (!inserted && e.position < it->second->position) it->second = &e;
  }

  CareerProfile out;
  out.sequence_probability.columns = {"bin", "bin_lo", "publications", "matchmaking", "probability"};
  out.first_event_age.columns = {"academic_age", "count", "share"};
  out.first_event_joint.columns = {"sequence_index", "academic_age", "count"};
  out.copub_joint.columns = {"copubs_a_b", "copubs_a_c", "count"};
  out.copub_conditional.columns = {"copubs_a_b", "events", "mean_copubs_a_c"};
  if (events.empty()) return out;

  std::map<CountBin, std::pair<std::size_t, std::size_t>> seq;
  for (AuthorIdx a = 0; a < careers.author_count(); ++a) {
    const auto positions = careers.positions(a);
    for (std::size_t i = 0; i < positions.size(); ++i) {
      auto& cell = seq[publication_count_bin(i + 1)];
      ++cell.first;
      if (matchmaking.contains({a, positions[i]})) ++cell.second;
    }
  }
  for (const auto& [bin, cell] : seq) {
    out.sequence_probability.add_row(
        {bin.label(), static_cast<std::int64_t>(bin.lo), static_cast<std::int64_t>(cell.first),
         static_cast<std::int64_t>(cell.second),
         static_cast<double>(cell.second) / static_cast<double>(cell.first)});
  }

  std::map<int, std::size_t> ages;
  std::map<std::pair<std::uint32_t, int>, std::size_t> joint;
  for (const auto& [a, e] : first) {
    ++ages[e->a_age];
    ++joint[{e->a_sequence_index, e->a_age}];
  }
  for (const auto& [age, n] : ages) {
    out.first_event_age.add_row({static_cast<std::int64_t>(age), static_cast<std::int64_t>(n),
                                 static_cast<double>(n) / static_cast<double>(first.size())});
  }
  for (const auto& [key, n] : joint) {
    out.first_event_joint.add_row({static_cast<std::int64_t>(key.first),
                                   static_cast<std::int64_t>(key.second),
                                   static_cast<std::int64_t>(n)});
  }

  std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> copubs;
  std::map<std::uint32_t, std::pair<std::size_t, double>> conditional;
  for (const auto& e : events) {
    ++copubs[{e.copubs_a_b, e.copubs_a_c}];
    auto& c = conditional[e.copubs_a_b];
    ++c.first;
    c.second += e.copubs_a_c;
  }
  for (const auto& [key, n] : copubs) {
    out.copub_joint.add_row({static_cast<std::int64_t>(key.first),
                             static_cast<std::int64_t>(key.second), static_cast<std::int64_t>(n)});
  }
  for (const auto& [ab, c] : conditional) {
    out.copub_conditional.add_row({static_cast<std::int64_t>(ab), static_cast<std::int64_t>(c.first),
                                   c.second / static_cast<double>(c.first)});
  }
  return out;
}

}  // namespace tertius
