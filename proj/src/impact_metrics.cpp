#include "tertius/impact_metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "tertius/nullmodel.hpp"
#include "tertius/random.hpp"

namespace tertius {

CitationWindows citation_windows(const Corpus& corpus, PubIdx pub, std::size_t* anachronistic) {
  CitationWindows w;
  const int year = corpus.year(pub);
  for (auto c : corpus.citers_of(pub)) {
    const int lag = corpus.year(c) - year;
    if (lag < 0) {
      if (anachronistic) ++*anachronistic;
      continue;
    }
    if (lag <= 3) ++w.c3;
    if (lag <= 5) ++w.c5;
    if (lag <= 10) ++w.c10;
  }
  return w;
}

// ---------------------------------------------------------------------------
// Disruption

DisruptionCalculator::DisruptionCalculator(const Corpus& corpus)
    : corpus_(corpus),
      ref_mark_(corpus.publication_count(), 0),
      seen_mark_(corpus.publication_count(), 0) {}

DisruptionCounts DisruptionCalculator::counts(PubIdx pub) {
  if (++stamp_ == 0) {  // wrapped; reset marks
    std::fill(ref_mark_.begin(), ref_mark_.end(), 0);
    std::fill(seen_mark_.begin(), seen_mark_.end(), 0);
    stamp_ = 1;
  }
  const int year = corpus_.year(pub);
  DisruptionCounts out;
  for (auto r : corpus_.refs_of(pub)) ref_mark_[r] = stamp_;
  seen_mark_[pub] = stamp_;
  for (auto c : corpus_.citers_of(pub)) {
    if (corpus_.year(c) <= year) continue;
    seen_mark_[c] = stamp_;
    const auto refs = corpus_.refs_of(c);
    const bool cites_ref =
        std::any_of(refs.begin(), refs.end(), [&](PubIdx r) { return ref_mark_[r] == stamp_; });
    if (cites_ref) {
      ++out.b;
    } else {
      ++out.f;
    }
  }
  for (auto r : corpus_.refs_of(pub)) {
    for (auto q : corpus_.citers_of(r)) {
      if (seen_mark_[q] == stamp_ || corpus_.year(q) <= year) continue;
      seen_mark_[q] = stamp_;
      ++out.r;
    }
  }
  return out;
}

std::optional<double> DisruptionCalculator::index(PubIdx pub, const DisruptionOptions& options) {
  if (corpus_.reference_count(pub) < options.min_references) return std::nullopt;
  const auto c = counts(pub);
  if (c.f + c.b < options.min_citations) return std::nullopt;
  const auto denom = c.f + c.b + c.r;
  if (denom == 0) return std::nullopt;
  return (static_cast<double>(c.f) - static_cast<double>(c.b)) / static_cast<double>(denom);
}

std::optional<double> disruption_index(const Corpus& corpus, PubIdx pub,
                                       const DisruptionOptions& options) {
  DisruptionCalculator calc(corpus);
  return calc.index(pub, options);
}

// ---------------------------------------------------------------------------
// Novelty

namespace {

std::uint64_t pair_key(std::int32_t u, std::int32_t v) {
  if (u > v) std::swap(u, v);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) |
         static_cast<std::uint32_t>(v);
}

}  // namespace

NoveltyScores novelty_scores(const Corpus& corpus, const NoveltyConfig& config) {
  NoveltyScores out;
  out.novelty.assign(corpus.publication_count(), std::nullopt);
  if (config.replicates < 1) throw InputError("novelty replicates must be >= 1");

  std::map<int, std::vector<PubIdx>> by_year;
  for (PubIdx p = 0; p < corpus.publication_count(); ++p) {
    if (!corpus.refs_of(p).empty()) by_year[corpus.year(p)].push_back(p);
  }

  std::vector<std::int32_t> labels;       // resolvable reference venues, year-wide
  std::vector<std::uint64_t> slot_start;  // per citing pub in the year
  std::vector<std::uint32_t> pair_slot;   // per (pub, ref pair) occurrence -> pair index
  std::vector<double> z;
  for (const auto& [year, pubs] : by_year) {
    labels.clear();
    slot_start.assign(1, 0);
    for (auto p : pubs) {
      for (auto r : corpus.refs_of(p)) {
        if (corpus.venue_index(r) != kNoIndex) labels.push_back(corpus.venue_index(r));
      }
      slot_start.push_back(labels.size());
    }

    // Observed pair counts; only pairs seen in the year are ever needed.
    std::unordered_map<std::uint64_t, std::uint32_t> pair_index;
    std::vector<std::uint32_t> observed;
    pair_slot.clear();
    for (std::size_t i = 0; i < pubs.size(); ++i) {
      for (auto u = slot_start[i]; u < slot_start[i + 1]; ++u) {
        for (auto v = u + 1; v < slot_start[i + 1]; ++v) {
          auto [it, added] = pair_index.emplace(pair_key(labels[u], labels[v]),
                                                static_cast<std::uint32_t>(observed.size()));
          if (added) observed.push_back(0);
          ++observed[it->second];
          pair_slot.push_back(it->second);
        }
      }
    }
    if (observed.empty()) continue;

    std::vector<double> sum(observed.size(), 0.0);
    std::vector<double> sum_sq(observed.size(), 0.0);
    std::vector<std::uint32_t> null_count(observed.size(), 0);
    std::vector<std::int32_t> shuffled;
    for (std::size_t rep = 0; rep < config.replicates; ++rep) {
      shuffled = labels;
      Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(year), rep));
      rng.shuffle(std::span<std::int32_t>(shuffled));
      std::fill(null_count.begin(), null_count.end(), 0);
      for (std::size_t i = 0; i < pubs.size(); ++i) {
        for (auto u = slot_start[i]; u < slot_start[i + 1]; ++u) {
          for (auto v = u + 1; v < slot_start[i + 1]; ++v) {
            auto it = pair_index.find(pair_key(shuffled[u], shuffled[v]));
            if (it != pair_index.end()) ++null_count[it->second];
          }
        }
      }
      for (std::size_t k = 0; k < observed.size(); ++k) {
        sum[k] += null_count[k];
        sum_sq[k] += static_cast<double>(null_count[k]) * null_count[k];
      }
    }

    const auto reps = static_cast<double>(config.replicates);
    std::vector<double> pair_z(observed.size(), std::nan(""));
    for (std::size_t k = 0; k < observed.size(); ++k) {
      const double mean = sum[k] / reps;
      const double var = std::max(0.0, sum_sq[k] / reps - mean * mean);
      const double sd = std::sqrt(var);
      if (sd > 1e-12) pair_z[k] = novelty_z(observed[k], mean, sd);
    }

    std::size_t cursor = 0;
    for (std::size_t i = 0; i < pubs.size(); ++i) {
      const auto n = slot_start[i + 1] - slot_start[i];
      const auto n_pairs = n > 1 ? n * (n - 1) / 2 : 0;
      z.clear();
      for (std::size_t k = 0; k < n_pairs; ++k) {
        const double v = pair_z[pair_slot[cursor++]];
        if (std::isnan(v)) {
          ++out.skipped_pairs;
        } else {
          z.push_back(v);
        }
      }
      if (n < 2 || z.empty()) continue;
      std::sort(z.begin(), z.end());
      out.novelty[pubs[i]] = quantile_sorted(z, 0.10);
    }
  }
  return out;
}

std::optional<double> novelty_index(const Corpus& corpus, PubIdx pub, const NoveltyConfig& config) {
  return novelty_scores(corpus, config).novelty.at(pub);
}

// ---------------------------------------------------------------------------
// Indicator records

std::vector<IndicatorRecord> compute_indicators(const Corpus& corpus,
                                                const IndicatorOptions& options,
                                                IndicatorTallies* tallies) {
  std::vector<IndicatorRecord> out(corpus.publication_count());
  DisruptionCalculator di(corpus);
  std::size_t anachronistic = 0;
  for (PubIdx p = 0; p < corpus.publication_count(); ++p) {
    auto& rec = out[p];
    rec.pub = p;
    const auto w = citation_windows(corpus, p, &anachronistic);
    rec.c3 = w.c3;
    rec.c5 = w.c5;
    rec.c10 = w.c10;
    if (auto q = corpus.quartile(p)) rec.q1 = (*q == Quartile::Q1);
    rec.di = di.index(p, options.disruption);
    rec.team_size = corpus.team_size(p);
    rec.year = corpus.year(p);
    rec.reference_count = corpus.reference_count(p);
  }
  std::size_t skipped = 0;
  if (options.compute_novelty) {
    auto scores = novelty_scores(corpus, options.novelty);
    skipped = scores.skipped_pairs;
    for (PubIdx p = 0; p < corpus.publication_count(); ++p) out[p].novelty = scores.novelty[p];
  }
  if (tallies) {
    tallies->anachronistic_citations = anachronistic;
    tallies->novelty_skipped_pairs = skipped;
  }
  return out;
}

Table indicators_table(const std::vector<IndicatorRecord>& records, const Corpus& corpus) {
  Table t;
  t.columns = {"pub_id", "c3",        "c5",   "c10", "q1",
               "di",     "novelty",   "team_size", "year", "reference_count"};
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return corpus.pub_id(records[a].pub) < corpus.pub_id(records[b].pub);
  });
  for (auto i : order) {
    const auto& r = records[i];
    Cell q1 = std::monostate{};
    if (r.q1) q1 = static_cast<std::int64_t>(*r.q1 ? 1 : 0);
    t.add_row({corpus.pub_id(r.pub), static_cast<std::int64_t>(r.c3),
               static_cast<std::int64_t>(r.c5), static_cast<std::int64_t>(r.c10), q1,
               optional_cell(r.di), optional_cell(r.novelty),
               static_cast<std::int64_t>(r.team_size), static_cast<std::int64_t>(r.year),
               static_cast<std::int64_t>(r.reference_count)});
  }
  return t;
}

// ---------------------------------------------------------------------------
// Percentiles

std::string to_string(Metric metric) {
  switch (metric) {
    case Metric::C3: return "c3";
    case Metric::C5: return "c5";
    case Metric::C10: return "c10";
    case Metric::DI: return "di";
    case Metric::Novelty: return "novelty";
  }
  return "?";
}

StrataScheme default_scheme(Metric metric) {
  return (metric == Metric::DI || metric == Metric::Novelty) ? StrataScheme::YearTeamRefBin
                                                              : StrataScheme::YearTeam;
}

std::string reference_bin(std::size_t reference_count) {
  if (reference_count < 5) return "[0,5)";
  if (reference_count < 10) return "[5,10)";
  if (reference_count < 20) return "[10,20)";
  if (reference_count < 40) return "[20,40)";
  return "[40,inf)";
}

const PercentileEntry* PercentileTable::find(PubIdx pub) const {
  auto it = index.find(pub);
  return it == index.end() ? nullptr : &entries[it->second];
}

namespace {

std::optional<double> metric_value(const IndicatorRecord& r, Metric metric) {
  switch (metric) {
    case Metric::C3: return r.c3;
    case Metric::C5: return r.c5;
    case Metric::C10: return r.c10;
    case Metric::DI: return r.di;
    case Metric::Novelty: return r.novelty;
  }
  return std::nullopt;
}

}  // namespace

PercentileTable stratified_percentiles(const std::vector<IndicatorRecord>& records, Metric metric) {
  return stratified_percentiles(records, metric, default_scheme(metric));
}

PercentileTable stratified_percentiles(const std::vector<IndicatorRecord>& records, Metric metric,
                                       StrataScheme scheme) {
  struct Item {
    PubIdx pub;
    double value;
  };
  std::map<std::tuple<int, std::size_t, std::string>, std::vector<Item>> strata;
  for (const auto& r : records) {
    const auto v = metric_value(r, metric);
    if (!v) continue;
    std::string bin = scheme == StrataScheme::YearTeamRefBin ? reference_bin(r.reference_count) : "";
    strata[{r.year, r.team_size, std::move(bin)}].push_back({r.pub, *v});
  }

  const bool lower_is_better = metric == Metric::Novelty;
  PercentileTable table;
  table.metric = metric;
  std::vector<double> sorted;
  for (auto& [key, items] : strata) {
    const auto& [year, size, bin] = key;
    std::string label = std::to_string(year) + "/" + std::to_string(size);
    if (!bin.empty()) label += "/" + bin;
    std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.pub < b.pub; });
    sorted.clear();
    for (const auto& it : items) sorted.push_back(it.value);
    std::sort(sorted.begin(), sorted.end());
    ++table.strata;
    if (sorted.front() == sorted.back()) ++table.degenerate_strata;
    const auto n = static_cast<double>(sorted.size());
    for (const auto& it : items) {
      std::size_t better;
      if (lower_is_better) {
        better = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), it.value) -
                                          sorted.begin());
      } else {
        better = static_cast<std::size_t>(sorted.end() -
                                          std::upper_bound(sorted.begin(), sorted.end(), it.value));
      }
      const double fraction = static_cast<double>(better) / n;
      table.index.emplace(it.pub, table.entries.size());
      table.entries.push_back({it.pub, label, fraction, fraction < 0.10});
    }
  }
  return table;
}

Table percentiles_table(const std::vector<PercentileTable>& tables, const Corpus& corpus) {
  Table t;
  t.columns = {"metric", "pub_id", "stratum", "rank_fraction", "flagged"};
  for (const auto& table : tables) {
    std::vector<const PercentileEntry*> entries;
    for (const auto& e : table.entries) entries.push_back(&e);
    std::sort(entries.begin(), entries.end(), [&](auto* a, auto* b) {
      return corpus.pub_id(a->pub) < corpus.pub_id(b->pub);
    });
    for (auto* e : entries) {
      t.add_row({to_string(table.metric), corpus.pub_id(e->pub), e->stratum, e->rank_fraction,
                 static_cast<std::int64_t>(e->flagged ? 1 : 0)});
    }
  }
  return t;
}

// ---------------------------------------------------------------------------
// Matching

std::vector<PsmPair> psm_match(const std::vector<PsmCovariates>& treated,
                               const std::vector<PsmCovariates>& pool, double caliper) {
  // year -> (age, id, index) available controls
  std::map<int, std::set<std::tuple<double, std::string, std::size_t>>> available;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    available[pool[i].year].emplace(pool[i].mean_age, pool[i].id, i);
  }
  std::vector<std::size_t> order(treated.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return treated[a].id < treated[b].id; });

  std::vector<PsmPair> pairs;
  for (auto ti : order) {
    const auto& t = treated[ti];
    auto year_it = available.find(t.year);
    if (year_it == available.end() || year_it->second.empty()) continue;
    auto& candidates = year_it->second;
    const double lo_age = t.mean_age - caliper;
    const double hi_age = t.mean_age + caliper;
    auto it = candidates.lower_bound({lo_age, std::string(), 0});
    const std::tuple<double, std::string, std::size_t>* best = nullptr;
    double best_distance = 0.0;
    for (; it != candidates.end() && std::get<0>(*it) <= hi_age; ++it) {
      const double d = std::abs(std::get<0>(*it) - t.mean_age);
      if (!best || d < best_distance || (d == best_distance && std::get<1>(*it) < std::get<1>(*best))) {
        best = &*it;
        best_distance = d;
      }
    }
    if (!best) continue;
    pairs.push_back({ti, std::get<2>(*best), best_distance});
    candidates.erase(*best);
  }
  return pairs;
}

std::optional<double> mean_academic_age(const Corpus& corpus, const TemporalGraph& graph,
                                        PubIdx pub) {
  const auto authors = corpus.authors_of(pub);
  if (authors.empty()) return std::nullopt;
  const Position t = graph.timeline().position_of(pub);
  double total = 0.0;
  for (auto a : authors) total += graph.academic_age(a, t);
  return total / static_cast<double>(authors.size());
}

PsmResult psm_compare(const Corpus& corpus, const TemporalGraph& graph,
                      const std::vector<PubIdx>& treated, std::vector<PubIdx> pool,
                      const PsmConfig& config) {
  std::set<PubIdx> treated_set(treated.begin(), treated.end());
  std::erase_if(pool, [&](PubIdx p) { return treated_set.contains(p); });

  std::vector<PsmCovariates> tc;
  std::vector<PubIdx> tc_pub;
  std::size_t no_age = 0;
  for (auto p : treated_set) {
    auto age = mean_academic_age(corpus, graph, p);
    if (!age) {
      ++no_age;
      continue;
    }
    tc.push_back({corpus.pub_id(p), corpus.year(p), *age});
    tc_pub.push_back(p);
  }
  std::vector<PsmCovariates> pc;
  std::vector<PubIdx> pc_pub;
  for (auto p : pool) {
    auto age = mean_academic_age(corpus, graph, p);
    if (!age) continue;
    pc.push_back({corpus.pub_id(p), corpus.year(p), *age});
    pc_pub.push_back(p);
  }

  PsmResult result;
  const auto pairs = psm_match(tc, pc, config.caliper);
  result.unmatched = tc.size() - pairs.size() + no_age;
  result.matches_table.columns = {"treated_id", "control_id", "year", "age_distance"};
  for (const auto& pair : pairs) {
    const PubIdx t = tc_pub[pair.treated];
    const PubIdx c = pc_pub[pair.control];
    result.matches.emplace_back(t, c);
    result.age_distance.push_back(pair.age_distance);
    result.matches_table.add_row({corpus.pub_id(t), corpus.pub_id(c),
                                  static_cast<std::int64_t>(corpus.year(t)), pair.age_distance});
  }

  // Quartile distribution.
  std::array<std::size_t, 5> tq{}, cq{};  // Q1..Q4, unknown
  for (const auto& [t, c] : result.matches) {
    auto slot = [&](PubIdx p) {
      auto q = corpus.quartile(p);
      return q ? static_cast<std::size_t>(*q) - 1 : 4;
    };
    ++tq[slot(t)];
    ++cq[slot(c)];
  }
  auto share = [](std::size_t k, std::size_t n) -> Cell {
    if (n == 0) return std::monostate{};
    return static_cast<double>(k) / static_cast<double>(n);
  };
  const std::size_t t_known = tq[0] + tq[1] + tq[2] + tq[3];
  const std::size_t c_known = cq[0] + cq[1] + cq[2] + cq[3];
  result.quartiles.columns = {"quartile", "treated_count", "treated_share", "control_count",
                              "control_share"};
  static constexpr const char* kNames[] = {"Q1", "Q2", "Q3", "Q4", "unknown"};
  for (std::size_t i = 0; i < 5; ++i) {
    const bool known = i < 4;
    result.quartiles.add_row({std::string(kNames[i]), static_cast<std::int64_t>(tq[i]),
                              known ? share(tq[i], t_known) : Cell{},
                              static_cast<std::int64_t>(cq[i]),
                              known ? share(cq[i], c_known) : Cell{}});
  }

  // Mean cumulative citations by years since publication.
  result.trajectories.columns = {"years_since", "treated_mean", "control_mean",
                                 "treated_mean_log1p", "control_mean_log1p"};
  for (int k = 0; k <= config.trajectory_years; ++k) {
    double ts = 0, cs = 0, tl = 0, cl = 0;
    for (const auto& [t, c] : result.matches) {
      auto cum = [&](PubIdx p) {
        std::size_t n = 0;
        for (auto q : corpus.citers_of(p)) {
          const int lag = corpus.year(q) - corpus.year(p);
          if (lag >= 0 && lag <= k) ++n;
        }
        return static_cast<double>(n);
      };
      const double vt = cum(t), vc = cum(c);
      ts += vt;
      cs += vc;
      tl += std::log1p(vt);
      cl += std::log1p(vc);
    }
    const auto n = static_cast<double>(result.matches.size());
    if (result.matches.empty()) {
      result.trajectories.add_row({static_cast<std::int64_t>(k), Cell{}, Cell{}, Cell{}, Cell{}});
    } else {
      result.trajectories.add_row({static_cast<std::int64_t>(k), ts / n, cs / n, tl / n, cl / n});
    }
  }

  result.summary.columns = {"treated", "matched", "unmatched", "treated_q1_share",
                            "control_q1_share", "q1_share_difference"};
  const Cell tq1 = share(tq[0], t_known);
  const Cell cq1 = share(cq[0], c_known);
  Cell diff = std::monostate{};
  if (t_known && c_known) {
    diff = std::get<double>(tq1) - std::get<double>(cq1);
  }
  result.summary.add_row({static_cast<std::int64_t>(treated_set.size()),
                          static_cast<std::int64_t>(pairs.size()),
                          static_cast<std::int64_t>(result.unmatched), tq1, cq1, diff});
  return result;
}

// ---------------------------------------------------------------------------
// Impact profile

Table impact_profile(const std::vector<PubIdx>& pubs, const ProfileInputs& inputs) {
  struct Acc {
    std::size_t n = 0;
    std::size_t q1_known = 0, q1 = 0;
    std::size_t top_c3 = 0, top_c5 = 0, top_c10 = 0, cit_known = 0;
    std::size_t di_known = 0, top_di = 0, di_pos = 0;
    std::size_t nov_known = 0, low_nov = 0, nov_neg = 0;
  };
  std::map<std::size_t, Acc> groups;
  Acc all;
  auto flagged = [](const PercentileTable* t, PubIdx p) {
    if (!t) return false;
    const auto* e = t->find(p);
    return e && e->flagged;
  };
  std::set<PubIdx> distinct(pubs.begin(), pubs.end());
  for (auto p : distinct) {
    const auto& r = inputs.records->at(p);
    for (Acc* acc : {&groups[r.team_size], &all}) {
      ++acc->n;
      if (r.q1) {
        ++acc->q1_known;
        if (*r.q1) ++acc->q1;
      }
      ++acc->cit_known;
      acc->top_c3 += flagged(inputs.c3, p);
      acc->top_c5 += flagged(inputs.c5, p);
      acc->top_c10 += flagged(inputs.c10, p);
      if (r.di) {
        ++acc->di_known;
        acc->top_di += flagged(inputs.di, p);
        acc->di_pos += *r.di > 0;
      }
      if (r.novelty) {
        ++acc->nov_known;
        acc->low_nov += flagged(inputs.novelty, p);
        acc->nov_neg += *r.novelty < 0;
      }
    }
  }
  auto share = [](std::size_t k, std::size_t n) -> Cell {
    if (n == 0) return std::monostate{};
    return static_cast<double>(k) / static_cast<double>(n);
  };
  Table t;
  t.columns = {"team_size",       "publications",     "q1_share",           "top10_c3_share",
               "top10_c5_share",  "top10_c10_share",  "top10_di_share",     "di_positive_share",
               "low10_novelty_share", "novelty_negative_share"};
  auto row = [&](Cell key, const Acc& a) {
    t.add_row({std::move(key), static_cast<std::int64_t>(a.n), share(a.q1, a.q1_known),
               share(a.top_c3, a.cit_known), share(a.top_c5, a.cit_known),
               share(a.top_c10, a.cit_known), share(a.top_di, a.di_known),
               share(a.di_pos, a.di_known), share(a.low_nov, a.nov_known),
               share(a.nov_neg, a.nov_known)});
  };
  for (const auto& [size, acc] : groups) row(static_cast<std::int64_t>(size), acc);
  if (!groups.empty()) row(std::string("all"), all);
  return t;
}

}  // namespace tertius
