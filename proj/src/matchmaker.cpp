#include "tertius/matchmaker.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <unordered_map>

namespace tertius {

std::vector<PairEvent> detect_events(const Corpus& corpus, const TemporalGraph& graph) {
  const auto& collab = graph.collab();
  std::vector<PairEvent> events;
  std::vector<std::uint32_t> prior;  // k x k prior-copub matrix of the byline
  std::vector<AuthorIdx> authors;
  std::vector<std::size_t> partners;
  for (Position t = 0; t < graph.timeline().size(); ++t) {
    const PubIdx p = graph.timeline().at(t);
    const auto byline = corpus.authors_of(p);
    if (byline.size() < 3) continue;
    authors.assign(byline.begin(), byline.end());
    std::sort(authors.begin(), authors.end());
    const std::size_t k = authors.size();
    prior.assign(k * k, 0);
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = i + 1; j < k; ++j) {
        const auto c = collab.count_before(authors[i], authors[j], t);
        prior[i * k + j] = c;
        prior[j * k + i] = c;
      }
    }
    // Only a's prior collaborators on this byline can form a bridged pair.
    for (std::size_t ia = 0; ia < k; ++ia) {
      partners.clear();
      for (std::size_t j = 0; j < k; ++j) {
        if (j != ia && prior[ia * k + j] > 0) partners.push_back(j);
      }
      for (std::size_t u = 0; u < partners.size(); ++u) {
        for (std::size_t v = u + 1; v < partners.size(); ++v) {
          if (prior[partners[u] * k + partners[v]] == 0) {
            events.push_back({t, p, authors[ia], authors[partners[u]], authors[partners[v]]});
          }
        }
      }
    }
  }
  return events;
}

MatchmakerEvent assign_roles(const PairEvent& event, const Corpus& corpus,
                             const TemporalGraph& graph) {
  const auto& collab = graph.collab();
  const Position t = event.position;
  const auto cx = collab.count_before(event.a, event.x, t);
  const auto cy = collab.count_before(event.a, event.y, t);

  bool x_is_b;
  if (cx != cy) {
    x_is_b = cx > cy;
  } else {
    const auto fx = collab.first_position(event.a, event.x);
    const auto fy = collab.first_position(event.a, event.y);
    const Date dx = fx ? graph.date_at(*fx) : Date{};
    const Date dy = fy ? graph.date_at(*fy) : Date{};
    if (dx != dy) {
      x_is_b = dx < dy;
    } else {
      x_is_b = corpus.author_id(event.x) < corpus.author_id(event.y);
    }
  }

  MatchmakerEvent e;
  e.position = t;
  e.pub = event.pub;
  e.matchmaker = event.a;
  e.b = x_is_b ? event.x : event.y;
  e.c = x_is_b ? event.y : event.x;
  e.copubs_a_b = x_is_b ? cx : cy;
  e.copubs_a_c = x_is_b ? cy : cx;
  e.team_size = static_cast<std::uint32_t>(corpus.team_size(event.pub));
  e.a_sequence_index = graph.careers().sequence_index(event.a, t).value_or(0);
  e.a_age = graph.academic_age(event.a, t);
  e.b_age = graph.academic_age(e.b, t);
  e.c_age = graph.academic_age(e.c, t);
  e.year = graph.year_at(t);
  return e;
}

std::vector<MatchmakerEvent> detect_matchmakers(const Corpus& corpus, const TemporalGraph& graph) {
  const auto raw = detect_events(corpus, graph);
  std::vector<MatchmakerEvent> out;
  out.reserve(raw.size());
  for (const auto& e : raw) out.push_back(assign_roles(e, corpus, graph));
  return out;
}

namespace {

// Distinct match-makers per publication.
std::unordered_map<PubIdx, std::size_t> matchmaker_counts(const std::vector<MatchmakerEvent>& events) {
  std::set<std::pair<PubIdx, AuthorIdx>> seen;
  std::unordered_map<PubIdx, std::size_t> counts;
  for (const auto& e : events) {
    if (seen.emplace(e.pub, e.matchmaker).second) ++counts[e.pub];
  }
  return counts;
}

}  // namespace

std::vector<MatchmakerEvent> apply_filters(const std::vector<MatchmakerEvent>& events,
                                           const FilterConfig& config) {
  std::unordered_map<PubIdx, std::size_t> per_pub;
  if (config.single_matchmaker_only) per_pub = matchmaker_counts(events);
  std::vector<MatchmakerEvent> out;
  for (const auto& e : events) {
    if (config.single_matchmaker_only && per_pub.at(e.pub) > 1) continue;
    if (config.min_bc_academic_age && std::min(e.b_age, e.c_age) <= *config.min_bc_academic_age) {
      continue;
    }
    if (config.min_prior_copubs && std::min(e.copubs_a_b, e.copubs_a_c) < *config.min_prior_copubs) {
      continue;
    }
    if (config.max_event_year && e.year > *config.max_event_year) continue;
    out.push_back(e);
  }
  return out;
}

std::map<std::size_t, std::size_t> matchmakers_per_publication(
    const std::vector<MatchmakerEvent>& events) {
  std::map<std::size_t, std::size_t> hist;
  for (const auto& [pub, count] : matchmaker_counts(events)) ++hist[count];
  return hist;
}

// ---------------------------------------------------------------------------
// Prevalence

std::string CountBin::label() const {
  if (!hi) return std::to_string(lo) + "+";
  if (*hi == lo) return std::to_string(lo);
  return std::to_string(lo) + "-" + std::to_string(*hi);
}

CountBin publication_count_bin(std::size_t count) {
  if (count <= 50) return {count, count};
  if (count <= 150) {
    const std::size_t lo = 51 + (count - 51) / 10 * 10;
    return {lo, lo + 9};
  }
  return {151, std::nullopt};
}

std::optional<double> PrevalencePoint::probability() const {
  if (authors == 0) return std::nullopt;
  return static_cast<double>(matchmakers) / static_cast<double>(authors);
}

std::optional<double> PrevalencePoint::probability_at_least() const {
  if (authors_at_least == 0) return std::nullopt;
  return static_cast<double>(matchmakers_at_least) / static_cast<double>(authors_at_least);
}

PrevalenceCurve prevalence_vs_pubcount(const std::vector<MatchmakerEvent>& events,
                                       const Careers& careers) {
  std::vector<bool> is_mm(careers.author_count(), false);
  for (const auto& e : events) is_mm[e.matchmaker] = true;

  std::map<CountBin, PrevalencePoint> bins;
  std::map<std::size_t, std::size_t> mm_totals;
  std::size_t n_mm = 0;
  for (AuthorIdx a = 0; a < careers.author_count(); ++a) {
    const auto total = careers.total_publications(a);
    if (total == 0) continue;
    const auto bin = publication_count_bin(total);
    auto& point = bins[bin];
    point.bin = bin;
    ++point.authors;
    if (is_mm[a]) {
      ++point.matchmakers;
      ++mm_totals[total];
      ++n_mm;
    }
  }

  PrevalenceCurve curve;
  for (auto& [bin, point] : bins) curve.points.push_back(point);
  // Suffix sums give the ">= lo" view.
  std::size_t authors_tail = 0;
  std::size_t mm_tail = 0;
  for (auto it = curve.points.rbegin(); it != curve.points.rend(); ++it) {
    authors_tail += it->authors;
    mm_tail += it->matchmakers;
    it->authors_at_least = authors_tail;
    it->matchmakers_at_least = mm_tail;
  }
  std::size_t running = 0;
  for (const auto& [total, count] : mm_totals) {
    running += count;
    curve.matchmaker_count_cdf.emplace_back(
        total, static_cast<double>(running) / static_cast<double>(n_mm));
  }
  return curve;
}

Table prevalence_table(const PrevalenceCurve& observed, const PrevalenceCurve* null) {
  Table t;
  t.columns = {"bin", "bin_lo", "authors", "matchmakers", "probability", "authors_at_least",
               "matchmakers_at_least", "probability_at_least"};
  std::map<CountBin, const PrevalencePoint*> null_points;
  if (null) {
    t.columns.push_back("null_probability");
    t.columns.push_back("null_probability_at_least");
    for (const auto& p : null->points) null_points[p.bin] = &p;
  }
  for (const auto& p : observed.points) {
    std::vector<Cell> row{p.bin.label(),
                          static_cast<std::int64_t>(p.bin.lo),
                          static_cast<std::int64_t>(p.authors),
                          static_cast<std::int64_t>(p.matchmakers),
                          optional_cell(p.probability()),
                          static_cast<std::int64_t>(p.authors_at_least),
                          static_cast<std::int64_t>(p.matchmakers_at_least),
                          optional_cell(p.probability_at_least())};
    if (null) {
      auto it = null_points.find(p.bin);
      if (it == null_points.end()) {
        row.emplace_back(std::monostate{});
        row.emplace_back(std::monostate{});
      } else {
        row.push_back(optional_cell(it->second->probability()));
        row.push_back(optional_cell(it->second->probability_at_least()));
      }
    }
    t.add_row(std::move(row));
  }
  return t;
}

Table prevalence_cdf_table(const PrevalenceCurve& curve) {
  Table t;
  t.columns = {"total_publications", "cumulative_share"};
  for (const auto& [total, share] : curve.matchmaker_count_cdf) {
    t.add_row({static_cast<std::int64_t>(total), share});
  }
  return t;
}

// ---------------------------------------------------------------------------
// Annual rate

ActiveDefinition parse_active_definition(const std::string& text) {
  if (text == "default") return ActiveDefinition::Default;
  if (text == "min3_in_year") return ActiveDefinition::Min3InYear;
  if (text == "p90_threshold") return ActiveDefinition::P90Threshold;
  throw InputError("unknown active-author definition '" + text +
                   "' (want default|min3_in_year|p90_threshold)");
}

std::string to_string(ActiveDefinition def) {
  switch (def) {
    case ActiveDefinition::Default: return "default";
    case ActiveDefinition::Min3InYear: return "min3_in_year";
    case ActiveDefinition::P90Threshold: return "p90_threshold";
  }
  return "?";
}

std::optional<double> AnnualRate::rate() const {
  if (active == 0) return std::nullopt;
  return static_cast<double>(active_matchmakers) / static_cast<double>(active);
}

std::vector<AnnualRate> annual_matchmaker_rate(const std::vector<MatchmakerEvent>& events,
                                               const TemporalGraph& graph,
                                               ActiveDefinition definition, int first_year,
                                               int last_year) {
  std::set<std::pair<int, AuthorIdx>> mm_years;
  for (const auto& e : events) mm_years.emplace(e.year, e.matchmaker);

  struct YearCount {
    AuthorIdx author;
    std::uint32_t in_year;
    std::uint32_t cumulative;  // through the end of the year
  };
  std::map<int, std::vector<YearCount>> by_year;
  const auto& careers = graph.careers();
  for (AuthorIdx a = 0; a < careers.author_count(); ++a) {
    std::uint32_t cumulative = 0;
    const auto positions = careers.positions(a);
    for (std::size_t i = 0; i < positions.size();) {
      const int y = graph.year_at(positions[i]);
      std::uint32_t in_year = 0;
      while (i < positions.size() && graph.year_at(positions[i]) == y) {
        ++in_year;
        ++i;
      }
      cumulative += in_year;
      if (y >= first_year && y <= last_year) by_year[y].push_back({a, in_year, cumulative});
    }
  }

  std::vector<AnnualRate> out;
  for (int y = first_year; y <= last_year; ++y) {
    AnnualRate r;
    r.year = y;
    auto it = by_year.find(y);
    if (it == by_year.end()) {
      out.push_back(r);
      continue;
    }
    const auto& rows = it->second;
    std::uint32_t threshold = 0;
    if (definition == ActiveDefinition::P90Threshold) {
      // Nearest-rank 90th percentile of yearly counts among publishing authors.
      std::vector<std::uint32_t> counts;
      counts.reserve(rows.size());
      for (const auto& row : rows) counts.push_back(row.in_year);
      std::sort(counts.begin(), counts.end());
      const std::size_t rank = (counts.size() * 9 + 9) / 10;  // ceil(0.9 n)
      threshold = counts[rank - 1];
      r.threshold = threshold;
    }
    for (const auto& row : rows) {
      bool active = false;
      switch (definition) {
        case ActiveDefinition::Default: active = row.cumulative >= 3; break;
        case ActiveDefinition::Min3InYear: active = row.in_year >= 3; break;
        case ActiveDefinition::P90Threshold: active = row.in_year >= threshold; break;
      }
      if (!active) continue;
      ++r.active;
      if (mm_years.contains({y, row.author})) ++r.active_matchmakers;
    }
    out.push_back(r);
  }
  return out;
}

Table annual_rate_table(const std::vector<AnnualRate>& rates) {
  Table t;
  t.columns = {"year", "active_authors", "active_matchmakers", "rate", "p90_threshold"};
  for (const auto& r : rates) {
    t.add_row({static_cast<std::int64_t>(r.year), static_cast<std::int64_t>(r.active),
               static_cast<std::int64_t>(r.active_matchmakers), optional_cell(r.rate()),
               optional_cell(r.threshold)});
  }
  return t;
}

std::map<std::size_t, std::size_t> team_size_distribution(const std::vector<MatchmakerEvent>& events,
                                                          TeamSizeMode mode) {
  const auto counts = matchmaker_counts(events);
  std::map<PubIdx, std::size_t> sizes;
  for (const auto& e : events) {
    const bool single = counts.at(e.pub) == 1;
    if ((mode == TeamSizeMode::SingleMatchmaker) == single) sizes[e.pub] = e.team_size;
  }
  std::map<std::size_t, std::size_t> hist;
  for (const auto& [pub, size] : sizes) ++hist[size];
  return hist;
}

Table histogram_table(const std::map<std::size_t, std::size_t>& histogram,
                      const std::string& key_column, const std::string& value_column) {
  Table t;
  t.columns = {key_column, value_column, "share"};
  std::size_t total = 0;
  for (const auto& [k, v] : histogram) total += v;
  for (const auto& [k, v] : histogram) {
    t.add_row({static_cast<std::int64_t>(k), static_cast<std::int64_t>(v),
               static_cast<double>(v) / static_cast<double>(total)});
  }
  return t;
}

Table events_table(const std::vector<MatchmakerEvent>& events, const Corpus& corpus,
                   const TemporalGraph& graph) {
  Table t;
  t.columns = {"pub_id",    "date",       "matchmaker_id", "b_id",  "c_id",  "copubs_a_b",
               "copubs_a_c", "team_size", "a_seq_index",   "a_age", "b_age", "c_age"};
  auto date_str = [](const Date& d) {
    char buf[32];
    if (d.month == 0) {
      std::snprintf(buf, sizeof buf, "%04d", d.year);
    } else if (d.day == 0) {
      std::snprintf(buf, sizeof buf, "%04d-%02d", d.year, d.month);
    } else {
      std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", d.year, d.month, d.day);
    }
    return std::string(buf);
  };
  for (const auto& e : events) {
    t.add_row({corpus.pub_id(e.pub), date_str(graph.date_at(e.position)),
               corpus.author_id(e.matchmaker), corpus.author_id(e.b), corpus.author_id(e.c),
               static_cast<std::int64_t>(e.copubs_a_b), static_cast<std::int64_t>(e.copubs_a_c),
               static_cast<std::int64_t>(e.team_size),
               static_cast<std::int64_t>(e.a_sequence_index), static_cast<std::int64_t>(e.a_age),
               static_cast<std::int64_t>(e.b_age), static_cast<std::int64_t>(e.c_age)});
  }
  return t;
}

}  // namespace tertius
