#pragma once

// Corpus builders shared by the unit and acceptance tests.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "tertius/corpus.hpp"
#include "tertius/random.hpp"

namespace synth {

using tertius::AuthorshipRow;
using tertius::CitationRow;
using tertius::CorpusTables;
using tertius::Date;
using tertius::PublicationRow;
using tertius::VenueRow;

inline std::string id(const char* prefix, std::size_t i, int width = 5) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, i);
  return buf;
}

inline void add_pub(CorpusTables& t, const std::string& pub, Date date, const std::string& venue,
                    const std::vector<std::string>& authors, const std::string& field = "") {
  t.publications.push_back({pub, date, venue, field});
  int pos = 1;
  for (const auto& a : authors) t.authorships.push_back({pub, a, pos++});
}

// Five authors, seven publications, one match-making event (P3, A | B, C).
inline CorpusTables toy1_tables() {
  CorpusTables t;
  t.venues = {{"J1", "1111-1111", "", "Journal One", std::nullopt},
              {"J2", "2222-2222", "", "Journal Two", std::nullopt}};
  add_pub(t, "P1", {2000}, "J1", {"A", "B"}, "sociology");
  add_pub(t, "P2", {2001}, "J1", {"A", "C"}, "sociology");
  add_pub(t, "P3", {2002}, "J2", {"A", "B", "C"}, "sociology");
  add_pub(t, "P4", {2003}, "J2", {"B", "C"}, "sociology");
  add_pub(t, "P5", {2004}, "J2", {"B", "C"}, "sociology");
  add_pub(t, "P6", {2005}, "J1", {"A", "B", "C"}, "sociology");
  add_pub(t, "P7", {2002}, "J1", {"D", "E"}, "sociology");
  return t;
}

inline tertius::Corpus toy1() { return tertius::Corpus::build(toy1_tables()); }

struct RandomSpec {
  std::size_t max_authors = 50;
  std::size_t max_pubs = 300;
  std::size_t max_team = 8;
  int first_year = 1990;
  int years = 12;
  bool with_months = true;    // partial dates exercise the tie rules
  double citation_rate = 0.0;  // expected references per publication
  std::size_t venues = 0;
  std::size_t fields = 0;
};

// Uniformly random bylines over a small author pool.
inline CorpusTables random_tables(std::uint64_t seed, const RandomSpec& spec = {}) {
  tertius::Rng rng(seed);
  CorpusTables t;
  const auto n_authors = 2 + rng.below(spec.max_authors - 1);
  const auto n_pubs = 1 + rng.below(spec.max_pubs);
  for (std::size_t v = 0; v < spec.venues; ++v) {
    t.venues.push_back({id("V", v, 3), id("", 1000 + v, 4) + "-0000", "", id("Venue ", v, 3),
                        std::nullopt});
  }
  std::vector<std::size_t> all(n_authors);
  for (std::size_t i = 0; i < n_authors; ++i) all[i] = i;
  for (std::size_t p = 0; p < n_pubs; ++p) {
    Date d{spec.first_year + static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.years)))};
    if (spec.with_months && rng.below(2) == 0) {
      d.month = 1 + static_cast<int>(rng.below(12));
      if (rng.below(2) == 0) d.day = 1 + static_cast<int>(rng.below(28));
    }
    const auto k = 1 + rng.below(std::min<std::size_t>(spec.max_team, n_authors));
    for (std::size_t i = 0; i < k; ++i) std::swap(all[i], all[i + rng.below(n_authors - i)]);
    std::vector<std::string> names;
    for (std::size_t i = 0; i < k; ++i) names.push_back(id("a", all[i], 3));
    const std::string venue = spec.venues ? id("V", rng.below(spec.venues), 3) : "";
    const std::string field = spec.fields ? id("f", rng.below(spec.fields), 1) : "";
    add_pub(t, id("p", p, 4), d, venue, names, field);
  }
  if (spec.citation_rate > 0) {
    std::set<std::pair<std::size_t, std::size_t>> seen;
    const auto wanted = static_cast<std::size_t>(spec.citation_rate * static_cast<double>(n_pubs));
    for (std::size_t i = 0; i < wanted && n_pubs > 1; ++i) {
      const auto a = rng.below(n_pubs);
      const auto b = rng.below(n_pubs);
      if (a == b || !seen.emplace(a, b).second) continue;
      t.citations.push_back({id("p", a, 4), id("p", b, 4)});
    }
  }
  return t;
}

// Disjoint brokered triads (a with b, a with c, then all three) on top of
// random background publications from a separate author pool.
inline CorpusTables planted_triads(std::uint64_t seed, std::size_t triads = 40,
                                   std::size_t background = 200) {
  tertius::Rng rng(seed);
  CorpusTables t;
  std::size_t pub = 0;
  for (std::size_t i = 0; i < triads; ++i) {
    const auto a = id("ta", i), b = id("tb", i), c = id("tc", i);
    const int y = 2000 + static_cast<int>(rng.below(6));
    add_pub(t, id("q", pub++), {y}, "", {a, b}, "f");
    add_pub(t, id("q", pub++), {y + 1}, "", {a, c}, "f");
    add_pub(t, id("q", pub++), {y + 2}, "", {a, b, c}, "f");
  }
  const std::size_t pool = 3 * background / 2 + 3;
  for (std::size_t i = 0; i < background; ++i) {
    const int y = 2000 + static_cast<int>(rng.below(8));
    const auto k = 1 + rng.below(3);
    std::set<std::string> names;
    while (names.size() < k) names.insert(id("bg", rng.below(pool)));
    add_pub(t, id("q", pub++), {y}, "", {names.begin(), names.end()}, "f");
  }
  return t;
}

struct PerfSpec {
  std::size_t publications = 300000;
  std::size_t authorships = 1000000;
  std::size_t authors = 150000;
  std::size_t venues = 400;
  std::size_t fields = 5;
  double references = 5.0;
  int first_year = 1980;
  int years = 40;
};

// Large corpus with repeat collaboration so that brokered closures occur.
// Team sizes average authorships / publications.
inline CorpusTables perf_tables(std::uint64_t seed, const PerfSpec& spec = {}) {
  tertius::Rng rng(seed);
  CorpusTables t;
  t.publications.reserve(spec.publications);
  t.authorships.reserve(spec.authorships + spec.publications);
  for (std::size_t v = 0; v < spec.venues; ++v) {
    t.venues.push_back({id("V", v), "", "", id("Venue ", v), std::nullopt});
  }
  std::vector<std::vector<std::uint32_t>> partners(spec.authors);
  const double mean_team = static_cast<double>(spec.authorships) /
                           static_cast<double>(spec.publications);
  const auto max_extra = static_cast<std::uint64_t>(2 * (mean_team - 1.0) + 0.5);
  std::vector<std::uint32_t> team;
  std::vector<std::size_t> year_start;
  for (std::size_t p = 0; p < spec.publications; ++p) {
    const int y = spec.first_year +
                  static_cast<int>(p * static_cast<std::size_t>(spec.years) / spec.publications);
    // Authors enter over time so careers and ages vary.
    const auto active = std::max<std::size_t>(
        50, spec.authors * (p + 1) / spec.publications);
    team.clear();
    team.push_back(static_cast<std::uint32_t>(rng.below(active)));
    const auto extra = rng.below(max_extra + 1);
    for (std::size_t k = 0; k < extra; ++k) {
      std::uint32_t cand;
      const auto& mine = partners[team[rng.below(team.size())]];
      if (!mine.empty() && rng.below(10) < 6) {
        cand = mine[rng.below(mine.size())];
      } else {
        cand = static_cast<std::uint32_t>(rng.below(active));
      }
      if (std::find(team.begin(), team.end(), cand) == team.end()) team.push_back(cand);
    }
    for (auto x : team) {
      auto& list = partners[x];
      for (auto z : team) {
        if (z != x && list.size() < 64) list.push_back(z);
      }
    }
    std::vector<std::string> names;
    for (auto x : team) names.push_back(id("A", x, 6));
    add_pub(t, id("P", p, 6), {y, 1 + static_cast<int>(rng.below(12))},
            id("V", rng.below(spec.venues)), names, id("F", rng.below(spec.fields), 1));
    const auto refs = p == 0 ? 0 : rng.below(static_cast<std::uint64_t>(2 * spec.references) + 1);
    std::set<std::size_t> cited;
    for (std::size_t r = 0; r < refs && p > 0; ++r) cited.insert(rng.below(p));
    for (auto c : cited) t.citations.push_back({id("P", p, 6), id("P", c, 6)});
  }
  return t;
}

// Writes tables in the input schema.
inline void write_tables(const CorpusTables& t, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const char* name, const std::string& text) {
    std::FILE* f = std::fopen((dir / name).string().c_str(), "wb");
    std::fwrite(text.data(), 1, text.size(), f);
    std::fclose(f);
  };
  auto opt = [](int v) { return v == 0 ? std::string() : std::to_string(v); };
  std::string s = "pub_id\tyear\tmonth\tday\tvenue_id\tfield_label\n";
  for (const auto& p : t.publications) {
    s += p.pub_id + '\t' + std::to_string(p.date.year) + '\t' + opt(p.date.month) + '\t' +
         opt(p.date.day) + '\t' + p.venue_id + '\t' + p.field_label + '\n';
  }
  write("publications.tsv", s);
  s = "pub_id\tauthor_id\tposition\n";
  for (const auto& a : t.authorships) {
    s += a.pub_id + '\t' + a.author_id + '\t' + std::to_string(a.position) + '\n';
  }
  write("authorships.tsv", s);
  s = "citing_id\tcited_id\n";
  for (const auto& c : t.citations) s += c.citing_id + '\t' + c.cited_id + '\n';
  write("citations.tsv", s);
  s = "venue_id\tissn\teissn\tname\n";
  for (const auto& v : t.venues) s += v.venue_id + '\t' + v.issn + '\t' + v.eissn + '\t' + v.name + '\n';
  write("venues.tsv", s);
}

}  // namespace synth
