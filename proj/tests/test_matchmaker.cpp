#include <doctest.h>

#include "oracles.hpp"
#include "synthetic.hpp"
#include "tertius/matchmaker.hpp"

using namespace tertius;

namespace {

std::set<oracle::EventKey> keys(const Corpus& c, const std::vector<PairEvent>& events) {
  std::set<oracle::EventKey> out;
  for (const auto& e : events) {
    auto x = c.author_id(e.x), y = c.author_id(e.y);
    if (y < x) std::swap(x, y);
    out.emplace(c.pub_id(e.pub), c.author_id(e.a), x, y);
  }
  return out;
}

MatchmakerEvent toy_event() {
  const auto c = synth::toy1();
  const TemporalGraph g(c);
  const auto events = detect_matchmakers(c, g);
  REQUIRE(events.size() == 1);
  return events.front();
}

}  // namespace

TEST_CASE("toy fixture: one event at P3 with A bridging B and C") {
  const auto c = synth::toy1();
  const TemporalGraph g(c);
  const auto events = detect_matchmakers(c, g);
  REQUIRE(events.size() == 1);
  const auto& e = events.front();
  CHECK(c.pub_id(e.pub) == "P3");
  CHECK(c.author_id(e.matchmaker) == "A");
  CHECK(c.author_id(e.b) == "B");  // tie on copubs; A met B first
  CHECK(c.author_id(e.c) == "C");
  CHECK(e.copubs_a_b == 1);
  CHECK(e.copubs_a_c == 1);
  CHECK(e.team_size == 3);
  CHECK(e.a_sequence_index == 3);
  CHECK(e.a_age == 2);
  CHECK(e.b_age == 2);
  CHECK(e.c_age == 1);
  CHECK(e.year == 2002);
}

TEST_CASE("detection equals the brute-force oracle on random corpora") {
  for (std::uint64_t seed = 1; seed <= 150; ++seed) {
    const auto c = Corpus::build(synth::random_tables(seed));
    const TemporalGraph g(c);
    const auto got = keys(c, detect_events(c, g));
    const auto want = oracle::detect(c);
    CHECK_MESSAGE(got == want, "seed " << seed);
  }
}

TEST_CASE("events are ordered and unique") {
  const auto c = Corpus::build(synth::random_tables(99));
  const TemporalGraph g(c);
  const auto events = detect_events(c, g);
  CHECK(std::is_sorted(events.begin(), events.end()));
  CHECK(std::adjacent_find(events.begin(), events.end()) == events.end());
  for (const auto& e : events) CHECK(e.x < e.y);
}

TEST_CASE("same-date publications: pub_id decides which one is prior") {
  CorpusTables t;
  synth::add_pub(t, "p1", {2000}, "", {"a", "b"});
  synth::add_pub(t, "p2", {2000}, "", {"a", "c"});
  synth::add_pub(t, "p3", {2000}, "", {"a", "b", "c"});
  synth::add_pub(t, "p0", {2000}, "", {"a", "b", "c"});  // earliest by id: no history yet
  const auto c = Corpus::build(t);
  const TemporalGraph g(c);
  const auto events = detect_matchmakers(c, g);
  // p0 comes first, so b and c already met there; nothing is bridged.
  CHECK(events.empty());

  CorpusTables u;
  synth::add_pub(u, "p1", {2000}, "", {"a", "b"});
  synth::add_pub(u, "p2", {2000}, "", {"a", "c"});
  synth::add_pub(u, "p3", {2000}, "", {"a", "b", "c"});
  const auto c2 = Corpus::build(u);
  const TemporalGraph g2(c2);
  CHECK(detect_matchmakers(c2, g2).size() == 1);
}

TEST_CASE("role assignment") {
  SUBCASE("more prior copubs wins") {
    CorpusTables t;
    synth::add_pub(t, "p1", {2000}, "", {"a", "z"});
    synth::add_pub(t, "p2", {2001}, "", {"a", "y"});
    synth::add_pub(t, "p3", {2002}, "", {"a", "y"});
    synth::add_pub(t, "p4", {2003}, "", {"a", "y", "z"});
    const auto c = Corpus::build(t);
    const TemporalGraph g(c);
    const auto e = detect_matchmakers(c, g).at(0);
    CHECK(c.author_id(e.b) == "y");
    CHECK(e.copubs_a_b == 2);
    CHECK(e.copubs_a_c == 1);
  }
  SUBCASE("tie goes to the earlier first meeting") {
    CorpusTables t;
    synth::add_pub(t, "p1", {2000, 5}, "", {"a", "z"});
    synth::add_pub(t, "p2", {2000, 6}, "", {"a", "y"});
    synth::add_pub(t, "p4", {2003}, "", {"a", "y", "z"});
    const auto c = Corpus::build(t);
    const TemporalGraph g(c);
    CHECK(c.author_id(detect_matchmakers(c, g).at(0).b) == "z");
  }
  SUBCASE("full tie goes to the smaller author id") {
    CorpusTables t;
    synth::add_pub(t, "p1", {2000}, "", {"a", "z"});
    synth::add_pub(t, "p2", {2000}, "", {"a", "y"});
    synth::add_pub(t, "p4", {2003}, "", {"a", "y", "z"});
    const auto c = Corpus::build(t);
    const TemporalGraph g(c);
    CHECK(c.author_id(detect_matchmakers(c, g).at(0).b) == "y");
  }
}

TEST_CASE("one match-maker bridging several pairs emits one record per pair") {
  CorpusTables t;
  synth::add_pub(t, "p1", {2000}, "", {"a", "x"});
  synth::add_pub(t, "p2", {2000}, "", {"a", "y"});
  synth::add_pub(t, "p3", {2000}, "", {"a", "z"});
  synth::add_pub(t, "p4", {2001}, "", {"a", "x", "y", "z"});
  const auto c = Corpus::build(t);
  const TemporalGraph g(c);
  const auto events = detect_matchmakers(c, g);
  CHECK(events.size() == 3);
  const auto hist = matchmakers_per_publication(events);
  CHECK(hist.size() == 1);
  CHECK(hist.at(1) == 1);
  FilterConfig single;
  single.single_matchmaker_only = true;
  CHECK(apply_filters(events, single).size() == 3);
}

TEST_CASE("filters") {
  const auto e = toy_event();
  SUBCASE("empty config is the identity") { CHECK(apply_filters({e}, {}).size() == 1); }
  SUBCASE("young b or c excluded at age five") {
    FilterConfig f;
    f.min_bc_academic_age = 5;
    CHECK(apply_filters({e}, f).empty());  // min(2, 1) <= 5
  }
  SUBCASE("at least three prior copubs with each") {
    FilterConfig f;
    f.min_prior_copubs = 3;
    CHECK(apply_filters({e}, f).empty());
    f.min_prior_copubs = 1;
    CHECK(apply_filters({e}, f).size() == 1);
  }
  SUBCASE("event year cap") {
    FilterConfig f;
    f.max_event_year = 2001;
    CHECK(apply_filters({e}, f).empty());
    f.max_event_year = 2002;
    CHECK(apply_filters({e}, f).size() == 1);
  }
  SUBCASE("publications with two match-makers") {
    auto other = e;
    other.matchmaker = e.b;
    FilterConfig f;
    f.single_matchmaker_only = true;
    CHECK(apply_filters({e, other}, f).empty());
    CHECK(matchmakers_per_publication({e, other}).at(2) == 1);
  }
}

TEST_CASE("filters never add events") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    synth::RandomSpec spec;
    spec.years = 20;
    const auto c = Corpus::build(synth::random_tables(seed, spec));
    const TemporalGraph g(c);
    const auto all = detect_matchmakers(c, g);
    FilterConfig s6;
    s6.min_bc_academic_age = 5;
    FilterConfig s7 = s6;
    s7.min_prior_copubs = 3;
    FilterConfig single;
    single.single_matchmaker_only = true;
    const auto a6 = apply_filters(all, s6);
    const auto a7 = apply_filters(all, s7);
    CHECK(a6.size() <= all.size());
    CHECK(a7.size() <= a6.size());
    CHECK(apply_filters(all, single).size() <= all.size());
  }
}

TEST_CASE("publication-count bins") {
  CHECK(publication_count_bin(1).label() == "1");
  CHECK(publication_count_bin(50).label() == "50");
  CHECK(publication_count_bin(51).label() == "51-60");
  CHECK(publication_count_bin(60).label() == "51-60");
  CHECK(publication_count_bin(61).label() == "61-70");
  CHECK(publication_count_bin(150).label() == "141-150");
  CHECK(publication_count_bin(151).label() == "151+");
  CHECK(publication_count_bin(5000).label() == "151+");
}

TEST_CASE("prevalence curve counts authors and match-makers per bin") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto c = Corpus::build(synth::random_tables(seed));
    const TemporalGraph g(c);
    const auto events = detect_matchmakers(c, g);
    const auto curve = prevalence_vs_pubcount(events, g.careers());
    std::set<AuthorIdx> mm;
    for (const auto& e : events) mm.insert(e.matchmaker);
    for (const auto& p : curve.points) {
      std::size_t authors = 0, makers = 0, authors_ge = 0, makers_ge = 0;
      for (AuthorIdx a = 0; a < c.author_count(); ++a) {
        const auto n = c.pubs_of(a).size();
        if (publication_count_bin(n) == p.bin) {
          ++authors;
          makers += mm.contains(a);
        }
        if (n >= p.bin.lo) {
          ++authors_ge;
          makers_ge += mm.contains(a);
        }
      }
      CHECK(p.authors == authors);
      CHECK(p.matchmakers == makers);
      CHECK(p.authors_at_least == authors_ge);
      CHECK(p.matchmakers_at_least == makers_ge);
    }
    if (!curve.matchmaker_count_cdf.empty()) {
      CHECK(curve.matchmaker_count_cdf.back().second == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("annual match-maker rate on the toy fixture") {
  const auto c = synth::toy1();
  const TemporalGraph g(c);
  const auto events = detect_matchmakers(c, g);
  const auto rates = annual_matchmaker_rate(events, g, ActiveDefinition::Default, 2000, 2005);
  REQUIRE(rates.size() == 6);
  // 2002: A publishes and has three publications so far; B, C have two.
  CHECK(rates[2].year == 2002);
  CHECK(rates[2].active == 1);
  CHECK(rates[2].active_matchmakers == 1);
  CHECK(rates[2].rate() == doctest::Approx(1.0));
  // 2003: only B and C publish, both reach three.
  CHECK(rates[3].active == 2);
  CHECK(rates[3].active_matchmakers == 0);
  CHECK_FALSE(rates[0].rate());

  const auto min3 = annual_matchmaker_rate(events, g, ActiveDefinition::Min3InYear, 2000, 2005);
  for (const auto& r : min3) CHECK(r.active == 0);
  const auto p90 = annual_matchmaker_rate(events, g, ActiveDefinition::P90Threshold, 2002, 2002);
  REQUIRE(p90[0].threshold);
  CHECK(*p90[0].threshold == 1);
  CHECK(p90[0].active == 5);
}

TEST_CASE("active-author definitions parse strictly") {
  CHECK(parse_active_definition("default") == ActiveDefinition::Default);
  CHECK(parse_active_definition("min3_in_year") == ActiveDefinition::Min3InYear);
  CHECK(parse_active_definition("p90_threshold") == ActiveDefinition::P90Threshold);
  CHECK_THROWS_AS(parse_active_definition("sometimes"), InputError);
}

TEST_CASE("team-size distributions split by match-maker count") {
  auto e = toy_event();
  auto second = e;
  second.pub = 99;
  second.team_size = 5;
  auto third = second;
  third.matchmaker = 77;
  const std::vector<MatchmakerEvent> events{e, second, third};
  const auto single = team_size_distribution(events, TeamSizeMode::SingleMatchmaker);
  const auto multi = team_size_distribution(events, TeamSizeMode::MultiMatchmaker);
  CHECK(single.size() == 1);
  CHECK(single.at(3) == 1);
  CHECK(multi.size() == 1);
  CHECK(multi.at(5) == 1);
}
