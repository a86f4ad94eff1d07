#include <doctest.h>

#include "synthetic.hpp"
#include "tertius/lifecycle.hpp"

using namespace tertius;

namespace {

const Cell& cell(const Table& t, std::size_t row, const std::string& column) {
  return t.rows.at(row).at(t.column_index(column));
}

std::optional<std::size_t> find_row(const Table& t, const std::string& key) {
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    if (format_cell(t.rows[i][0]) == key) return i;
  }
  return std::nullopt;
}

}  // namespace

TEST_CASE("toy fixture: the pair keeps working without its match-maker") {
  const auto c = synth::toy1();
  const TemporalGraph g(c);
  const auto events = detect_matchmakers(c, g);
  REQUIRE(events.size() == 1);
  const auto r = abandonment(events[0], g);
  CHECK(r.n_abc == 1);  // P6
  CHECK(r.n_bc == 2);   // P4, P5
  CHECK(r.abandoned);
  CHECK(r.first_abandonment_lag == 1);

  const auto curves = abandonment_curves({r}, events, g.careers());
  const auto row = find_row(curves.by_intensity, "3-5");
  REQUIRE(row);
  CHECK(std::get<std::int64_t>(cell(curves.by_intensity, *row, "records")) == 1);
  CHECK(std::get<double>(cell(curves.by_intensity, *row, "rate")) == 1.0);
  const auto share = find_row(curves.exclusion_share, "all");
  REQUIRE(share);
  CHECK(std::get<double>(cell(curves.exclusion_share, *share, "mean_exclusion_share")) ==
        doctest::Approx(2.0 / 3.0));
  // A's event is their third of four publications.
  const auto stage = find_row(curves.by_career_stage, "8");
  REQUIRE(stage);
  CHECK(std::get<std::int64_t>(cell(curves.by_career_stage, *stage, "abandoned")) == 1);
}

TEST_CASE("abandonment counts on a grid of later histories") {
  for (std::uint32_t abc = 0; abc <= 5; ++abc) {
    for (std::uint32_t bc = 0; bc <= 5; ++bc) {
      CorpusTables t;
      synth::add_pub(t, "p1", {2000}, "", {"a", "b"});
      synth::add_pub(t, "p2", {2001}, "", {"a", "c"});
      synth::add_pub(t, "p3", {2002}, "", {"a", "b", "c"});
      // Alternate the two kinds, joint ones first, one per year.
      int year = 2003;
      std::optional<int> first_bc;
      std::uint32_t i = 0, j = 0;
      while (i < abc || j < bc) {
        if (i < abc) {
          synth::add_pub(t, "q" + std::to_string(year), {year}, "", {"a", "b", "c"});
          ++i;
          ++year;
        }
        if (j < bc) {
          synth::add_pub(t, "q" + std::to_string(year), {year}, "", {"c", "b"});
          if (!first_bc) first_bc = year - 2002;
          ++j;
          ++year;
        }
      }
      // Noise: a alone with b must not count for the pair.
      synth::add_pub(t, "z", {2030}, "", {"a", "b"});
      const auto c = Corpus::build(t);
      const TemporalGraph g(c);
      const auto events = detect_matchmakers(c, g);
      REQUIRE(events.size() == 1);
      const auto r = abandonment(events[0], g);
      CHECK(r.n_abc == abc);
      CHECK(r.n_bc == bc);
      CHECK(r.abandoned == (bc > abc));
      CHECK(r.first_abandonment_lag == first_bc);
    }
  }
}

TEST_CASE("intensity bins and career deciles") {
  CHECK(intensity_bin(0) == "0");
  CHECK(intensity_bin(2) == "2");
  CHECK(intensity_bin(3) == "3-5");
  CHECK(intensity_bin(10) == "6-10");
  CHECK(intensity_bin(11) == "11+");
  CHECK(career_decile(1, 10) == 1);
  CHECK(career_decile(10, 10) == 10);
  CHECK(career_decile(3, 4) == 8);
  CHECK(career_decile(1, 1) == 10);
  CHECK(career_decile(1, 20) == 1);
  CHECK(career_decile(11, 20) == 6);
}

TEST_CASE("benefits on the toy fixture") {
  const auto c = synth::toy1();
  const TemporalGraph g(c);
  const auto events = detect_matchmakers(c, g);
  const auto b = benefit_metrics(events, g.careers());
  REQUIRE(b.matchmakers.size() == 1);
  CHECK(c.author_id(b.matchmakers[0].author) == "A");
  CHECK(b.matchmakers[0].distinct_beneficiaries == 2);
  CHECK(b.matchmakers[0].total_publications == 4);
  REQUIRE(b.researchers.size() == 2);
  for (const auto& r : b.researchers) {
    CHECK(r.distinct_matchmakers == 1);
    CHECK(r.distinct_new_collaborators == 1);
  }
  const auto grouped = researcher_benefit_by_matchmakers(b);
  REQUIRE(grouped.rows.size() == 1);
  CHECK(std::get<std::int64_t>(cell(grouped, 0, "researchers")) == 2);
}

TEST_CASE("benefits pool both roles and count people once") {
  // m bridges (x, y) twice over different publications with swapped roles,
  // and n bridges (x, z).
  MatchmakerEvent e1;
  e1.matchmaker = 0;
  e1.b = 1;
  e1.c = 2;
  auto e2 = e1;
  e2.pub = 1;
  e2.b = 2;
  e2.c = 1;
  auto e3 = e1;
  e3.pub = 2;
  e3.matchmaker = 3;
  e3.b = 1;
  e3.c = 4;
  CorpusTables t;
  for (const char* a : {"m", "x", "y", "n", "z"}) synth::add_pub(t, std::string("p") + a, {2000}, "", {a});
  const auto c = Corpus::build(t);
  const TemporalGraph g(c);
  const auto b = benefit_metrics({e1, e2, e3}, g.careers());
  REQUIRE(b.researchers.size() == 3);
  CHECK(b.researchers[0].author == 1);
  CHECK(b.researchers[0].distinct_matchmakers == 2);
  CHECK(b.researchers[0].distinct_new_collaborators == 2);
  CHECK(b.researchers[0].events == 3);
  CHECK(b.researchers[1].distinct_new_collaborators == 1);
  REQUIRE(b.matchmakers.size() == 2);
  CHECK(b.matchmakers[0].distinct_beneficiaries == 2);
  CHECK(b.matchmakers[0].events == 2);
}

TEST_CASE("career profile on the toy fixture") {
  const auto c = synth::toy1();
  const TemporalGraph g(c);
  const auto p = career_profile(detect_matchmakers(c, g), g.careers());
  REQUIRE(p.first_event_age.rows.size() == 1);
  CHECK(std::get<std::int64_t>(cell(p.first_event_age, 0, "academic_age")) == 2);
  CHECK(std::get<double>(cell(p.first_event_age, 0, "share")) == 1.0);
  REQUIRE(p.first_event_joint.rows.size() == 1);
  CHECK(std::get<std::int64_t>(cell(p.first_event_joint, 0, "sequence_index")) == 3);
  const auto third = find_row(p.sequence_probability, "3");
  REQUIRE(third);
  // Three authors reach a third publication; one of those is a match-making one.
  CHECK(std::get<std::int64_t>(cell(p.sequence_probability, *third, "publications")) == 3);
  CHECK(std::get<double>(cell(p.sequence_probability, *third, "probability")) ==
        doctest::Approx(1.0 / 3.0));
  const auto empty = career_profile({}, g.careers());
  CHECK(empty.copub_joint.rows.empty());
  CHECK_FALSE(empty.copub_joint.columns.empty());
}
