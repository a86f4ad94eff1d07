#include <doctest.h>

#include <map>

#include "scratch.hpp"
#include "synthetic.hpp"
#include "tertius/table.hpp"
#include "tertius/temporal_graph.hpp"

using namespace tertius;

namespace {

PubIdx pub(const Corpus& c, const char* id) { return *c.find_pub(id); }
AuthorIdx author(const Corpus& c, const char* id) { return *c.find_author(id); }

}  // namespace

TEST_CASE("timeline orders by date then pub_id, absent parts last") {
  CorpusTables t;
  synth::add_pub(t, "z", {2001, 3, 0}, "", {"a"});
  synth::add_pub(t, "b", {2001, 3, 5}, "", {"a"});
  synth::add_pub(t, "a", {2001, 3, 5}, "", {"b"});
  synth::add_pub(t, "y", {2001, 0, 0}, "", {"a"});
  synth::add_pub(t, "x", {2000, 12, 31}, "", {"a"});
  const auto c = Corpus::build(t);
  const TemporalGraph g(c);
  std::vector<std::string> order;
  for (auto p : g.timeline().order()) order.push_back(c.pub_id(p));
  CHECK(order == std::vector<std::string>{"x", "a", "b", "z", "y"});
  for (Position i = 0; i < g.timeline().size(); ++i) {
    CHECK(g.timeline().position_of(g.timeline().at(i)) == i);
  }
}

TEST_CASE("toy fixture careers and ages") {
  const auto c = synth::toy1();
  const TemporalGraph g(c);
  const auto t3 = g.timeline().position_of(pub(c, "P3"));
  const auto A = author(c, "A"), B = author(c, "B"), C = author(c, "C"), D = author(c, "D");
  CHECK(g.careers().sequence_index(A, t3) == 3u);
  CHECK(g.careers().sequence_index(B, t3) == 2u);
  CHECK_FALSE(g.careers().sequence_index(D, t3));
  CHECK(g.careers().total_publications(A) == 4);
  CHECK(g.academic_age(A, t3) == 2);
  CHECK(g.academic_age(B, t3) == 2);
  CHECK(g.academic_age(C, t3) == 1);
  CHECK(g.collab().count_before(A, B, t3) == 1);
  CHECK(g.collab().count_before(A, C, t3) == 1);
  CHECK(g.collab().count_before(B, C, t3) == 0);
  CHECK(g.collab().total_count(B, C) == 4);
  const auto t1 = g.timeline().position_of(pub(c, "P1"));
  CHECK_THROWS_AS((void)g.academic_age(D, t1), std::domain_error);
  CHECK(g.collab().first_position(A, B) == t1);
  CHECK_FALSE(g.collab().first_position(A, D));
}

TEST_CASE("pair counts agree with a brute-force scan") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    synth::RandomSpec spec;
    spec.max_authors = 15;
    spec.max_pubs = 60;
    const auto c = Corpus::build(synth::random_tables(seed, spec));
    const TemporalGraph g(c);
    std::map<std::pair<AuthorIdx, AuthorIdx>, std::uint32_t> running;
    std::map<AuthorIdx, std::uint32_t> pubs_so_far;
    for (Position t = 0; t < g.timeline().size(); ++t) {
      const auto authors = c.authors_of(g.timeline().at(t));
      for (AuthorIdx x = 0; x < c.author_count(); ++x) {
        CHECK(g.careers().count_before(x, t) == pubs_so_far[x]);
        for (AuthorIdx y = 0; y < c.author_count(); ++y) {
          if (x == y) continue;
          CHECK(g.collab().count_before(x, y, t) == running[{std::min(x, y), std::max(x, y)}]);
        }
      }
      for (auto x : authors) {
        ++pubs_so_far[x];
        for (auto y : authors) {
          if (x < y) ++running[{x, y}];
        }
      }
    }
    for (const auto& [pair, n] : running) CHECK(g.collab().total_count(pair.first, pair.second) == n);
  }
}

TEST_CASE("snapshot round trip is lossless") {
  synth::RandomSpec spec;
  spec.max_authors = 40;
  const auto c = Corpus::build(synth::random_tables(7, spec));
  const TemporalGraph g(c);
  const auto dir = scratch_dir("snapshot");
  g.save(dir / "s.bin");
  const auto back = TemporalGraph::load(dir / "s.bin");
  CHECK(back == g);
  CHECK(back.corpus_fingerprint() == c.fingerprint());

  SUBCASE("truncated file is rejected") {
    auto bytes = read_text_file(dir / "s.bin");
    write_text_file(dir / "t.bin", bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS_AS(TemporalGraph::load(dir / "t.bin"), InputError);
  }
  SUBCASE("foreign file is rejected") {
    write_text_file(dir / "u.bin", "not a snapshot at all");
    CHECK_THROWS_AS(TemporalGraph::load(dir / "u.bin"), InputError);
  }
}
