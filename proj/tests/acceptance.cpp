// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (capped at 1 for ctest).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "scratch.hpp"
#include "synthetic.hpp"
#include "tertius/impact_metrics.hpp"
#include "tertius/lifecycle.hpp"
#include "tertius/matchmaker.hpp"
#include "tertius/nullmodel.hpp"
#include "tertius/pipeline.hpp"

using namespace tertius;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

// 1: detection equals the four-condition oracle.
Verdict detection_oracle() {
  const auto t0 = Clock::now();
  std::size_t agree = 0, events = 0;
  constexpr std::size_t kCorpora = 1000;
  for (std::uint64_t seed = 1; seed <= kCorpora; ++seed) {
    const auto c = Corpus::build(synth::random_tables(seed));
    const TemporalGraph g(c);
    std::set<oracle::EventKey> got;
    for (const auto& e : detect_events(c, g)) {
      auto x = c.author_id(e.x), y = c.author_id(e.y);
      if (y < x) std::swap(x, y);
      got.emplace(c.pub_id(e.pub), c.author_id(e.a), x, y);
    }
    events += got.size();
    agree += got == oracle::detect(c);
  }
  const double secs = seconds_since(t0);
  return {agree == kCorpora && secs < 60.0,
          std::to_string(agree) + "/" + std::to_string(kCorpora) + " corpora agree, " +
              std::to_string(events) + " events, " + fmt("%.1f s (limit 60 s)", secs)};
}

// 2: hand-enumerated toy fixture.
Verdict toy_golden() {
  const auto c = load_corpus(corpus_paths_in(TERTIUS_TOY1_DIR));
  const TemporalGraph g(c);
  const auto events = detect_matchmakers(c, g);
  std::vector<std::string> bad;
  auto expect = [&](bool ok, const char* what) {
    if (!ok) bad.emplace_back(what);
  };
  expect(events.size() == 1, "one event");
  if (events.size() == 1) {
    const auto& e = events[0];
    expect(c.pub_id(e.pub) == "P3" && c.author_id(e.matchmaker) == "A" &&
               c.author_id(e.b) == "B" && c.author_id(e.c) == "C",
           "event (P3, A, B, C)");
    const auto r = abandonment(e, g);
    expect(r.n_abc == 1 && r.n_bc == 2 && r.abandoned && r.first_abandonment_lag == 1,
           "abandonment");
    const auto b = benefit_metrics(events, g.careers());
    expect(b.matchmakers.size() == 1 && b.matchmakers[0].distinct_beneficiaries == 2,
           "A beneficiaries");
    bool b_ok = false;
    for (const auto& x : b.researchers) {
      if (c.author_id(x.author) == "B") {
        b_ok = x.distinct_matchmakers == 1 && x.distinct_new_collaborators == 1;
      }
    }
    expect(b_ok, "B benefits");
    expect(e.a_sequence_index == 3 && e.a_age == 2, "career position");
  }
  std::string detail = bad.empty() ? "event, abandonment, benefits, career all exact" : "mismatch:";
  for (const auto& s : bad) detail += " " + s + ";";
  return {bad.empty(), detail};
}

// 3: null model degree preservation, uniformity, planted signal.
Verdict null_model() {
  std::vector<std::string> notes;
  bool ok = true;

  // About 10^4 authorships.
  synth::PerfSpec spec;
  spec.publications = 3000;
  spec.authorships = 10000;
  spec.authors = 1500;
  spec.venues = 20;
  spec.years = 10;
  spec.references = 0;
  const auto big = Corpus::build(synth::perf_tables(17, spec));
  std::size_t preserved = 0;
  for (std::size_t r = 0; r < 100; ++r) {
    NullModelConfig cfg;
    cfg.seed = 99;
    preserved += verify_degrees(big, randomize(big, cfg, r).corpus, cfg.strata);
  }
  ok &= preserved == 100;
  notes.push_back("degrees " + std::to_string(preserved) + "/100 on " +
                  std::to_string(big.authorship_count()) + " authorships");

  const auto toy = synth::toy1();
  const auto p3 = *toy.find_pub("P3");
  std::map<std::string, double> counts;
  constexpr std::size_t kDraws = 10000;
  NullModelConfig cfg;
  cfg.seed = 31337;
  for (std::size_t r = 0; r < kDraws; ++r) {
    const auto rc = randomize(toy, cfg, r);
    std::string key;
    std::vector<std::string> ids;
    for (auto a : rc.corpus.authors_of(p3)) ids.push_back(rc.corpus.author_id(a));
    std::sort(ids.begin(), ids.end());
    for (const auto& s : ids) key += s;
    counts[key] += 1;
  }
  double chi2 = 0.0;
  const double expected = kDraws / 10.0;
  for (const auto& [k, n] : counts) chi2 += (n - expected) * (n - expected) / expected;
  chi2 += (10.0 - static_cast<double>(counts.size())) * expected;
  constexpr double kCritical = 21.666;  // chi-square 9 dof at p = 0.01
  ok &= counts.size() == 10 && chi2 < kCritical;
  notes.push_back("chi2 " + fmt("%.2f", chi2) + " < 21.666 over " + std::to_string(counts.size()) +
                  " outcomes");

  std::size_t above = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto c = Corpus::build(synth::planted_triads(seed));
    const TemporalGraph g(c);
    const auto observed = static_cast<double>(detect_matchmakers(c, g).size());
    NullModelConfig nc;
    nc.seed = seed;
    double total = 0.0;
    constexpr std::size_t kReps = 10;
    for (std::size_t r = 0; r < kReps; ++r) {
      const auto rc = randomize(c, nc, r);
      const TemporalGraph rg(rc.corpus);
      total += static_cast<double>(detect_matchmakers(rc.corpus, rg).size());
    }
    above += observed > total / kReps;
  }
  ok &= above >= 95;
  notes.push_back("planted observed > null mean in " + std::to_string(above) + "/100 seeds");

  std::string detail;
  for (const auto& n : notes) detail += (detail.empty() ? "" : "; ") + n;
  return {ok, detail};
}

// 4: disruption index fixtures and F/B/R oracle.
Verdict disruption() {
  auto fixture = [](const std::vector<std::string>& citers) {
    CorpusTables t;
    synth::add_pub(t, "R", {2000}, "", {"x"});
    synth::add_pub(t, "P", {2001}, "", {"y"});
    t.citations.push_back({"P", "R"});
    for (std::size_t i = 0; i < citers.size(); ++i) {
      const auto id = "Q" + std::to_string(i);
      synth::add_pub(t, id, {2002}, "", {"z"});
      if (citers[i].find('P') != std::string::npos) t.citations.push_back({id, "P"});
      if (citers[i].find('R') != std::string::npos) t.citations.push_back({id, "R"});
    }
    const auto c = Corpus::build(t);
    return disruption_index(c, *c.find_pub("P"), {1, 1});
  };
  const bool fixtures = fixture({"P"}) == 1.0 && fixture({"PR"}) == -1.0 &&
                        fixture({"P", "PR"}) == 0.0;

  std::size_t graphs_ok = 0, focal = 0;
  double max_dev = 0.0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    synth::RandomSpec spec;
    spec.max_pubs = 500;
    spec.citation_rate = 4.0;
    spec.years = 20;
    const auto c = Corpus::build(synth::random_tables(seed, spec));
    DisruptionCalculator calc(c);
    bool all = true;
    for (PubIdx p = 0; p < c.publication_count(); ++p) {
      const auto got = calc.counts(p);
      const auto want = oracle::disruption_counts(c, p);
      all &= got.f == want.f && got.b == want.b && got.r == want.r;
      const auto di = calc.index(p, {0, 1});
      if (want.f + want.b > 0 && di) {
        ++focal;
        const double ref = (static_cast<double>(want.f) - static_cast<double>(want.b)) /
                           static_cast<double>(want.f + want.b + want.r);
        max_dev = std::max(max_dev, std::abs(*di - ref));
      } else if (want.f + want.b > 0) {
        all = false;
      }
    }
    graphs_ok += all;
  }
  const bool ok = fixtures && graphs_ok == 200 && max_dev <= 1e-12;
  return {ok, std::string("fixtures ") + (fixtures ? "exact" : "WRONG") + "; F/B/R equal on " +
                  std::to_string(graphs_ok) + "/200 graphs; max |dDI| " + fmt("%.3g", max_dev) +
                  " over " + std::to_string(focal) + " focal pubs (tol 1e-12)"};
}

// 5: windows monotone, top-decile flags, degenerate stratum.
Verdict windows_percentiles() {
  bool monotone = true;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    synth::RandomSpec spec;
    spec.citation_rate = 3.0;
    spec.years = 25;
    const auto c = Corpus::build(synth::random_tables(seed, spec));
    for (PubIdx p = 0; p < c.publication_count(); ++p) {
      const auto w = citation_windows(c, p);
      monotone &= w.c3 <= w.c5 && w.c5 <= w.c10;
    }
  }

  Rng rng(2718);
  std::size_t strata_ok = 0;
  for (int s = 0; s < 100; ++s) {
    const bool novelty = s % 2 == 1;
    const auto n = 1 + rng.below(300);
    const auto spread = 1 + rng.below(20);  // small spreads force ties
    std::vector<IndicatorRecord> records(n);
    std::vector<double> values(n);
    for (PubIdx p = 0; p < n; ++p) {
      records[p].pub = p;
      records[p].year = 2000;
      records[p].team_size = 3;
      records[p].reference_count = 7;
      values[p] = static_cast<double>(rng.below(spread));
      if (novelty) {
        values[p] -= 5.0;
        records[p].novelty = values[p];
      } else {
        records[p].c10 = static_cast<std::uint32_t>(values[p]);
      }
    }
    const auto table = stratified_percentiles(records, novelty ? Metric::Novelty : Metric::C10);
    const auto want = oracle::top_decile(values, novelty);
    bool all = table.strata == 1;
    for (PubIdx p = 0; p < n; ++p) all &= table.find(p) && table.find(p)->flagged == want[p];
    strata_ok += all;
  }

  std::vector<IndicatorRecord> flat(12);
  for (PubIdx p = 0; p < 12; ++p) {
    flat[p].pub = p;
    flat[p].year = 1999;
    flat[p].team_size = 2;
    flat[p].c3 = 5;
  }
  const auto deg = stratified_percentiles(flat, Metric::C3);
  const bool degenerate = deg.degenerate_strata == 1 && deg.strata == 1;

  return {monotone && strata_ok == 100 && degenerate,
          std::string("windows ") + (monotone ? "monotone" : "NOT monotone") + "; " +
              std::to_string(strata_ok) + "/100 strata match the sort oracle; all-equal stratum " +
              (degenerate ? "flagged degenerate" : "NOT flagged")};
}

// 6: novelty formula, determinism, degenerate venue set.
Verdict novelty() {
  const bool formula = novelty_z(1.0, 3.0, 1.0) == -2.0;
  synth::RandomSpec spec;
  spec.citation_rate = 6.0;
  spec.venues = 8;
  spec.years = 6;
  const auto c = Corpus::build(synth::random_tables(8, spec));
  const NoveltyConfig cfg{10, 4242};
  const auto a = novelty_scores(c, cfg);
  const auto b = novelty_scores(c, cfg);
  std::size_t defined = 0;
  for (const auto& v : a.novelty) defined += v.has_value();
  const bool deterministic = a.novelty == b.novelty && defined > 0;

  spec.venues = 1;
  const auto single = Corpus::build(synth::random_tables(8, spec));
  const auto s = novelty_scores(single, cfg);
  bool absent = true;
  for (const auto& v : s.novelty) absent &= !v.has_value();

  return {formula && deterministic && absent,
          std::string("z fixture ") + (formula ? "-2 exact" : "WRONG") + "; repeat run " +
              (deterministic ? "identical" : "DIFFERS") + " (" + std::to_string(defined) +
              " scored pubs, R=10); single venue " + (absent ? "absent" : "NOT absent")};
}

// 7: strict abandonment boundary over an enumerated grid.
Verdict abandonment_grid() {
  std::size_t cells = 0, ok_cells = 0;
  for (std::uint32_t abc = 0; abc <= 5; ++abc) {
    for (std::uint32_t bc = 0; bc <= 5; ++bc) {
      CorpusTables t;
      synth::add_pub(t, "p1", {2000}, "", {"a", "b"});
      synth::add_pub(t, "p2", {2001}, "", {"a", "c"});
      synth::add_pub(t, "p3", {2002}, "", {"a", "b", "c"});
      int year = 2003;
      for (std::uint32_t i = 0; i < abc; ++i, ++year) {
        synth::add_pub(t, "q" + std::to_string(year), {year}, "", {"a", "b", "c"});
      }
      for (std::uint32_t i = 0; i < bc; ++i, ++year) {
        synth::add_pub(t, "q" + std::to_string(year), {year}, "", {"b", "c"});
      }
      const auto c = Corpus::build(t);
      const TemporalGraph g(c);
      const auto events = detect_matchmakers(c, g);
      ++cells;
      if (events.size() != 1) continue;
      const auto r = abandonment(events[0], g);
      ok_cells += r.n_abc == abc && r.n_bc == bc && r.abandoned == (bc > abc);
    }
  }
  return {ok_cells == cells, std::to_string(ok_cells) + "/" + std::to_string(cells) +
                                 " grid cells; ties are never abandoned"};
}

// 8: full pipeline at scale, twice, byte-identical.
Verdict determinism_performance() {
  const auto root = scratch_dir("acceptance-perf");
  const auto t_gen = Clock::now();
  const auto tables = synth::perf_tables(20240601);
  synth::write_tables(tables, root / "input");
  const double gen_secs = seconds_since(t_gen);

  std::vector<double> secs;
  for (const char* name : {"run1", "run2"}) {
    auto cfg = make_config({{"input", (root / "input").string()},
                            {"out", (root / name).string()},
                            {"seed", "20240601"}});
    std::ostringstream log, err;
    const auto t0 = Clock::now();
    const int code = run_command("all", cfg, log, err);
    secs.push_back(seconds_since(t0));
    if (code != kExitOk) return {false, std::string(name) + " exited " + std::to_string(code) + ": " + err.str()};
  }

  std::size_t files = 0, differing = 0;
  for (const auto& e : fs::recursive_directory_iterator(root / "run1")) {
    if (!e.is_regular_file()) continue;
    ++files;
    const auto other = root / "run2" / fs::relative(e.path(), root / "run1");
    if (!fs::exists(other) || read_text_file(e.path()) != read_text_file(other)) ++differing;
  }
  std::size_t files2 = 0;
  for (const auto& e : fs::recursive_directory_iterator(root / "run2")) files2 += e.is_regular_file();
  fs::remove_all(root);

  const bool ok = differing == 0 && files == files2 && secs[0] < 300.0 && secs[1] < 300.0;
  return {ok, std::to_string(tables.authorships.size()) + " authorships / " +
                  std::to_string(tables.publications.size()) + " pubs; runs " +
                  fmt("%.1f s", secs[0]) + " and " + fmt("%.1f s", secs[1]) +
                  " (limit 300 s each, generation " + fmt("%.1f s", gen_secs) + "); " +
                  std::to_string(files) + " files, " + std::to_string(differing) + " differ"};
}

// 9: robustness filters only remove events; toy event dropped at age five.
Verdict filter_monotonicity() {
  FilterConfig s6;
  s6.min_bc_academic_age = 5;
  FilterConfig s7 = s6;
  s7.min_prior_copubs = 3;
  std::size_t monotone = 0;
  constexpr std::size_t kCorpora = 200;
  for (std::uint64_t seed = 1; seed <= kCorpora; ++seed) {
    synth::RandomSpec spec;
    spec.years = 25;
    const auto c = Corpus::build(synth::random_tables(seed, spec));
    const TemporalGraph g(c);
    for (bool single : {false, true}) {
      FilterConfig base;
      base.single_matchmaker_only = single;
      auto f6 = s6, f7 = s7;
      f6.single_matchmaker_only = f7.single_matchmaker_only = single;
      const auto all = detect_matchmakers(c, g);
      const auto n0 = apply_filters(all, base).size();
      const auto n6 = apply_filters(all, f6).size();
      const auto n7 = apply_filters(all, f7).size();
      monotone += n6 <= n0 && n7 <= n6 && n0 <= all.size();
    }
  }
  const auto toy = synth::toy1();
  const TemporalGraph g(toy);
  const auto events = detect_matchmakers(toy, g);
  const bool dropped = events.size() == 1 && apply_filters(events, s6).empty();
  return {monotone == 2 * kCorpora && dropped,
          std::to_string(monotone) + "/" + std::to_string(2 * kCorpora) +
              " filter chains monotone; toy event " + (dropped ? "dropped" : "KEPT") +
              " by the age filter (min(b,c) age 1 <= 5)"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"detection oracle equivalence", detection_oracle},
      {"toy golden run", toy_golden},
      {"null model", null_model},
      {"disruption index", disruption},
      {"citation windows and percentiles", windows_percentiles},
      {"novelty", novelty},
      {"abandonment boundary", abandonment_grid},
      {"determinism and performance", determinism_performance},
      {"robustness-filter monotonicity", filter_monotonicity},
  };
  int failed = 0;
  int n = 0;
  for (const auto& [name, run] : criteria) {
    ++n;
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s [%d] %s: %s\n", v.pass ? "PASS" : "FAIL", n, name, v.detail.c_str());
    std::fflush(stdout);
    failed += !v.pass;
  }
  std::printf("%d/%zu criteria passed\n", n - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
