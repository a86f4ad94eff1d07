#include "tertius/nullmodel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <thread>
#include <unordered_map>

#include <json.hpp>

namespace tertius {

StrataSpec parse_strata(const std::string& text) {
  if (text == "field_year") return StrataSpec::FieldYear;
  if (text == "year") return StrataSpec::Year;
  if (text == "none") return StrataSpec::None;
  throw InputError("unknown strata '" + text + "' (want field_year|year|none)");
}

std::string to_string(StrataSpec spec) {
  switch (spec) {
    case StrataSpec::FieldYear: return "field_year";
    case StrataSpec::Year: return "year";
    case StrataSpec::None: return "none";
  }
  return "?";
}

namespace {

// (field index, year); unused components are pinned to a constant.
using StratumKey = std::pair<std::int32_t, int>;

StratumKey stratum_key(const Corpus& corpus, PubIdx p, StrataSpec spec) {
  switch (spec) {
    case StrataSpec::FieldYear: return {corpus.field_index(p), corpus.year(p)};
    case StrataSpec::Year: return {kNoIndex, corpus.year(p)};
    case StrataSpec::None: return {kNoIndex, 0};
  }
  return {kNoIndex, 0};
}

std::map<StratumKey, std::vector<PubIdx>> group_by_stratum(const Corpus& corpus, StrataSpec spec) {
  std::map<StratumKey, std::vector<PubIdx>> groups;
  for (PubIdx p = 0; p < corpus.publication_count(); ++p) {
    if (corpus.team_size(p) > 0) groups[stratum_key(corpus, p, spec)].push_back(p);
  }
  return groups;
}

// Gale-Ryser: a simple bipartite graph with these degree sequences exists.
bool bipartite_realizable(std::span<const std::size_t> sizes, std::span<const AuthorIdx> stubs) {
  std::unordered_map<AuthorIdx, std::size_t> degree_of;
  for (auto a : stubs) ++degree_of[a];
  std::vector<std::size_t> degrees;
  degrees.reserve(degree_of.size());
  for (const auto& [a, d] : degree_of) degrees.push_back(d);
  std::sort(degrees.begin(), degrees.end());

  std::vector<std::size_t> rows(sizes.begin(), sizes.end());
  std::sort(rows.begin(), rows.end(), std::greater<>());
  std::size_t total_rows = 0;
  for (auto r : rows) total_rows += r;
  if (total_rows != stubs.size()) return false;

  // prefix[i] = sum of the i smallest degrees.
  std::vector<std::size_t> prefix(degrees.size() + 1, 0);
  for (std::size_t i = 0; i < degrees.size(); ++i) prefix[i + 1] = prefix[i] + degrees[i];
  std::size_t lhs = 0;
  for (std::size_t k = 1; k <= rows.size(); ++k) {
    lhs += rows[k - 1];
    // sum_j min(d_j, k): degrees below k count fully, the rest count k each.
    const auto split = static_cast<std::size_t>(
        std::lower_bound(degrees.begin(), degrees.end(), k) - degrees.begin());
    const std::size_t rhs = prefix[split] + (degrees.size() - split) * k;
    if (lhs > rhs) return false;
  }
  return true;
}

}  // namespace

std::string stratum_label(const Corpus& corpus, PubIdx pub, StrataSpec spec) {
  const auto [field, year] = stratum_key(corpus, pub, spec);
  switch (spec) {
    case StrataSpec::FieldYear:
      return (field == kNoIndex ? std::string("<unlabeled>") : corpus.field_labels()[field]) + "/" +
             std::to_string(year);
    case StrataSpec::Year: return std::to_string(year);
    case StrataSpec::None: return "all";
  }
  return "?";
}

std::vector<std::vector<AuthorIdx>> assign_stratum(std::span<const std::size_t> team_sizes,
                                                   std::vector<AuthorIdx> stubs, Rng& rng,
                                                   std::size_t max_sweeps,
                                                   const std::string& label,
                                                   std::size_t* swaps) {
  if (!bipartite_realizable(team_sizes, stubs)) {
    throw StratumInfeasible(label, "stratum " + label +
                                       " is infeasible: no publication assignment keeps every "
                                       "byline free of repeated authors");
  }
  std::vector<std::size_t> start(team_sizes.size() + 1, 0);
  for (std::size_t i = 0; i < team_sizes.size(); ++i) start[i + 1] = start[i] + team_sizes[i];
  std::vector<std::uint32_t> slot_pub(stubs.size());
  for (std::size_t i = 0; i < team_sizes.size(); ++i) {
    std::fill(slot_pub.begin() + static_cast<std::ptrdiff_t>(start[i]),
              slot_pub.begin() + static_cast<std::ptrdiff_t>(start[i + 1]),
              static_cast<std::uint32_t>(i));
  }
  auto holds = [&](std::uint32_t pub, AuthorIdx a, std::size_t skip_slot) {
    for (std::size_t s = start[pub]; s < start[pub + 1]; ++s) {
      if (s != skip_slot && stubs[s] == a) return true;
    }
    return false;
  };
  auto collisions = [&] {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < team_sizes.size(); ++i) {
      for (std::size_t s = start[i] + 1; s < start[i + 1]; ++s) {
        for (std::size_t r = start[i]; r < s; ++r) {
          if (stubs[r] == stubs[s]) {
            out.push_back(s);
            break;
          }
        }
      }
    }
    return out;
  };
  // Swap two stubs across publications if neither byline ends up repeating.
  auto try_swap = [&](std::size_t s, std::size_t s2) {
    const auto p = slot_pub[s], q = slot_pub[s2];
    if (q == p || stubs[s2] == stubs[s]) return false;
    if (holds(q, stubs[s], s2) || holds(p, stubs[s2], s)) return false;
    std::swap(stubs[s], stubs[s2]);
    if (swaps) ++*swaps;
    return true;
  };

  // Shuffle and repair; dense strata can trap the greedy repair in a local
  // minimum, so reshuffle a few times before building an assignment directly.
  constexpr int kRestarts = 4;
  constexpr int kAttemptsPerSlot = 64;
  const auto original = stubs;
  std::vector<std::size_t> bad;
  for (int restart = 0; restart < kRestarts; ++restart) {
    stubs = original;
    rng.shuffle(std::span<AuthorIdx>(stubs));
    bad = collisions();
    for (std::size_t sweep = 0; !bad.empty() && sweep < max_sweeps; ++sweep) {
      for (auto s : bad) {
        if (!holds(slot_pub[s], stubs[s], s)) continue;  // fixed by an earlier swap
        for (int attempt = 0; attempt < kAttemptsPerSlot; ++attempt) {
          if (try_swap(s, static_cast<std::size_t>(rng.below(stubs.size())))) break;
        }
      }
      bad = collisions();
    }
    if (bad.empty()) break;
  }

  if (!bad.empty()) {
    // Gale-Ryser greedy: authors by descending stub count each take the
    // publications with the most open slots. Valid whenever realizable.
    std::map<AuthorIdx, std::size_t> degree;
    for (auto a : original) ++degree[a];
    std::vector<std::pair<std::size_t, AuthorIdx>> order;
    for (const auto& [a, d] : degree) order.emplace_back(d, a);
    std::sort(order.begin(), order.end(), [](const auto& x, const auto& y) {
      return x.first != y.first ? x.first > y.first : x.second < y.second;
    });
    std::vector<std::size_t> open(team_sizes.begin(), team_sizes.end());
    std::vector<std::size_t> fill(team_sizes.size(), 0);
    std::vector<std::uint32_t> pubs(team_sizes.size());
    for (auto& [d, a] : order) {
      for (std::uint32_t i = 0; i < pubs.size(); ++i) pubs[i] = i;
      std::stable_sort(pubs.begin(), pubs.end(),
                       [&](std::uint32_t x, std::uint32_t y) { return open[x] > open[y]; });
      for (std::size_t k = 0; k < d; ++k) {
        const auto p = pubs[k];
        if (open[p] == 0) {
          throw StratumInfeasible(label, "stratum " + label + ": no simple assignment found");
        }
        stubs[start[p] + fill[p]++] = a;
        --open[p];
      }
    }
    // Randomize the constructed assignment with simplicity-preserving swaps.
    const std::size_t steps = 20 * stubs.size();
    for (std::size_t k = 0; k < steps; ++k) {
      try_swap(static_cast<std::size_t>(rng.below(stubs.size())),
               static_cast<std::size_t>(rng.below(stubs.size())));
    }
    bad = collisions();
  }
  if (!bad.empty()) {
    throw StratumInfeasible(label, "stratum " + label + ": repair did not converge within " +
                                       std::to_string(max_sweeps) + " sweeps");
  }

  std::vector<std::vector<AuthorIdx>> bylines(team_sizes.size());
  for (std::size_t i = 0; i < team_sizes.size(); ++i) {
    bylines[i].assign(stubs.begin() + static_cast<std::ptrdiff_t>(start[i]),
                      stubs.begin() + static_cast<std::ptrdiff_t>(start[i + 1]));
  }
  return bylines;
}

RandomizedCorpus randomize(const Corpus& corpus, const NullModelConfig& config,
                           std::size_t replicate) {
  if (config.replicates < 1) throw InputError("replicates must be >= 1");
  RandomizedCorpus out;
  out.seed = config.seed;
  out.replicate = replicate;

  std::vector<std::vector<AuthorIdx>> bylines(corpus.publication_count());
  const auto groups = group_by_stratum(corpus, config.strata);
  std::uint64_t ordinal = 0;
  std::vector<std::size_t> sizes;
  std::vector<AuthorIdx> stubs;
  for (const auto& [key, pubs] : groups) {
    sizes.clear();
    stubs.clear();
    for (auto p : pubs) {
      sizes.push_back(corpus.team_size(p));
      for (auto a : corpus.authors_of(p)) stubs.push_back(a);
    }
    Rng rng(derive_seed(config.seed, replicate, ordinal++));
    auto assigned = assign_stratum(sizes, stubs, rng, config.max_repair_sweeps,
                                   stratum_label(corpus, pubs.front(), config.strata),
                                   &out.repair_swaps);
    for (std::size_t i = 0; i < pubs.size(); ++i) bylines[pubs[i]] = std::move(assigned[i]);
  }
  out.corpus = corpus.with_authorships(bylines);
  return out;
}

bool verify_degrees(const Corpus& original, const Corpus& randomized, StrataSpec spec) {
  if (original.publication_count() != randomized.publication_count()) return false;
  using Multiset = std::map<AuthorIdx, std::size_t>;
  std::map<StratumKey, std::pair<Multiset, Multiset>> degrees;
  std::map<StratumKey, std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> sizes;
  for (PubIdx p = 0; p < original.publication_count(); ++p) {
    if (original.pub_id(p) != randomized.pub_id(p) || original.year(p) != randomized.year(p) ||
        original.field_index(p) != randomized.field_index(p)) {
      return false;
    }
    const auto key = stratum_key(original, p, spec);
    auto& [deg_o, deg_r] = degrees[key];
    auto& [size_o, size_r] = sizes[key];
    for (auto a : original.authors_of(p)) ++deg_o[a];
    std::vector<std::string_view> seen;
    for (auto a : randomized.authors_of(p)) {
      const auto& name = randomized.author_id(a);
      if (std::find(seen.begin(), seen.end(), name) != seen.end()) return false;
      seen.push_back(name);
      auto mapped = original.find_author(name);
      if (!mapped) return false;
      ++deg_r[*mapped];
    }
    size_o.push_back(original.team_size(p));
    size_r.push_back(randomized.team_size(p));
  }
  for (auto& [key, pair] : sizes) {
    std::sort(pair.first.begin(), pair.first.end());
    std::sort(pair.second.begin(), pair.second.end());
    if (pair.first != pair.second) return false;
  }
  for (const auto& [key, pair] : degrees) {
    if (pair.first != pair.second) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Ensembles

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) return std::nan("");
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

TableSet ensemble_bands(const std::vector<TableSet>& replicates) {
  TableSet bands;
  if (replicates.empty()) return bands;
  for (const auto& [name, first] : replicates.front()) {
    // key -> column -> values, keys in order of first appearance.
    std::vector<std::string> key_order;
    std::map<std::string, std::map<std::size_t, std::vector<double>>> values;
    for (const auto& rep : replicates) {
      auto it = rep.find(name);
      if (it == rep.end()) continue;
      const auto& table = it->second;
      for (const auto& row : table.rows) {
        if (row.empty()) continue;
        const auto key = format_cell(row[0]);
        if (!values.contains(key)) key_order.push_back(key);
        auto& cols = values[key];
        for (std::size_t c = 1; c < row.size(); ++c) {
          if (auto v = numeric_value(row[c])) cols[c].push_back(*v);
        }
      }
    }
    Table band;
    band.columns = {first.columns.empty() ? "key" : first.columns[0], "column", "n", "mean",
                    "p2_5", "p97_5"};
    for (const auto& key : key_order) {
      for (auto& [c, vals] : values[key]) {
        std::sort(vals.begin(), vals.end());
        double sum = 0.0;
        for (double v : vals) sum += v;
        band.add_row({key, first.columns.at(c), static_cast<std::int64_t>(vals.size()),
                      sum / static_cast<double>(vals.size()), quantile_sorted(vals, 0.025),
                      quantile_sorted(vals, 0.975)});
      }
    }
    bands.emplace(name, std::move(band));
  }
  return bands;
}

std::string bands_json(const TableSet& bands) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [name, table] : bands) {
    auto rows = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
      nlohmann::ordered_json r;
      r["key"] = format_cell(row[0]);
      r["column"] = format_cell(row[1]);
      r["n"] = std::get<std::int64_t>(row[2]);
      for (std::size_t c = 3; c < 6; ++c) {
        auto v = numeric_value(row[c]);
        r[table.columns[c]] = v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
      }
      rows.push_back(std::move(r));
    }
    j[name] = std::move(rows);
  }
  return j.dump(2) + "\n";
}

EnsembleResult null_ensemble(const Corpus& corpus, const NullModelConfig& config,
                             const Analysis& analysis, unsigned threads) {
  if (config.replicates < 1) throw InputError("replicates must be >= 1");
  EnsembleResult result;
  result.replicates.resize(config.replicates);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t r = next++; r < config.replicates; r = next++) {
      try {
        const auto randomized = randomize(corpus, config, r);
        result.replicates[r] = analysis(randomized.corpus);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = config.replicates;
      }
    }
  };
  const unsigned n_threads =
      std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(config.replicates)));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  result.bands = ensemble_bands(result.replicates);
  return result;
}

}  // namespace tertius
