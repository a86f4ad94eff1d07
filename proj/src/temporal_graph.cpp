#include "tertius/temporal_graph.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace tertius {

std::vector<PubIdx> chronological_order(const Corpus& corpus) {
  std::vector<PubIdx> order(corpus.publication_count());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](PubIdx a, PubIdx b) {
    if (auto c = corpus.date(a) <=> corpus.date(b); c != 0) return c < 0;
    return corpus.pub_id(a) < corpus.pub_id(b);
  });
  return order;
}

Timeline::Timeline(const Corpus& corpus) : order_(chronological_order(corpus)) {
  position_.resize(order_.size());
  for (Position t = 0; t < order_.size(); ++t) position_[order_[t]] = t;
}

std::optional<std::size_t> CollabState::edge(AuthorIdx x, AuthorIdx y) const {
  if (x + 1 >= neighbor_offsets_.size()) return std::nullopt;
  const auto begin = neighbors_.begin() + static_cast<std::ptrdiff_t>(neighbor_offsets_[x]);
  const auto end = neighbors_.begin() + static_cast<std::ptrdiff_t>(neighbor_offsets_[x + 1]);
  auto it = std::lower_bound(begin, end, y);
  if (it == end || *it != y) return std::nullopt;
  return static_cast<std::size_t>(it - neighbors_.begin());
}

std::span<const Position> CollabState::history(AuthorIdx x, AuthorIdx y) const {
  auto e = edge(x, y);
  if (!e) return {};
  return {positions_.data() + position_offsets_[*e], positions_.data() + position_offsets_[*e + 1]};
}

std::uint32_t CollabState::count_before(AuthorIdx x, AuthorIdx y, Position t) const {
  auto h = history(x, y);
  return static_cast<std::uint32_t>(std::lower_bound(h.begin(), h.end(), t) - h.begin());
}

std::uint32_t CollabState::total_count(AuthorIdx x, AuthorIdx y) const {
  return static_cast<std::uint32_t>(history(x, y).size());
}

std::optional<Position> CollabState::first_position(AuthorIdx x, AuthorIdx y) const {
  auto h = history(x, y);
  if (h.empty()) return std::nullopt;
  return h.front();
}

std::optional<std::uint32_t> Careers::sequence_index(AuthorIdx a, Position t) const {
  auto p = positions(a);
  auto it = std::lower_bound(p.begin(), p.end(), t);
  if (it == p.end() || *it != t) return std::nullopt;
  return static_cast<std::uint32_t>(it - p.begin()) + 1;
}

std::uint32_t Careers::count_before(AuthorIdx a, Position t) const {
  auto p = positions(a);
  return static_cast<std::uint32_t>(std::lower_bound(p.begin(), p.end(), t) - p.begin());
}

bool Careers::on_publication(AuthorIdx a, Position t) const {
  auto p = positions(a);
  return std::binary_search(p.begin(), p.end(), t);
}

TemporalGraph::TemporalGraph(const Corpus& corpus)
    : timeline_(corpus), corpus_fingerprint_(corpus.fingerprint()) {
  const std::size_t n = timeline_.size();
  years_.resize(n);
  dates_.resize(n);
  for (Position t = 0; t < n; ++t) {
    dates_[t] = corpus.date(timeline_.at(t));
    years_[t] = dates_[t].year;
  }

  const std::size_t n_authors = corpus.author_count();
  careers_.offsets_.assign(n_authors + 1, 0);
  careers_.first_year_.assign(n_authors, 0);
  for (AuthorIdx a = 0; a < n_authors; ++a) {
    careers_.offsets_[a + 1] = careers_.offsets_[a] + corpus.pubs_of(a).size();
  }
  careers_.positions_.resize(careers_.offsets_.back());
  for (AuthorIdx a = 0; a < n_authors; ++a) {
    auto* out = careers_.positions_.data() + careers_.offsets_[a];
    const auto pubs = corpus.pubs_of(a);
    for (std::size_t i = 0; i < pubs.size(); ++i) out[i] = timeline_.position_of(pubs[i]);
    std::sort(out, out + pubs.size());
    if (!pubs.empty()) careers_.first_year_[a] = years_[out[0]];
  }

  // Pair histories, one author row at a time.
  collab_.neighbor_offsets_.assign(n_authors + 1, 0);
  std::vector<std::pair<AuthorIdx, Position>> buffer;
  for (AuthorIdx x = 0; x < n_authors; ++x) {
    buffer.clear();
    for (Position t : careers_.positions(x)) {
      for (AuthorIdx y : corpus.authors_of(timeline_.at(t))) {
        if (y != x) buffer.emplace_back(y, t);
      }
    }
    std::sort(buffer.begin(), buffer.end());
    for (std::size_t i = 0; i < buffer.size(); ++i) {
      if (i == 0 || buffer[i].first != buffer[i - 1].first) {
        collab_.neighbors_.push_back(buffer[i].first);
        if (collab_.neighbors_.size() > 1) {
          collab_.position_offsets_.push_back(collab_.positions_.size());
        }
      }
      collab_.positions_.push_back(buffer[i].second);
    }
    collab_.neighbor_offsets_[x + 1] = collab_.neighbors_.size();
  }
  if (!collab_.neighbors_.empty()) collab_.position_offsets_.push_back(collab_.positions_.size());
}

int TemporalGraph::academic_age(AuthorIdx a, Position t) const {
  auto p = careers_.positions(a);
  if (p.empty() || p.front() > t) {
    throw std::domain_error("academic age undefined: author has no publication at or before t");
  }
  return years_[t] - careers_.first_year(a);
}

// ---------------------------------------------------------------------------
// Snapshot

namespace {

constexpr char kMagic[8] = {'T', 'R', 'T', 'S', 'N', 'A', 'P', '\0'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw InputError("cannot write snapshot " + path.string());
  }
  template <typename T>
  void value(const T& v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof v);
  }
  template <typename T>
  void array(const std::vector<T>& v) {
    value(static_cast<std::uint64_t>(v.size()));
    out_.write(reinterpret_cast<const char*>(v.data()),
               static_cast<std::streamsize>(v.size() * sizeof(T)));
  }
  void raw(const void* data, std::size_t n) { out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n)); }
  void finish() {
    out_.flush();
    if (!out_) throw InputError("snapshot write failed");
  }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
    if (!in_) throw InputError("cannot read snapshot " + path.string());
    in_.seekg(0, std::ios::end);
    remaining_ = static_cast<std::uint64_t>(in_.tellg());
    in_.seekg(0);
  }
  template <typename T>
  T value() {
    T v{};
    read(&v, sizeof v);
    return v;
  }
  template <typename T>
  std::vector<T> array() {
    const auto n = value<std::uint64_t>();
    if (n > remaining_ / sizeof(T)) throw InputError("corrupt snapshot: array length");
    std::vector<T> v(n);
    read(v.data(), n * sizeof(T));
    return v;
  }
  void read(void* dst, std::size_t n) {
    if (n > remaining_) throw InputError("corrupt snapshot: truncated");
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    remaining_ -= n;
  }
  [[nodiscard]] std::uint64_t remaining() const { return remaining_; }

 private:
  std::ifstream in_;
  std::uint64_t remaining_ = 0;
};

}  // namespace

void TemporalGraph::save(const std::filesystem::path& path) const {
  Writer w(path);
  w.raw(kMagic, sizeof kMagic);
  w.value(kVersion);
  w.value(corpus_fingerprint_);
  w.array(timeline_.order_);
  w.array(dates_);
  w.array(careers_.offsets_);
  w.array(careers_.positions_);
  w.array(collab_.neighbor_offsets_);
  w.array(collab_.neighbors_);
  w.array(collab_.position_offsets_);
  w.array(collab_.positions_);
  w.finish();
}

TemporalGraph TemporalGraph::load(const std::filesystem::path& path) {
  Reader r(path);
  char magic[8];
  r.read(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof magic) != 0) throw InputError("not a temporal snapshot");
  if (r.value<std::uint32_t>() != kVersion) throw InputError("unsupported snapshot version");
  TemporalGraph g;
  g.corpus_fingerprint_ = r.value<std::uint64_t>();
  g.timeline_.order_ = r.array<PubIdx>();
  g.dates_ = r.array<Date>();
  g.careers_.offsets_ = r.array<std::uint64_t>();
  g.careers_.positions_ = r.array<Position>();
  g.collab_.neighbor_offsets_ = r.array<std::uint64_t>();
  g.collab_.neighbors_ = r.array<AuthorIdx>();
  g.collab_.position_offsets_ = r.array<std::uint64_t>();
  g.collab_.positions_ = r.array<Position>();
  if (r.remaining() != 0) throw InputError("corrupt snapshot: trailing bytes");

  const std::size_t n = g.timeline_.order_.size();
  if (g.dates_.size() != n || g.careers_.offsets_.empty() ||
      g.collab_.neighbor_offsets_.size() != g.careers_.offsets_.size() ||
      g.careers_.offsets_.back() != g.careers_.positions_.size() ||
      g.collab_.neighbor_offsets_.back() != g.collab_.neighbors_.size() ||
      g.collab_.position_offsets_.size() != g.collab_.neighbors_.size() + 1 ||
      g.collab_.position_offsets_.back() != g.collab_.positions_.size()) {
    throw InputError("corrupt snapshot: inconsistent sizes");
  }
  g.timeline_.position_.assign(n, 0);
  for (Position t = 0; t < n; ++t) {
    if (g.timeline_.order_[t] >= n) throw InputError("corrupt snapshot: publication index");
    g.timeline_.position_[g.timeline_.order_[t]] = t;
  }
  g.years_.resize(n);
  for (Position t = 0; t < n; ++t) g.years_[t] = g.dates_[t].year;
  const std::size_t n_authors = g.careers_.offsets_.size() - 1;
  g.careers_.first_year_.assign(n_authors, 0);
  for (AuthorIdx a = 0; a < n_authors; ++a) {
    auto p = g.careers_.positions(a);
    if (!p.empty()) {
      if (p.front() >= n) throw InputError("corrupt snapshot: career position");
      g.careers_.first_year_[a] = g.years_[p.front()];
    }
  }
  return g;
}

bool operator==(const TemporalGraph& lhs, const TemporalGraph& rhs) {
  return lhs.corpus_fingerprint_ == rhs.corpus_fingerprint_ &&
         lhs.timeline_.order_ == rhs.timeline_.order_ && lhs.dates_ == rhs.dates_ &&
         lhs.careers_.offsets_ == rhs.careers_.offsets_ &&
         lhs.careers_.positions_ == rhs.careers_.positions_ &&
         lhs.careers_.first_year_ == rhs.careers_.first_year_ &&
         lhs.collab_.neighbor_offsets_ == rhs.collab_.neighbor_offsets_ &&
         lhs.collab_.neighbors_ == rhs.collab_.neighbors_ &&
         lhs.collab_.position_offsets_ == rhs.collab_.position_offsets_ &&
         lhs.collab_.positions_ == rhs.collab_.positions_;
}

}  // namespace tertius
