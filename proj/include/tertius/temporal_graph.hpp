#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "tertius/corpus.hpp"

namespace tertius {

class TemporalGraph;

// Publications in the total order (year, month, day, pub_id), absent month
// and day sorting after present ones. Position i holds the i-th publication.
class Timeline {
 public:
  Timeline() = default;
  explicit Timeline(const Corpus& corpus);

  [[nodiscard]] std::size_t size() const { return order_.size(); }
  [[nodiscard]] PubIdx at(Position t) const { return order_[t]; }
  [[nodiscard]] Position position_of(PubIdx p) const { return position_[p]; }
  [[nodiscard]] std::span<const PubIdx> order() const { return order_; }

 private:
  friend class TemporalGraph;
  friend bool operator==(const TemporalGraph& lhs, const TemporalGraph& rhs);
  std::vector<PubIdx> order_;
  std::vector<Position> position_;
};

// Sparse per-pair co-publication history. Each author keeps a sorted list of
// the co-authors it ever published with; each (author, co-author) entry owns
// the ascending timeline positions of their joint publications.
class CollabState {
 public:
  [[nodiscard]] std::size_t pair_count() const { return neighbors_.size() / 2; }

  // Joint publications strictly before position t. Unknown pair -> 0.
  [[nodiscard]] std::uint32_t count_before(AuthorIdx x, AuthorIdx y, Position t) const;
  [[nodiscard]] std::uint32_t total_count(AuthorIdx x, AuthorIdx y) const;
  // Timeline positions of every joint publication, ascending.
  [[nodiscard]] std::span<const Position> history(AuthorIdx x, AuthorIdx y) const;
  [[nodiscard]] std::optional<Position> first_position(AuthorIdx x, AuthorIdx y) const;
  [[nodiscard]] std::span<const AuthorIdx> neighbors(AuthorIdx x) const {
    return {neighbors_.data() + neighbor_offsets_[x], neighbors_.data() + neighbor_offsets_[x + 1]};
  }

 private:
  friend class TemporalGraph;
  friend bool operator==(const TemporalGraph& lhs, const TemporalGraph& rhs);
  [[nodiscard]] std::optional<std::size_t> edge(AuthorIdx x, AuthorIdx y) const;

  std::vector<std::uint64_t> neighbor_offsets_{0};
  std::vector<AuthorIdx> neighbors_;
  std::vector<std::uint64_t> position_offsets_{0};  // per edge slot
  std::vector<Position> positions_;
};

// Per-author publication list in timeline order. Sequence index is 1-based.
class Careers {
 public:
  [[nodiscard]] std::span<const Position> positions(AuthorIdx a) const {
    return {positions_.data() + offsets_[a], positions_.data() + offsets_[a + 1]};
  }
  [[nodiscard]] std::size_t total_publications(AuthorIdx a) const {
    return offsets_[a + 1] - offsets_[a];
  }
  [[nodiscard]] std::size_t author_count() const { return offsets_.size() - 1; }
  [[nodiscard]] int first_year(AuthorIdx a) const { return first_year_[a]; }
  // 1-based index of position t in a's career; nullopt if a is not on t.
  [[nodiscard]] std::optional<std::uint32_t> sequence_index(AuthorIdx a, Position t) const;
  // Publications of a at positions < t.
  [[nodiscard]] std::uint32_t count_before(AuthorIdx a, Position t) const;
  [[nodiscard]] bool on_publication(AuthorIdx a, Position t) const;

 private:
  friend class TemporalGraph;
  friend bool operator==(const TemporalGraph& lhs, const TemporalGraph& rhs);
  std::vector<std::uint64_t> offsets_{0};
  std::vector<Position> positions_;
  std::vector<int> first_year_;
};

class TemporalGraph {
 public:
  TemporalGraph() = default;
  // Single chronological pass over the corpus.
  explicit TemporalGraph(const Corpus& corpus);

  [[nodiscard]] const Timeline& timeline() const { return timeline_; }
  [[nodiscard]] const CollabState& collab() const { return collab_; }
  [[nodiscard]] const Careers& careers() const { return careers_; }
  [[nodiscard]] int year_at(Position t) const { return years_[t]; }
  [[nodiscard]] const Date& date_at(Position t) const { return dates_[t]; }
  [[nodiscard]] std::uint64_t corpus_fingerprint() const { return corpus_fingerprint_; }

  // year(t) - year(first publication of a). Throws std::domain_error when a
  // has no publication at or before t.
  [[nodiscard]] int academic_age(AuthorIdx a, Position t) const;

  // Versioned, length-prefixed binary snapshot.
  void save(const std::filesystem::path& path) const;
  static TemporalGraph load(const std::filesystem::path& path);

  friend bool operator==(const TemporalGraph& lhs, const TemporalGraph& rhs);

 private:
  Timeline timeline_;
  CollabState collab_;
  Careers careers_;
  std::vector<int> years_;
  std::vector<Date> dates_;
  std::uint64_t corpus_fingerprint_ = 0;
};

// Orders publications by (date, pub_id).
std::vector<PubIdx> chronological_order(const Corpus& corpus);

}  // namespace tertius
