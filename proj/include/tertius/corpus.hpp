#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tertius/common.hpp"

namespace tertius {

enum class Quartile : std::uint8_t { Q1 = 1, Q2, Q3, Q4 };

std::optional<Quartile> parse_quartile(std::string_view text);
std::string_view to_string(Quartile q);

struct PublicationRow {
  std::string pub_id;
  Date date;
  std::string venue_id;     // empty = none
  std::string field_label;  // empty = none
};

struct AuthorshipRow {
  std::string pub_id;
  std::string author_id;
  int position = 0;
};

struct CitationRow {
  std::string citing_id;
  std::string cited_id;
};

struct VenueRow {
  std::string venue_id;
  std::string issn;
  std::string eissn;
  std::string name;
  std::optional<Quartile> quartile;
};

struct JcrRow {
  std::string issn;
  std::string eissn;
  std::string name;
  Quartile quartile = Quartile::Q1;
};

struct CorpusTables {
  std::vector<PublicationRow> publications;
  std::vector<AuthorshipRow> authorships;
  std::vector<CitationRow> citations;
  std::vector<VenueRow> venues;
};

// Compressed sparse rows: row i is targets[offsets[i], offsets[i+1]).
struct Adjacency {
  std::vector<std::uint64_t> offsets{0};
  std::vector<std::uint32_t> targets;

  [[nodiscard]] std::span<const std::uint32_t> row(std::size_t i) const {
    return {targets.data() + offsets[i], targets.data() + offsets[i + 1]};
  }
  [[nodiscard]] std::size_t rows() const { return offsets.size() - 1; }

  static Adjacency from_lists(const std::vector<std::vector<std::uint32_t>>& lists);
  // Inverse relation; every output row is sorted ascending.
  [[nodiscard]] Adjacency transpose(std::size_t target_count) const;
};

// Everything a randomization leaves untouched.
struct PublicationTable {
  std::vector<std::string> ids;
  std::vector<Date> dates;
  std::vector<std::int32_t> venue;  // index into venues, or kNoIndex
  std::vector<std::int32_t> field;  // index into field_labels, or kNoIndex
  std::vector<std::string> field_labels;
  std::vector<VenueRow> venues;
  std::unordered_map<std::string, PubIdx> by_id;
  Adjacency refs;    // pub -> cited pubs
  Adjacency citers;  // pub -> citing pubs
};

// Immutable columnar corpus. Copies are cheap: the publication/citation side
// is shared, only the authorship index is owned.
class Corpus {
 public:
  Corpus();

  // Validates every table invariant; throws InvariantError on violation.
  static Corpus build(CorpusTables tables);

  // Same publications and citations, authorship replaced. Each inner list is
  // a byline in order. Author indices refer to this corpus' author table.
  [[nodiscard]] Corpus with_authorships(const std::vector<std::vector<AuthorIdx>>& bylines) const;
  [[nodiscard]] Corpus with_venues(std::vector<VenueRow> venues) const;

  [[nodiscard]] std::size_t publication_count() const { return pubs_->ids.size(); }
  [[nodiscard]] std::size_t author_count() const { return author_ids_->size(); }
  [[nodiscard]] std::size_t authorship_count() const { return bylines_.targets.size(); }
  [[nodiscard]] std::size_t citation_count() const { return pubs_->refs.targets.size(); }

  [[nodiscard]] std::span<const AuthorIdx> authors_of(PubIdx p) const { return bylines_.row(p); }
  [[nodiscard]] std::span<const PubIdx> pubs_of(AuthorIdx a) const { return pubs_by_author_.row(a); }
  [[nodiscard]] std::span<const PubIdx> refs_of(PubIdx p) const { return pubs_->refs.row(p); }
  [[nodiscard]] std::span<const PubIdx> citers_of(PubIdx p) const { return pubs_->citers.row(p); }
  [[nodiscard]] std::size_t team_size(PubIdx p) const { return authors_of(p).size(); }
  [[nodiscard]] std::size_t reference_count(PubIdx p) const { return refs_of(p).size(); }

  [[nodiscard]] const std::string& pub_id(PubIdx p) const { return pubs_->ids[p]; }
  [[nodiscard]] const std::string& author_id(AuthorIdx a) const { return (*author_ids_)[a]; }
  [[nodiscard]] const Date& date(PubIdx p) const { return pubs_->dates[p]; }
  [[nodiscard]] int year(PubIdx p) const { return pubs_->dates[p].year; }
  [[nodiscard]] std::int32_t field_index(PubIdx p) const { return pubs_->field[p]; }
  [[nodiscard]] std::int32_t venue_index(PubIdx p) const { return pubs_->venue[p]; }
  [[nodiscard]] const std::vector<std::string>& field_labels() const { return pubs_->field_labels; }
  [[nodiscard]] const std::vector<VenueRow>& venues() const { return pubs_->venues; }
  [[nodiscard]] std::optional<Quartile> quartile(PubIdx p) const;

  [[nodiscard]] std::optional<PubIdx> find_pub(std::string_view id) const;
  [[nodiscard]] std::optional<AuthorIdx> find_author(std::string_view id) const;

  // Tables in canonical order: pubs and venues by id, authorships by
  // (pub_id, position), citations by (citing_id, cited_id).
  [[nodiscard]] CorpusTables tables() const;

  // Order-sensitive fingerprint of the full content.
  [[nodiscard]] std::uint64_t fingerprint() const;

 private:
  std::shared_ptr<const PublicationTable> pubs_;
  std::shared_ptr<const std::vector<std::string>> author_ids_;  // sorted ascending
  Adjacency bylines_;         // pub -> authors, byline order
  Adjacency pubs_by_author_;  // author -> pubs, ascending PubIdx
};

struct CorpusPaths {
  std::filesystem::path publications;
  std::filesystem::path authorships;
  std::filesystem::path citations;
  std::filesystem::path venues;
};

// Strict TSV readers. Malformed rows raise InputError naming file and line.
CorpusTables read_corpus_tables(const CorpusPaths& paths);
std::vector<JcrRow> read_jcr(const std::filesystem::path& path);
Corpus load_corpus(const CorpusPaths& paths);

// Canonical TSV serialization (venues gain a trailing quartile column).
void write_corpus_tsv(const Corpus& corpus, const std::filesystem::path& dir);
CorpusPaths corpus_paths_in(const std::filesystem::path& dir);

// Case-fold, trim, collapse internal whitespace, strip trailing punctuation.
std::string normalize_venue_name(std::string_view name);

struct QuartileMatchReport {
  std::size_t venues = 0;
  std::size_t matched = 0;
  std::size_t by_issn = 0;
  std::size_t by_eissn = 0;
  std::size_t by_name = 0;
  [[nodiscard]] double match_rate() const {
    return venues == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(venues);
  }
};

// Priority: exact ISSN, exact eISSN, normalized name. Conflicting quartiles
// for one key in the JCR table raise InvariantError listing the conflicts.
QuartileMatchReport match_quartiles(std::vector<VenueRow>& venues, std::span<const JcrRow> jcr);

struct ValidationReport {
  std::size_t publications = 0;
  std::size_t authorships = 0;
  std::size_t citations = 0;
  std::size_t venues = 0;
  std::size_t authors = 0;
  std::map<int, std::size_t> year_histogram;
  std::map<std::size_t, std::size_t> team_size_distribution;  // pubs with >=1 author
  std::map<std::size_t, std::size_t> author_degree_distribution;
  std::size_t pubs_without_authors = 0;
  std::size_t pubs_without_venue = 0;
  std::size_t venues_unreferenced = 0;
  std::size_t pubs_without_citations_or_refs = 0;

  [[nodiscard]] std::string to_json() const;
};

ValidationReport validate_corpus(const Corpus& corpus);

}  // namespace tertius
