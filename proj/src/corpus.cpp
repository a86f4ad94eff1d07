#include "tertius/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tertius/hashing.hpp"
#include "tertius/table.hpp"

namespace tertius {

std::optional<Quartile> parse_quartile(std::string_view text) {
  if (text == "Q1") return Quartile::Q1;
  if (text == "Q2") return Quartile::Q2;
  if (text == "Q3") return Quartile::Q3;
  if (text == "Q4") return Quartile::Q4;
  return std::nullopt;
}

std::string_view to_string(Quartile q) {
  switch (q) {
    case Quartile::Q1: return "Q1";
    case Quartile::Q2: return "Q2";
    case Quartile::Q3: return "Q3";
    case Quartile::Q4: return "Q4";
  }
  return "?";
}

Adjacency Adjacency::from_lists(const std::vector<std::vector<std::uint32_t>>& lists) {
  Adjacency adj;
  adj.offsets.resize(lists.size() + 1);
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < lists.size(); ++i) {
    adj.offsets[i] = total;
    total += lists[i].size();
  }
  adj.offsets[lists.size()] = total;
  adj.targets.reserve(total);
  for (const auto& l : lists) adj.targets.insert(adj.targets.end(), l.begin(), l.end());
  return adj;
}

Adjacency Adjacency::transpose(std::size_t target_count) const {
  Adjacency out;
  out.offsets.assign(target_count + 1, 0);
  for (auto t : targets) ++out.offsets[t + 1];
  std::partial_sum(out.offsets.begin(), out.offsets.end(), out.offsets.begin());
  out.targets.resize(targets.size());
  std::vector<std::uint64_t> cursor(out.offsets.begin(), out.offsets.end() - 1);
  // Rows visited in ascending order, so each output row comes out sorted.
  for (std::size_t i = 0; i < rows(); ++i) {
    for (auto t : row(i)) out.targets[cursor[t]++] = static_cast<std::uint32_t>(i);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Corpus

Corpus::Corpus()
    : pubs_(std::make_shared<PublicationTable>()),
      author_ids_(std::make_shared<std::vector<std::string>>()) {}

namespace {

std::string list_offenders(const std::vector<std::string>& offenders, std::size_t total) {
  std::string msg;
  for (const auto& o : offenders) msg += "\n  " + o;
  if (total > offenders.size()) msg += "\n  ... (" + std::to_string(total) + " total)";
  return msg;
}

class OffenderList {
 public:
  void add(std::string what) {
    ++total_;
    if (items_.size() < 20) items_.push_back(std::move(what));
  }
  void raise_if_any(const std::string& headline) const {
    if (total_ == 0) return;
    throw InvariantError(headline + " (" + std::to_string(total_) + ")" +
                         list_offenders(items_, total_));
  }

 private:
  std::vector<std::string> items_;
  std::size_t total_ = 0;
};

}  // namespace

Corpus Corpus::build(CorpusTables tables) {
  auto pubs = std::make_shared<PublicationTable>();
  const std::size_t n_pubs = tables.publications.size();

  // Venues
  std::unordered_map<std::string, std::int32_t> venue_by_id;
  {
    OffenderList dup;
    for (auto& v : tables.venues) {
      if (v.venue_id.empty()) {
        dup.add("empty venue_id");
        continue;
      }
      auto [it, inserted] =
          venue_by_id.emplace(v.venue_id, static_cast<std::int32_t>(pubs->venues.size()));
      if (!inserted) {
        dup.add("duplicate venue_id " + v.venue_id);
        continue;
      }
      pubs->venues.push_back(std::move(v));
    }
    dup.raise_if_any("invalid venue rows");
  }

  // Publications
  {
    OffenderList bad;
    OffenderList dangling;
    std::unordered_map<std::string, std::int32_t> field_by_label;
    pubs->ids.reserve(n_pubs);
    pubs->dates.reserve(n_pubs);
    pubs->by_id.reserve(n_pubs);
    for (auto& row : tables.publications) {
      const auto& d = row.date;
      if (d.year < 1800 || d.year > 2100) bad.add("pub " + row.pub_id + ": year out of range");
      if (d.month < 0 || d.month > 12) bad.add("pub " + row.pub_id + ": month out of range");
      if (d.day < 0 || d.day > 31) bad.add("pub " + row.pub_id + ": day out of range");
      if (d.day != 0 && d.month == 0) bad.add("pub " + row.pub_id + ": day without month");
      if (row.pub_id.empty()) bad.add("empty pub_id");
      auto [it, inserted] = pubs->by_id.emplace(row.pub_id, static_cast<PubIdx>(pubs->ids.size()));
      if (!inserted) {
        bad.add("duplicate pub_id " + row.pub_id);
        continue;
      }
      std::int32_t venue = kNoIndex;
      if (!row.venue_id.empty()) {
        auto v = venue_by_id.find(row.venue_id);
        if (v == venue_by_id.end()) {
          dangling.add("publication " + row.pub_id + " -> venue " + row.venue_id);
        } else {
          venue = v->second;
        }
      }
      std::int32_t field = kNoIndex;
      if (!row.field_label.empty()) {
        auto [f, added] = field_by_label.emplace(
            row.field_label, static_cast<std::int32_t>(pubs->field_labels.size()));
        if (added) pubs->field_labels.push_back(row.field_label);
        field = f->second;
      }
      pubs->ids.push_back(std::move(row.pub_id));
      pubs->dates.push_back(d);
      pubs->venue.push_back(venue);
      pubs->field.push_back(field);
    }
    bad.raise_if_any("invalid publication rows");
    dangling.raise_if_any("dangling foreign keys");
  }
  const std::size_t n = pubs->ids.size();

  // Authorships
  auto author_ids = std::make_shared<std::vector<std::string>>();
  std::vector<std::vector<AuthorIdx>> bylines(n);
  {
    OffenderList dangling;
    for (const auto& row : tables.authorships) {
      if (!pubs->by_id.contains(row.pub_id)) {
        dangling.add("authorship " + row.pub_id + "/" + row.author_id + " -> publication " +
                     row.pub_id);
      }
    }
    dangling.raise_if_any("dangling foreign keys");

    std::vector<std::string_view> names;
    names.reserve(tables.authorships.size());
    for (const auto& row : tables.authorships) names.push_back(row.author_id);
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    author_ids->assign(names.begin(), names.end());

    std::unordered_map<std::string_view, AuthorIdx> author_by_id;
    author_by_id.reserve(author_ids->size());
    for (std::size_t i = 0; i < author_ids->size(); ++i) {
      author_by_id.emplace((*author_ids)[i], static_cast<AuthorIdx>(i));
    }

    std::vector<std::vector<std::pair<int, AuthorIdx>>> slots(n);
    OffenderList bad;
    for (const auto& row : tables.authorships) {
      if (row.author_id.empty()) bad.add("empty author_id on " + row.pub_id);
      slots[pubs->by_id.at(row.pub_id)].emplace_back(row.position, author_by_id.at(row.author_id));
    }
    for (PubIdx p = 0; p < n; ++p) {
      auto& s = slots[p];
      std::sort(s.begin(), s.end());
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i].first != static_cast<int>(i + 1)) {
          bad.add("publication " + pubs->ids[p] + ": positions not contiguous 1.." +
                  std::to_string(s.size()));
          break;
        }
      }
      std::vector<AuthorIdx> seen;
      for (auto& [pos, a] : s) seen.push_back(a);
      bylines[p] = seen;
      std::sort(seen.begin(), seen.end());
      if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) {
        bad.add("publication " + pubs->ids[p] + ": author listed twice");
      }
    }
    bad.raise_if_any("invalid authorship rows");
  }

  // Citations
  {
    OffenderList dangling;
    OffenderList bad;
    std::vector<std::vector<PubIdx>> refs(n);
    for (const auto& row : tables.citations) {
      auto from = pubs->by_id.find(row.citing_id);
      auto to = pubs->by_id.find(row.cited_id);
      if (from == pubs->by_id.end() || to == pubs->by_id.end()) {
        dangling.add("citation " + row.citing_id + " -> " + row.cited_id);
        continue;
      }
      if (from->second == to->second) {
        bad.add("self-citation " + row.citing_id);
        continue;
      }
      refs[from->second].push_back(to->second);
    }
    dangling.raise_if_any("dangling foreign keys");
    for (PubIdx p = 0; p < n; ++p) {
      auto& r = refs[p];
      std::sort(r.begin(), r.end());
      if (auto it = std::adjacent_find(r.begin(), r.end()); it != r.end()) {
        bad.add("duplicate citation " + pubs->ids[p] + " -> " + pubs->ids[*it]);
      }
    }
    bad.raise_if_any("invalid citation rows");
    pubs->refs = Adjacency::from_lists(refs);
    pubs->citers = pubs->refs.transpose(n);
  }

  Corpus corpus;
  corpus.author_ids_ = std::move(author_ids);
  corpus.bylines_ = Adjacency::from_lists(bylines);
  corpus.pubs_by_author_ = corpus.bylines_.transpose(corpus.author_ids_->size());
  corpus.pubs_ = std::move(pubs);
  return corpus;
}

Corpus Corpus::with_authorships(const std::vector<std::vector<AuthorIdx>>& bylines) const {
  Corpus out;
  out.pubs_ = pubs_;
  out.author_ids_ = author_ids_;
  out.bylines_ = Adjacency::from_lists(bylines);
  out.pubs_by_author_ = out.bylines_.transpose(author_ids_->size());
  return out;
}

Corpus Corpus::with_venues(std::vector<VenueRow> venues) const {
  auto table = std::make_shared<PublicationTable>(*pubs_);
  table->venues = std::move(venues);
  Corpus out = *this;
  out.pubs_ = std::move(table);
  return out;
}

std::optional<Quartile> Corpus::quartile(PubIdx p) const {
  const auto v = pubs_->venue[p];
  if (v == kNoIndex) return std::nullopt;
  return pubs_->venues[static_cast<std::size_t>(v)].quartile;
}

std::optional<PubIdx> Corpus::find_pub(std::string_view id) const {
  auto it = pubs_->by_id.find(std::string(id));
  if (it == pubs_->by_id.end()) return std::nullopt;
  return it->second;
}

std::optional<AuthorIdx> Corpus::find_author(std::string_view id) const {
  auto it = std::lower_bound(author_ids_->begin(), author_ids_->end(), id);
  if (it == author_ids_->end() || *it != id) return std::nullopt;
  return static_cast<AuthorIdx>(it - author_ids_->begin());
}

CorpusTables Corpus::tables() const {
  CorpusTables t;
  const std::size_t n = publication_count();
  std::vector<PubIdx> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](PubIdx a, PubIdx b) { return pub_id(a) < pub_id(b); });
  for (auto p : order) {
    PublicationRow row{pub_id(p), date(p), "", ""};
    if (venue_index(p) != kNoIndex) row.venue_id = venues()[venue_index(p)].venue_id;
    if (field_index(p) != kNoIndex) row.field_label = field_labels()[field_index(p)];
    t.publications.push_back(std::move(row));
    const auto authors = authors_of(p);
    for (std::size_t i = 0; i < authors.size(); ++i) {
      t.authorships.push_back({pub_id(p), author_id(authors[i]), static_cast<int>(i + 1)});
    }
    std::vector<const std::string*> cited;
    for (auto r : refs_of(p)) cited.push_back(&pub_id(r));
    std::sort(cited.begin(), cited.end(), [](auto* a, auto* b) { return *a < *b; });
    for (auto* c : cited) t.citations.push_back({pub_id(p), *c});
  }
  t.venues = venues();
  std::sort(t.venues.begin(), t.venues.end(),
            [](const VenueRow& a, const VenueRow& b) { return a.venue_id < b.venue_id; });
  return t;
}

std::uint64_t Corpus::fingerprint() const {
  Fnv1a h;
  h.update_value(publication_count());
  for (PubIdx p = 0; p < publication_count(); ++p) {
    h.update(pub_id(p));
    h.update_value(date(p).year);
    h.update_value(date(p).month);
    h.update_value(date(p).day);
    h.update_value(venue_index(p));
    h.update_value(field_index(p));
    h.update_value(team_size(p));
    for (auto a : authors_of(p)) h.update(author_id(a));
    h.update_value(reference_count(p));
    for (auto r : refs_of(p)) h.update_value(r);
  }
  for (const auto& f : field_labels()) h.update(f);
  for (const auto& v : venues()) {
    h.update(v.venue_id);
    h.update_value(v.quartile ? static_cast<int>(*v.quartile) : 0);
  }
  return h.digest();
}

// ---------------------------------------------------------------------------
// TSV I/O

namespace {

class TsvReader {
 public:
  TsvReader(const std::filesystem::path& path, std::vector<std::string> expected,
            std::vector<std::string> optional_trailing = {})
      : path_(path) {
    if (!std::filesystem::exists(path)) throw InputError("missing file: " + path.string());
    text_ = read_text_file(path);
    std::string_view header;
    if (!next_line(header)) throw InputError(path.string() + ": empty file (header row required)");
    auto cols = split(header);
    std::vector<std::string> got(cols.begin(), cols.end());
    auto with_optional = expected;
    with_optional.insert(with_optional.end(), optional_trailing.begin(), optional_trailing.end());
    if (got == expected) {
      width_ = expected.size();
    } else if (!optional_trailing.empty() && got == with_optional) {
      width_ = with_optional.size();
    } else {
      std::string want;
      for (const auto& c : expected) want += (want.empty() ? "" : ",") + c;
      throw InputError(path.string() + ":1: unexpected header, want columns " + want);
    }
  }

  // Returns false at end of file.
  bool next(std::vector<std::string_view>& fields) {
    std::string_view line;
    if (!next_line(line)) return false;
    fields = split(line);
    if (fields.size() != width_) {
      fail("expected " + std::to_string(width_) + " fields, got " +
           std::to_string(fields.size()));
    }
    return true;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw InputError(path_.string() + ":" + std::to_string(line_no_) + ": " + what);
  }

  int parse_int(std::string_view s, const char* column, bool allow_empty = false) const {
    if (s.empty()) {
      if (allow_empty) return 0;
      fail(std::string("empty ") + column);
    }
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      fail(std::string("bad integer in ") + column + ": '" + std::string(s) + "'");
    }
    return v;
  }

  [[nodiscard]] std::size_t width() const { return width_; }

 private:
  bool next_line(std::string_view& line) {
    if (pos_ >= text_.size()) return false;
    auto nl = text_.find('\n', pos_);
    if (nl == std::string::npos) nl = text_.size();
    line = std::string_view(text_).substr(pos_, nl - pos_);
    pos_ = nl + 1;
    ++line_no_;
    return true;
  }

  static std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
      auto tab = line.find('\t', start);
      parts.push_back(line.substr(start, tab == std::string_view::npos ? tab : tab - start));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    return parts;
  }

  std::filesystem::path path_;
  std::string text_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
  std::size_t width_ = 0;
};

std::string str(std::string_view s) { return std::string(s); }

}  // namespace

CorpusTables read_corpus_tables(const CorpusPaths& paths) {
  CorpusTables t;
  std::vector<std::string_view> f;
  {
    TsvReader r(paths.publications, {"pub_id", "year", "month", "day", "venue_id", "field_label"});
    while (r.next(f)) {
      if (f[0].empty()) r.fail("empty pub_id");
      Date d{r.parse_int(f[1], "year"), r.parse_int(f[2], "month", true),
             r.parse_int(f[3], "day", true)};
      t.publications.push_back({str(f[0]), d, str(f[4]), str(f[5])});
    }
  }
  {
    TsvReader r(paths.authorships, {"pub_id", "author_id", "position"});
    while (r.next(f)) {
      if (f[0].empty() || f[1].empty()) r.fail("empty identifier");
      const int pos = r.parse_int(f[2], "position");
      if (pos < 1) r.fail("position must be >= 1");
      t.authorships.push_back({str(f[0]), str(f[1]), pos});
    }
  }
  {
    TsvReader r(paths.citations, {"citing_id", "cited_id"});
    while (r.next(f)) {
      if (f[0].empty() || f[1].empty()) r.fail("empty identifier");
      t.citations.push_back({str(f[0]), str(f[1])});
    }
  }
  {
    TsvReader r(paths.venues, {"venue_id", "issn", "eissn", "name"}, {"quartile"});
    while (r.next(f)) {
      if (f[0].empty()) r.fail("empty venue_id");
      VenueRow v{str(f[0]), str(f[1]), str(f[2]), str(f[3]), std::nullopt};
      if (r.width() == 5 && !f[4].empty()) {
        v.quartile = parse_quartile(f[4]);
        if (!v.quartile) r.fail("bad quartile '" + str(f[4]) + "'");
      }
      t.venues.push_back(std::move(v));
    }
  }
  return t;
}

std::vector<JcrRow> read_jcr(const std::filesystem::path& path) {
  std::vector<JcrRow> rows;
  TsvReader r(path, {"issn", "eissn", "name", "quartile"});
  std::vector<std::string_view> f;
  while (r.next(f)) {
    auto q = parse_quartile(f[3]);
    if (!q) r.fail("bad quartile '" + str(f[3]) + "'");
    rows.push_back({str(f[0]), str(f[1]), str(f[2]), *q});
  }
  return rows;
}

Corpus load_corpus(const CorpusPaths& paths) { return Corpus::build(read_corpus_tables(paths)); }

CorpusPaths corpus_paths_in(const std::filesystem::path& dir) {
  return {dir / "publications.tsv", dir / "authorships.tsv", dir / "citations.tsv",
          dir / "venues.tsv"};
}

void write_corpus_tsv(const Corpus& corpus, const std::filesystem::path& dir) {
  const auto t = corpus.tables();
  const auto paths = corpus_paths_in(dir);
  auto opt = [](int v) { return v == 0 ? std::string() : std::to_string(v); };
  {
    std::string out = "pub_id\tyear\tmonth\tday\tvenue_id\tfield_label\n";
    for (const auto& p : t.publications) {
      out += p.pub_id + '\t' + std::to_string(p.date.year) + '\t' + opt(p.date.month) + '\t' +
             opt(p.date.day) + '\t' + p.venue_id + '\t' + p.field_label + '\n';
    }
    write_text_file(paths.publications, out);
  }
  {
    std::string out = "pub_id\tauthor_id\tposition\n";
    for (const auto& a : t.authorships) {
      out += a.pub_id + '\t' + a.author_id + '\t' + std::to_string(a.position) + '\n';
    }
    write_text_file(paths.authorships, out);
  }
  {
    std::string out = "citing_id\tcited_id\n";
    for (const auto& c : t.citations) out += c.citing_id + '\t' + c.cited_id + '\n';
    write_text_file(paths.citations, out);
  }
  {
    std::string out = "venue_id\tissn\teissn\tname\tquartile\n";
    for (const auto& v : t.venues) {
      out += v.venue_id + '\t' + v.issn + '\t' + v.eissn + '\t' + v.name + '\t' +
             (v.quartile ? std::string(to_string(*v.quartile)) : std::string()) + '\n';
    }
    write_text_file(paths.venues, out);
  }
}

// ---------------------------------------------------------------------------
// Quartile matching

std::string normalize_venue_name(std::string_view name) {
  std::string out;
  bool pending_space = false;
  for (unsigned char ch : name) {
    if (std::isspace(ch)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += static_cast<char>(std::tolower(ch));
  }
  while (!out.empty() && std::ispunct(static_cast<unsigned char>(out.back()))) {
    out.pop_back();
    while (!out.empty() && out.back() == ' ') out.pop_back();
  }
  return out;
}

QuartileMatchReport match_quartiles(std::vector<VenueRow>& venues, std::span<const JcrRow> jcr) {
  using KeyMap = std::map<std::string, Quartile>;
  KeyMap by_issn, by_eissn, by_name;
  std::set<std::string> conflicts;

  auto insert = [&](KeyMap& map, const char* kind, const std::string& key, Quartile q) {
    if (key.empty()) return;
    auto [it, inserted] = map.emplace(key, q);
    if (!inserted && it->second != q) conflicts.insert(std::string(kind) + " " + key);
  };
  for (const auto& row : jcr) {
    insert(by_issn, "issn", row.issn, row.quartile);
    insert(by_eissn, "eissn", row.eissn, row.quartile);
    insert(by_name, "name", normalize_venue_name(row.name), row.quartile);
  }
  if (!conflicts.empty()) {
    std::vector<std::string> items(conflicts.begin(), conflicts.end());
    if (items.size() > 20) items.resize(20);
    throw InvariantError("conflicting quartiles in JCR table (" + std::to_string(conflicts.size()) +
                         ")" + list_offenders(items, conflicts.size()));
  }

  QuartileMatchReport report;
  report.venues = venues.size();
  for (auto& v : venues) {
    v.quartile.reset();
    if (!v.issn.empty()) {
      if (auto it = by_issn.find(v.issn); it != by_issn.end()) {
        v.quartile = it->second;
        ++report.by_issn;
      }
    }
    if (!v.quartile && !v.eissn.empty()) {
      if (auto it = by_eissn.find(v.eissn); it != by_eissn.end()) {
        v.quartile = it->second;
        ++report.by_eissn;
      }
    }
    if (!v.quartile) {
      const auto key = normalize_venue_name(v.name);
      if (!key.empty()) {
        if (auto it = by_name.find(key); it != by_name.end()) {
          v.quartile = it->second;
          ++report.by_name;
        }
      }
    }
    if (v.quartile) ++report.matched;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Validation report

ValidationReport validate_corpus(const Corpus& corpus) {
  ValidationReport r;
  r.publications = corpus.publication_count();
  r.authorships = corpus.authorship_count();
  r.citations = corpus.citation_count();
  r.venues = corpus.venues().size();
  r.authors = corpus.author_count();
  std::vector<bool> venue_used(corpus.venues().size(), false);
  for (PubIdx p = 0; p < corpus.publication_count(); ++p) {
    ++r.year_histogram[corpus.year(p)];
    const auto k = corpus.team_size(p);
    if (k == 0) {
      ++r.pubs_without_authors;
    } else {
      ++r.team_size_distribution[k];
    }
    if (corpus.venue_index(p) == kNoIndex) {
      ++r.pubs_without_venue;
    } else {
      venue_used[corpus.venue_index(p)] = true;
    }
    if (corpus.refs_of(p).empty() && corpus.citers_of(p).empty()) ++r.pubs_without_citations_or_refs;
  }
  for (AuthorIdx a = 0; a < corpus.author_count(); ++a) {
    ++r.author_degree_distribution[corpus.pubs_of(a).size()];
  }
  r.venues_unreferenced =
      static_cast<std::size_t>(std::count(venue_used.begin(), venue_used.end(), false));
  return r;
}

std::string ValidationReport::to_json() const {
  nlohmann::ordered_json j;
  j["publications"] = publications;
  j["authorships"] = authorships;
  j["citations"] = citations;
  j["venues"] = venues;
  j["authors"] = authors;
  auto hist = [](const auto& m) {
    nlohmann::ordered_json o = nlohmann::ordered_json::object();
    for (const auto& [k, v] : m) o[std::to_string(k)] = v;
    return o;
  };
  j["year_histogram"] = hist(year_histogram);
  j["team_size_distribution"] = hist(team_size_distribution);
  j["author_degree_distribution"] = hist(author_degree_distribution);
  j["orphans"] = {{"publications_without_authors", pubs_without_authors},
                  {"publications_without_venue", pubs_without_venue},
                  {"venues_unreferenced", venues_unreferenced},
                  {"publications_without_citations_or_references", pubs_without_citations_or_refs}};
  return j.dump(2) + "\n";
}

}  // namespace tertius
