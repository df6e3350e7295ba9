#include "themetrek/corpus_io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>

#include "text_util.hpp"
#include "themetrek/error.hpp"

namespace themetrek {

namespace fs = std::filesystem;
using detail::for_each_line;
using detail::split;
using detail::trim;
using detail::where;

// --- RatingsDataset ---------------------------------------------------------

RatingsDataset RatingsDataset::from_triples(std::vector<Rating> triples) {
  RatingsDataset d;
  d.triples_ = std::move(triples);
  for (std::size_t pos = 0; pos < d.triples_.size(); ++pos) {
    const Rating& r = d.triples_[pos];
    if (!(r.value >= kMinRating && r.value <= kMaxRating)) {
      throw ValidationError("rating out of range [1,10] for (" + r.user + ", " + r.item +
                            "): " + format_real(r.value));
    }
    d.by_user_[r.user].push_back(pos);
    d.by_item_[r.item].push_back(pos);
  }
  for (auto& [user, positions] : d.by_user_) {
    std::set<std::string_view> seen;
    for (std::size_t pos : positions) {
      if (!seen.insert(d.triples_[pos].item).second) {
        throw ValidationError("duplicate rating for (" + user + ", " + d.triples_[pos].item + ")");
      }
    }
    d.users_.push_back(user);
  }
  for (const auto& entry : d.by_item_) d.items_.push_back(entry.first);
  std::sort(d.users_.begin(), d.users_.end());
  std::sort(d.items_.begin(), d.items_.end());
  return d;
}

std::span<const std::size_t> RatingsDataset::by_user(const std::string& user) const {
  const auto it = by_user_.find(user);
  if (it == by_user_.end()) return {};
  return it->second;
}

std::span<const std::size_t> RatingsDataset::by_item(const std::string& item) const {
  const auto it = by_item_.find(item);
  if (it == by_item_.end()) return {};
  return it->second;
}

double RatingsDataset::mean() const {
  if (triples_.empty()) return 0.0;
  double sum = 0.0;
  for (const Rating& r : triples_) sum += r.value;
  return sum / static_cast<double>(triples_.size());
}

RatingsDataset RatingsDataset::subset(std::span<const std::size_t> positions) const {
  std::vector<Rating> out;
  out.reserve(positions.size());
  for (std::size_t pos : positions) out.push_back(triples_.at(pos));
  return from_triples(std::move(out));
}

RatingsDataset load_ratings(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("ratings file not found: " + path.string());
  const std::string text = detail::read_file(path);
  std::vector<Rating> triples;
  bool header_seen = false;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (trim(line).empty()) return;
    const auto cols = split(line, ',');
    if (!header_seen) {
      header_seen = true;
      if (cols.size() == 3 && trim(cols[0]) == "user_id" && trim(cols[1]) == "item_id" &&
          trim(cols[2]) == "rating") {
        return;
      }
      throw ParseError(where(path, line_no) + "expected header user_id,item_id,rating");
    }
    if (cols.size() != 3) {
      throw ParseError(where(path, line_no) + "expected 3 comma-separated fields");
    }
    Rating r{std::string(trim(cols[0])), std::string(trim(cols[1])), 0.0};
    if (r.user.empty() || r.item.empty()) {
      throw ParseError(where(path, line_no) + "empty user or item id");
    }
    if (!detail::parse_double(cols[2], r.value)) {
      throw ParseError(where(path, line_no) + "rating is not a number");
    }
    if (!(r.value >= kMinRating && r.value <= kMaxRating)) {
      throw ValidationError(where(path, line_no) + "rating out of range [1,10]");
    }
    triples.push_back(std::move(r));
  });
  return RatingsDataset::from_triples(std::move(triples));
}

void write_ratings(const RatingsDataset& data, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "user_id,item_id,rating\n";
  for (const Rating& r : data.triples()) {
    out << r.user << ',' << r.item << ',' << format_real(r.value) << '\n';
  }
}

// --- ItemCatalog ------------------------------------------------------------

ItemCatalog ItemCatalog::from_entries(std::vector<CatalogEntry> entries) {
  ItemCatalog c;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].item_id.empty()) throw ValidationError("catalog entry with empty item id");
    if (entries[i].title.empty()) {
      throw ValidationError("catalog entry " + entries[i].item_id + " has an empty title");
    }
    if (!c.index_.emplace(entries[i].item_id, i).second) {
      throw ValidationError("duplicate catalog item id " + entries[i].item_id);
    }
  }
  c.entries_ = std::move(entries);
  return c;
}

ItemCatalog ItemCatalog::from_ids(const std::vector<std::string>& ids) {
  std::vector<CatalogEntry> entries;
  for (const std::string& id : ids) {
    CatalogEntry e;
    e.item_id = id;
    e.title = id;
    std::size_t k = 0;
    while (k < id.size() && std::isalpha(static_cast<unsigned char>(id[k]))) ++k;
    e.series = id.substr(0, k);
    entries.push_back(std::move(e));
  }
  return from_entries(std::move(entries));
}

const CatalogEntry* ItemCatalog::find(const std::string& item_id) const {
  const auto it = index_.find(item_id);
  return it == index_.end() ? nullptr : &entries_[it->second];
}

ItemCatalog load_catalog(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("catalog file not found: " + path.string());
  const std::string text = detail::read_file(path);
  std::vector<CatalogEntry> entries;
  bool first = true;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (trim(line).empty()) return;
    const auto cols = split(line, '\t');
    if (first) {
      first = false;
      if (!cols.empty() && trim(cols[0]) == "item_id") return;
    }
    if (cols.size() != 5) throw ParseError(where(path, line_no) + "expected 5 tab-separated fields");
    CatalogEntry e;
    e.item_id = std::string(trim(cols[0]));
    e.title = std::string(trim(cols[1]));
    e.series = std::string(trim(cols[2]));
    if (!detail::parse_int(cols[3], e.season) || !detail::parse_int(cols[4], e.episode)) {
      throw ParseError(where(path, line_no) + "season and episode must be integers");
    }
    entries.push_back(std::move(e));
  });
  return ItemCatalog::from_entries(std::move(entries));
}

// --- Annotations ------------------------------------------------------------

std::string_view to_string(ThemeLevel level) {
  return level == ThemeLevel::central ? "central" : "peripheral";
}

std::string_view to_string(LevelFilter filter) {
  switch (filter) {
    case LevelFilter::central:
      return "central";
    case LevelFilter::peripheral:
      return "peripheral";
    case LevelFilter::both:
      return "both";
  }
  return "both";
}

LevelFilter parse_level_filter(std::string_view token) {
  if (token == "central") return LevelFilter::central;
  if (token == "peripheral") return LevelFilter::peripheral;
  if (token == "both") return LevelFilter::both;
  throw ParseError("unknown theme level '" + std::string(token) + "'");
}

namespace {
bool passes(ThemeLevel level, LevelFilter filter) {
  if (filter == LevelFilter::both) return true;
  return (filter == LevelFilter::central) == (level == ThemeLevel::central);
}
}  // namespace

void ThemeAnnotationSet::add(const std::string& item, ThemeTag tag) {
  auto& tags = per_item_[item];
  const auto it = std::lower_bound(tags.begin(), tags.end(), tag);
  if (it != tags.end() && *it == tag) return;
  tags.insert(it, std::move(tag));
}

const std::vector<ThemeTag>* ThemeAnnotationSet::find(const std::string& item) const {
  const auto it = per_item_.find(item);
  return it == per_item_.end() ? nullptr : &it->second;
}

std::vector<std::string> ThemeAnnotationSet::themes(const std::string& item, LevelFilter filter) const {
  std::vector<std::string> out;
  if (const auto* tags = find(item)) {
    for (const ThemeTag& t : *tags) {
      if (passes(t.level, filter) && (out.empty() || out.back() != t.theme)) out.push_back(t.theme);
    }
  }
  return out;
}

ThemeAnnotationSet ThemeAnnotationSet::filtered(LevelFilter filter) const {
  ThemeAnnotationSet out;
  for (const auto& [item, tags] : per_item_) {
    for (const ThemeTag& t : tags) {
      if (passes(t.level, filter)) out.add(item, t);
    }
  }
  return out;
}

std::vector<std::string> ThemeAnnotationSet::items() const {
  std::vector<std::string> out;
  out.reserve(per_item_.size());
  for (const auto& entry : per_item_) out.push_back(entry.first);
  return out;
}

std::size_t ThemeAnnotationSet::tag_count() const {
  std::size_t n = 0;
  for (const auto& entry : per_item_) n += entry.second.size();
  return n;
}

namespace {
ThemeAnnotationSet read_annotations(const fs::path& path, const ItemCatalog* catalog) {
  if (!fs::exists(path)) throw IoError("annotations file not found: " + path.string());
  const std::string text = detail::read_file(path);
  ThemeAnnotationSet ann;
  std::set<std::string> unknown;
  bool first = true;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (trim(line).empty()) return;
    const auto cols = split(line, '\t');
    if (first) {
      first = false;
      if (cols.size() == 3 && trim(cols[0]) == "item_id" && trim(cols[1]) == "level") return;
    }
    if (cols.size() != 3) throw ParseError(where(path, line_no) + "expected 3 tab-separated fields");
    const std::string item(trim(cols[0]));
    const std::string_view level = trim(cols[1]);
    ThemeTag tag;
    if (level == "central") {
      tag.level = ThemeLevel::central;
    } else if (level == "peripheral") {
      tag.level = ThemeLevel::peripheral;
    } else {
      throw ParseError(where(path, line_no) + "unknown level '" + std::string(level) + "'");
    }
    tag.theme = std::string(trim(cols[2]));
    if (tag.theme.empty()) throw ParseError(where(path, line_no) + "empty theme name");
    if (catalog != nullptr && !catalog->contains(item)) {
      unknown.insert(item);
      return;
    }
    ann.add(item, std::move(tag));
  });
  if (!unknown.empty()) {
    std::string msg = "annotations reference unknown item ids:";
    for (const auto& id : unknown) msg += " " + id;
    throw ValidationError(msg);
  }
  return ann;
}
}  // namespace

ThemeAnnotationSet load_annotations(const fs::path& path, const ItemCatalog& catalog) {
  return read_annotations(path, &catalog);
}

ThemeAnnotationSet load_annotations(const fs::path& path) { return read_annotations(path, nullptr); }

void write_annotations(const ThemeAnnotationSet& ann, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "item_id\tlevel\ttheme_name\n";
  for (const auto& [item, tags] : ann.per_item()) {
    for (const ThemeTag& t : tags) out << item << '\t' << to_string(t.level) << '\t' << t.theme << '\n';
  }
}

// --- Transcripts ------------------------------------------------------------

void TranscriptCorpus::add(std::string item_id, std::string text) {
  if (item_id.empty()) throw ValidationError("transcript with empty item id");
  if (text.empty()) throw ValidationError("transcript for " + item_id + " is empty");
  per_item_[std::move(item_id)] = std::move(text);
}

TranscriptCorpus load_transcripts(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("transcripts directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
  }
  if (files.empty()) throw ValidationError("no transcripts (*.txt) in " + dir.string());
  std::sort(files.begin(), files.end());
  TranscriptCorpus corpus;
  for (const fs::path& f : files) {
    std::string text;
    try {
      text = detail::read_file(f);
    } catch (const IoError&) {
      throw IoError("cannot read transcript " + f.string());
    }
    corpus.add(f.stem().string(), std::move(text));
  }
  return corpus;
}

// --- SimilarityMatrix -------------------------------------------------------

SimilarityMatrix::SimilarityMatrix(std::vector<std::string> item_ids) : ids_(std::move(item_ids)) {
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!index_.emplace(ids_[i], i).second) {
      throw ValidationError("duplicate item id in similarity matrix: " + ids_[i]);
    }
  }
  rows_.resize(ids_.size());
}

SimilarityMatrix SimilarityMatrix::from_upper_triangle(std::vector<std::string> item_ids,
                                                       std::span<const double> upper) {
  SimilarityMatrix m(std::move(item_ids));
  const std::size_t n = m.size();
  if (upper.size() != n * (n - (n > 0 ? 1 : 0)) / 2) {
    throw ArgumentError("upper triangle size does not match item count");
  }
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++k) {
      const double s = upper[k];
      if (!(s >= 0.0 && s <= 1.0)) {
        throw ValidationError("similarity out of [0,1] for (" + m.ids_[i] + ", " + m.ids_[j] + ")");
      }
      if (s > 0.0) {
        // columns are appended in increasing order for both rows
        m.rows_[i].push_back({static_cast<std::uint32_t>(j), s});
        m.rows_[j].push_back({static_cast<std::uint32_t>(i), s});
      }
    }
  }
  return m;
}

std::optional<std::size_t> SimilarityMatrix::index_of(const std::string& item) const {
  const auto it = index_.find(item);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

namespace {
void upsert(std::vector<SimilarityMatrix::Entry>& row, std::uint32_t col, double score) {
  auto it = std::lower_bound(row.begin(), row.end(), col,
                             [](const SimilarityMatrix::Entry& e, std::uint32_t c) { return e.column < c; });
  if (it != row.end() && it->column == col) {
    if (score > 0.0) {
      it->score = score;
    } else {
      row.erase(it);
    }
  } else if (score > 0.0) {
    row.insert(it, {col, score});
  }
}
}  // namespace

void SimilarityMatrix::set(std::size_t i, std::size_t j, double score) {
  if (i >= size() || j >= size()) throw ArgumentError("similarity index out of range");
  if (!(score >= 0.0 && score <= 1.0)) {
    throw ValidationError("similarity out of [0,1] for (" + ids_[i] + ", " + ids_[j] + "): " +
                          format_real(score));
  }
  if (i == j) {
    if (score != 1.0) throw ValidationError("self-similarity must be 1 for " + ids_[i]);
    return;
  }
  upsert(rows_[i], static_cast<std::uint32_t>(j), score);
  upsert(rows_[j], static_cast<std::uint32_t>(i), score);
}

void SimilarityMatrix::set(const std::string& a, const std::string& b, double score) {
  const auto ia = index_of(a);
  const auto ib = index_of(b);
  if (!ia || !ib) throw NotFoundError("unknown item in similarity matrix: " + (ia ? b : a));
  set(*ia, *ib, score);
}

double SimilarityMatrix::score(std::size_t i, std::size_t j) const {
  if (i == j) return 1.0;
  const auto& row = rows_.at(i);
  const auto it = std::lower_bound(row.begin(), row.end(), static_cast<std::uint32_t>(j),
                                   [](const Entry& e, std::uint32_t c) { return e.column < c; });
  return (it != row.end() && it->column == j) ? it->score : 0.0;
}

double SimilarityMatrix::score(const std::string& a, const std::string& b) const {
  const auto ia = index_of(a);
  const auto ib = index_of(b);
  if (!ia || !ib) return a == b ? 1.0 : 0.0;
  return score(*ia, *ib);
}

std::size_t SimilarityMatrix::pair_count() const {
  std::size_t n = 0;
  for (const auto& row : rows_) n += row.size();
  return n / 2;
}

std::vector<double> SimilarityMatrix::dense() const {
  const std::size_t n = size();
  std::vector<double> out(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    out[i * n + i] = 1.0;
    for (const Entry& e : rows_[i]) out[i * n + e.column] = e.score;
  }
  return out;
}

std::string format_real(double value) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) throw ArgumentError("cannot format real");
  return std::string(buf.data(), ptr);
}

std::string format_similarity(const SimilarityMatrix& m) {
  struct Line {
    const std::string* a;
    const std::string* b;
    double score;
  };
  std::vector<Line> lines;
  const auto& ids = m.item_ids();
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (const auto& e : m.row(i)) {
      if (ids[i] < ids[e.column]) lines.push_back({&ids[i], &ids[e.column], e.score});
    }
  }
  std::sort(lines.begin(), lines.end(), [](const Line& x, const Line& y) {
    return std::tie(*x.a, *x.b) < std::tie(*y.a, *y.b);
  });
  std::string out;
  for (const Line& l : lines) {
    out += *l.a;
    out += '\t';
    out += *l.b;
    out += '\t';
    out += format_real(l.score);
    out += '\n';
  }
  return out;
}

SimilarityMatrix parse_similarity(std::string_view text) {
  struct Row {
    std::string a, b;
    double score;
  };
  std::vector<Row> rows;
  std::set<std::string> ids;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (trim(line).empty()) return;
    const auto cols = split(line, '\t');
    const std::string loc = "line " + std::to_string(line_no) + ": ";
    if (cols.size() != 3) throw ParseError(loc + "expected item_i<TAB>item_j<TAB>score");
    Row r{std::string(trim(cols[0])), std::string(trim(cols[1])), 0.0};
    if (r.a.empty() || r.b.empty()) throw ParseError(loc + "empty item id");
    if (!detail::parse_double(cols[2], r.score)) throw ParseError(loc + "score is not a number");
    if (!(r.score >= 0.0 && r.score <= 1.0)) throw ValidationError(loc + "score outside [0,1]");
    if (r.a == r.b && r.score != 1.0) throw ValidationError(loc + "self-similarity must be 1");
    ids.insert(r.a);
    ids.insert(r.b);
    rows.push_back(std::move(r));
  });
  SimilarityMatrix m(std::vector<std::string>(ids.begin(), ids.end()));
  for (const Row& r : rows) m.set(r.a, r.b, r.score);
  return m;
}

void export_similarity(const SimilarityMatrix& m, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << format_similarity(m);
  if (!out) throw IoError("error writing " + path.string());
}

SimilarityMatrix import_similarity(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("similarity file not found: " + path.string());
  try {
    return parse_similarity(detail::read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

}  // namespace themetrek
