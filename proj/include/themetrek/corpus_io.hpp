#pragma once
// Data model and file formats: ratings (CSV), item catalog (TSV), theme
// annotations (TSV), transcripts (directory of <item_id>.txt) and the
// item-item similarity exchange file (item_i<TAB>item_j<TAB>score).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

namespace themetrek {

struct Rating {
  std::string user;
  std::string item;
  double value = 0.0;
};

inline constexpr double kMinRating = 1.0;
inline constexpr double kMaxRating = 10.0;

/// Immutable set of (user, item, rating) triples with by-user and by-item
/// position indexes. Ratings lie in [1, 10] and (user, item) pairs are unique.
class RatingsDataset {
 public:
  RatingsDataset() = default;

  /// Validates and indexes; throws ValidationError on a bound violation or a
  /// duplicate (user, item) pair.
  static RatingsDataset from_triples(std::vector<Rating> triples);

  std::span<const Rating> triples() const { return triples_; }
  std::size_t size() const { return triples_.size(); }
  bool empty() const { return triples_.empty(); }

  /// Positions into triples() for one user / item; empty span if unknown.
  std::span<const std::size_t> by_user(const std::string& user) const;
  std::span<const std::size_t> by_item(const std::string& item) const;

  /// Sorted distinct ids.
  const std::vector<std::string>& users() const { return users_; }
  const std::vector<std::string>& items() const { return items_; }

  bool has_user(const std::string& user) const { return by_user_.contains(user); }
  bool has_item(const std::string& item) const { return by_item_.contains(item); }

  /// Sum of ratings divided by count (0 for an empty dataset).
  double mean() const;

  /// New dataset built from a subset of positions.
  RatingsDataset subset(std::span<const std::size_t> positions) const;

 private:
  std::vector<Rating> triples_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_user_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_item_;
  std::vector<std::string> users_;
  std::vector<std::string> items_;
};

RatingsDataset load_ratings(const std::filesystem::path& path);
void write_ratings(const RatingsDataset& data, const std::filesystem::path& path);

struct CatalogEntry {
  std::string item_id;
  std::string title;
  std::string series;
  int season = 0;
  int episode = 0;
};

class ItemCatalog {
 public:
  ItemCatalog() = default;
  /// Throws ValidationError on a duplicate id or an empty title.
  static ItemCatalog from_entries(std::vector<CatalogEntry> entries);
  /// Catalog with title = id and series taken from the alphabetic id prefix.
  static ItemCatalog from_ids(const std::vector<std::string>& ids);

  const std::vector<CatalogEntry>& entries() const { return entries_; }
  const CatalogEntry* find(const std::string& item_id) const;
  bool contains(const std::string& item_id) const { return index_.contains(item_id); }
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<CatalogEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// TSV `item_id, title, series, season, episode` with header row.
ItemCatalog load_catalog(const std::filesystem::path& path);

enum class ThemeLevel { central, peripheral };
enum class LevelFilter { central, peripheral, both };

std::string_view to_string(ThemeLevel level);
std::string_view to_string(LevelFilter filter);
/// Accepts "central", "peripheral", "both"; throws ParseError otherwise.
LevelFilter parse_level_filter(std::string_view token);

struct ThemeTag {
  std::string theme;
  ThemeLevel level = ThemeLevel::central;
  friend bool operator<(const ThemeTag& a, const ThemeTag& b) {
    return std::tie(a.theme, a.level) < std::tie(b.theme, b.level);
  }
  friend bool operator==(const ThemeTag&, const ThemeTag&) = default;
};

/// item -> set of (theme, level). Items are kept in lexical order.
class ThemeAnnotationSet {
 public:
  void add(const std::string& item, ThemeTag tag);
  const std::map<std::string, std::vector<ThemeTag>>& per_item() const { return per_item_; }
  const std::vector<ThemeTag>* find(const std::string& item) const;

  /// Sorted distinct theme names of one item at the given level(s).
  std::vector<std::string> themes(const std::string& item, LevelFilter filter) const;
  ThemeAnnotationSet filtered(LevelFilter filter) const;
  std::vector<std::string> items() const;
  std::size_t item_count() const { return per_item_.size(); }
  std::size_t tag_count() const;
  bool empty() const { return per_item_.empty(); }

 private:
  std::map<std::string, std::vector<ThemeTag>> per_item_;  // each vector sorted, unique
};

/// TSV `item_id<TAB>level<TAB>theme_name`. Unknown item ids (against the
/// catalog) are collected and reported together.
ThemeAnnotationSet load_annotations(const std::filesystem::path& path, const ItemCatalog& catalog);
/// Same format, any item id accepted.
ThemeAnnotationSet load_annotations(const std::filesystem::path& path);
void write_annotations(const ThemeAnnotationSet& ann, const std::filesystem::path& path);

class TranscriptCorpus {
 public:
  void add(std::string item_id, std::string text);
  const std::map<std::string, std::string>& per_item() const { return per_item_; }
  std::size_t size() const { return per_item_.size(); }

 private:
  std::map<std::string, std::string> per_item_;
};

TranscriptCorpus load_transcripts(const std::filesystem::path& dir);

/// Symmetric sparse item-item score table with scores in [0, 1]. The
/// diagonal is implicit and always 1; zero scores are not stored.
class SimilarityMatrix {
 public:
  struct Entry {
    std::uint32_t column;
    double score;
  };

  SimilarityMatrix() = default;
  explicit SimilarityMatrix(std::vector<std::string> item_ids);

  /// Builds from the strict upper triangle of a dense n x n matrix, stored
  /// row-major as n*(n-1)/2 values for (0,1), (0,2), ..., (n-2,n-1).
  static SimilarityMatrix from_upper_triangle(std::vector<std::string> item_ids,
                                              std::span<const double> upper);

  const std::vector<std::string>& item_ids() const { return ids_; }
  std::size_t size() const { return ids_.size(); }
  std::optional<std::size_t> index_of(const std::string& item) const;

  /// Sets score(i, j) = score(j, i). Throws ValidationError outside [0, 1].
  void set(std::size_t i, std::size_t j, double score);
  void set(const std::string& a, const std::string& b, double score);

  double score(std::size_t i, std::size_t j) const;
  double score(const std::string& a, const std::string& b) const;

  /// Stored neighbors of row i, sorted by column.
  std::span<const Entry> row(std::size_t i) const { return rows_[i]; }

  /// Number of stored unordered pairs.
  std::size_t pair_count() const;

  /// Dense n x n row-major copy with ones on the diagonal.
  std::vector<double> dense() const;

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<Entry>> rows_;
};

void export_similarity(const SimilarityMatrix& m, const std::filesystem::path& path);
SimilarityMatrix import_similarity(const std::filesystem::path& path);

/// Writes / parses the exchange format to / from a string.
std::string format_similarity(const SimilarityMatrix& m);
SimilarityMatrix parse_similarity(std::string_view text);

/// Shortest round-trip decimal representation.
std::string format_real(double value);

}  // namespace themetrek
