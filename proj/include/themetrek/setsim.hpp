#pragma once
// Resemblance coefficients over theme-tag sets. Sets are sorted vectors of
// distinct names.

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "themetrek/corpus_io.hpp"

namespace themetrek {

using ThemeSet = std::vector<std::string>;

std::size_t intersection_size(std::span<const std::string> a, std::span<const std::string> b);

/// |a∩b| / |a∪b|; 0 when both are empty.
double jaccard(std::span<const std::string> a, std::span<const std::string> b);
/// 2|a∩b| / (|a|+|b|); 0 when both are empty.
double dice(std::span<const std::string> a, std::span<const std::string> b);
/// |a∩b| / sqrt(|a||b|); 0 when either is empty.
double binary_cosine(std::span<const std::string> a, std::span<const std::string> b);

class ItemFeatureSets {
 public:
  /// One set per annotated item, restricted to `filter`. Items whose filtered
  /// set is empty are kept.
  static ItemFeatureSets from_annotations(const ThemeAnnotationSet& ann, LevelFilter filter);
  static ItemFeatureSets from_sets(std::map<std::string, ThemeSet> sets);

  const std::vector<std::string>& item_ids() const { return ids_; }
  const ThemeSet& set(std::size_t i) const { return sets_.at(i); }
  const ThemeSet* find(const std::string& item) const;
  std::size_t item_count() const { return ids_.size(); }
  /// Number of items carrying `theme`; NotFoundError if none does.
  std::size_t doc_freq(const std::string& theme) const;
  /// N / n_w.
  double idf(const std::string& theme) const;

 private:
  std::vector<std::string> ids_;
  std::vector<ThemeSet> sets_;
  std::map<std::string, std::size_t, std::less<>> df_;
};

/// Weighted cosine with weights N/n_w. `verbatim` leaves the denominator
/// weights unsquared and clamps the result into [0, 1].
double cosine_idf(std::span<const std::string> a, std::span<const std::string> b, const ItemFeatureSets& fs,
                  bool verbatim = false);

enum class SetCoefficient { jaccard, dice, cosine, cosine_idf };

std::string_view to_string(SetCoefficient c);

/// All-pairs coefficient over the filtered theme sets of every annotated
/// item. ValidationError when every filtered set is empty.
SimilarityMatrix build_set_similarity(const ThemeAnnotationSet& ann, LevelFilter filter, SetCoefficient coeff,
                                      bool verbatim = false);
SimilarityMatrix build_set_similarity(const ItemFeatureSets& fs, SetCoefficient coeff, bool verbatim = false);

}  // namespace themetrek
