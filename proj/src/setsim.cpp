#include "themetrek/setsim.hpp"

#include <algorithm>
#include <cmath>

#include "themetrek/error.hpp"

namespace themetrek {

std::size_t intersection_size(std::span<const std::string> a, std::span<const std::string> b) {
  std::size_t n = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

double jaccard(std::span<const std::string> a, std::span<const std::string> b) {
  const std::size_t inter = intersection_size(a, b);
  const std::size_t uni = a.size() + b.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double dice(std::span<const std::string> a, std::span<const std::string> b) {
  const std::size_t total = a.size() + b.size();
  return total == 0 ? 0.0 : 2.0 * static_cast<double>(intersection_size(a, b)) / static_cast<double>(total);
}

double binary_cosine(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.empty() || b.empty()) return 0.0;
  const double c = static_cast<double>(intersection_size(a, b)) / std::sqrt(static_cast<double>(a.size() * b.size()));
  return std::min(c, 1.0);
}

ItemFeatureSets ItemFeatureSets::from_sets(std::map<std::string, ThemeSet> sets) {
  ItemFeatureSets fs;
  for (auto& [item, s] : sets) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    for (const auto& t : s) ++fs.df_[t];
    fs.ids_.push_back(item);
    fs.sets_.push_back(std::move(s));
  }
  return fs;
}

ItemFeatureSets ItemFeatureSets::from_annotations(const ThemeAnnotationSet& ann, LevelFilter filter) {
  std::map<std::string, ThemeSet> sets;
  for (const auto& [item, tags] : ann.per_item()) sets[item] = ann.themes(item, filter);
  return from_sets(std::move(sets));
}

const ThemeSet* ItemFeatureSets::find(const std::string& item) const {
  const auto it = std::lower_bound(ids_.begin(), ids_.end(), item);
  if (it == ids_.end() || *it != item) return nullptr;
  return &sets_[static_cast<std::size_t>(it - ids_.begin())];
}

std::size_t ItemFeatureSets::doc_freq(const std::string& theme) const {
  const auto it = df_.find(theme);
  if (it == df_.end()) throw NotFoundError("theme '" + theme + "' is carried by no item");
  return it->second;
}

double ItemFeatureSets::idf(const std::string& theme) const {
  return static_cast<double>(item_count()) / static_cast<double>(doc_freq(theme));
}

double cosine_idf(std::span<const std::string> a, std::span<const std::string> b, const ItemFeatureSets& fs,
                  bool verbatim) {
  double na = 0.0, nb = 0.0, num = 0.0;
  for (const auto& t : a) {
    const double w = fs.idf(t);
    na += verbatim ? w : w * w;
  }
  for (const auto& t : b) {
    const double w = fs.idf(t);
    nb += verbatim ? w : w * w;
  }
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      const double w = fs.idf(*i);
      num += w * w;
      ++i;
      ++j;
    }
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(num / (std::sqrt(na) * std::sqrt(nb)), 0.0, 1.0);
}

std::string_view to_string(SetCoefficient c) {
  switch (c) {
    case SetCoefficient::jaccard:
      return "jaccard";
    case SetCoefficient::dice:
      return "dice";
    case SetCoefficient::cosine:
      return "cosine";
    case SetCoefficient::cosine_idf:
      return "cosidf";
  }
  return "jaccard";
}

SimilarityMatrix build_set_similarity(const ItemFeatureSets& fs, SetCoefficient coeff, bool verbatim) {
  const std::size_t n = fs.item_count();
  bool any = false;
  for (std::size_t i = 0; i < n && !any; ++i) any = !fs.set(i).empty();
  if (!any) throw ValidationError("every item has an empty theme set after level filtering");

  std::vector<double> upper;
  upper.reserve(n * (n - (n > 0 ? 1 : 0)) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const ThemeSet& a = fs.set(i);
      const ThemeSet& b = fs.set(j);
      double s = 0.0;
      switch (coeff) {
        case SetCoefficient::jaccard:
          s = jaccard(a, b);
          break;
        case SetCoefficient::dice:
          s = dice(a, b);
          break;
        case SetCoefficient::cosine:
          s = binary_cosine(a, b);
          break;
        case SetCoefficient::cosine_idf:
          s = cosine_idf(a, b, fs, verbatim);
          break;
      }
      upper.push_back(s);
    }
  }
  return SimilarityMatrix::from_upper_triangle(fs.item_ids(), upper);
}

SimilarityMatrix build_set_similarity(const ThemeAnnotationSet& ann, LevelFilter filter, SetCoefficient coeff,
                                      bool verbatim) {
  return build_set_similarity(ItemFeatureSets::from_annotations(ann, filter), coeff, verbatim);
}

}  // namespace themetrek
