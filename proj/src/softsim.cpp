#include "themetrek/softsim.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "themetrek/error.hpp"
#include "themetrek/kernels.hpp"

namespace themetrek {

namespace {
double clamp_off_diagonal(double v) {
  if (std::isnan(v)) return 0.0;
  return std::clamp(v, 0.0, kMaxOffDiagonal);
}
}  // namespace

EntitySimilarityTable EntitySimilarityTable::from_function(std::size_t n,
                                                           const std::function<double(EntityId, EntityId)>& fn) {
  EntitySimilarityTable t;
  t.n_ = n;
  t.data_.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    t.data_[i * n + i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = clamp_off_diagonal(fn(static_cast<EntityId>(i), static_cast<EntityId>(j)));
      t.data_[i * n + j] = v;
      t.data_[j * n + i] = v;
    }
  }
  return t;
}

EntitySimilarityTable EntitySimilarityTable::build(const Ontology& o, const InformationContentTable* ic,
                                                   EntityMeasure m) {
  if (needs_ic(m) && ic == nullptr) {
    throw ArgumentError(std::string(to_string(m)) + " requires an information content table");
  }
  return from_function(o.size(), [&](EntityId t, EntityId s) { return entity_similarity(o, ic, m, t, s); });
}

EntitySimilarityTable EntitySimilarityTable::build(const Ontology& o, const InformationContentTable* ic,
                                                   EntityMeasure m, std::span<const EntityId> entities) {
  if (needs_ic(m) && ic == nullptr) {
    throw ArgumentError(std::string(to_string(m)) + " requires an information content table");
  }
  return from_function(entities.size(),
                       [&](EntityId a, EntityId b) { return entity_similarity(o, ic, m, entities[a], entities[b]); });
}

AnnotatedEntities::AnnotatedEntities(const ThemeAnnotationSet& ann, const Ontology& o) {
  std::set<std::string> unknown;
  std::set<EntityId> used;
  for (const auto& [item, tags] : ann.per_item()) {
    for (const auto& tag : tags) {
      if (auto e = o.find(tag.theme)) {
        used.insert(*e);
      } else {
        unknown.insert(tag.theme);
      }
    }
  }
  if (!unknown.empty()) {
    std::string msg = "annotations reference themes missing from the ontology:";
    for (const auto& u : unknown) msg += " '" + u + "'";
    throw NotFoundError(msg);
  }
  entities_.assign(used.begin(), used.end());
  std::unordered_map<EntityId, EntityId> local;
  for (std::size_t k = 0; k < entities_.size(); ++k) local.emplace(entities_[k], static_cast<EntityId>(k));
  const auto to_local = [&](const std::string& item, LevelFilter f) {
    std::vector<EntityId> s;
    for (const auto& theme : ann.themes(item, f)) s.push_back(local.at(*o.find(theme)));
    std::sort(s.begin(), s.end());
    return s;
  };
  for (const auto& [item, tags] : ann.per_item()) {
    item_ids_.push_back(item);
    central_.push_back(to_local(item, LevelFilter::central));
    peripheral_.push_back(to_local(item, LevelFilter::peripheral));
    both_.push_back(to_local(item, LevelFilter::both));
  }
}

const std::vector<EntityId>& AnnotatedEntities::set(std::size_t i, LevelFilter filter) const {
  switch (filter) {
    case LevelFilter::central:
      return central_.at(i);
    case LevelFilter::peripheral:
      return peripheral_.at(i);
    case LevelFilter::both:
      break;
  }
  return both_.at(i);
}

SoftCosineScorer::SoftCosineScorer(std::shared_ptr<const EntitySimilarityTable> table, double p)
    : table_(std::move(table)), p_(p) {
  if (!table_) throw ArgumentError("soft cosine scorer needs a similarity table");
  if (!(p > 0.0) || !std::isfinite(p)) throw ArgumentError("softness exponent must be finite and > 0");
  const std::size_t n = table_->size();
  powered_.resize(n * n);
  for (std::size_t t = 0; t < n; ++t) {
    const auto row = table_->row(static_cast<EntityId>(t));
    for (std::size_t s = 0; s < n; ++s) powered_[t * n + s] = p == 1.0 ? row[s] : std::pow(row[s], p);
  }
}

double SoftCosineScorer::cardinality(std::span<const EntityId> a) const {
  const std::size_t n = table_->size();
  double total = 0.0;
  for (EntityId t : a) {
    if (t >= n) throw NotFoundError("entity id out of range");
    const double row_sum = kernels::gather_sum({powered_.data() + static_cast<std::size_t>(t) * n, n}, a);
    total += 1.0 / row_sum;
  }
  return total;
}

namespace {
// The union trick can leave [0, min(|a|, |b|)] in either direction.
double capped_intersection(double card_a, double card_b, double card_union) {
  return std::clamp(card_a + card_b - card_union, 0.0, std::min(card_a, card_b));
}
}  // namespace

double SoftCosineScorer::intersection(std::span<const EntityId> a, std::span<const EntityId> b) const {
  std::vector<EntityId> uni;
  uni.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(uni));
  return capped_intersection(cardinality(a), cardinality(b), cardinality(uni));
}

double SoftCosineScorer::cosine(std::span<const EntityId> a, double card_a, std::span<const EntityId> b,
                                double card_b) const {
  if (a.empty() || b.empty()) return 0.0;
  std::vector<EntityId> uni;
  uni.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(uni));
  const double inter = capped_intersection(card_a, card_b, cardinality(uni));
  return std::clamp(inter / std::sqrt(card_a * card_b), 0.0, 1.0);
}

double SoftCosineScorer::cosine(std::span<const EntityId> a, std::span<const EntityId> b) const {
  if (a.empty() || b.empty()) return 0.0;
  return cosine(a, cardinality(a), b, cardinality(b));
}

std::vector<EntityId> to_entity_set(const Ontology& o, std::span<const std::string> themes) {
  std::vector<EntityId> ids;
  ids.reserve(themes.size());
  for (const auto& t : themes) ids.push_back(o.id(t));
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

namespace {
SoftCosineScorer make_scorer(const Ontology& o, const InformationContentTable* ic, const SoftSimConfig& cfg) {
  return SoftCosineScorer(std::make_shared<const EntitySimilarityTable>(EntitySimilarityTable::build(o, ic, cfg.measure)),
                          cfg.softness_exponent);
}
}  // namespace

double soft_cardinality(std::span<const std::string> a, const Ontology& o, const InformationContentTable* ic,
                        const SoftSimConfig& cfg) {
  const auto ids = to_entity_set(o, a);
  return make_scorer(o, ic, cfg).cardinality(ids);
}

double soft_intersection(std::span<const std::string> a, std::span<const std::string> b, const Ontology& o,
                         const InformationContentTable* ic, const SoftSimConfig& cfg) {
  const auto ia = to_entity_set(o, a);
  const auto ib = to_entity_set(o, b);
  return make_scorer(o, ic, cfg).intersection(ia, ib);
}

double soft_cosine(std::span<const std::string> a, std::span<const std::string> b, const Ontology& o,
                   const InformationContentTable* ic, const SoftSimConfig& cfg) {
  const auto ia = to_entity_set(o, a);
  const auto ib = to_entity_set(o, b);
  return make_scorer(o, ic, cfg).cosine(ia, ib);
}

SimilarityMatrix build_ontology_similarity(const ThemeAnnotationSet& ann, const Ontology& o,
                                           const SoftCosineScorer& scorer, LevelFilter filter) {
  std::vector<std::string> ids;
  std::vector<std::vector<EntityId>> sets;
  std::set<std::string> unknown;
  for (const auto& [item, tags] : ann.per_item()) {
    ids.push_back(item);
    std::vector<EntityId> s;
    for (const auto& theme : ann.themes(item, filter)) {
      if (auto e = o.find(theme)) {
        s.push_back(*e);
      } else {
        unknown.insert(theme);
      }
    }
    std::sort(s.begin(), s.end());
    sets.push_back(std::move(s));
  }
  if (!unknown.empty()) {
    std::string msg = "annotations reference themes missing from the ontology:";
    for (const auto& u : unknown) msg += " '" + u + "'";
    throw NotFoundError(msg);
  }

  const std::size_t n = ids.size();
  std::vector<double> card(n);
  for (std::size_t i = 0; i < n; ++i) card[i] = scorer.cardinality(sets[i]);
  std::vector<double> upper;
  upper.reserve(n * (n - (n > 0 ? 1 : 0)) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) upper.push_back(scorer.cosine(sets[i], card[i], sets[j], card[j]));
  }
  return SimilarityMatrix::from_upper_triangle(std::move(ids), upper);
}

SimilarityMatrix build_ontology_similarity(const ThemeAnnotationSet& ann, const Ontology& o,
                                           const InformationContentTable* ic, const SoftSimConfig& cfg) {
  const AnnotatedEntities ae(ann, o);
  const SoftCosineScorer scorer(
      std::make_shared<const EntitySimilarityTable>(EntitySimilarityTable::build(o, ic, cfg.measure, ae.entities())),
      cfg.softness_exponent);
  const std::size_t n = ae.item_ids().size();
  std::vector<double> card(n);
  for (std::size_t i = 0; i < n; ++i) card[i] = scorer.cardinality(ae.set(i, cfg.level_filter));
  std::vector<double> upper;
  upper.reserve(n * (n - (n > 0 ? 1 : 0)) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = ae.set(i, cfg.level_filter);
    for (std::size_t j = i + 1; j < n; ++j) upper.push_back(scorer.cosine(a, card[i], ae.set(j, cfg.level_filter), card[j]));
  }
  return SimilarityMatrix::from_upper_triangle(ae.item_ids(), upper);
}

}  // namespace themetrek
