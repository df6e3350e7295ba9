#pragma once
// Ontology-based item similarity: soft cardinality of theme sets under an
// entity-similarity function, the soft intersection derived from it, and the
// soft cosine index.

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "themetrek/corpus_io.hpp"
#include "themetrek/ontology.hpp"

namespace themetrek {

/// Largest off-diagonal entity similarity kept in a table.
inline constexpr double kMaxOffDiagonal = 1.0 - 1e-9;

/// Dense entity x entity similarity table. Diagonal is exactly 1;
/// off-diagonal entries lie in [0, kMaxOffDiagonal].
class EntitySimilarityTable {
 public:
  static EntitySimilarityTable build(const Ontology& o, const InformationContentTable* ic, EntityMeasure m);
  /// Table over a subset; local index k stands for entities[k].
  static EntitySimilarityTable build(const Ontology& o, const InformationContentTable* ic, EntityMeasure m,
                                     std::span<const EntityId> entities);
  /// Table from an arbitrary symmetric function (tests, custom measures).
  static EntitySimilarityTable from_function(std::size_t n, const std::function<double(EntityId, EntityId)>& fn);

  std::size_t size() const { return n_; }
  double at(EntityId t, EntityId s) const { return data_[static_cast<std::size_t>(t) * n_ + s]; }
  std::span<const double> row(EntityId t) const { return {data_.data() + static_cast<std::size_t>(t) * n_, n_}; }

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

struct SoftSimConfig {
  EntityMeasure measure = EntityMeasure::path;
  double softness_exponent = 1.0;
  LevelFilter level_filter = LevelFilter::both;
};

/// Soft-cardinality arithmetic for one table and one softness exponent.
/// Sets are sorted vectors of distinct entity ids.
class SoftCosineScorer {
 public:
  /// ArgumentError unless p is finite and > 0.
  SoftCosineScorer(std::shared_ptr<const EntitySimilarityTable> table, double p);

  double p() const { return p_; }
  /// Sum over t of 1 / sum over s of S(t,s)^p; 0 for the empty set.
  double cardinality(std::span<const EntityId> a) const;
  /// |a| + |b| - |a ∪ b| in soft cardinalities, clamped to [0, min(|a|, |b|)].
  double intersection(std::span<const EntityId> a, std::span<const EntityId> b) const;
  /// intersection / sqrt(|a| |b|) clamped to [0, 1]; 0 if either set is empty.
  double cosine(std::span<const EntityId> a, std::span<const EntityId> b) const;
  /// cosine() with precomputed cardinalities of a and b.
  double cosine(std::span<const EntityId> a, double card_a, std::span<const EntityId> b, double card_b) const;

 private:
  std::shared_ptr<const EntitySimilarityTable> table_;
  double p_;
  std::vector<double> powered_;  // table entries raised to p
};

/// The entities annotated on any item at any level, with item theme sets
/// re-expressed as sorted local indexes into `entities`.
class AnnotatedEntities {
 public:
  /// NotFoundError listing annotation themes missing from the ontology.
  AnnotatedEntities(const ThemeAnnotationSet& ann, const Ontology& o);

  const std::vector<EntityId>& entities() const { return entities_; }
  const std::vector<std::string>& item_ids() const { return item_ids_; }
  /// Local theme set of item i at the given level(s).
  const std::vector<EntityId>& set(std::size_t i, LevelFilter filter) const;

 private:
  std::vector<EntityId> entities_;
  std::vector<std::string> item_ids_;
  std::vector<std::vector<EntityId>> central_, peripheral_, both_;
};

/// Sorted distinct entity ids of theme names; NotFoundError on an unknown name.
std::vector<EntityId> to_entity_set(const Ontology& o, std::span<const std::string> themes);

double soft_cardinality(std::span<const std::string> a, const Ontology& o, const InformationContentTable* ic,
                        const SoftSimConfig& cfg);
double soft_intersection(std::span<const std::string> a, std::span<const std::string> b, const Ontology& o,
                         const InformationContentTable* ic, const SoftSimConfig& cfg);
double soft_cosine(std::span<const std::string> a, std::span<const std::string> b, const Ontology& o,
                   const InformationContentTable* ic, const SoftSimConfig& cfg);

/// All-pairs soft cosine over the filtered theme sets of every annotated
/// item. Items with empty filtered sets score 0 against everything.
SimilarityMatrix build_ontology_similarity(const ThemeAnnotationSet& ann, const Ontology& o,
                                           const InformationContentTable* ic, const SoftSimConfig& cfg);
SimilarityMatrix build_ontology_similarity(const ThemeAnnotationSet& ann, const Ontology& o,
                                           const SoftCosineScorer& scorer, LevelFilter filter);

}  // namespace themetrek
