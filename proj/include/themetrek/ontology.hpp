#pragma once
// Rooted-tree theme ontology: structural queries (depth, path length, least
// common subsumer), corpus-based information content and the six classic
// entity-similarity measures.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "themetrek/corpus_io.hpp"

namespace themetrek {

using EntityId = std::uint32_t;

class Ontology {
 public:
  /// (theme, parent) edges; exactly one entry has an empty parent (the root).
  /// Throws ValidationError on cycles, multiple or missing roots, orphan
  /// parent references and duplicate themes.
  static Ontology from_edges(const std::vector<std::pair<std::string, std::string>>& edges);

  std::size_t size() const { return names_.size(); }
  EntityId root() const { return root_; }
  const std::string& name(EntityId e) const { return names_.at(e); }
  std::optional<EntityId> find(std::string_view name) const;
  /// Like find() but throws NotFoundError.
  EntityId id(std::string_view name) const;

  /// Parent of e; the root is its own parent.
  EntityId parent(EntityId e) const { return parent_.at(e); }
  int depth(EntityId e) const { return depth_.at(e); }
  std::span<const EntityId> children(EntityId e) const { return children_.at(e); }

  /// Maximum depth over all entities.
  int max_depth() const { return max_depth_; }
  /// Maximum path length over all entity pairs (tree diameter in edges).
  int max_path_length() const { return max_path_; }

  EntityId lcs(EntityId t, EntityId s) const;
  int path_length(EntityId t, EntityId s) const;

  /// Entities ordered so that every child precedes its parent.
  const std::vector<EntityId>& bottom_up_order() const { return bottom_up_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, EntityId> index_;
  std::vector<EntityId> parent_;
  std::vector<int> depth_;
  std::vector<std::vector<EntityId>> children_;
  std::vector<EntityId> bottom_up_;
  EntityId root_ = 0;
  int max_depth_ = 0;
  int max_path_ = 0;
};

/// TSV `theme<TAB>parent` (optional header row).
Ontology load_ontology(const std::filesystem::path& path);

/// Propagated occurrence counts and information content per entity.
struct InformationContentTable {
  std::vector<double> count;  // f_t, own occurrences plus descendants
  double total = 0.0;         // count(root)
  std::vector<double> ic;     // -ln(count / total); +inf for zero counts
};

/// Counts every annotation instance in `ann` (all levels it contains), adds
/// `smoothing` to every entity's own count and propagates up to the root.
/// Throws NotFoundError listing themes missing from the ontology.
InformationContentTable compute_ic(const Ontology& o, const ThemeAnnotationSet& ann, double smoothing);

/// JSON array of {theme, count, ic} objects (ic is null when infinite).
std::string ic_to_json(const Ontology& o, const InformationContentTable& ic);

enum class EntityMeasure { path, wup, lch, lin, res, jcn };

std::string_view to_string(EntityMeasure m);
std::optional<EntityMeasure> parse_entity_measure(std::string_view token);
bool needs_ic(EntityMeasure m);

/// Scaling constants for the measures that can exceed unity.
inline constexpr double kLchScale = 3.0;
inline constexpr double kResScale = 10.0;
inline constexpr double kJcnScale = 2.0;

/// Similarity of two entities, clamped into [0, 1]. IC-based measures require
/// `ic`; ArgumentError otherwise.
double entity_similarity(const Ontology& o, const InformationContentTable* ic, EntityMeasure m,
                         EntityId t, EntityId s);

double entity_similarity(const Ontology& o, const InformationContentTable* ic, EntityMeasure m,
                         std::string_view t, std::string_view s);

}  // namespace themetrek
