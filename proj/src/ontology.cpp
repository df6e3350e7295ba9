#include "themetrek/ontology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "json.hpp"

#include "text_util.hpp"
#include "themetrek/error.hpp"

namespace themetrek {

namespace {
constexpr EntityId kNone = std::numeric_limits<EntityId>::max();
}

Ontology Ontology::from_edges(const std::vector<std::pair<std::string, std::string>>& edges) {
  Ontology o;
  for (const auto& [theme, parent] : edges) {
    if (theme.empty()) throw ValidationError("ontology row with empty theme");
    const auto id = static_cast<EntityId>(o.names_.size());
    if (!o.index_.emplace(theme, id).second) throw ValidationError("duplicate theme: " + theme);
    o.names_.push_back(theme);
  }
  if (o.names_.empty()) throw ValidationError("ontology is empty");

  const std::size_t n = o.names_.size();
  o.parent_.assign(n, kNone);
  std::vector<EntityId> roots;
  std::set<std::string> orphans;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string& parent = edges[i].second;
    if (parent.empty()) {
      roots.push_back(static_cast<EntityId>(i));
      continue;
    }
    const auto it = o.index_.find(parent);
    if (it == o.index_.end()) {
      orphans.insert(parent);
      continue;
    }
    o.parent_[i] = it->second;
  }
  if (!orphans.empty()) {
    std::string msg = "ontology references undefined parents:";
    for (const auto& p : orphans) msg += " '" + p + "'";
    throw ValidationError(msg);
  }
  if (roots.size() > 1) {
    throw ValidationError("ontology has multiple roots: '" + o.names_[roots[0]] + "', '" +
                          o.names_[roots[1]] + "'");
  }

  // Depth by walking up to the root; any entity whose chain does not reach
  // the root lies on (or below) a cycle.
  o.depth_.assign(n, -1);
  if (!roots.empty()) {
    o.root_ = roots.front();
    o.parent_[o.root_] = o.root_;
    o.depth_[o.root_] = 0;
  }
  for (std::size_t start = 0; start < n; ++start) {
    std::vector<EntityId> chain;
    EntityId cur = static_cast<EntityId>(start);
    std::set<EntityId> visiting;
    while (o.depth_[cur] < 0) {
      if (!visiting.insert(cur).second) {
        throw ValidationError("ontology contains a cycle through '" + o.names_[cur] + "'");
      }
      chain.push_back(cur);
      cur = o.parent_[cur];
    }
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      o.depth_[*it] = o.depth_[o.parent_[*it]] + 1;
    }
  }
  if (roots.empty()) throw ValidationError("ontology has no root (row with empty parent)");

  o.children_.assign(n, {});
  for (std::size_t i = 0; i < n; ++i) {
    if (static_cast<EntityId>(i) != o.root_) o.children_[o.parent_[i]].push_back(static_cast<EntityId>(i));
  }
  o.max_depth_ = *std::max_element(o.depth_.begin(), o.depth_.end());

  o.bottom_up_.resize(n);
  for (std::size_t i = 0; i < n; ++i) o.bottom_up_[i] = static_cast<EntityId>(i);
  std::stable_sort(o.bottom_up_.begin(), o.bottom_up_.end(),
                   [&](EntityId a, EntityId b) { return o.depth_[a] > o.depth_[b]; });

  // Tree diameter: for every node, the two deepest child subtrees.
  std::vector<int> height(n, 0);
  int diameter = 0;
  for (EntityId e : o.bottom_up_) {
    int best = 0, second = 0;
    for (EntityId c : o.children_[e]) {
      const int h = height[c] + 1;
      if (h > best) {
        second = best;
        best = h;
      } else if (h > second) {
        second = h;
      }
    }
    height[e] = best;
    diameter = std::max(diameter, best + second);
  }
  o.max_path_ = diameter;
  return o;
}

std::optional<EntityId> Ontology::find(std::string_view name) const {
  const auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

EntityId Ontology::id(std::string_view name) const {
  if (auto e = find(name)) return *e;
  throw NotFoundError("unknown ontology entity '" + std::string(name) + "'");
}

EntityId Ontology::lcs(EntityId t, EntityId s) const {
  if (t >= size() || s >= size()) throw NotFoundError("entity id out of range");
  while (depth_[t] > depth_[s]) t = parent_[t];
  while (depth_[s] > depth_[t]) s = parent_[s];
  while (t != s) {
    t = parent_[t];
    s = parent_[s];
  }
  return t;
}

int Ontology::path_length(EntityId t, EntityId s) const {
  const EntityId a = lcs(t, s);
  return depth_[t] + depth_[s] - 2 * depth_[a];
}

Ontology load_ontology(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("ontology file not found: " + path.string());
  const std::string text = detail::read_file(path);
  std::vector<std::pair<std::string, std::string>> edges;
  bool first = true;
  detail::for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (detail::trim(line).empty()) return;
    auto cols = detail::split(line, '\t');
    if (first) {
      first = false;
      if (cols.size() == 2 && detail::trim(cols[0]) == "theme" && detail::trim(cols[1]) == "parent") return;
    }
    if (cols.size() == 1) cols.push_back({});
    if (cols.size() != 2) {
      throw ParseError(detail::where(path, line_no) + "expected theme<TAB>parent");
    }
    edges.emplace_back(std::string(detail::trim(cols[0])), std::string(detail::trim(cols[1])));
  });
  return Ontology::from_edges(edges);
}

InformationContentTable compute_ic(const Ontology& o, const ThemeAnnotationSet& ann, double smoothing) {
  if (!(smoothing >= 0.0) || !std::isfinite(smoothing)) throw ArgumentError("smoothing must be >= 0");
  InformationContentTable t;
  t.count.assign(o.size(), smoothing);
  std::set<std::string> unknown;
  for (const auto& [item, tags] : ann.per_item()) {
    for (const ThemeTag& tag : tags) {
      if (auto e = o.find(tag.theme)) {
        t.count[*e] += 1.0;
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
  for (EntityId e : o.bottom_up_order()) {
    if (e != o.root()) t.count[o.parent(e)] += t.count[e];
  }
  t.total = t.count[o.root()];
  if (t.total <= 0.0) throw ValidationError("information content undefined: no occurrences and no smoothing");
  t.ic.resize(o.size());
  for (std::size_t e = 0; e < o.size(); ++e) {
    t.ic[e] = t.count[e] > 0.0 ? -std::log(t.count[e] / t.total) : std::numeric_limits<double>::infinity();
    if (t.ic[e] < 0.0) t.ic[e] = 0.0;  // -0.0 and rounding at the root
  }
  t.ic[o.root()] = 0.0;
  return t;
}

std::string ic_to_json(const Ontology& o, const InformationContentTable& ic) {
  nlohmann::json arr = nlohmann::json::array();
  for (std::size_t e = 0; e < o.size(); ++e) {
    nlohmann::json row{{"theme", o.name(static_cast<EntityId>(e))}, {"count", ic.count[e]}};
    row["ic"] = std::isfinite(ic.ic[e]) ? nlohmann::json(ic.ic[e]) : nlohmann::json(nullptr);
    arr.push_back(std::move(row));
  }
  return arr.dump(1);
}

std::string_view to_string(EntityMeasure m) {
  switch (m) {
    case EntityMeasure::path:
      return "path";
    case EntityMeasure::wup:
      return "wup";
    case EntityMeasure::lch:
      return "lch";
    case EntityMeasure::lin:
      return "lin";
    case EntityMeasure::res:
      return "res";
    case EntityMeasure::jcn:
      return "jcn";
  }
  return "path";
}

std::optional<EntityMeasure> parse_entity_measure(std::string_view token) {
  for (EntityMeasure m : {EntityMeasure::path, EntityMeasure::wup, EntityMeasure::lch, EntityMeasure::lin,
                          EntityMeasure::res, EntityMeasure::jcn}) {
    if (token == to_string(m)) return m;
  }
  return std::nullopt;
}

bool needs_ic(EntityMeasure m) {
  return m == EntityMeasure::lin || m == EntityMeasure::res || m == EntityMeasure::jcn;
}

namespace {
double clamp01(double v) {
  if (std::isnan(v)) return 0.0;
  return std::clamp(v, 0.0, 1.0);
}
}  // namespace

double entity_similarity(const Ontology& o, const InformationContentTable* ic, EntityMeasure m,
                         EntityId t, EntityId s) {
  if (t >= o.size() || s >= o.size()) throw NotFoundError("entity id out of range");
  if (needs_ic(m) && ic == nullptr) {
    throw ArgumentError(std::string(to_string(m)) + " requires an information content table");
  }
  const EntityId a = o.lcs(t, s);
  const bool same = t == s;
  switch (m) {
    case EntityMeasure::path:
      return 1.0 / (o.path_length(t, s) + 1.0);
    case EntityMeasure::wup: {
      const int denom = o.depth(t) + o.depth(s);
      if (denom == 0) return same ? 1.0 : 0.0;
      return clamp01(2.0 * o.depth(a) / denom);
    }
    case EntityMeasure::lch: {
      const int d = o.max_depth();
      if (d == 0) return same ? 1.0 : 0.0;
      // node-count convention (path + 1) keeps identity finite
      return clamp01(-std::log((o.path_length(t, s) + 1.0) / (2.0 * d)) / kLchScale);
    }
    case EntityMeasure::lin: {
      const double denom = ic->ic[t] + ic->ic[s];
      if (denom == 0.0) return same ? 1.0 : 0.0;
      if (same) return 1.0;
      return clamp01(2.0 * ic->ic[a] / denom);
    }
    case EntityMeasure::res:
      return clamp01(ic->ic[a] / kResScale);
    case EntityMeasure::jcn: {
      if (same) return 1.0;
      const double dist = ic->ic[t] + ic->ic[s] - 2.0 * ic->ic[a];
      if (dist == 0.0) return 1.0;
      return clamp01(1.0 / (kJcnScale * dist));
    }
  }
  return 0.0;
}

double entity_similarity(const Ontology& o, const InformationContentTable* ic, EntityMeasure m,
                         std::string_view t, std::string_view s) {
  return entity_similarity(o, ic, m, o.id(t), o.id(s));
}

}  // namespace themetrek
