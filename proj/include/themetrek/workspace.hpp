#pragma once
// Workspace configuration and the shared state behind the command line tool
// and the HTTP service: loaded datasets, measure and method specifications,
// a content-hash keyed similarity cache and top-k recommendation.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "themetrek/corpus_io.hpp"
#include "themetrek/eval.hpp"
#include "themetrek/ontology.hpp"
#include "themetrek/setsim.hpp"
#include "themetrek/softsim.hpp"
#include "themetrek/textsim.hpp"

namespace themetrek {

/// key=value file. Keys: ontology, annotations, ratings, transcripts,
/// stopwords, catalog, cache_dir. Relative paths resolve against the file's
/// directory; '#' starts a comment line.
struct WorkspaceConfig {
  std::filesystem::path base;
  std::optional<std::filesystem::path> ontology, annotations, ratings, transcripts, stopwords, catalog;
  std::filesystem::path cache_dir;  // default <base>/.themetrek-cache

  static WorkspaceConfig parse(std::string_view text, const std::filesystem::path& base);
  /// A config file, or a directory holding workspace.conf.
  static WorkspaceConfig load(const std::filesystem::path& file_or_dir);
};

/// THEMETREK_WORKSPACE when set, else the current directory.
std::filesystem::path default_workspace_path();

/// Parsed similarity measure, e.g. "lsi:40", "dice:level=central", "lch:p=4".
struct MeasureSpec {
  enum class Family { text, set, ontology, cf };
  Family family = Family::set;
  TextBackend text;
  SetCoefficient coeff = SetCoefficient::jaccard;
  EntityMeasure entity = EntityMeasure::path;
  double p = 1.0;  // softness exponent (ontology measures)
  LevelFilter level = LevelFilter::both;
  double shrinkage = kDefaultShrinkage;
  double smoothing = 1.0;
  bool verbatim = false;

  /// Measure name without parameters ("lsi", "dice", "lch", ...).
  std::string name() const;
  /// Every parameter the result depends on, in a fixed order.
  std::string canonical() const;
};

/// Default softness exponent advertised for an entity measure.
double default_softness(EntityMeasure m);

/// ArgumentError on an unknown measure or malformed parameter.
MeasureSpec parse_measure(std::string_view token);

/// Sets one parameter (p, level, shrinkage, smoothing, verbatim); ArgumentError
/// when malformed or not applicable to the measure.
void set_measure_param(MeasureSpec& m, std::string_view key, std::string_view value);

/// Measure names with their parameters, for listings.
struct MeasureInfo {
  std::string name;
  std::string family;
  std::vector<std::string> params;
  double default_p = 0.0;  // 0 when p does not apply
};
std::vector<MeasureInfo> measure_catalog();

struct Neighbor {
  std::string item_id;
  std::string title;
  double score = 0.0;
  std::vector<std::string> shared_themes;
};

struct RecommendationResult {
  std::string query;
  std::string measure;  // canonical form
  LevelFilter level = LevelFilter::both;
  std::vector<Neighbor> neighbors;  // score descending, ties by item id
};

struct IngestReport {
  std::size_t catalog_items = 0, themes = 0, annotated_items = 0, annotation_tags = 0;
  std::size_t ratings = 0, users = 0, rated_items = 0, transcripts = 0, stopwords = 0;
  int max_depth = 0, max_path = 0;
  std::string text() const;
};

class Workspace {
 public:
  /// Loads and cross-validates every configured resource. IoError for a
  /// missing file, ParseError for malformed content, ValidationError for an
  /// invariant violation (including annotation themes absent from the ontology).
  static std::shared_ptr<Workspace> open(const WorkspaceConfig& cfg);

  const WorkspaceConfig& config() const { return cfg_; }
  const ItemCatalog& catalog() const { return catalog_; }
  bool has_ontology() const { return ontology_.has_value(); }
  bool has_annotations() const { return annotations_.has_value(); }
  bool has_ratings() const { return ratings_.has_value(); }
  bool has_transcripts() const { return transcripts_.has_value(); }
  /// ArgumentError when the resource is not configured.
  const Ontology& ontology() const;
  const ThemeAnnotationSet& annotations() const;
  const RatingsDataset& ratings() const;
  const TranscriptCorpus& transcripts() const;
  const std::unordered_set<std::string>& stopwords() const { return stopwords_; }

  IngestReport report() const;

  /// Memoized per smoothing value.
  std::shared_ptr<const InformationContentTable> ic(double smoothing) const;

  /// Hash of the inputs a measure reads, plus its canonical parameters.
  std::uint64_t content_hash(const MeasureSpec& m) const;

  /// Full all-pairs matrix over the measure's item universe, read from or
  /// written to cache_dir when `use_cache` is set.
  SimilarityMatrix similarity(const MeasureSpec& m, bool use_cache = true) const;

  /// Writes the IC table (smoothing 1) and the processed corpus summary to
  /// the cache directory. Returns the files written.
  std::vector<std::filesystem::path> prime_cache() const;

 private:
  Workspace() = default;
  WorkspaceConfig cfg_;
  ItemCatalog catalog_;
  std::optional<Ontology> ontology_;
  std::optional<ThemeAnnotationSet> annotations_;
  std::optional<RatingsDataset> ratings_;
  std::optional<TranscriptCorpus> transcripts_;
  std::unordered_set<std::string> stopwords_;
  std::string stopwords_bytes_;
  std::map<std::string, std::uint64_t> file_hashes_;
  mutable std::mutex mu_;
  mutable std::map<double, std::shared_ptr<const InformationContentTable>> ic_;
};

/// Per-measure item representations prepared once and scored row by row.
/// Thread-safe; preparation is memoized.
class SimilarityEngine {
 public:
  explicit SimilarityEngine(std::shared_ptr<const Workspace> ws);

  /// Builds whatever the measure needs (idempotent).
  void prepare(const MeasureSpec& m);
  bool is_prepared(const MeasureSpec& m) const;

  /// Items the measure covers, sorted.
  std::vector<std::string> universe(const MeasureSpec& m);

  /// Score of `item` against every universe item (self included, = 1).
  /// Empty when the item is outside the universe.
  std::vector<double> scores(const MeasureSpec& m, const std::string& item);

  /// Top-k neighbors with score > 0, excluding the query. NotFoundError
  /// when the item is not in the catalog.
  RecommendationResult recommend(const std::string& item, const MeasureSpec& m, std::size_t k);

  const Workspace& workspace() const { return *ws_; }

 private:
  struct TextRep;
  struct SetRep;
  struct OntoRep;
  struct CfRep;
  std::shared_ptr<const TextRep> text_rep(const MeasureSpec& m);
  std::shared_ptr<const SetRep> set_rep(const MeasureSpec& m);
  std::shared_ptr<const OntoRep> onto_rep(const MeasureSpec& m);
  std::shared_ptr<const CfRep> cf_rep(const MeasureSpec& m);

  std::shared_ptr<const Workspace> ws_;
  mutable std::mutex mu_;
  std::shared_ptr<const TfIdfMatrix> tfidf_;
  std::shared_ptr<const SvdFactors> svd_;
  std::shared_ptr<const AnnotatedEntities> entities_;
  std::map<std::string, std::shared_ptr<const EntitySimilarityTable>> tables_;
  std::map<std::string, std::shared_ptr<const TextRep>> text_;
  std::map<std::string, std::shared_ptr<const SetRep>> set_;
  std::map<std::string, std::shared_ptr<const OntoRep>> onto_;
  std::map<std::string, std::shared_ptr<const CfRep>> cf_;
};

/// Evaluation method, e.g. "iknn:lsi:40:k=40", "user_knn:k=80", "biased_mf",
/// "slope_one", "user_item_baseline", "item_avg", "user_avg", "global_avg",
/// "random". ArgumentError when malformed.
struct MethodConfig {
  enum class Kind { iknn, user_knn, biased_mf, slope_one, user_item, item_avg, user_avg, global_avg, random };
  Kind kind = Kind::global_avg;
  std::optional<MeasureSpec> measure;  // iknn only
  std::string measure_token;           // as written, without k / lambdas
  std::size_t k = 40;
  double lambda1 = kDefaultLambda1;
  double lambda2 = kDefaultLambda2;
  double shrinkage = kDefaultShrinkage;
  BiasedMfConfig mf;
  std::uint64_t seed = 42;
  std::string spec;  // normalized text, used as the method name
};

MethodConfig parse_method(std::string_view token);

/// Expands "start:stop:step" into k values; ArgumentError when malformed.
std::vector<std::size_t> parse_k_sweep(std::string_view token);

/// Method with k replaced (iknn and user_knn only).
MethodConfig with_k(MethodConfig m, std::size_t k);

/// Factory for run_experiment. Content-based matrices come from the
/// workspace (built once); collaborative ones are fitted per training split.
MethodSpec make_method(const MethodConfig& cfg, const Workspace& ws);

}  // namespace themetrek
