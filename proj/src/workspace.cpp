#include "themetrek/workspace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "text_util.hpp"
#include "themetrek/error.hpp"
#include "themetrek/kernels.hpp"

namespace themetrek {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = kFnvOffset) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return s;
}

bool parse_bool(std::string_view v, bool& out) {
  if (v == "1" || v == "true" || v == "yes") {
    out = true;
    return true;
  }
  if (v == "0" || v == "false" || v == "no") {
    out = false;
    return true;
  }
  return false;
}

double parse_positive(std::string_view key, std::string_view value, bool allow_zero) {
  double d = 0.0;
  if (!detail::parse_double(value, d) || !std::isfinite(d) || d < 0.0 || (!allow_zero && d == 0.0)) {
    throw ArgumentError("invalid value for " + std::string(key) + ": '" + std::string(value) + "'");
  }
  return d;
}

std::size_t parse_count(std::string_view key, std::string_view value) {
  int v = 0;
  if (!detail::parse_int(value, v) || v < 0) {
    throw ArgumentError("invalid value for " + std::string(key) + ": '" + std::string(value) + "'");
  }
  return static_cast<std::size_t>(v);
}

void write_atomically(const fs::path& path, const std::string& bytes) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << bytes;
    if (!out) throw IoError("error writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string list_some(const std::set<std::string>& s) {
  std::string out;
  std::size_t n = 0;
  for (const auto& x : s) {
    if (n++ == 10) {
      out += " ... (" + std::to_string(s.size()) + " total)";
      break;
    }
    out += " " + x;
  }
  return out;
}

}  // namespace

WorkspaceConfig WorkspaceConfig::parse(std::string_view text, const fs::path& base) {
  WorkspaceConfig c;
  c.base = base;
  c.cache_dir = base / ".themetrek-cache";
  detail::for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    line = detail::trim(line);
    if (line.empty() || line.front() == '#') return;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError("workspace config line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string_view value = detail::trim(line.substr(eq + 1));
    if (value.empty()) return;
    fs::path p(value);
    if (p.is_relative()) p = base / p;
    if (key == "ontology") {
      c.ontology = p;
    } else if (key == "annotations") {
      c.annotations = p;
    } else if (key == "ratings") {
      c.ratings = p;
    } else if (key == "transcripts") {
      c.transcripts = p;
    } else if (key == "stopwords") {
      c.stopwords = p;
    } else if (key == "catalog") {
      c.catalog = p;
    } else if (key == "cache_dir") {
      c.cache_dir = p;
    } else {
      throw ParseError("workspace config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  });
  return c;
}

WorkspaceConfig WorkspaceConfig::load(const fs::path& file_or_dir) {
  fs::path file = file_or_dir;
  if (fs::is_directory(file)) file /= "workspace.conf";
  if (!fs::exists(file)) throw IoError("workspace config not found: " + file.string());
  return parse(detail::read_file(file), fs::absolute(file).parent_path());
}

fs::path default_workspace_path() {
  if (const char* env = std::getenv("THEMETREK_WORKSPACE"); env != nullptr && *env != '\0') return env;
  return fs::current_path();
}

double default_softness(EntityMeasure m) {
  switch (m) {
    case EntityMeasure::lch:
      return 4.0;
    case EntityMeasure::res:
      return 2.0;
    default:
      return 1.0;
  }
}

std::string MeasureSpec::name() const {
  switch (family) {
    case Family::text:
      return text.kind == TextBackend::Kind::tfidf ? "tfidf" : "lsi";
    case Family::set:
      return std::string(to_string(coeff));
    case Family::ontology:
      return std::string(to_string(entity));
    case Family::cf:
      return "cf";
  }
  return "?";
}

std::string MeasureSpec::canonical() const {
  std::string s = name();
  switch (family) {
    case Family::text:
      if (text.kind == TextBackend::Kind::lsi) s += ":" + std::to_string(text.p);
      break;
    case Family::set:
      s += ":level=" + std::string(to_string(level));
      if (coeff == SetCoefficient::cosine_idf && verbatim) s += ":verbatim=1";
      break;
    case Family::ontology:
      s += ":p=" + format_real(p) + ":level=" + std::string(to_string(level));
      if (needs_ic(entity)) s += ":smoothing=" + format_real(smoothing);
      break;
    case Family::cf:
      s += ":shrinkage=" + format_real(shrinkage);
      break;
  }
  return s;
}

void set_measure_param(MeasureSpec& m, std::string_view key, std::string_view value) {
  using F = MeasureSpec::Family;
  const auto reject = [&] {
    throw ArgumentError("parameter '" + std::string(key) + "' does not apply to measure " + m.name());
  };
  if (key == "p") {
    if (m.family == F::ontology) {
      m.p = parse_positive(key, value, false);
    } else if (m.family == F::text && m.text.kind == TextBackend::Kind::lsi) {
      m.text.p = parse_count(key, value);
      if (m.text.p == 0) throw ArgumentError("LSI needs at least one factor");
    } else {
      reject();
    }
  } else if (key == "level") {
    if (m.family != F::set && m.family != F::ontology) reject();
    try {
      m.level = parse_level_filter(value);
    } catch (const ParseError& e) {
      throw ArgumentError(e.what());
    }
  } else if (key == "shrinkage") {
    if (m.family != F::cf) reject();
    m.shrinkage = parse_positive(key, value, true);
  } else if (key == "smoothing") {
    if (m.family != F::ontology) reject();
    m.smoothing = parse_positive(key, value, true);
  } else if (key == "verbatim") {
    if (m.family != F::set || m.coeff != SetCoefficient::cosine_idf) reject();
    if (!parse_bool(value, m.verbatim)) throw ArgumentError("invalid value for verbatim: '" + std::string(value) + "'");
  } else {
    throw ArgumentError("unknown measure parameter '" + std::string(key) + "'");
  }
}

MeasureSpec parse_measure(std::string_view token) {
  const auto fields = detail::split(detail::trim(token), ':');
  const std::string_view name = fields.front();
  MeasureSpec m;
  using F = MeasureSpec::Family;
  if (name == "tfidf") {
    m.family = F::text;
  } else if (name == "lsi") {
    m.family = F::text;
    m.text.kind = TextBackend::Kind::lsi;
  } else if (name == "jaccard" || name == "dice" || name == "cosidf" || name == "cosine") {
    m.family = F::set;
    m.coeff = name == "jaccard" ? SetCoefficient::jaccard
              : name == "dice"  ? SetCoefficient::dice
              : name == "cosine" ? SetCoefficient::cosine
                                 : SetCoefficient::cosine_idf;
  } else if (auto e = parse_entity_measure(name)) {
    m.family = F::ontology;
    m.entity = *e;
    m.p = default_softness(*e);
  } else if (name == "cf") {
    m.family = F::cf;
  } else {
    throw ArgumentError("unknown measure '" + std::string(name) +
                        "' (expected tfidf, lsi:<p>, jaccard, dice, cosidf, cosine, path, wup, lch, lin, res, jcn, cf)");
  }
  for (std::size_t i = 1; i < fields.size(); ++i) {
    const std::string_view f = detail::trim(fields[i]);
    const auto eq = f.find('=');
    if (eq == std::string_view::npos) {
      if (i == 1 && m.family == F::text && m.text.kind == TextBackend::Kind::lsi) {
        set_measure_param(m, "p", f);
        continue;
      }
      throw ArgumentError("malformed measure parameter '" + std::string(f) + "' (expected key=value)");
    }
    set_measure_param(m, f.substr(0, eq), f.substr(eq + 1));
  }
  if (m.family == F::text && m.text.kind == TextBackend::Kind::lsi && m.text.p == 0) {
    throw ArgumentError("lsi needs a factor count, e.g. lsi:40");
  }
  return m;
}

std::vector<MeasureInfo> measure_catalog() {
  std::vector<MeasureInfo> out;
  out.push_back({"tfidf", "text", {}, 0.0});
  out.push_back({"lsi", "text", {"p"}, 0.0});
  for (const char* n : {"jaccard", "dice", "cosine"}) out.push_back({n, "set", {"level"}, 0.0});
  out.push_back({"cosidf", "set", {"level", "verbatim"}, 0.0});
  for (EntityMeasure e : {EntityMeasure::path, EntityMeasure::wup, EntityMeasure::lch, EntityMeasure::lin,
                          EntityMeasure::res, EntityMeasure::jcn}) {
    std::vector<std::string> params{"p", "level"};
    if (needs_ic(e)) params.emplace_back("smoothing");
    out.push_back({std::string(to_string(e)), "ontology", params, default_softness(e)});
  }
  out.push_back({"cf", "collaborative", {"shrinkage"}, 0.0});
  return out;
}

std::string IngestReport::text() const {
  std::ostringstream out;
  out << "items        " << catalog_items << "\n";
  out << "themes       " << themes << " (plus root; max depth " << max_depth << ", max path " << max_path << ")\n";
  out << "annotations  " << annotated_items << " items, " << annotation_tags << " tags\n";
  out << "ratings      " << ratings << " (" << users << " users, " << rated_items << " items)\n";
  out << "transcripts  " << transcripts << "\n";
  out << "stopwords    " << stopwords << "\n";
  return out.str();
}

std::shared_ptr<Workspace> Workspace::open(const WorkspaceConfig& cfg) {
  std::shared_ptr<Workspace> ws(new Workspace());
  ws->cfg_ = cfg;
  auto hash_file = [&](const std::string& key, const fs::path& p) {
    ws->file_hashes_[key] = fnv1a(detail::read_file(p));
  };

  std::optional<ItemCatalog> catalog;
  if (cfg.catalog) {
    catalog = load_catalog(*cfg.catalog);
    hash_file("catalog", *cfg.catalog);
  }
  if (cfg.ontology) {
    ws->ontology_ = load_ontology(*cfg.ontology);
    hash_file("ontology", *cfg.ontology);
  }
  if (cfg.annotations) {
    ws->annotations_ = catalog ? load_annotations(*cfg.annotations, *catalog) : load_annotations(*cfg.annotations);
    hash_file("annotations", *cfg.annotations);
  }
  if (cfg.ratings) {
    ws->ratings_ = load_ratings(*cfg.ratings);
    hash_file("ratings", *cfg.ratings);
  }
  if (cfg.transcripts) {
    ws->transcripts_ = load_transcripts(*cfg.transcripts);
    std::uint64_t h = kFnvOffset;
    for (const auto& [item, text] : ws->transcripts_->per_item()) {
      h = fnv1a(item, h);
      h = fnv1a(std::string_view("\0", 1), h);
      h = fnv1a(text, h);
    }
    ws->file_hashes_["transcripts"] = h;
  }
  fs::path stop = cfg.stopwords.value_or(fs::path(THEMETREK_DEFAULT_DATA_DIR) / "stopwords_en.txt");
  if (cfg.stopwords || fs::exists(stop)) {
    ws->stopwords_ = load_stopwords(stop);
    hash_file("stopwords", stop);
  }

  if (ws->annotations_ && ws->ontology_) {
    std::set<std::string> unknown;
    for (const auto& [item, tags] : ws->annotations_->per_item()) {
      for (const auto& t : tags) {
        if (!ws->ontology_->find(t.theme)) unknown.insert("'" + t.theme + "'");
      }
    }
    if (!unknown.empty()) {
      throw ValidationError("annotations reference themes missing from the ontology:" + list_some(unknown));
    }
  }

  std::set<std::string> ids;
  if (ws->annotations_) {
    for (const auto& [item, tags] : ws->annotations_->per_item()) ids.insert(item);
  }
  if (ws->transcripts_) {
    for (const auto& [item, text] : ws->transcripts_->per_item()) ids.insert(item);
  }
  if (ws->ratings_) ids.insert(ws->ratings_->items().begin(), ws->ratings_->items().end());
  if (catalog) {
    std::set<std::string> unknown;
    for (const auto& id : ids) {
      if (!catalog->contains(id)) unknown.insert(id);
    }
    if (!unknown.empty()) throw ValidationError("items missing from the catalog:" + list_some(unknown));
    ws->catalog_ = std::move(*catalog);
  } else {
    ws->catalog_ = ItemCatalog::from_ids(std::vector<std::string>(ids.begin(), ids.end()));
  }
  return ws;
}

const Ontology& Workspace::ontology() const {
  if (!ontology_) throw ArgumentError("workspace has no ontology configured");
  return *ontology_;
}

const ThemeAnnotationSet& Workspace::annotations() const {
  if (!annotations_) throw ArgumentError("workspace has no annotations configured");
  return *annotations_;
}

const RatingsDataset& Workspace::ratings() const {
  if (!ratings_) throw ArgumentError("workspace has no ratings configured");
  return *ratings_;
}

const TranscriptCorpus& Workspace::transcripts() const {
  if (!transcripts_) throw ArgumentError("workspace has no transcripts configured");
  return *transcripts_;
}

IngestReport Workspace::report() const {
  IngestReport r;
  r.catalog_items = catalog_.size();
  if (ontology_) {
    r.themes = ontology_->size() - 1;
    r.max_depth = ontology_->max_depth();
    r.max_path = ontology_->max_path_length();
  }
  if (annotations_) {
    r.annotated_items = annotations_->item_count();
    r.annotation_tags = annotations_->tag_count();
  }
  if (ratings_) {
    r.ratings = ratings_->size();
    r.users = ratings_->users().size();
    r.rated_items = ratings_->items().size();
  }
  if (transcripts_) r.transcripts = transcripts_->size();
  r.stopwords = stopwords_.size();
  return r;
}

std::shared_ptr<const InformationContentTable> Workspace::ic(double smoothing) const {
  std::lock_guard lock(mu_);
  auto& slot = ic_[smoothing];
  if (!slot) slot = std::make_shared<const InformationContentTable>(compute_ic(ontology(), annotations(), smoothing));
  return slot;
}

std::uint64_t Workspace::content_hash(const MeasureSpec& m) const {
  std::uint64_t h = kFnvOffset;
  const auto mix = [&](const std::string& key) {
    const auto it = file_hashes_.find(key);
    if (it == file_hashes_.end()) throw ArgumentError("measure " + m.name() + " needs " + key + " in the workspace");
    h = fnv1a(hex(it->second), h);
  };
  switch (m.family) {
    case MeasureSpec::Family::text:
      mix("transcripts");
      mix("stopwords");
      break;
    case MeasureSpec::Family::set:
      mix("annotations");
      break;
    case MeasureSpec::Family::ontology:
      mix("ontology");
      mix("annotations");
      break;
    case MeasureSpec::Family::cf:
      mix("ratings");
      break;
  }
  return fnv1a(m.canonical(), h);
}

SimilarityMatrix Workspace::similarity(const MeasureSpec& m, bool use_cache) const {
  const fs::path cached = cfg_.cache_dir / (m.name() + "-" + hex(content_hash(m)) + ".tsv");
  if (use_cache && fs::exists(cached)) return import_similarity(cached);

  SimilarityMatrix out;
  switch (m.family) {
    case MeasureSpec::Family::text:
      out = build_text_similarity(preprocess(transcripts(), stopwords_), m.text);
      break;
    case MeasureSpec::Family::set:
      out = build_set_similarity(annotations(), m.level, m.coeff, m.verbatim);
      break;
    case MeasureSpec::Family::ontology: {
      std::shared_ptr<const InformationContentTable> table;
      if (needs_ic(m.entity)) table = ic(m.smoothing);
      out = build_ontology_similarity(annotations(), ontology(), table.get(), {m.entity, m.p, m.level});
      break;
    }
    case MeasureSpec::Family::cf:
      out = cf_item_similarity(ratings(), m.shrinkage);
      break;
  }
  if (use_cache) write_atomically(cached, format_similarity(out));
  return out;
}

std::vector<fs::path> Workspace::prime_cache() const {
  std::vector<fs::path> written;
  if (ontology_ && annotations_) {
    const fs::path p = cfg_.cache_dir / ("ic-" + hex(fnv1a(hex(file_hashes_.at("ontology")) +
                                                         hex(file_hashes_.at("annotations")))) + ".json");
    write_atomically(p, ic_to_json(*ontology_, *ic(1.0)) + "\n");
    written.push_back(p);
  }
  if (transcripts_ && file_hashes_.contains("stopwords")) {
    const ProcessedCorpus pc = preprocess(*transcripts_, stopwords_);
    std::ostringstream out;
    out << "stem\tdoc_freq\n";
    for (std::size_t w = 0; w < pc.vocabulary.size(); ++w) out << pc.vocabulary[w] << '\t' << pc.doc_freq[w] << '\n';
    const fs::path p = cfg_.cache_dir / ("corpus-" + hex(fnv1a(hex(file_hashes_.at("transcripts")) +
                                                             hex(file_hashes_.at("stopwords")))) + ".tsv");
    write_atomically(p, out.str());
    written.push_back(p);
  }
  return written;
}

// ---------------------------------------------------------------------------

struct SimilarityEngine::TextRep {
  std::vector<std::string> ids;
  std::size_t dim = 0;
  std::vector<double> rows;
  std::vector<double> norms;
};

struct SimilarityEngine::SetRep {
  ItemFeatureSets fs;
  SetCoefficient coeff;
  bool verbatim;
};

struct SimilarityEngine::OntoRep {
  std::shared_ptr<const AnnotatedEntities> entities;
  LevelFilter level;
  std::shared_ptr<const SoftCosineScorer> scorer;
  std::vector<double> card;
};

struct SimilarityEngine::CfRep {
  SimilarityMatrix m;
};

SimilarityEngine::SimilarityEngine(std::shared_ptr<const Workspace> ws) : ws_(std::move(ws)) {
  if (!ws_) throw ArgumentError("similarity engine needs a workspace");
}

std::shared_ptr<const SimilarityEngine::TextRep> SimilarityEngine::text_rep(const MeasureSpec& m) {
  const std::string key = m.canonical();
  if (auto it = text_.find(key); it != text_.end()) return it->second;
  if (!tfidf_) tfidf_ = std::make_shared<const TfIdfMatrix>(build_tfidf(preprocess(ws_->transcripts(), ws_->stopwords())));
  auto rep = std::make_shared<TextRep>();
  if (m.text.kind == TextBackend::Kind::tfidf) {
    rep->ids = tfidf_->item_ids;
    rep->dim = tfidf_->cols();
    rep->rows = tfidf_->weights;
  } else {
    if (!svd_) svd_ = std::make_shared<const SvdFactors>(thin_svd(*tfidf_));
    LatentItemVectors lv = truncated_svd(*svd_, tfidf_->item_ids, m.text.p);
    rep->ids = std::move(lv.item_ids);
    rep->dim = lv.p;
    rep->rows = std::move(lv.vectors);
  }
  for (std::size_t i = 0; i < rep->ids.size(); ++i) {
    rep->norms.push_back(std::sqrt(kernels::squared_norm({rep->rows.data() + i * rep->dim, rep->dim})));
  }
  text_[key] = rep;
  return rep;
}

std::shared_ptr<const SimilarityEngine::SetRep> SimilarityEngine::set_rep(const MeasureSpec& m) {
  const std::string key = m.canonical();
  if (auto it = set_.find(key); it != set_.end()) return it->second;
  auto rep = std::make_shared<SetRep>(SetRep{ItemFeatureSets::from_annotations(ws_->annotations(), m.level), m.coeff,
                                             m.verbatim});
  set_[key] = rep;
  return rep;
}

std::shared_ptr<const SimilarityEngine::OntoRep> SimilarityEngine::onto_rep(const MeasureSpec& m) {
  const std::string key = m.canonical();
  if (auto it = onto_.find(key); it != onto_.end()) return it->second;
  if (!entities_) entities_ = std::make_shared<const AnnotatedEntities>(ws_->annotations(), ws_->ontology());
  std::string table_key(to_string(m.entity));
  std::shared_ptr<const InformationContentTable> ic;
  if (needs_ic(m.entity)) {
    table_key += ":" + format_real(m.smoothing);
    ic = ws_->ic(m.smoothing);
  }
  auto& table = tables_[table_key];
  if (!table) {
    table = std::make_shared<const EntitySimilarityTable>(
        EntitySimilarityTable::build(ws_->ontology(), ic.get(), m.entity, entities_->entities()));
  }
  auto rep = std::make_shared<OntoRep>();
  rep->entities = entities_;
  rep->level = m.level;
  rep->scorer = std::make_shared<const SoftCosineScorer>(table, m.p);
  for (std::size_t i = 0; i < entities_->item_ids().size(); ++i) {
    rep->card.push_back(rep->scorer->cardinality(entities_->set(i, m.level)));
  }
  onto_[key] = rep;
  return rep;
}

std::shared_ptr<const SimilarityEngine::CfRep> SimilarityEngine::cf_rep(const MeasureSpec& m) {
  const std::string key = m.canonical();
  if (auto it = cf_.find(key); it != cf_.end()) return it->second;
  auto rep = std::make_shared<CfRep>(CfRep{cf_item_similarity(ws_->ratings(), m.shrinkage)});
  cf_[key] = rep;
  return rep;
}

void SimilarityEngine::prepare(const MeasureSpec& m) {
  std::lock_guard lock(mu_);
  switch (m.family) {
    case MeasureSpec::Family::text:
      text_rep(m);
      break;
    case MeasureSpec::Family::set:
      set_rep(m);
      break;
    case MeasureSpec::Family::ontology:
      onto_rep(m);
      break;
    case MeasureSpec::Family::cf:
      cf_rep(m);
      break;
  }
}

bool SimilarityEngine::is_prepared(const MeasureSpec& m) const {
  std::lock_guard lock(mu_);
  const std::string key = m.canonical();
  switch (m.family) {
    case MeasureSpec::Family::text:
      return text_.contains(key);
    case MeasureSpec::Family::set:
      return set_.contains(key);
    case MeasureSpec::Family::ontology:
      return onto_.contains(key);
    case MeasureSpec::Family::cf:
      return cf_.contains(key);
  }
  return false;
}

std::vector<std::string> SimilarityEngine::universe(const MeasureSpec& m) {
  std::lock_guard lock(mu_);
  switch (m.family) {
    case MeasureSpec::Family::text:
      return text_rep(m)->ids;
    case MeasureSpec::Family::set:
      return set_rep(m)->fs.item_ids();
    case MeasureSpec::Family::ontology:
      return onto_rep(m)->entities->item_ids();
    case MeasureSpec::Family::cf:
      return cf_rep(m)->m.item_ids();
  }
  return {};
}

namespace {
std::optional<std::size_t> position(const std::vector<std::string>& sorted, const std::string& item) {
  const auto it = std::lower_bound(sorted.begin(), sorted.end(), item);
  if (it == sorted.end() || *it != item) return std::nullopt;
  return static_cast<std::size_t>(it - sorted.begin());
}
}  // namespace

std::vector<double> SimilarityEngine::scores(const MeasureSpec& m, const std::string& item) {
  std::vector<double> out;
  switch (m.family) {
    case MeasureSpec::Family::text: {
      std::shared_ptr<const TextRep> rep;
      {
        std::lock_guard lock(mu_);
        rep = text_rep(m);
      }
      const auto q = position(rep->ids, item);
      if (!q) return out;
      const std::span<const double> rows(rep->rows);
      const auto rq = rows.subspan(*q * rep->dim, rep->dim);
      for (std::size_t j = 0; j < rep->ids.size(); ++j) {
        if (j == *q) {
          out.push_back(1.0);
        } else if (rep->norms[*q] == 0.0 || rep->norms[j] == 0.0) {
          out.push_back(0.0);
        } else {
          const double c = kernels::dot(rq, rows.subspan(j * rep->dim, rep->dim)) / (rep->norms[*q] * rep->norms[j]);
          out.push_back(std::clamp(c, 0.0, 1.0));
        }
      }
      return out;
    }
    case MeasureSpec::Family::set: {
      std::shared_ptr<const SetRep> rep;
      {
        std::lock_guard lock(mu_);
        rep = set_rep(m);
      }
      const auto q = position(rep->fs.item_ids(), item);
      if (!q) return out;
      const ThemeSet& a = rep->fs.set(*q);
      for (std::size_t j = 0; j < rep->fs.item_count(); ++j) {
        const ThemeSet& b = rep->fs.set(j);
        if (j == *q) {
          out.push_back(1.0);
          continue;
        }
        switch (rep->coeff) {
          case SetCoefficient::jaccard:
            out.push_back(jaccard(a, b));
            break;
          case SetCoefficient::dice:
            out.push_back(dice(a, b));
            break;
          case SetCoefficient::cosine:
            out.push_back(binary_cosine(a, b));
            break;
          case SetCoefficient::cosine_idf:
            out.push_back(cosine_idf(a, b, rep->fs, rep->verbatim));
            break;
        }
      }
      return out;
    }
    case MeasureSpec::Family::ontology: {
      std::shared_ptr<const OntoRep> rep;
      {
        std::lock_guard lock(mu_);
        rep = onto_rep(m);
      }
      const auto& ids = rep->entities->item_ids();
      const auto q = position(ids, item);
      if (!q) return out;
      const auto& a = rep->entities->set(*q, rep->level);
      for (std::size_t j = 0; j < ids.size(); ++j) {
        out.push_back(j == *q ? 1.0
                              : rep->scorer->cosine(a, rep->card[*q], rep->entities->set(j, rep->level), rep->card[j]));
      }
      return out;
    }
    case MeasureSpec::Family::cf: {
      std::shared_ptr<const CfRep> rep;
      {
        std::lock_guard lock(mu_);
        rep = cf_rep(m);
      }
      const auto q = rep->m.index_of(item);
      if (!q) return out;
      for (std::size_t j = 0; j < rep->m.size(); ++j) out.push_back(rep->m.score(*q, j));
      return out;
    }
  }
  return out;
}

RecommendationResult SimilarityEngine::recommend(const std::string& item, const MeasureSpec& m, std::size_t k) {
  const ItemCatalog& catalog = ws_->catalog();
  if (!catalog.contains(item)) throw NotFoundError("unknown item '" + item + "'");
  RecommendationResult res;
  res.query = item;
  res.measure = m.canonical();
  res.level = m.level;
  if (k == 0) return res;

  const std::vector<std::string> ids = universe(m);
  const std::vector<double> s = scores(m, item);
  std::vector<std::size_t> order;
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (ids[j] != item && s[j] > 0.0) order.push_back(j);
  }
  const std::size_t keep = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                    [&](std::size_t a, std::size_t b) { return s[a] != s[b] ? s[a] > s[b] : ids[a] < ids[b]; });
  order.resize(keep);

  std::vector<std::string> mine;
  if (ws_->has_annotations()) mine = ws_->annotations().themes(item, m.level);
  for (std::size_t j : order) {
    Neighbor n;
    n.item_id = ids[j];
    const CatalogEntry* e = catalog.find(ids[j]);
    n.title = e != nullptr ? e->title : ids[j];
    n.score = s[j];
    if (ws_->has_annotations()) {
      const auto theirs = ws_->annotations().themes(ids[j], m.level);
      std::set_intersection(mine.begin(), mine.end(), theirs.begin(), theirs.end(),
                            std::back_inserter(n.shared_themes));
    }
    res.neighbors.push_back(std::move(n));
  }
  return res;
}

// ---------------------------------------------------------------------------

MethodConfig parse_method(std::string_view token) {
  token = detail::trim(token);
  const auto fields = detail::split(token, ':');
  const std::string_view kind = fields.front();
  MethodConfig c;
  using K = MethodConfig::Kind;
  if (kind == "iknn") {
    c.kind = K::iknn;
  } else if (kind == "user_knn") {
    c.kind = K::user_knn;
    c.k = 80;
  } else if (kind == "biased_mf") {
    c.kind = K::biased_mf;
  } else if (kind == "slope_one") {
    c.kind = K::slope_one;
  } else if (kind == "user_item_baseline") {
    c.kind = K::user_item;
  } else if (kind == "item_avg") {
    c.kind = K::item_avg;
  } else if (kind == "user_avg") {
    c.kind = K::user_avg;
  } else if (kind == "global_avg") {
    c.kind = K::global_avg;
  } else if (kind == "random") {
    c.kind = K::random;
  } else {
    throw ArgumentError("unknown method '" + std::string(kind) + "'");
  }

  std::vector<std::string> measure_fields;
  bool explicit_k = false;
  for (std::size_t i = 1; i < fields.size(); ++i) {
    const std::string_view f = detail::trim(fields[i]);
    const auto eq = f.find('=');
    const std::string_view key = eq == std::string_view::npos ? std::string_view() : f.substr(0, eq);
    const std::string_view value = eq == std::string_view::npos ? f : f.substr(eq + 1);
    const bool knn = c.kind == K::iknn || c.kind == K::user_knn;
    const bool biased = knn || c.kind == K::user_item;
    if (key == "k" && knn) {
      c.k = parse_count(key, value);
      if (c.k == 0) throw ArgumentError("k must be >= 1");
      explicit_k = true;
    } else if (key == "l1" && biased) {
      c.lambda1 = parse_positive(key, value, true);
    } else if (key == "l2" && biased) {
      c.lambda2 = parse_positive(key, value, true);
    } else if (key == "shrinkage" && c.kind == K::user_knn) {
      c.shrinkage = parse_positive(key, value, true);
    } else if (c.kind == K::biased_mf && key == "f") {
      c.mf.factors = parse_count(key, value);
    } else if (c.kind == K::biased_mf && key == "epochs") {
      c.mf.epochs = parse_count(key, value);
    } else if (c.kind == K::biased_mf && key == "lr") {
      c.mf.learning_rate = parse_positive(key, value, false);
    } else if (c.kind == K::biased_mf && key == "reg") {
      c.mf.regularization = parse_positive(key, value, true);
    } else if ((c.kind == K::biased_mf || c.kind == K::random) && key == "seed") {
      c.seed = parse_count(key, value);
      c.mf.seed = c.seed;
    } else if (c.kind == K::iknn) {
      measure_fields.emplace_back(f);
    } else {
      throw ArgumentError("parameter '" + std::string(f) + "' does not apply to method " + std::string(kind));
    }
  }
  if (c.kind == K::iknn) {
    if (measure_fields.empty()) throw ArgumentError("iknn needs a similarity measure, e.g. iknn:lsi:40:k=40");
    for (std::size_t i = 0; i < measure_fields.size(); ++i) c.measure_token += (i ? ":" : "") + measure_fields[i];
    c.measure = parse_measure(c.measure_token);
  }
  (void)explicit_k;
  c = with_k(std::move(c), c.k);
  if (c.kind != K::iknn && c.kind != K::user_knn) c.spec = std::string(token);
  return c;
}

MethodConfig with_k(MethodConfig m, std::size_t k) {
  using K = MethodConfig::Kind;
  if (m.kind != K::iknn && m.kind != K::user_knn) return m;
  if (k == 0) throw ArgumentError("k must be >= 1");
  m.k = k;
  std::string s = m.kind == K::iknn ? "iknn:" + m.measure_token : "user_knn";
  s += ":k=" + std::to_string(k);
  if (m.lambda1 != kDefaultLambda1) s += ":l1=" + format_real(m.lambda1);
  if (m.lambda2 != kDefaultLambda2) s += ":l2=" + format_real(m.lambda2);
  if (m.kind == K::user_knn && m.shrinkage != kDefaultShrinkage) s += ":shrinkage=" + format_real(m.shrinkage);
  m.spec = s;
  return m;
}

std::vector<std::size_t> parse_k_sweep(std::string_view token) {
  const auto f = detail::split(detail::trim(token), ':');
  if (f.size() != 3) throw ArgumentError("k sweep must be start:stop:step, e.g. 10:100:10");
  const std::size_t start = parse_count("k sweep start", f[0]);
  const std::size_t stop = parse_count("k sweep stop", f[1]);
  const std::size_t step = parse_count("k sweep step", f[2]);
  if (start == 0 || step == 0 || stop < start) throw ArgumentError("k sweep needs 1 <= start <= stop and step >= 1");
  std::vector<std::size_t> ks;
  for (std::size_t k = start; k <= stop; k += step) ks.push_back(k);
  return ks;
}

MethodSpec make_method(const MethodConfig& cfg, const Workspace& ws) {
  using K = MethodConfig::Kind;
  MethodSpec spec;
  spec.name = cfg.spec;
  switch (cfg.kind) {
    case K::iknn: {
      const MeasureSpec m = *cfg.measure;
      if (m.family == MeasureSpec::Family::cf) {
        spec.fit = [m, cfg](const RatingsDataset& train) -> std::unique_ptr<Predictor> {
          auto sims = std::make_shared<const SimilarityMatrix>(cf_item_similarity(train, m.shrinkage));
          return std::make_unique<IknnModel>(train, sims, cfg.k, cfg.lambda1, cfg.lambda2);
        };
      } else {
        auto sims = std::make_shared<const SimilarityMatrix>(ws.similarity(m));
        spec.fit = [sims, cfg](const RatingsDataset& train) -> std::unique_ptr<Predictor> {
          return std::make_unique<IknnModel>(train, sims, cfg.k, cfg.lambda1, cfg.lambda2);
        };
      }
      break;
    }
    case K::user_knn:
      spec.fit = [cfg](const RatingsDataset& train) -> std::unique_ptr<Predictor> {
        return std::make_unique<UserKnnModel>(train, cfg.k, cfg.shrinkage, cfg.lambda1, cfg.lambda2);
      };
      break;
    case K::biased_mf:
      spec.fit = [cfg](const RatingsDataset& train) -> std::unique_ptr<Predictor> {
        return std::make_unique<BiasedMfModel>(train, cfg.mf);
      };
      break;
    case K::slope_one:
      spec.fit = [](const RatingsDataset& train) -> std::unique_ptr<Predictor> {
        return std::make_unique<SlopeOneModel>(train);
      };
      break;
    case K::user_item:
      spec.fit = [cfg](const RatingsDataset& train) -> std::unique_ptr<Predictor> {
        return std::make_unique<UserItemBaseline>(train, cfg.lambda1, cfg.lambda2);
      };
      break;
    case K::item_avg:
    case K::user_avg:
    case K::global_avg: {
      const auto kind = cfg.kind == K::item_avg   ? AverageBaseline::Kind::item
                        : cfg.kind == K::user_avg ? AverageBaseline::Kind::user
                                                  : AverageBaseline::Kind::global;
      spec.fit = [kind](const RatingsDataset& train) -> std::unique_ptr<Predictor> {
        return std::make_unique<AverageBaseline>(train, kind);
      };
      break;
    }
    case K::random:
      spec.fit = [seed = cfg.seed](const RatingsDataset&) -> std::unique_ptr<Predictor> {
        return std::make_unique<RandomBaseline>(seed);
      };
      break;
  }
  return spec;
}

}  // namespace themetrek
