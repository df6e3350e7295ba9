// themetrek: ingest | simmatrix | evaluate | recommend | serve
//
// Exit codes: 0 success, 1 usage, 2 I/O, 3 malformed or invalid data,
// 4 unknown item.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "themetrek/error.hpp"
#include "themetrek/kernels.hpp"
#include "themetrek/service.hpp"
#include "themetrek/workspace.hpp"

namespace tt = themetrek;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kUsage = 1, kIo = 2, kData = 3, kUnknown = 4 };

struct WorkspaceFlags {
  std::string workspace;
  std::string ontology, annotations, ratings, transcripts, stopwords, catalog, cache_dir;

  void add(CLI::App& app) {
    app.add_option("-w,--workspace", workspace, "config file or directory holding workspace.conf")
        ->envname("THEMETREK_WORKSPACE");
    app.add_option("--ontology", ontology, "override: ontology TSV");
    app.add_option("--annotations", annotations, "override: annotations TSV");
    app.add_option("--ratings", ratings, "override: ratings CSV");
    app.add_option("--transcripts", transcripts, "override: transcripts directory");
    app.add_option("--stopwords", stopwords, "override: stop-word list");
    app.add_option("--catalog", catalog, "override: item catalog TSV");
    app.add_option("--cache-dir", cache_dir, "override: cache directory");
  }

  tt::WorkspaceConfig config() const {
    const fs::path where = workspace.empty() ? tt::default_workspace_path() : fs::path(workspace);
    tt::WorkspaceConfig c;
    const fs::path file = fs::is_directory(where) ? where / "workspace.conf" : where;
    if (fs::exists(file)) {
      c = tt::WorkspaceConfig::load(file);
    } else if (!workspace.empty()) {
      throw tt::IoError("workspace config not found: " + file.string());
    } else {
      c.base = fs::current_path();
      c.cache_dir = c.base / ".themetrek-cache";
    }
    const auto over = [](std::optional<fs::path>& slot, const std::string& v) {
      if (!v.empty()) slot = fs::absolute(v);
    };
    over(c.ontology, ontology);
    over(c.annotations, annotations);
    over(c.ratings, ratings);
    over(c.transcripts, transcripts);
    over(c.stopwords, stopwords);
    over(c.catalog, catalog);
    if (!cache_dir.empty()) c.cache_dir = fs::absolute(cache_dir);
    return c;
  }
};

struct MeasureFlags {
  std::string measure = "cosine";
  std::string p, level;

  void add(CLI::App& app, bool required) {
    auto* opt = app.add_option("-m,--measure", measure,
                               "tfidf, lsi:<p>, jaccard, dice, cosidf, cosine, path, wup, lch, lin, res, jcn, cf "
                               "(parameters may follow as :key=value)");
    if (required) opt->required();
    app.add_option("--p", p, "softness exponent (ontology measures) or factor count (lsi)");
    app.add_option("--level", level, "central, peripheral or both");
  }

  tt::MeasureSpec spec() const {
    tt::MeasureSpec m = tt::parse_measure(measure);
    if (!p.empty()) tt::set_measure_param(m, "p", p);
    if (!level.empty()) tt::set_measure_param(m, "level", level);
    return m;
  }
};

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw tt::IoError("cannot write " + path);
  out << text;
  if (!out) throw tt::IoError("error writing " + path);
}

int cmd_ingest(const WorkspaceFlags& wf, bool prime) {
  const auto ws = tt::Workspace::open(wf.config());
  std::cout << ws->report().text();
  if (prime) {
    for (const auto& p : ws->prime_cache()) std::cout << "cached       " << p.string() << "\n";
  }
  std::cout << "simd         " << tt::kernels::isa_name(tt::kernels::active_isa()) << "\n";
  return kOk;
}

int cmd_simmatrix(const WorkspaceFlags& wf, const MeasureFlags& mf, const std::string& out, bool no_cache) {
  const tt::MeasureSpec m = mf.spec();
  const auto ws = tt::Workspace::open(wf.config());
  const tt::SimilarityMatrix sim = ws->similarity(m, !no_cache);
  write_text(out, tt::format_similarity(sim));
  std::cerr << m.canonical() << ": " << sim.size() << " items, " << sim.pair_count() << " nonzero pairs\n";
  return kOk;
}

struct EvaluateFlags {
  std::string scenario = "warm";
  std::vector<std::string> methods;
  std::size_t repeats = 30;
  std::uint64_t seed = 1;
  double test_fraction = 0.3;
  std::string out;
  std::string k_sweep;
  bool signed_rank = false;
};

int cmd_evaluate(const WorkspaceFlags& wf, const EvaluateFlags& ef) {
  tt::ExperimentConfig cfg;
  try {
    cfg.scenario = tt::parse_scenario(ef.scenario);
  } catch (const tt::ParseError& e) {
    throw tt::ArgumentError(e.what());
  }
  cfg.repeats = ef.repeats;
  cfg.master_seed = ef.seed;
  cfg.test_fraction = ef.test_fraction;
  cfg.signed_rank = ef.signed_rank;

  std::vector<tt::MethodConfig> configs;
  const std::vector<std::size_t> ks = ef.k_sweep.empty() ? std::vector<std::size_t>{} : tt::parse_k_sweep(ef.k_sweep);
  for (const std::string& token : ef.methods) {
    const tt::MethodConfig c = tt::parse_method(token);
    const bool knn = c.kind == tt::MethodConfig::Kind::iknn || c.kind == tt::MethodConfig::Kind::user_knn;
    if (knn && !ks.empty()) {
      for (std::size_t k : ks) configs.push_back(tt::with_k(c, k));
    } else {
      configs.push_back(c);
    }
  }
  if (configs.empty()) throw tt::ArgumentError("no methods given");

  const auto ws = tt::Workspace::open(wf.config());
  std::vector<tt::MethodSpec> specs;
  for (const auto& c : configs) specs.push_back(tt::make_method(c, *ws));
  const tt::ExperimentReport report = tt::run_experiment(ws->ratings(), specs, cfg);

  if (!ef.out.empty()) {
    fs::create_directories(ef.out);
    const std::string stem = std::string(tt::to_string(cfg.scenario));
    write_text((fs::path(ef.out) / (stem + "_report.tsv")).string(), tt::report_tsv(report));
    write_text((fs::path(ef.out) / (stem + "_summary.tsv")).string(), tt::summary_tsv(report));
  }
  std::cout << tt::summary_table(report);
  for (const auto& m : report.methods) {
    if (!m.complete) {
      std::cerr << "warning: " << m.name << " failed on some repeats";
      if (!m.errors.empty()) std::cerr << " (" << m.errors.front() << ")";
      std::cerr << "\n";
    }
  }
  return kOk;
}

int cmd_recommend(const WorkspaceFlags& wf, const MeasureFlags& mf, const std::string& item, std::size_t k,
                  bool as_json) {
  const tt::MeasureSpec m = mf.spec();
  const auto ws = tt::Workspace::open(wf.config());
  tt::SimilarityEngine engine(ws);
  const tt::RecommendationResult r = engine.recommend(item, m, k);
  if (as_json) {
    std::cout << tt::recommendation_json(r, ws->catalog()) << "\n";
    return kOk;
  }
  const tt::CatalogEntry* q = ws->catalog().find(item);
  std::cout << "# " << item << " (" << q->title << "), " << r.measure << "\n";
  std::size_t rank = 0;
  for (const auto& n : r.neighbors) {
    char score[32];
    std::snprintf(score, sizeof score, "%.6f", tt::round_score(n.score));
    std::cout << ++rank << '\t' << n.item_id << '\t' << score << '\t' << n.title << '\t';
    for (std::size_t i = 0; i < n.shared_themes.size(); ++i) std::cout << (i ? "; " : "") << n.shared_themes[i];
    std::cout << "\n";
  }
  return kOk;
}

tt::Service* g_service = nullptr;

int cmd_serve(const WorkspaceFlags& wf, const std::string& host, int port, const std::vector<std::string>& prepare) {
  const auto ws = tt::Workspace::open(wf.config());
  std::vector<tt::MeasureSpec> startup;
  if (prepare.empty()) {
    if (ws->has_annotations()) {
      for (const char* t : {"cosine:level=central", "cosine:level=peripheral", "cosine", "jaccard", "dice"}) {
        startup.push_back(tt::parse_measure(t));
      }
    }
  } else {
    for (const auto& t : prepare) startup.push_back(tt::parse_measure(t));
  }
  tt::Service service(ws, startup);
  const int bound = service.bind(host, port);
  std::cerr << "listening on http://" << host << ":" << bound << "\n";
  g_service = &service;
  std::signal(SIGINT, [](int) {
    if (g_service != nullptr) g_service->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_service != nullptr) g_service->stop();
  });
  service.listen();
  g_service = nullptr;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"themetrek: theme-aware item similarity and rating prediction"};
  app.require_subcommand(1);
  WorkspaceFlags wf;

  auto* ingest = app.add_subcommand("ingest", "load and validate the workspace, print counts, prime caches");
  wf.add(*ingest);
  bool no_prime = false;
  ingest->add_flag("--no-cache", no_prime, "skip writing cache files");

  auto* simmatrix = app.add_subcommand("simmatrix", "write an item-item similarity matrix");
  WorkspaceFlags wf_sim;
  wf_sim.add(*simmatrix);
  MeasureFlags mf_sim;
  mf_sim.add(*simmatrix, true);
  std::string sim_out = "-";
  bool sim_no_cache = false;
  simmatrix->add_option("-o,--out", sim_out, "output path ('-' for stdout)");
  simmatrix->add_flag("--no-cache", sim_no_cache, "neither read nor write the cache");

  auto* evaluate = app.add_subcommand("evaluate", "repeated split evaluation of rating predictors");
  WorkspaceFlags wf_eval;
  wf_eval.add(*evaluate);
  EvaluateFlags ef;
  evaluate->add_option("--scenario", ef.scenario, "warm or cold");
  evaluate->add_option("--methods", ef.methods, "method specs, e.g. iknn:lsi:40:k=40 global_avg")
      ->required()
      ->delimiter(',');
  evaluate->add_option("--repeats", ef.repeats, "number of repeated splits")->check(CLI::PositiveNumber);
  evaluate->add_option("--seed", ef.seed, "master seed; repeat r uses seed + r");
  evaluate->add_option("--test-fraction", ef.test_fraction, "held-out share")->check(CLI::Range(0.0, 1.0));
  evaluate->add_option("-o,--out", ef.out, "directory for report TSVs");
  evaluate->add_option("--k-sweep", ef.k_sweep, "start:stop:step applied to knn methods");
  evaluate->add_flag("--signed-rank", ef.signed_rank, "also report paired signed-rank p values");

  auto* recommend = app.add_subcommand("recommend", "top-k most similar items");
  WorkspaceFlags wf_rec;
  wf_rec.add(*recommend);
  MeasureFlags mf_rec;
  mf_rec.add(*recommend, false);
  std::string rec_item;
  std::size_t rec_k = 10;
  bool rec_json = false;
  recommend->add_option("-i,--item", rec_item, "query item id")->required();
  recommend->add_option("-k,--k", rec_k, "number of neighbors");
  recommend->add_flag("--json", rec_json, "print the API JSON instead of a table");

  auto* serve = app.add_subcommand("serve", "HTTP JSON API");
  WorkspaceFlags wf_srv;
  wf_srv.add(*serve);
  std::string host = "127.0.0.1";
  int port = 8080;
  std::vector<std::string> prepare;
  serve->add_option("--host", host, "bind address");
  serve->add_option("--port", port, "port (0 picks a free one)")->check(CLI::Range(0, 65535));
  serve->add_option("--prepare", prepare, "measures to build at startup")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*ingest) return cmd_ingest(wf, !no_prime);
    if (*simmatrix) return cmd_simmatrix(wf_sim, mf_sim, sim_out, sim_no_cache);
    if (*evaluate) return cmd_evaluate(wf_eval, ef);
    if (*recommend) return cmd_recommend(wf_rec, mf_rec, rec_item, rec_k, rec_json);
    if (*serve) return cmd_serve(wf_srv, host, port, prepare);
  } catch (const tt::ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const tt::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const tt::NotFoundError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUnknown;
  } catch (const tt::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  }
  return kUsage;
}
