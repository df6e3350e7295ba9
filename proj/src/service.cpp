#include "themetrek/service.hpp"

#include <cmath>

#include "httplib.h"
#include "json.hpp"

#include "text_util.hpp"
#include "themetrek/error.hpp"

namespace themetrek {

using nlohmann::json;

namespace {

ServiceResponse ok(const json& j) { return {200, j.dump()}; }

ServiceResponse error(int status, std::string_view code, const std::string& message) {
  return {status, json{{"code", code}, {"message", message}}.dump()};
}

std::string_view param(const QueryParams& params, const std::string& key, std::string_view fallback = {}) {
  const auto it = params.find(key);
  return it == params.end() || it->second.empty() ? fallback : std::string_view(it->second);
}

std::size_t parse_size(std::string_view key, std::string_view value, std::size_t max) {
  int v = 0;
  if (!detail::parse_int(value, v) || v < 0 || static_cast<std::size_t>(v) > max) {
    throw ArgumentError(std::string(key) + " must be an integer in [0, " + std::to_string(max) + "]");
  }
  return static_cast<std::size_t>(v);
}

// ArgumentError when the workspace lacks an input the measure reads.
void require_inputs(const Workspace& ws, const MeasureSpec& m) {
  switch (m.family) {
    case MeasureSpec::Family::text:
      ws.transcripts();
      break;
    case MeasureSpec::Family::set:
      ws.annotations();
      break;
    case MeasureSpec::Family::ontology:
      ws.ontology();
      ws.annotations();
      break;
    case MeasureSpec::Family::cf:
      ws.ratings();
      break;
  }
}

json catalog_entry(const CatalogEntry& e) {
  return {{"item_id", e.item_id}, {"title", e.title}, {"series", e.series}, {"season", e.season},
          {"episode", e.episode}};
}

json subtree(const Ontology& o, EntityId e, std::size_t depth) {
  json node{{"name", o.name(e)}, {"depth", o.depth(e)}, {"child_count", o.children(e).size()}};
  json kids = json::array();
  if (depth > 0) {
    std::vector<EntityId> sorted(o.children(e).begin(), o.children(e).end());
    std::sort(sorted.begin(), sorted.end(), [&](EntityId a, EntityId b) { return o.name(a) < o.name(b); });
    for (EntityId c : sorted) kids.push_back(subtree(o, c, depth - 1));
  }
  node["children"] = std::move(kids);
  return node;
}

}  // namespace

double round_score(double s) { return std::round(s * 1e6) / 1e6; }

std::string recommendation_json(const RecommendationResult& r, const ItemCatalog& catalog) {
  json neighbors = json::array();
  for (const Neighbor& n : r.neighbors) {
    neighbors.push_back(
        {{"item_id", n.item_id}, {"title", n.title}, {"score", round_score(n.score)}, {"shared_themes", n.shared_themes}});
  }
  const CatalogEntry* q = catalog.find(r.query);
  return json{{"query", r.query},
              {"title", q != nullptr ? q->title : r.query},
              {"measure", r.measure},
              {"level", to_string(r.level)},
              {"neighbors", std::move(neighbors)}}
      .dump();
}

Service::Service(std::shared_ptr<const Workspace> ws, std::vector<MeasureSpec> startup)
    : ws_(std::move(ws)), engine_(ws_), startup_(std::move(startup)) {}

Service::~Service() {
  stop();
  {
    std::lock_guard lock(mu_);
    quit_ = true;
  }
  cv_.notify_all();
  if (worker_.joinable()) worker_.join();
}

void Service::start() {
  {
    std::lock_guard lock(mu_);
    if (started_) return;
    started_ = true;
  }
  for (const MeasureSpec& m : startup_) {
    enqueue(m.canonical(), [this, m] { engine_.prepare(m); });
  }
  worker_ = std::thread([this] { run_worker(); });
}

void Service::enqueue(std::string key, std::function<void()> job) {
  {
    std::lock_guard lock(mu_);
    if (queued_[key] || failed_.contains(key)) return;
    queued_[key] = true;
    queue_.emplace_back(std::move(key), std::move(job));
  }
  cv_.notify_one();
}

void Service::run_worker() {
  std::unique_lock lock(mu_);
  while (true) {
    cv_.wait(lock, [&] { return quit_ || !queue_.empty(); });
    if (quit_) return;
    auto [key, job] = std::move(queue_.front());
    queue_.pop_front();
    running_job_ = true;
    lock.unlock();
    std::string failure;
    try {
      job();
    } catch (const std::exception& e) {
      failure = e.what();
    }
    lock.lock();
    running_job_ = false;
    queued_.erase(key);
    if (!failure.empty()) failed_[key] = failure;
    if (queue_.empty()) idle_cv_.notify_all();
  }
}

void Service::wait_until_idle() {
  std::unique_lock lock(mu_);
  idle_cv_.wait(lock, [&] { return !started_ || (queue_.empty() && !running_job_); });
}

bool Service::building() const {
  std::lock_guard lock(mu_);
  return !queue_.empty() || running_job_;
}

ServiceResponse Service::handle(std::string_view path, const QueryParams& params) {
  try {
    constexpr std::string_view items_prefix = "/api/items/";
    constexpr std::string_view similar_prefix = "/api/similar/";
    constexpr std::string_view themes_prefix = "/api/themes/";
    if (path == "/api/items") return items();
    if (path.starts_with(items_prefix)) return item(std::string(path.substr(items_prefix.size())));
    if (path == "/api/similar") {
      const std::string_view id = param(params, "item");
      if (id.empty()) throw ArgumentError("missing parameter: item");
      return similar(std::string(id), params);
    }
    if (path.starts_with(similar_prefix)) return similar(std::string(path.substr(similar_prefix.size())), params);
    if (path == "/api/measures") return measures();
    if (path.starts_with(themes_prefix)) return theme(std::string(path.substr(themes_prefix.size())), params);
    if (path == "/api/predict") return predict(params);
    return error(404, "not_found", "no such endpoint: " + std::string(path));
  } catch (const NotFoundError& e) {
    return error(404, "not_found", e.what());
  } catch (const ArgumentError& e) {
    return error(400, "bad_request", e.what());
  } catch (const std::exception& e) {
    return error(500, "internal", e.what());
  }
}

ServiceResponse Service::items() {
  json arr = json::array();
  for (const CatalogEntry& e : ws_->catalog().entries()) arr.push_back(catalog_entry(e));
  return ok(arr);
}

ServiceResponse Service::item(const std::string& id) {
  const CatalogEntry* e = ws_->catalog().find(id);
  if (e == nullptr) throw NotFoundError("unknown item '" + id + "'");
  json j = catalog_entry(*e);
  json themes = json::object();
  for (LevelFilter l : {LevelFilter::central, LevelFilter::peripheral}) {
    themes[std::string(to_string(l))] =
        ws_->has_annotations() ? ws_->annotations().themes(id, l) : std::vector<std::string>{};
  }
  j["themes"] = std::move(themes);
  return ok(j);
}

ServiceResponse Service::similar(const std::string& id, const QueryParams& params) {
  if (!ws_->catalog().contains(id)) throw NotFoundError("unknown item '" + id + "'");
  MeasureSpec m = parse_measure(param(params, "measure", "cosine"));
  if (auto p = param(params, "p"); !p.empty()) set_measure_param(m, "p", p);
  if (auto l = param(params, "level"); !l.empty()) set_measure_param(m, "level", l);
  const std::size_t k = parse_size("k", param(params, "k", "10"), 10000);
  require_inputs(*ws_, m);

  const std::string key = m.canonical();
  if (!engine_.is_prepared(m)) {
    {
      std::lock_guard lock(mu_);
      if (auto it = failed_.find(key); it != failed_.end()) {
        return error(500, "build_failed", "building " + key + " failed: " + it->second);
      }
    }
    enqueue(key, [this, m] { engine_.prepare(m); });
    return error(503, "building", "similarities for " + key + " are being built; retry shortly");
  }
  return {200, recommendation_json(engine_.recommend(id, m, k), ws_->catalog())};
}

ServiceResponse Service::measures() {
  json arr = json::array();
  for (const MeasureInfo& info : measure_catalog()) {
    json j{{"name", info.name}, {"family", info.family}, {"params", info.params}};
    if (info.default_p > 0.0) {
      j["p"] = {{"default", info.default_p}, {"min", 0.01}, {"max", 20.0}};
    }
    if (info.name == "lsi") j["p"] = {{"default", 40}, {"min", 1}, {"max", 1000}};
    arr.push_back(std::move(j));
  }
  return ok(json{{"measures", std::move(arr)},
                 {"levels", {"central", "peripheral", "both"}},
                 {"k", {{"default", 10}, {"min", 0}, {"max", 100}}}});
}

ServiceResponse Service::theme(const std::string& name, const QueryParams& params) {
  const Ontology& o = ws_->ontology();
  const std::size_t depth = parse_size("depth", param(params, "depth", "1"), 64);
  const EntityId e = o.id(name);
  json j = subtree(o, e, depth);
  json ancestors = json::array();
  for (EntityId a = e; a != o.root();) {
    a = o.parent(a);
    ancestors.push_back(o.name(a));
  }
  j["ancestors"] = std::move(ancestors);
  return ok(j);
}

ServiceResponse Service::predict(const QueryParams& params) {
  const std::string user(param(params, "user"));
  const std::string item_id(param(params, "item"));
  if (user.empty() || item_id.empty()) throw ArgumentError("user and item are required");
  if (!ws_->catalog().contains(item_id)) throw NotFoundError("unknown item '" + item_id + "'");
  const MethodConfig cfg = parse_method(param(params, "model", "user_item_baseline"));
  if (cfg.measure) require_inputs(*ws_, *cfg.measure);
  const RatingsDataset& ratings = ws_->ratings();

  std::shared_ptr<const Predictor> model;
  {
    std::lock_guard lock(mu_);
    if (auto it = models_.find(cfg.spec); it != models_.end()) model = it->second;
    if (!model) {
      if (auto it = failed_.find(cfg.spec); it != failed_.end()) {
        return error(500, "build_failed", "fitting " + cfg.spec + " failed: " + it->second);
      }
    }
  }
  if (!model) {
    enqueue(cfg.spec, [this, cfg, &ratings] {
      const MethodSpec spec = make_method(cfg, *ws_);
      std::shared_ptr<const Predictor> fitted = spec.fit(ratings);
      std::lock_guard lock(mu_);
      models_[cfg.spec] = std::move(fitted);
    });
    return error(503, "building", "model " + cfg.spec + " is being fitted; retry shortly");
  }
  return ok(json{{"user", user},
                 {"item", item_id},
                 {"model", cfg.spec},
                 {"known_user", ratings.has_user(user)},
                 {"prediction", round_score(model->predict(user, item_id))}});
}

int Service::bind(const std::string& host, int port) {
  server_ = std::make_unique<httplib::Server>();
  server_->Get(R"(/api/.*)", [this](const httplib::Request& req, httplib::Response& res) {
    QueryParams params;
    for (const auto& [k, v] : req.params) params.emplace(k, v);
    const ServiceResponse r = handle(req.path, params);
    res.status = r.status;
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_content(r.body, "application/json; charset=utf-8");
  });
  if (port == 0) {
    const int bound = server_->bind_to_any_port(host);
    if (bound < 0) throw IoError("cannot bind " + host);
    return bound;
  }
  if (!server_->bind_to_port(host, port)) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void Service::listen() {
  if (!server_) throw ArgumentError("listen() before bind()");
  start();
  server_->listen_after_bind();
}

void Service::stop() {
  if (server_) server_->stop();
}

}  // namespace themetrek
