#pragma once
// Read-only JSON API over a workspace. Requests are answered from prepared
// state only; a measure or model that is not ready yet is queued for a
// background build and the request gets 503.

#include <atomic>
#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "themetrek/recsys.hpp"
#include "themetrek/workspace.hpp"

namespace httplib {
class Server;
}

namespace themetrek {

struct ServiceResponse {
  int status = 200;
  std::string body;  // JSON
};

using QueryParams = std::map<std::string, std::string>;

class Service {
 public:
  /// `startup` measures are prepared by the background worker first.
  Service(std::shared_ptr<const Workspace> ws, std::vector<MeasureSpec> startup);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Starts the background worker (idempotent).
  void start();
  /// Blocks until the build queue is empty.
  void wait_until_idle();
  bool building() const;

  /// GET `path` with decoded query parameters.
  ServiceResponse handle(std::string_view path, const QueryParams& params);

  /// Binds to host:port (port 0 picks a free port) and returns the port.
  int bind(const std::string& host, int port);
  /// Serves until stop(); requires bind().
  void listen();
  void stop();

  SimilarityEngine& engine() { return engine_; }

 private:
  ServiceResponse items();
  ServiceResponse item(const std::string& id);
  ServiceResponse similar(const std::string& id, const QueryParams& params);
  ServiceResponse measures();
  ServiceResponse theme(const std::string& name, const QueryParams& params);
  ServiceResponse predict(const QueryParams& params);

  void enqueue(std::string key, std::function<void()> job);
  void run_worker();

  std::shared_ptr<const Workspace> ws_;
  SimilarityEngine engine_;
  std::vector<MeasureSpec> startup_;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable idle_cv_;
  std::deque<std::pair<std::string, std::function<void()>>> queue_;
  std::map<std::string, std::string> failed_;  // job key -> error message
  std::map<std::string, bool> queued_;
  std::map<std::string, std::shared_ptr<const Predictor>> models_;
  bool running_job_ = false;
  bool started_ = false;
  bool quit_ = false;
  std::thread worker_;

  std::unique_ptr<httplib::Server> server_;
};

/// Scores as serialized by the API and the command line: 6 decimals.
double round_score(double s);

/// Recommendation as the JSON object served by /api/similar.
std::string recommendation_json(const RecommendationResult& r, const ItemCatalog& catalog);

}  // namespace themetrek
