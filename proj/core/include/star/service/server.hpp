// HTTP API of the comprehension service: story reading jobs with a progress
// stream, conversions, the graph validator, stories, comments, accounts and
// feedback.

#ifndef STAR_SERVICE_SERVER_HPP
#define STAR_SERVICE_SERVER_HPP

#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include "star/service/jobs.hpp"
#include "star/service/store.hpp"

namespace httplib {
class Server;
}

namespace star::service {

using FeedbackHook = std::function<void(const std::string& id, const std::string& message,
                                        const std::string& contact)>;

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::string database = "star.db";
  std::string examples_dir;  // *.star files preloaded as example stories
  std::optional<std::string> annotator_url;
  std::chrono::milliseconds annotator_timeout{30'000};
  QueueConfig queue;
  HashCost hash_cost = HashCost::interactive;
  std::size_t max_body_bytes = 1 << 20;
  FeedbackHook on_feedback;  // default: log the message
  bool start_workers = true;  // false: accept jobs but hold them until start_workers()
};

/// Overrides fields from STAR_HOST, STAR_PORT, STAR_DB, STAR_EXAMPLES,
/// STAR_ANNOTATOR_URL, STAR_WORKERS and STAR_QUEUE_CAPACITY when set.
ServiceConfig config_from_env(ServiceConfig base);

class BindError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Server {
 public:
  explicit Server(ServiceConfig config);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds, starts the workers and serves on a background thread. Returns
  /// the bound port. Throws BindError.
  int start();
  /// Same as start() but blocks until stop() is called from elsewhere.
  void run();
  void stop();
  /// Starts the reading workers when the server was started without them.
  void start_workers();

  int port() const { return port_; }
  Store& store() { return *store_; }
  JobQueue& queue() { return *queue_; }
  ProgressHub& hub() { return hub_; }

 private:
  int bind();
  void routes();
  void preload_examples();

  ServiceConfig config_;
  std::unique_ptr<Store> store_;
  ProgressHub hub_;
  std::unique_ptr<JobQueue> queue_;
  std::unique_ptr<httplib::Server> http_;
  std::thread listener_;
  int port_ = 0;
};

}  // namespace star::service

#endif  // STAR_SERVICE_SERVER_HPP
