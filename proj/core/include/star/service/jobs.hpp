// Background story reading: a FIFO queue of persisted jobs served by worker
// threads, and a hub that fans progress events out to stream subscribers.

#ifndef STAR_SERVICE_JOBS_HPP
#define STAR_SERVICE_JOBS_HPP

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "star/comprehension.hpp"
#include "star/parser.hpp"
#include "star/service/store.hpp"

namespace star::service {

/// Options travel as JSON: {"universal":true, ..., "horizon":20, "filter":["changing-only"]}.
/// Throws std::invalid_argument on unknown filters or wrong types.
ReaderOptions options_from_json(const std::string& json_text);
std::string options_to_json(const ReaderOptions& options);

/// A domain that does not parse, with the parser's diagnostics.
class DomainRejected : public std::invalid_argument {
 public:
  explicit DomainRejected(std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

/// Parses `domain_text` and checks the horizon override against it. Throws
/// DomainRejected or std::invalid_argument.
Domain checked_domain(const std::string& domain_text, const ReaderOptions& options);

/// Raw text and structured JSON of one reading; what the CLI prints too.
struct ReadingOutput {
  std::string text;
  std::string structured;
};

/// Parses and reads a domain. Throws as checked_domain, or ReasoningError.
ReadingOutput run_reading(const std::string& domain_text, const ReaderOptions& options,
                          const ProgressSink& progress = {});

struct StreamEvent {
  std::string type;  // progress kind, "snapshot", "done" or "failed"
  std::string data;  // JSON object
  bool terminal = false;
};

class ProgressHub {
 public:
  void publish(const std::string& job, StreamEvent event);
  /// Events from index `from` on; waits up to `wait` for new ones. The flag
  /// tells whether the terminal event has been published.
  std::pair<std::vector<StreamEvent>, bool> poll(const std::string& job, std::size_t from,
                                                 std::chrono::milliseconds wait);
  void subscribe(const std::string& job);
  void unsubscribe(const std::string& job);
  std::size_t subscribers(const std::string& job) const;
  /// Drops the history of finished jobs nobody listens to.
  void forget(const std::string& job);

 private:
  struct Channel {
    std::vector<StreamEvent> events;
    bool closed = false;
    std::size_t subscribers = 0;
  };
  mutable std::mutex mutex_;
  std::condition_variable changed_;
  std::map<std::string, Channel> channels_;
};

class QueueFull : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct QueueConfig {
  std::size_t workers = 2;
  std::size_t capacity = 256;          // pending jobs before submissions are refused
  std::chrono::hours retention{24 * 7};
};

class JobQueue {
 public:
  JobQueue(Store& store, ProgressHub& hub, QueueConfig config = {});
  ~JobQueue();
  JobQueue(const JobQueue&) = delete;
  JobQueue& operator=(const JobQueue&) = delete;

  /// Requeues interrupted jobs, purges expired ones and starts the workers.
  void start();
  void stop();

  /// Validates the domain and persists a queued job. Throws
  /// std::invalid_argument for a malformed domain, QueueFull at capacity.
  std::string submit(const std::string& domain_text, const ReaderOptions& options);
  std::size_t pending() const;
  /// How many times a worker actually executed a job.
  std::size_t executions() const { return executions_.load(); }

 private:
  void worker_loop();
  void execute(const std::string& id);

  Store& store_;
  ProgressHub& hub_;
  QueueConfig config_;
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<std::string> queue_;
  std::vector<std::thread> workers_;
  bool running_ = false;
  std::atomic<std::size_t> executions_{0};
};

}  // namespace star::service

#endif  // STAR_SERVICE_JOBS_HPP
