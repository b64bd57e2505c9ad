#include "star/service/jobs.hpp"

#include <nlohmann/json.hpp>

#include "star/grounding.hpp"

namespace star::service {

using nlohmann::json;

namespace {

const char* const kFlagNames[] = {"universal", "acceptable", "retracted", "elaborated",
                                  "qualified", "timings",    "showStory"};

bool* flag(ReaderOptions& o, std::size_t i) {
  bool* flags[] = {&o.universal, &o.acceptable, &o.retracted, &o.elaborated,
                   &o.qualified, &o.timings,    &o.show_story};
  return flags[i];
}

std::string first_error(const std::vector<Diagnostic>& diagnostics) {
  for (const auto& d : diagnostics) {
    if (d.severity == Severity::error) return to_string(d);
  }
  return "domain does not parse";
}

}  // namespace

ReaderOptions options_from_json(const std::string& json_text) {
  ReaderOptions o;
  if (json_text.empty()) return o;
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("options are not valid JSON: ") + e.what());
  }
  if (doc.is_null()) return o;
  if (!doc.is_object()) throw std::invalid_argument("options must be a JSON object");
  try {
    for (std::size_t i = 0; i < std::size(kFlagNames); ++i) {
      if (doc.contains(kFlagNames[i])) *flag(o, i) = doc.at(kFlagNames[i]).get<bool>();
    }
    if (doc.contains("horizon") && !doc.at("horizon").is_null()) o.horizon = doc.at("horizon").get<int>();
    if (doc.contains("depthCap") && !doc.at("depthCap").is_null()) o.depth_cap = doc.at("depthCap").get<int>();
    for (const auto& f : doc.value("filter", json::array())) {
      auto spec = f.get<std::string>();
      auto next = add_filter(o.filter, spec);
      if (!next) throw std::invalid_argument("unknown filter '" + spec + "'");
      o.filter = *next;
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed options: ") + e.what());
  }
  return o;
}

std::string options_to_json(const ReaderOptions& options) {
  ReaderOptions copy = options;
  json doc = json::object();
  for (std::size_t i = 0; i < std::size(kFlagNames); ++i) doc[kFlagNames[i]] = *flag(copy, i);
  if (options.horizon) doc["horizon"] = *options.horizon;
  if (options.depth_cap) doc["depthCap"] = *options.depth_cap;
  json filters = json::array();
  const auto& f = options.filter;
  if (f.changing_only) filters.push_back("changing-only");
  if (f.no_fluents) filters.push_back("no-fluents");
  if (f.no_actions) filters.push_back("no-actions");
  if (f.no_constants) filters.push_back("no-constants");
  if (f.causal_participants_only) filters.push_back("causal-participants-only");
  if (f.min_frequency) filters.push_back("min-frequency=" + std::to_string(*f.min_frequency));
  doc["filter"] = filters;
  return doc.dump();
}

DomainRejected::DomainRejected(std::vector<Diagnostic> diagnostics)
    : std::invalid_argument(first_error(diagnostics)), diagnostics_(std::move(diagnostics)) {}

Domain checked_domain(const std::string& domain_text, const ReaderOptions& options) {
  ParseResult parsed = parse_domain(domain_text);
  if (!parsed.ok()) throw DomainRejected(std::move(parsed.diagnostics));
  if (options.horizon) {
    const int latest = max_time_point(*parsed.domain);
    if (*options.horizon < latest) {
      throw std::invalid_argument("horizon " + std::to_string(*options.horizon) +
                                  " is below the latest time-point " + std::to_string(latest));
    }
  }
  return std::move(*parsed.domain);
}

ReadingOutput run_reading(const std::string& domain_text, const ReaderOptions& options,
                          const ProgressSink& progress) {
  Domain domain = checked_domain(domain_text, options);
  auto reports = read_story(domain, options, progress);
  return {render_story(reports, options, domain), structured_output(reports, options)};
}

// ProgressHub ----------------------------------------------------------------

void ProgressHub::publish(const std::string& job, StreamEvent event) {
  {
    std::lock_guard lock(mutex_);
    auto& ch = channels_[job];
    if (ch.closed) return;
    ch.closed = event.terminal;
    ch.events.push_back(std::move(event));
  }
  changed_.notify_all();
}

std::pair<std::vector<StreamEvent>, bool> ProgressHub::poll(const std::string& job, std::size_t from,
                                                            std::chrono::milliseconds wait) {
  std::unique_lock lock(mutex_);
  auto ready = [&] {
    auto it = channels_.find(job);
    return it != channels_.end() && (it->second.events.size() > from || it->second.closed);
  };
  changed_.wait_for(lock, wait, ready);
  auto it = channels_.find(job);
  if (it == channels_.end()) return {{}, false};
  const auto& events = it->second.events;
  std::vector<StreamEvent> out;
  if (from < events.size()) out.assign(events.begin() + static_cast<std::ptrdiff_t>(from), events.end());
  return {std::move(out), it->second.closed};
}

void ProgressHub::subscribe(const std::string& job) {
  std::lock_guard lock(mutex_);
  ++channels_[job].subscribers;
}

void ProgressHub::unsubscribe(const std::string& job) {
  std::lock_guard lock(mutex_);
  auto it = channels_.find(job);
  if (it == channels_.end()) return;
  if (it->second.subscribers > 0) --it->second.subscribers;
  if (it->second.subscribers == 0 && it->second.closed) channels_.erase(it);
}

std::size_t ProgressHub::subscribers(const std::string& job) const {
  std::lock_guard lock(mutex_);
  auto it = channels_.find(job);
  return it == channels_.end() ? 0 : it->second.subscribers;
}

void ProgressHub::forget(const std::string& job) {
  std::lock_guard lock(mutex_);
  auto it = channels_.find(job);
  if (it != channels_.end() && it->second.subscribers == 0 && it->second.closed) channels_.erase(it);
}

// JobQueue -------------------------------------------------------------------

JobQueue::JobQueue(Store& store, ProgressHub& hub, QueueConfig config)
    : store_(store), hub_(hub), config_(config) {}

JobQueue::~JobQueue() { stop(); }

void JobQueue::start() {
  std::lock_guard lock(mutex_);
  if (running_) return;
  store_.requeue_running();
  store_.purge_jobs(now_ms() - std::chrono::duration_cast<std::chrono::milliseconds>(config_.retention).count());
  auto ids = store_.queued_jobs();
  queue_.assign(ids.begin(), ids.end());
  running_ = true;
  for (std::size_t i = 0; i < std::max<std::size_t>(config_.workers, 1); ++i) {
    workers_.emplace_back([this] { worker_loop(); });
  }
}

void JobQueue::stop() {
  {
    std::lock_guard lock(mutex_);
    if (!running_) return;
    running_ = false;
  }
  cv_.notify_all();
  for (auto& w : workers_) w.join();
  workers_.clear();
}

std::string JobQueue::submit(const std::string& domain_text, const ReaderOptions& options) {
  checked_domain(domain_text, options);
  std::lock_guard lock(mutex_);
  if (queue_.size() >= config_.capacity) {
    throw QueueFull("the reading queue is full (" + std::to_string(config_.capacity) + " pending jobs)");
  }
  JobRecord job;
  job.id = random_id();
  job.domain_text = domain_text;
  job.options_json = options_to_json(options);
  job.submitted_at = now_ms();
  store_.insert_job(job);
  queue_.push_back(job.id);
  cv_.notify_one();
  return job.id;
}

std::size_t JobQueue::pending() const {
  std::lock_guard lock(mutex_);
  return queue_.size();
}

void JobQueue::worker_loop() {
  const auto purge_every = std::chrono::hours(1);
  for (;;) {
    std::string id;
    {
      std::unique_lock lock(mutex_);
      if (!cv_.wait_for(lock, purge_every, [&] { return !running_ || !queue_.empty(); })) {
        lock.unlock();
        store_.purge_jobs(now_ms() -
                          std::chrono::duration_cast<std::chrono::milliseconds>(config_.retention).count());
        continue;
      }
      if (!running_) return;
      id = std::move(queue_.front());
      queue_.pop_front();
    }
    execute(id);
  }
}

void JobQueue::execute(const std::string& id) {
  const std::string claim = random_id();
  if (!store_.claim_job(id, claim)) return;  // someone else has it, or it is gone
  ++executions_;
  auto job = store_.job(id);
  if (!job) return;

  auto sink = [&](const ProgressEvent& e) {
    json data{{"type", to_string(e.kind)}, {"session", e.session}, {"elapsedMs", e.elapsed_ms},
              {"detail", e.detail}};
    hub_.publish(id, {std::string(to_string(e.kind)), data.dump(), false});
  };
  bool ok = true;
  ReadingOutput out;
  std::string error;
  try {
    out = run_reading(job->domain_text, options_from_json(job->options_json), sink);
  } catch (const std::exception& e) {
    ok = false;
    error = e.what();
  }
  // The result is durable before anyone hears about it.
  store_.finish_job(id, claim, ok, out.text, out.structured, error);
  json data{{"type", ok ? "done" : "failed"}, {"state", ok ? "done" : "failed"}};
  if (!ok) data["error"] = error;
  hub_.publish(id, {ok ? "done" : "failed", data.dump(), true});
  hub_.forget(id);
}

}  // namespace star::service
