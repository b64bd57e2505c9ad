#include "star/service/server.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "star/kb_graph.hpp"
#include "star/nl2star.hpp"
#include "star/parser.hpp"

namespace star::service {

using nlohmann::json;

namespace {

struct HttpError {
  int status;
  std::string message;
  json extra = json::object();
};

void send(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json diagnostics_json(const std::vector<Diagnostic>& diagnostics) {
  json out = json::array();
  for (const auto& d : diagnostics) {
    json j{{"severity", d.severity == Severity::error ? "error" : "warning"},
           {"line", d.line},
           {"column", d.column},
           {"message", d.message}};
    if (d.hint) j["hint"] = *d.hint;
    out.push_back(std::move(j));
  }
  return out;
}

json guidance_json(const std::vector<GuidanceDiagnostic>& diagnostics) {
  json out = json::array();
  for (const auto& d : diagnostics) {
    out.push_back({{"message", d.message}, {"nodes", d.nodes}, {"edges", d.edges}, {"hint", d.hint}});
  }
  return out;
}

json story_json(const StoryRecord& s) {
  return {{"id", s.id},
          {"owner", s.owner},
          {"title", s.title},
          {"story", s.story_text},
          {"knowledge", s.knowledge_text},
          {"visibility", s.visibility == Visibility::public_ ? "public" : "private"},
          {"example", s.example},
          {"createdAt", s.created_at},
          {"updatedAt", s.updated_at}};
}

json comment_json(const Comment& c) {
  return {{"id", c.id},       {"storyId", c.story_id}, {"author", c.author},
          {"authorName", c.author_name}, {"body", c.body}, {"createdAt", c.created_at}};
}

json trace_json(const ConversionTrace& trace) {
  json out = json::array();
  for (const auto& e : trace.sentences) {
    json j{{"sentence", e.sentence}, {"text", e.text},       {"question", e.question},
           {"session", e.session},   {"time", e.time},       {"sources", e.sources},
           {"notes", e.notes},       {"line", to_string(e)}};
    j["literal"] = e.literal ? json(canonical_text(*e.literal)) : json(nullptr);
    if (e.error) j["error"] = *e.error;
    out.push_back(std::move(j));
  }
  return out;
}

json body_of(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    json doc = json::parse(req.body);
    if (!doc.is_object()) throw HttpError{400, "request body must be a JSON object"};
    return doc;
  } catch (const json::parse_error& e) {
    throw HttpError{400, std::string("request body is not valid JSON: ") + e.what()};
  }
}

std::string string_field(const json& body, const char* name, bool required = true) {
  auto it = body.find(name);
  if (it == body.end() || it->is_null()) {
    if (required) throw HttpError{400, std::string("missing field '") + name + "'"};
    return "";
  }
  if (!it->is_string()) throw HttpError{400, std::string("field '") + name + "' must be a string"};
  return it->get<std::string>();
}

int status_of(StoreError::Code code) {
  switch (code) {
    case StoreError::Code::not_found: return 404;
    case StoreError::Code::forbidden: return 403;
    case StoreError::Code::conflict: return 409;
    case StoreError::Code::invalid: return 400;
    case StoreError::Code::internal: break;
  }
  return 500;
}

bool terminal(JobState s) { return s == JobState::done || s == JobState::failed; }

std::string sse(const std::string& type, const std::string& data, std::optional<std::size_t> id = {}) {
  std::string out;
  if (id) out += "id: " + std::to_string(*id) + "\n";
  out += "event: " + type + "\ndata: " + data + "\n\n";
  return out;
}

std::string terminal_event(const JobRecord& job) {
  json data{{"type", to_string(job.state)}, {"state", to_string(job.state)}};
  if (job.state == JobState::failed) data["error"] = job.error;
  return sse(std::string(to_string(job.state)), data.dump());
}

KnowledgeGraph graph_field(const json& body) {
  auto it = body.find("graph");
  if (it == body.end() || !it->is_object()) throw HttpError{400, "missing object field 'graph'"};
  try {
    return graph_from_json(it->dump());
  } catch (const GraphError& e) {
    throw HttpError{400, e.what()};
  }
}

// Wraps a handler so every failure becomes a JSON error response.
template <class F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const HttpError& e) {
      json body = e.extra;
      body["error"] = e.message;
      send(res, e.status, body);
    } catch (const StoreError& e) {
      send(res, status_of(e.code()), {{"error", e.what()}});
    } catch (const std::exception& e) {
      spdlog::error("{} {}: {}", req.method, req.path, e.what());
      send(res, 500, {{"error", e.what()}});
    }
  };
}

}  // namespace

ServiceConfig config_from_env(ServiceConfig base) {
  auto env = [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    return std::string(v);
  };
  if (auto v = env("STAR_HOST")) base.host = *v;
  if (auto v = env("STAR_PORT")) base.port = std::stoi(*v);
  if (auto v = env("STAR_DB")) base.database = *v;
  if (auto v = env("STAR_EXAMPLES")) base.examples_dir = *v;
  if (auto v = env("STAR_ANNOTATOR_URL")) base.annotator_url = *v;
  if (auto v = env("STAR_WORKERS")) base.queue.workers = std::stoul(*v);
  if (auto v = env("STAR_QUEUE_CAPACITY")) base.queue.capacity = std::stoul(*v);
  return base;
}

Server::Server(ServiceConfig config) : config_(std::move(config)) {
  if (!config_.on_feedback) {
    config_.on_feedback = [](const std::string& id, const std::string& message, const std::string& contact) {
      spdlog::info("feedback {} from '{}': {}", id, contact, message);
    };
  }
  store_ = std::make_unique<Store>(config_.database, config_.hash_cost);
  queue_ = std::make_unique<JobQueue>(*store_, hub_, config_.queue);
  http_ = std::make_unique<httplib::Server>();
  http_->set_payload_max_length(config_.max_body_bytes);
  // httplib defaults to SO_REUSEPORT, which would let a second server share
  // the port silently.
  http_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  routes();
}

Server::~Server() { stop(); }

int Server::bind() {
  int port = config_.port == 0 ? http_->bind_to_any_port(config_.host)
                               : (http_->bind_to_port(config_.host, config_.port) ? config_.port : -1);
  if (port < 0) {
    throw BindError("cannot listen on " + config_.host + ":" + std::to_string(config_.port));
  }
  return port;
}

int Server::start() {
  preload_examples();
  port_ = bind();
  if (config_.start_workers) queue_->start();
  listener_ = std::thread([this] { http_->listen_after_bind(); });
  http_->wait_until_ready();
  spdlog::info("serving on {}:{}", config_.host, port_);
  return port_;
}

void Server::run() {
  start();
  if (listener_.joinable()) listener_.join();
}

void Server::stop() {
  if (http_) http_->stop();
  if (listener_.joinable() && listener_.get_id() != std::this_thread::get_id()) listener_.join();
  if (queue_) queue_->stop();
}

void Server::start_workers() { queue_->start(); }

void Server::preload_examples() {
  if (config_.examples_dir.empty()) return;
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(config_.examples_dir, ec)) {
    spdlog::warn("example directory {} does not exist", config_.examples_dir);
    return;
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(config_.examples_dir)) {
    if (entry.path().extension() == ".star") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    std::ifstream in(file);
    std::stringstream buffer;
    buffer << in.rdbuf();
    auto parsed = parse_domain(buffer.str());
    if (!parsed.ok()) {
      spdlog::warn("skipping example {}: {}", file.string(), to_string(parsed.diagnostics.front()));
      continue;
    }
    const auto& parts = parsed.domain->parts();
    DomainParts story{parts.sessions, parts.statements, parts.questions, {}, {}, {}};
    DomainParts knowledge{{}, {}, {}, parts.fluents, parts.rules, parts.priorities};
    store_->upsert_example(file.stem().string(), format_domain(Domain(std::move(story))),
                           format_domain(Domain(std::move(knowledge))));
  }
}

void Server::routes() {
  auto& http = *http_;

  // Resolves the caller from a bearer token; empty for anonymous requests.
  auto viewer = [this](const httplib::Request& req) -> std::string {
    if (!req.has_header("Authorization")) return "";
    const std::string header = req.get_header_value("Authorization");
    const std::string prefix = "Bearer ";
    if (header.compare(0, prefix.size(), prefix) != 0) throw HttpError{401, "expected a bearer token"};
    auto user = store_->user_for_token(header.substr(prefix.size()));
    if (!user) throw HttpError{401, "unknown or expired token"};
    return *user;
  };
  auto require_user = [viewer](const httplib::Request& req) {
    std::string user = viewer(req);
    if (user.empty()) throw HttpError{401, "this operation requires signing in"};
    return user;
  };

  http.Get("/api/health", guarded([this](const httplib::Request&, httplib::Response& res) {
             send(res, 200,
                  {{"status", "ok"}, {"schemaVersion", store_->schema_version()}, {"pendingJobs", queue_->pending()}});
           }));

  // Accounts ------------------------------------------------------------------

  http.Post("/api/accounts", guarded([this](const httplib::Request& req, httplib::Response& res) {
              json body = body_of(req);
              std::string name = string_field(body, "name");
              std::string id = store_->create_user(name, string_field(body, "password"));
              send(res, 201, {{"id", id}, {"name", name}});
            }));

  http.Post("/api/login", guarded([this](const httplib::Request& req, httplib::Response& res) {
              json body = body_of(req);
              auto user = store_->authenticate(string_field(body, "name"), string_field(body, "password"));
              if (!user) throw HttpError{401, "wrong name or password"};
              send(res, 200, {{"token", store_->issue_token(*user)}, {"userId", *user}});
            }));

  // Reading jobs ----------------------------------------------------------------

  http.Post("/api/story/queue", guarded([this](const httplib::Request& req, httplib::Response& res) {
              json body = body_of(req);
              std::string domain = string_field(body, "domain", false);
              if (domain.empty()) {
                domain = string_field(body, "story", false);
                std::string knowledge = string_field(body, "knowledge", false);
                if (!knowledge.empty()) domain += (domain.empty() ? "" : "\n") + knowledge;
              }
              if (domain.empty()) throw HttpError{400, "missing field 'domain'"};
              ReaderOptions options;
              try {
                options = options_from_json(body.contains("options") ? body.at("options").dump() : "");
                std::string id = queue_->submit(domain, options);
                send(res, 202, {{"id", id}, {"state", "queued"}});
              } catch (const DomainRejected& e) {
                throw HttpError{400, e.what(), {{"diagnostics", diagnostics_json(e.diagnostics())}}};
              } catch (const QueueFull& e) {
                res.set_header("Retry-After", "5");
                throw HttpError{503, e.what()};
              } catch (const std::invalid_argument& e) {
                throw HttpError{400, e.what()};
              }
            }));

  http.Get(R"(/api/story/results/([0-9a-f]+))",
           guarded([this](const httplib::Request& req, httplib::Response& res) {
             auto job = store_->job(req.matches[1]);
             if (!job) throw HttpError{404, "no job " + std::string(req.matches[1])};
             json body{{"id", job->id},
                       {"state", to_string(job->state)},
                       {"submittedAt", job->submitted_at},
                       {"startedAt", job->started_at},
                       {"finishedAt", job->finished_at}};
             if (job->state == JobState::done) {
               body["output"] = job->output;
               body["structured"] = json::parse(job->structured);
             } else if (job->state == JobState::failed) {
               body["error"] = job->error;
             }
             send(res, 200, body);
           }));

  http.Get(R"(/api/story/progress/([0-9a-f]+))",
           guarded([this](const httplib::Request& req, httplib::Response& res) {
             const std::string id = req.matches[1];
             if (!store_->job(id)) throw HttpError{404, "no job " + id};
             struct StreamState {
               std::size_t cursor = 0;
               bool started = false;
               bool subscribed = false;
             };
             auto state = std::make_shared<StreamState>();
             if (req.has_header("Last-Event-ID")) {
               try {
                 state->cursor = std::stoul(req.get_header_value("Last-Event-ID")) + 1;
               } catch (const std::exception&) {
                 throw HttpError{400, "malformed Last-Event-ID"};
               }
             }
             res.set_header("Cache-Control", "no-cache");
             res.set_chunked_content_provider(
                 "text/event-stream",
                 [this, id, state](std::size_t, httplib::DataSink& sink) {
                   auto write = [&](const std::string& chunk) { return sink.write(chunk.data(), chunk.size()); };
                   if (!state->started) {
                     state->started = true;
                     hub_.subscribe(id);
                     state->subscribed = true;
                     auto job = store_->job(id);
                     if (!job || terminal(job->state)) {
                       // Already over: one terminal event, no replay.
                       if (job) write(terminal_event(*job));
                       sink.done();
                       return true;
                     }
                     write(sse("snapshot", json{{"type", "snapshot"}, {"state", to_string(job->state)}}.dump()));
                   }
                   auto [events, closed] = hub_.poll(id, state->cursor, std::chrono::milliseconds(500));
                   for (const auto& e : events) {
                     if (!write(sse(e.type, e.data, state->cursor))) return false;
                     ++state->cursor;
                   }
                   if (closed) {
                     sink.done();
                     return true;
                   }
                   if (events.empty()) {
                     auto job = store_->job(id);
                     if (!job || terminal(job->state)) {
                       // The hub dropped the channel before we subscribed.
                       if (job) write(terminal_event(*job));
                       sink.done();
                       return true;
                     }
                     return write(": keepalive\n\n");
                   }
                   return true;
                 },
                 [this, id, state](bool) {
                   if (state->subscribed) hub_.unsubscribe(id);
                 });
           }));

  // Stories ---------------------------------------------------------------------

  http.Get("/api/stories", guarded([this, viewer](const httplib::Request& req, httplib::Response& res) {
             std::string scope = req.has_param("scope") ? req.get_param_value("scope") : "public";
             StoryScope s;
             if (scope == "mine") {
               s = StoryScope::mine;
             } else if (scope == "public") {
               s = StoryScope::public_;
             } else if (scope == "examples") {
               s = StoryScope::examples;
             } else {
               throw HttpError{400, "scope must be mine, public or examples"};
             }
             json out = json::array();
             for (const auto& story : store_->list_stories(s, viewer(req))) out.push_back(story_json(story));
             send(res, 200, {{"stories", out}});
           }));

  http.Post("/api/stories", guarded([this, require_user](const httplib::Request& req, httplib::Response& res) {
              std::string user = require_user(req);
              json body = body_of(req);
              auto story = store_->create_story(user, string_field(body, "title"), string_field(body, "story", false),
                                                string_field(body, "knowledge", false));
              send(res, 201, story_json(story));
            }));

  http.Get(R"(/api/stories/([0-9a-f]+))", guarded([this, viewer](const httplib::Request& req, httplib::Response& res) {
             send(res, 200, story_json(store_->story(req.matches[1], viewer(req))));
           }));

  http.Put(R"(/api/stories/([0-9a-f]+))",
           guarded([this, require_user](const httplib::Request& req, httplib::Response& res) {
             std::string user = require_user(req);
             json body = body_of(req);
             auto story = store_->update_story(req.matches[1], user, string_field(body, "title"),
                                               string_field(body, "story", false),
                                               string_field(body, "knowledge", false));
             send(res, 200, story_json(story));
           }));

  http.Post(R"(/api/stories/([0-9a-f]+)/share)",
            guarded([this, require_user](const httplib::Request& req, httplib::Response& res) {
              send(res, 200, story_json(store_->share_story(req.matches[1], require_user(req))));
            }));

  http.Get(R"(/api/stories/([0-9a-f]+)/comments)",
           guarded([this](const httplib::Request& req, httplib::Response& res) {
             json out = json::array();
             for (const auto& c : store_->comments(req.matches[1])) out.push_back(comment_json(c));
             send(res, 200, {{"comments", out}});
           }));

  http.Post(R"(/api/stories/([0-9a-f]+)/comments)",
            guarded([this, require_user](const httplib::Request& req, httplib::Response& res) {
              std::string user = require_user(req);
              json body = body_of(req);
              send(res, 201, comment_json(store_->add_comment(req.matches[1], user, string_field(body, "body"))));
            }));

  http.Post("/api/feedback", guarded([this](const httplib::Request& req, httplib::Response& res) {
              json body = body_of(req);
              std::string message = string_field(body, "message");
              std::string contact = string_field(body, "contact", false);
              std::string id = store_->add_feedback(message, contact);
              try {
                config_.on_feedback(id, message, contact);
              } catch (const std::exception& e) {
                spdlog::warn("feedback notification failed: {}", e.what());
              }
              send(res, 201, {{"id", id}});
            }));

  // Conversions -------------------------------------------------------------------

  http.Post("/api/convert/nl2star", guarded([this](const httplib::Request& req, httplib::Response& res) {
              json body = body_of(req);
              AnnotatedStory story;
              if (body.contains("annotations")) {
                try {
                  story = parse_annotated_story(body.at("annotations").dump());
                } catch (const AnnotationFormatError& e) {
                  throw HttpError{400, e.what()};
                }
              } else {
                std::string text = string_field(body, "text");
                if (!config_.annotator_url) throw HttpError{503, "no annotator is configured"};
                try {
                  story = fetch_annotations(text, {*config_.annotator_url, config_.annotator_timeout});
                } catch (const AnnotatorError& e) {
                  int status = e.kind() == AnnotatorError::Kind::empty_input ? 400
                               : e.kind() == AnnotatorError::Kind::timeout   ? 504
                                                                              : 502;
                  throw HttpError{status, e.what(), {{"kind", to_string(e.kind())}, {"retryable", e.retryable()}}};
                }
              }
              try {
                auto result = convert(story);
                send(res, 200, {{"star", result.text}, {"trace", trace_json(result.trace)}});
              } catch (const ConversionError& e) {
                throw HttpError{422, e.what()};
              }
            }));

  http.Post("/api/convert/graph2star", guarded([](const httplib::Request& req, httplib::Response& res) {
              auto conversion = graph_to_star(graph_field(body_of(req)));
              json out{{"star", conversion.text}, {"diagnostics", guidance_json(conversion.diagnostics)}};
              send(res, conversion.ok() ? 200 : 422, out);
            }));

  http.Post("/api/convert/star2graph", guarded([](const httplib::Request& req, httplib::Response& res) {
              json body = body_of(req);
              std::string text = string_field(body, "knowledge", false);
              if (text.empty()) text = string_field(body, "domain");
              auto parsed = parse_domain(text);
              if (!parsed.ok()) {
                throw HttpError{400, "knowledge does not parse", {{"diagnostics", diagnostics_json(parsed.diagnostics)}}};
              }
              send(res, 200, {{"graph", json::parse(to_json(star_to_graph(*parsed.domain)))}});
            }));

  http.Post("/api/graph/validate", guarded([](const httplib::Request& req, httplib::Response& res) {
              auto diagnostics = validate(graph_field(body_of(req)));
              send(res, 200, {{"valid", diagnostics.empty()}, {"diagnostics", guidance_json(diagnostics)}});
            }));

  http.Post("/api/graph/export", guarded([](const httplib::Request& req, httplib::Response& res) {
              json body = body_of(req);
              auto format = parse_export_format(string_field(body, "format"));
              if (!format) throw HttpError{400, "format must be json, graphml or manifest"};
              auto graph = graph_field(body);
              try {
                res.set_content(export_graph(graph, *format),
                                *format == ExportFormat::graphml ? "application/graphml+xml" : "application/json");
              } catch (const GraphError& e) {
                throw HttpError{422, e.what(), {{"diagnostics", guidance_json(validate(graph))}}};
              }
            }));
}

}  // namespace star::service
