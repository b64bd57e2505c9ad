#include <doctest.h>

#include <filesystem>
#include <set>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "star/kb_graph.hpp"
#include "star/parser.hpp"
#include "star/service/jobs.hpp"
#include "star/service/server.hpp"
#include "star/service/store.hpp"
#include "../../tools/cli.hpp"
#include "../support/files.hpp"

using namespace star;
using namespace star::service;
using nlohmann::json;

namespace {

const char* const kTiny =
    "session(s(0),[],all).\n"
    "session(s(1),[q(1)],all).\n"
    "s(1) :: a(x) at 1.\n"
    "q(1) ?? b(x) at 2.\n"
    "fluents([b(_)]).\n"
    "c(01) :: a(X) causes b(X).\n";

StoreError::Code store_error(const std::function<void()>& f) {
  try {
    f();
  } catch (const StoreError& e) {
    return e.code();
  }
  FAIL("no StoreError");
  return StoreError::Code::internal;
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() / ("star-test-" + random_id());
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

ServiceConfig test_config() {
  ServiceConfig c;
  c.port = 0;
  c.database = ":memory:";
  c.hash_cost = HashCost::minimal;
  c.queue.workers = 2;
  return c;
}

std::string cli_output(const std::string& path) {
  std::istringstream in;
  std::ostringstream out, err;
  const char* argv[] = {"star", "read", path.c_str()};
  REQUIRE(cli::run(3, argv, in, out, err) == 0);
  return out.str();
}

json wait_for_result(httplib::Client& client, const std::string& id) {
  for (int i = 0; i < 500; ++i) {
    auto res = client.Get("/api/story/results/" + id);
    REQUIRE(res);
    auto body = json::parse(res->body);
    if (body.at("state") == "done" || body.at("state") == "failed") return body;
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  FAIL("job did not finish");
  return {};
}

struct SseEvent {
  std::string id;
  std::string type;
  json data;
};

std::vector<SseEvent> parse_sse(const std::string& stream) {
  std::vector<SseEvent> out;
  std::size_t pos = 0;
  while (pos < stream.size()) {
    auto end = stream.find("\n\n", pos);
    if (end == std::string::npos) break;
    std::istringstream block(stream.substr(pos, end - pos));
    pos = end + 2;
    SseEvent e;
    std::string line;
    bool any = false;
    while (std::getline(block, line)) {
      if (line.starts_with("id: ")) e.id = line.substr(4);
      if (line.starts_with("event: ")) e.type = line.substr(7), any = true;
      if (line.starts_with("data: ")) e.data = json::parse(line.substr(6));
    }
    if (any) out.push_back(std::move(e));
  }
  return out;
}

std::size_t count_type(const std::vector<SseEvent>& events, const std::string& type) {
  return std::count_if(events.begin(), events.end(), [&](const SseEvent& e) { return e.type == type; });
}

}  // namespace

TEST_SUITE("store") {

TEST_CASE("migrations run once and data survives reopening") {
  TempDir dir;
  const std::string path = (dir.path / "star.db").string();
  std::string user;
  {
    Store store(path, HashCost::minimal);
    CHECK(store.schema_version() == Store::latest_schema_version());
    user = store.create_user("ann", "correct horse");
  }
  Store again(path, HashCost::minimal);
  CHECK(again.schema_version() == Store::latest_schema_version());
  CHECK(again.authenticate("ann", "correct horse") == std::optional<std::string>(user));
}

TEST_CASE("a job is claimed and finished once") {
  Store store(":memory:", HashCost::minimal);
  JobRecord job{random_id(), kTiny, "{}"};
  job.submitted_at = now_ms();
  store.insert_job(job);
  CHECK(store.queued_jobs() == std::vector<std::string>{job.id});
  CHECK(store.claim_job(job.id, "first"));
  CHECK_FALSE(store.claim_job(job.id, "second"));
  CHECK(store.job(job.id)->state == JobState::running);
  CHECK_FALSE(store.finish_job(job.id, "second", true, "x", "{}", ""));
  CHECK(store.finish_job(job.id, "first", true, "out", "{}", ""));
  CHECK_FALSE(store.finish_job(job.id, "first", true, "again", "{}", ""));
  auto done = store.job(job.id);
  CHECK(done->state == JobState::done);
  CHECK(done->output == "out");
  CHECK(done->finished_at >= done->started_at);
  CHECK_FALSE(store.job("0123"));
}

TEST_CASE("interrupted jobs are requeued and old ones purged") {
  Store store(":memory:", HashCost::minimal);
  JobRecord a{random_id(), kTiny, "{}"}, b{random_id(), kTiny, "{}"};
  a.submitted_at = now_ms();
  b.submitted_at = a.submitted_at + 1;
  store.insert_job(a);
  store.insert_job(b);
  REQUIRE(store.claim_job(a.id, "t"));
  CHECK(store.requeue_running() == 1);
  CHECK(store.job(a.id)->state == JobState::queued);
  CHECK(store.queued_jobs() == std::vector<std::string>{a.id, b.id});

  REQUIRE(store.claim_job(a.id, "t2"));
  REQUIRE(store.finish_job(a.id, "t2", false, "", "", "boom"));
  CHECK(store.purge_jobs(now_ms() - 60'000) == 0);
  CHECK(store.purge_jobs(now_ms() + 1000) == 1);
  CHECK_FALSE(store.job(a.id));
  CHECK(store.job(b.id));  // queued jobs are never purged
}

TEST_CASE("accounts") {
  Store store(":memory:", HashCost::minimal);
  auto id = store.create_user("bob", "password1");
  CHECK(store_error([&] { store.create_user("bob", "password2"); }) == StoreError::Code::conflict);
  CHECK(store_error([&] { store.create_user("carol", "short"); }) == StoreError::Code::invalid);
  CHECK(store_error([&] { store.create_user("", "password1"); }) == StoreError::Code::invalid);
  CHECK_FALSE(store.authenticate("bob", "password2"));
  CHECK_FALSE(store.authenticate("nobody", "password1"));
  auto token = store.issue_token(id);
  CHECK(token.size() == 64);
  CHECK(store.user_for_token(token) == std::optional<std::string>(id));
  CHECK_FALSE(store.user_for_token("feed"));
  CHECK(store.user_name(id) == std::optional<std::string>("bob"));
}

TEST_CASE("story visibility and comments") {
  Store store(":memory:", HashCost::minimal);
  auto owner = store.create_user("owner", "password1");
  auto other = store.create_user("other", "password1");
  auto s = store.create_story(owner, "phone", "story", "knowledge");
  CHECK(s.visibility == Visibility::private_);

  CHECK(store.story(s.id, owner).title == "phone");
  CHECK(store_error([&] { store.story(s.id, other); }) == StoreError::Code::forbidden);
  CHECK(store_error([&] { store.story(s.id, ""); }) == StoreError::Code::forbidden);
  CHECK(store_error([&] { store.story("abcdef", owner); }) == StoreError::Code::not_found);
  CHECK(store_error([&] { store.update_story(s.id, other, "x", "", ""); }) == StoreError::Code::forbidden);
  CHECK(store_error([&] { store.add_comment(s.id, other, "hi"); }) == StoreError::Code::forbidden);
  CHECK(store_error([&] { store.share_story(s.id, other); }) == StoreError::Code::forbidden);
  CHECK(store_error([&] { store.create_story("", "t", "", ""); }) == StoreError::Code::forbidden);

  auto updated = store.update_story(s.id, owner, "phone call", "story 2", "knowledge");
  CHECK(updated.story_text == "story 2");
  CHECK(store.share_story(s.id, owner).visibility == Visibility::public_);
  CHECK(store.story(s.id, "").title == "phone call");
  CHECK(store.list_stories(StoryScope::public_, "").size() == 1);
  CHECK(store.list_stories(StoryScope::mine, owner).size() == 1);
  CHECK(store.list_stories(StoryScope::mine, other).empty());

  CHECK(store_error([&] { store.add_comment(s.id, "", "anonymous"); }) == StoreError::Code::forbidden);
  CHECK(store_error([&] { store.add_comment(s.id, other, ""); }) == StoreError::Code::invalid);
  auto c = store.add_comment(s.id, other, "nice story");
  auto listed = store.comments(s.id);
  REQUIRE(listed.size() == 1);
  CHECK(listed[0].id == c.id);
  CHECK(listed[0].author_name == "other");

  store.upsert_example("phone", "s", "k");
  store.upsert_example("phone", "s2", "k2");
  auto examples = store.list_stories(StoryScope::examples, "");
  REQUIRE(examples.size() == 1);
  CHECK(examples[0].story_text == "s2");
  CHECK(examples[0].example);

  store.add_feedback("works", "");
  CHECK(store.feedback_count() == 1);
}

}  // TEST_SUITE

TEST_SUITE("service") {

TEST_CASE("reading options round trip through JSON") {
  ReaderOptions o;
  o.universal = o.qualified = true;
  o.horizon = 30;
  o.filter.no_actions = true;
  o.filter.min_frequency = 2;
  auto back = options_from_json(options_to_json(o));
  CHECK(options_to_json(back) == options_to_json(o));
  CHECK_THROWS_AS(options_from_json(R"({"filter":["sideways"]})"), std::invalid_argument);
  CHECK_THROWS_AS(options_from_json("[]"), std::invalid_argument);
}

TEST_CASE("the progress hub replays events to late readers") {
  ProgressHub hub;
  hub.subscribe("j");
  hub.publish("j", {"a", "{}", false});
  hub.publish("j", {"b", "{}", true});
  hub.publish("j", {"c", "{}", false});  // after the terminal event: dropped
  auto [events, closed] = hub.poll("j", 0, std::chrono::milliseconds(0));
  CHECK(events.size() == 2);
  CHECK(closed);
  auto [rest, _] = hub.poll("j", 1, std::chrono::milliseconds(0));
  CHECK(rest.size() == 1);
  hub.unsubscribe("j");
  CHECK(hub.subscribers("j") == 0);
  CHECK(hub.poll("j", 0, std::chrono::milliseconds(0)).first.empty());
}

TEST_CASE("every queued job runs exactly once") {
  Store store(":memory:", HashCost::minimal);
  ProgressHub hub;
  JobQueue queue(store, hub, {4, 256, std::chrono::hours(1)});
  std::vector<std::string> ids;
  for (int i = 0; i < 24; ++i) ids.push_back(queue.submit(kTiny, {}));
  queue.start();
  for (int i = 0; i < 500 && queue.executions() < ids.size(); ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  for (int i = 0; i < 500; ++i) {
    if (std::all_of(ids.begin(), ids.end(), [&](const auto& id) { return store.job(id)->state == JobState::done; })) {
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  queue.stop();
  CHECK(queue.executions() == ids.size());
  const std::string expected = run_reading(kTiny, {}).text;
  for (const auto& id : ids) {
    auto job = store.job(id);
    REQUIRE(job->state == JobState::done);
    CHECK(job->output == expected);
  }
}

TEST_CASE("submission checks the domain and the capacity") {
  Store store(":memory:", HashCost::minimal);
  ProgressHub hub;
  JobQueue queue(store, hub, {1, 2, std::chrono::hours(1)});
  CHECK_THROWS_AS(queue.submit("session(", {}), DomainRejected);
  ReaderOptions early;
  early.horizon = 1;
  CHECK_THROWS_AS(queue.submit(kTiny, early), std::invalid_argument);
  queue.submit(kTiny, {});
  queue.submit(kTiny, {});
  CHECK_THROWS_AS(queue.submit(kTiny, {}), QueueFull);
  CHECK(queue.pending() == 2);
}

TEST_CASE("a job restarted after a crash is executed once") {
  Store store(":memory:", HashCost::minimal);
  ProgressHub hub;
  JobRecord job{random_id(), kTiny, "{}"};
  job.submitted_at = now_ms();
  store.insert_job(job);
  REQUIRE(store.claim_job(job.id, "crashed-worker"));
  JobQueue queue(store, hub, {2, 8, std::chrono::hours(1)});
  queue.start();
  for (int i = 0; i < 500 && store.job(job.id)->state != JobState::done; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  queue.stop();
  CHECK(store.job(job.id)->state == JobState::done);
  CHECK(queue.executions() == 1);
}

TEST_CASE("HTTP reading jobs match the command line") {
  auto config = test_config();
  config.start_workers = false;
  Server server(config);
  const int port = server.start();
  httplib::Client client("127.0.0.1", port);
  client.set_read_timeout(30, 0);

  const std::string domain = testing::read_file("data/examples/phone.star");
  auto res = client.Post("/api/story/queue", json{{"domain", domain}}.dump(), "application/json");
  REQUIRE(res);
  REQUIRE(res->status == 202);
  const std::string id = json::parse(res->body).at("id");

  // Subscribe before any worker runs so the whole stream is seen.
  std::string stream;
  std::thread reader([&] {
    httplib::Client sse("127.0.0.1", port);
    sse.set_read_timeout(30, 0);
    sse.Get("/api/story/progress/" + id, [&](const char* data, std::size_t n) {
      stream.append(data, n);
      return true;
    });
  });
  for (int i = 0; i < 500 && server.hub().subscribers(id) == 0; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  REQUIRE(server.hub().subscribers(id) == 1);
  server.start_workers();
  reader.join();

  auto events = parse_sse(stream);
  REQUIRE(events.size() >= 3);
  CHECK(events.front().type == "snapshot");
  CHECK(events.back().type == "done");
  CHECK(count_type(events, "session_started") == 3);
  CHECK(count_type(events, "answers_ready") == 3);
  for (std::size_t i = 1; i < events.size(); ++i) CHECK(events[i].id == std::to_string(i - 1));

  auto result = wait_for_result(client, id);
  CHECK(result.at("state") == "done");
  CHECK(result.at("output").get<std::string>() == cli_output(testing::source_path("data/examples/phone.star")));
  CHECK(result.at("structured").at("sessions").size() == 3);

  // A finished job streams just its terminal event.
  std::string late;
  client.Get("/api/story/progress/" + id, [&](const char* data, std::size_t n) {
    late.append(data, n);
    return true;
  });
  auto late_events = parse_sse(late);
  REQUIRE(late_events.size() == 1);
  CHECK(late_events[0].type == "done");

  CHECK(client.Get("/api/story/progress/ffff")->status == 404);
  server.stop();
}

TEST_CASE("HTTP error responses") {
  auto config = test_config();
  config.start_workers = false;
  config.queue.capacity = 1;
  Server server(config);
  httplib::Client client("127.0.0.1", server.start());

  auto health = client.Get("/api/health");
  REQUIRE(health);
  CHECK(json::parse(health->body).at("status") == "ok");

  auto bad = client.Post("/api/story/queue", json{{"domain", "session(s(0),[],all).\nbogus\n"}}.dump(),
                         "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 400);
  CHECK_FALSE(json::parse(bad->body).at("diagnostics").empty());

  CHECK(client.Post("/api/story/queue", "{nope", "application/json")->status == 400);
  CHECK(client.Post("/api/story/queue", json{{"domain", kTiny}, {"options", {{"filter", {"odd"}}}}}.dump(),
                    "application/json")
            ->status == 400);
  CHECK(client.Post("/api/story/queue", json{{"domain", kTiny}}.dump(), "application/json")->status == 202);
  auto full = client.Post("/api/story/queue", json{{"domain", kTiny}}.dump(), "application/json");
  CHECK(full->status == 503);
  CHECK(full->get_header_value("Retry-After") == "5");
  CHECK(client.Get("/api/story/results/abc123")->status == 404);

  CHECK(json::parse(health->body).at("schemaVersion") == Store::latest_schema_version());
  server.stop();
}

TEST_CASE("HTTP accounts, stories, comments and feedback") {
  auto config = test_config();
  std::vector<std::string> feedback;
  config.on_feedback = [&](const std::string&, const std::string& message, const std::string&) {
    feedback.push_back(message);
  };
  TempDir examples;
  std::filesystem::copy_file(testing::source_path("data/examples/phone.star"), examples.path / "phone.star");
  config.examples_dir = examples.path.string();
  Server server(config);
  httplib::Client client("127.0.0.1", server.start());

  auto listed = json::parse(client.Get("/api/stories?scope=examples")->body).at("stories");
  REQUIRE(listed.size() == 1);
  CHECK(listed[0].at("title") == "phone");
  // The example splits into a story part and a knowledge part that rejoin into the original domain.
  auto joined = parse_domain(listed[0].at("story").get<std::string>() + listed[0].at("knowledge").get<std::string>());
  REQUIRE(joined.ok());
  CHECK(format_domain(*joined.domain) ==
        format_domain(*parse_domain(testing::read_file("data/examples/phone.star")).domain));

  auto account = [&](const std::string& name) {
    CHECK(client.Post("/api/accounts", json{{"name", name}, {"password", "password1"}}.dump(), "application/json")
              ->status == 201);
    auto login = client.Post("/api/login", json{{"name", name}, {"password", "password1"}}.dump(), "application/json");
    REQUIRE(login->status == 200);
    return httplib::Headers{{"Authorization", "Bearer " + json::parse(login->body).at("token").get<std::string>()}};
  };
  auto ann = account("ann");
  auto ben = account("ben");
  CHECK(client.Post("/api/accounts", json{{"name", "ann"}, {"password", "password1"}}.dump(), "application/json")
            ->status == 409);
  CHECK(client.Post("/api/login", json{{"name", "ann"}, {"password", "wrong-one"}}.dump(), "application/json")
            ->status == 401);

  const std::string story_body = json{{"title", "mine"}, {"story", "s"}, {"knowledge", "k"}}.dump();
  CHECK(client.Post("/api/stories", story_body, "application/json")->status == 401);
  auto created = client.Post("/api/stories", ann, story_body, "application/json");
  REQUIRE(created->status == 201);
  const std::string sid = json::parse(created->body).at("id");

  CHECK(client.Get("/api/stories/" + sid, ben)->status == 403);
  CHECK(client.Get("/api/stories/" + sid, ann)->status == 200);
  CHECK(client.Get("/api/stories/" + sid, {{"Authorization", "Bearer nope"}})->status == 401);
  CHECK(client.Post("/api/stories/" + sid + "/comments", ben, json{{"body", "hi"}}.dump(), "application/json")
            ->status == 403);
  CHECK(client.Post("/api/stories/" + sid + "/share", ben, "", "application/json")->status == 403);
  CHECK(client.Post("/api/stories/" + sid + "/share", ann, "", "application/json")->status == 200);
  CHECK(client.Get("/api/stories/" + sid)->status == 200);
  CHECK(client.Post("/api/stories/" + sid + "/comments", ben, json{{"body", "hi"}}.dump(), "application/json")
            ->status == 201);
  auto comments = json::parse(client.Get("/api/stories/" + sid + "/comments")->body).at("comments");
  REQUIRE(comments.size() == 1);
  CHECK(comments[0].at("body") == "hi");
  CHECK(json::parse(client.Get("/api/stories?scope=mine", ann)->body).at("stories").size() == 1);
  CHECK(client.Get("/api/stories?scope=sideways")->status == 400);

  CHECK(client.Post("/api/feedback", json{{"message", "thanks"}}.dump(), "application/json")->status == 201);
  CHECK(feedback == std::vector<std::string>{"thanks"});
  CHECK(server.store().feedback_count() == 1);
  server.stop();
}

TEST_CASE("HTTP conversions") {
  Server server(test_config());
  httplib::Client client("127.0.0.1", server.start());

  auto annotations = json::parse(testing::read_file("tests/fixtures/phone_story.annotated.json"));
  auto nl = client.Post("/api/convert/nl2star", json{{"annotations", annotations}}.dump(), "application/json");
  REQUIRE(nl->status == 200);
  auto nl_body = json::parse(nl->body);
  CHECK(testing::squeeze_whitespace(nl_body.at("star")) ==
        testing::squeeze_whitespace(testing::read_file("tests/fixtures/phone_story.expected.star")));
  CHECK(nl_body.at("trace").size() == 10);
  CHECK(client.Post("/api/convert/nl2star", json{{"text", "Bob called Mary."}}.dump(), "application/json")->status ==
        503);

  const std::string phone = testing::read_file("data/examples/phone.star");
  auto s2g = client.Post("/api/convert/star2graph", json{{"domain", phone}}.dump(), "application/json");
  REQUIRE(s2g->status == 200);
  auto graph = json::parse(s2g->body).at("graph");
  auto g2s = client.Post("/api/convert/graph2star", json{{"graph", graph}}.dump(), "application/json");
  REQUIRE(g2s->status == 200);
  CHECK(json::parse(g2s->body).at("star") == graph_to_star(star_to_graph(*parse_domain(phone).domain)).text);

  auto valid = client.Post("/api/graph/validate", json{{"graph", graph}}.dump(), "application/json");
  CHECK(json::parse(valid->body).at("valid") == true);
  graph["edges"].erase(graph["edges"].begin());
  auto invalid = client.Post("/api/graph/validate", json{{"graph", graph}}.dump(), "application/json");
  CHECK(json::parse(invalid->body).at("valid") == false);
  CHECK(client.Post("/api/convert/graph2star", json{{"graph", graph}}.dump(), "application/json")->status == 422);
  CHECK(client.Post("/api/graph/export", json{{"graph", graph}, {"format", "json"}}.dump(), "application/json")
            ->status == 422);

  auto ok_graph = json::parse(s2g->body).at("graph");
  auto exported =
      client.Post("/api/graph/export", json{{"graph", ok_graph}, {"format", "graphml"}}.dump(), "application/json");
  REQUIRE(exported->status == 200);
  CHECK(exported->body.find("<graphml") != std::string::npos);
  CHECK(client.Post("/api/graph/export", json{{"graph", ok_graph}, {"format", "svg"}}.dump(), "application/json")
            ->status == 400);
  server.stop();
}

TEST_CASE("a taken port is reported") {
  auto config = test_config();
  Server first(config);
  config.port = first.start();
  Server second(config);
  CHECK_THROWS_AS(second.start(), BindError);
  first.stop();
}

}  // TEST_SUITE
