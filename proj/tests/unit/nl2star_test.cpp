#include <doctest.h>

#include <atomic>
#include <chrono>
#include <thread>

#include <httplib.h>

#include "star/annotations.hpp"
#include "star/nl2star.hpp"
#include "star/parser.hpp"
#include "../support/files.hpp"

using namespace star;

namespace {

AnnotatedStory phone_story() { return parse_annotated_story(testing::read_file("tests/fixtures/phone_story.annotated.json")); }

Token tok(std::string word, std::string lemma, std::string pos, std::string ner = "none") {
  return {std::move(word), std::move(lemma), std::move(pos), std::move(ner)};
}

// "Bob never called Mary."
Sentence never_called() {
  Sentence s;
  s.tokens = {tok("Bob", "Bob", "NNP", "person"), tok("never", "never", "RB"), tok("called", "call", "VBD"),
              tok("Mary", "Mary", "NNP", "person"), tok(".", ".", ".")};
  s.deps = {{"ROOT", 0, 3}, {"nsubj", 3, 1}, {"advmod", 3, 2}, {"dobj", 3, 4}, {"punct", 3, 5}};
  return s;
}

// "<det> phone rang."
Sentence phone_rang(const std::string& det) {
  Sentence s;
  s.tokens = {tok(det, det == "A" ? "a" : "the", "DT"), tok("phone", "phone", "NN"), tok("rang", "ring", "VBD"),
              tok(".", ".", ".")};
  s.deps = {{"ROOT", 0, 3}, {"det", 2, 1}, {"nsubj", 3, 2}, {"punct", 3, 4}};
  return s;
}

// "Did the phone ring?"
Sentence did_ring() {
  Sentence s;
  s.tokens = {tok("Did", "do", "VBD"), tok("the", "the", "DT"), tok("phone", "phone", "NN"), tok("ring", "ring", "VB"),
              tok("?", "?", ".")};
  s.deps = {{"ROOT", 0, 4}, {"aux", 4, 1}, {"det", 3, 2}, {"nsubj", 4, 3}, {"punct", 4, 5}};
  return s;
}

class MockAnnotator {
 public:
  explicit MockAnnotator(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
    server_.Post(".*", [handler](const httplib::Request& req, httplib::Response& res) { handler(req, res); });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MockAnnotator() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

AnnotatorError::Kind fetch_failure(const std::string& text, const AnnotatorEndpoint& endpoint) {
  try {
    fetch_annotations(text, endpoint);
  } catch (const AnnotatorError& e) {
    return e.kind();
  }
  FAIL("fetch_annotations did not fail");
  return AnnotatorError::Kind::malformed;
}

}  // namespace

TEST_SUITE("nl2star") {

TEST_CASE("the phone story annotations convert to the expected STAR story") {
  auto result = convert(phone_story());
  CHECK(testing::squeeze_whitespace(result.text) ==
        testing::squeeze_whitespace(testing::read_file("tests/fixtures/phone_story.expected.star")));
  CHECK(result.domain.sessions().size() == 4);
  CHECK(result.domain.questions().size() == 4);
  // The converted text is itself a valid domain.
  auto reparsed = parse_domain(result.text);
  REQUIRE(reparsed.ok());
  CHECK(format_domain(*reparsed.domain) == result.text);
}

TEST_CASE("server responses map onto the same annotated story") {
  auto from_server = from_corenlp_json(testing::read_file("tests/fixtures/phone_story.corenlp.json"));
  CHECK(from_server == phone_story());
  CHECK(parse_annotated_story(to_json(from_server)) == from_server);
}

TEST_CASE("session segmentation") {
  auto plans = segment_sessions(phone_story());
  REQUIRE(plans.size() == 3);
  CHECK(plans[0].statements == std::vector<int>{0});
  CHECK(plans[0].questions == std::vector<int>{1, 2});
  CHECK(plans[1].statements == std::vector<int>{3, 4, 5});
  CHECK(plans[2].questions == std::vector<int>{9});

  CHECK_THROWS_AS(segment_sessions(AnnotatedStory{}), ConversionError);
  AnnotatedStory opens_with_question{{{BlockKind::question, {did_ring()}}, {BlockKind::statement, {phone_rang("A")}}}};
  CHECK_THROWS_AS(segment_sessions(opens_with_question), ConversionError);

  // A trailing statement block forms a session without questions.
  AnnotatedStory trailing{{{BlockKind::statement, {phone_rang("A")}},
                           {BlockKind::question, {did_ring()}},
                           {BlockKind::statement, {phone_rang("The")}}}};
  auto trailing_plans = segment_sessions(trailing);
  REQUIRE(trailing_plans.size() == 2);
  CHECK(trailing_plans[1].questions.empty());
}

TEST_CASE("past perfect sentences move to the background") {
  auto story = phone_story();
  std::vector<const Sentence*> all;
  for (const auto& b : story.blocks) {
    for (const auto& s : b.sentences) all.push_back(&s);
  }
  CHECK_FALSE(is_past_perfect(*all[0]));
  CHECK(is_past_perfect(*all[4]));
  CHECK(is_past_perfect(*all[5]));

  auto result = convert(story);
  // Background events take the earliest time-points, before the first event.
  CHECK(result.trace.sentences[4].time == 2);
  CHECK(result.trace.sentences[5].time == 4);
  CHECK(result.trace.sentences[0].time == 6);
}

TEST_CASE("negation by adverb") {
  AnnotatedStory story{{{BlockKind::statement, {never_called()}}}};
  auto result = convert(story);
  REQUIRE(result.trace.sentences.size() == 1);
  REQUIRE(result.trace.sentences[0].literal);
  CHECK(canonical_text(*result.trace.sentences[0].literal) == "-call(bob,mary)");
}

TEST_CASE("indefinite nouns introduce new constants, definite ones reuse them") {
  AnnotatedStory story{{{BlockKind::statement, {phone_rang("A"), phone_rang("The"), phone_rang("A")}}}};
  auto result = convert(story);
  std::vector<std::string> literals;
  for (const auto& e : result.trace.sentences) literals.push_back(canonical_text(*e.literal));
  CHECK(literals == std::vector<std::string>{"ring(phone1)", "ring(phone1)", "ring(phone2)"});

  EntityTable entities(story);
  CHECK(entities.constant(0, 2) == "phone1");
  CHECK(entities.constant(2, 2) == "phone2");
  std::vector<std::string> typing;
  for (const auto& a : entities.typing()) typing.push_back(canonical_text(a));
  CHECK(typing == std::vector<std::string>{"is_phone(phone1)", "is_phone(phone2)"});
}

TEST_CASE("trace lines explain each sentence") {
  auto result = convert(phone_story());
  REQUIRE(result.trace.sentences.size() == 10);
  CHECK(to_string(result.trace.sentences[3]) ==
        "sentence 3 [statement, s(2), t=12]: -do_want(mary,answer(phone1)) <- aux neg nsubj xcomp");
  CHECK(to_string(result.trace.sentences[9]) == "sentence 9 [question, s(3), t=20]: is_embarrassed(mary) <- cop nsubj");
}

TEST_CASE("malformed annotation documents are rejected") {
  CHECK_THROWS_AS(parse_annotated_story("not json"), AnnotationFormatError);
  CHECK_THROWS_AS(parse_annotated_story(R"({"blocks":[{"kind":"aside","sentences":[]}]})"), AnnotationFormatError);
  CHECK_THROWS_AS(parse_annotated_story(R"({"blocks":[{"kind":"statement","sentences":[{"deps":[]}]}]})"),
                  AnnotationFormatError);
  // A dependency pointing past the last token.
  AnnotatedStory bad{{{BlockKind::statement, {phone_rang("A")}}}};
  bad.blocks[0].sentences[0].deps.push_back({"dep", 3, 9});
  CHECK_THROWS_AS(parse_annotated_story(to_json(bad)), AnnotationFormatError);
}

TEST_CASE("annotation server client") {
  const std::string response = testing::read_file("tests/fixtures/phone_story.corenlp.json");

  SUBCASE("a successful request") {
    std::string seen_body, seen_query;
    MockAnnotator server([&](const httplib::Request& req, httplib::Response& res) {
      seen_body = req.body;
      seen_query = req.get_param_value("properties");
      res.set_content(response, "application/json");
    });
    auto story = fetch_annotations(testing::read_file("tests/fixtures/phone_story.txt"), {server.url(), std::chrono::seconds(5)});
    CHECK(story == phone_story());
    CHECK(seen_body == testing::read_file("tests/fixtures/phone_story.txt"));
    CHECK(seen_query.find("depparse") != std::string::npos);
  }

  SUBCASE("empty input never reaches the server") {
    std::atomic<int> calls{0};
    MockAnnotator server([&](const httplib::Request&, httplib::Response& res) {
      ++calls;
      res.set_content(response, "application/json");
    });
    CHECK(fetch_failure("  \n", {server.url(), std::chrono::seconds(5)}) == AnnotatorError::Kind::empty_input);
    CHECK(calls == 0);
  }

  SUBCASE("server errors") {
    MockAnnotator server([](const httplib::Request&, httplib::Response& res) {
      res.status = 500;
      res.set_content("boom", "text/plain");
    });
    CHECK(fetch_failure("Bob called.", {server.url(), std::chrono::seconds(5)}) == AnnotatorError::Kind::http_status);
  }

  SUBCASE("malformed responses") {
    MockAnnotator server([](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"sentences":"nope"})", "application/json");
    });
    const auto kind = fetch_failure("Bob called.", {server.url(), std::chrono::seconds(5)});
    CHECK(kind == AnnotatorError::Kind::malformed);
    CHECK_FALSE(AnnotatorError(kind, "").retryable());
  }

  SUBCASE("timeouts") {
    MockAnnotator server([&](const httplib::Request&, httplib::Response& res) {
      std::this_thread::sleep_for(std::chrono::milliseconds(1500));
      res.set_content(response, "application/json");
    });
    const auto start = std::chrono::steady_clock::now();
    const auto kind = fetch_failure("Bob called.", {server.url(), std::chrono::milliseconds(300)});
    CHECK(kind == AnnotatorError::Kind::timeout);
    CHECK(AnnotatorError(kind, "").retryable());
    CHECK(std::chrono::steady_clock::now() - start < std::chrono::milliseconds(1400));
  }

  SUBCASE("nothing listening") {
    // A bound socket that never listens refuses connections.
    const int sock = ::socket(AF_INET, SOCK_STREAM, 0);
    REQUIRE(sock >= 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    REQUIRE(::bind(sock, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0);
    socklen_t len = sizeof(addr);
    REQUIRE(::getsockname(sock, reinterpret_cast<sockaddr*>(&addr), &len) == 0);
    const int port = ntohs(addr.sin_port);
    const auto kind = fetch_failure("Bob called.", {"http://127.0.0.1:" + std::to_string(port), std::chrono::seconds(2)});
    ::close(sock);
    CHECK(kind == AnnotatorError::Kind::network);
  }
}

}  // TEST_SUITE
