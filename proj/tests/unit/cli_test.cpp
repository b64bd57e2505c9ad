#include <doctest.h>

#include <sstream>

#include <nlohmann/json.hpp>

#include "../../tools/cli.hpp"
#include "../support/files.hpp"

using namespace star;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run star_cli(std::vector<std::string> args, const std::string& stdin_text = "") {
  args.insert(args.begin(), "star");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::istringstream in(stdin_text);
  std::ostringstream out, err;
  Run r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), in, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

const std::string phone = testing::source_path("data/examples/phone.star");

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("read prints the session by session output") {
  auto r = star_cli({"read", phone});
  REQUIRE(r.code == cli::ok);
  CHECK(r.out.find("+ accepted choice: ,[is_embarrassed(mary)at 20]") != std::string::npos);
  CHECK(r.out.find(">>> Finished reading the story!") != std::string::npos);
  // stdin gives the same result.
  CHECK(star_cli({"read", "-"}, testing::read_file("data/examples/phone.star")).out == r.out);
}

TEST_CASE("read in structured form") {
  auto r = star_cli({"read", phone, "--format", "structured", "--qualified"});
  REQUIRE(r.code == cli::ok);
  auto doc = nlohmann::json::parse(r.out);
  CHECK(doc.at("sessions").size() == 3);
}

TEST_CASE("read exit codes") {
  CHECK(star_cli({"read", "/nonexistent/story.star"}).code == cli::io);
  CHECK(star_cli({"read", phone, "--horizon", "3"}).code == cli::usage);
  CHECK(star_cli({"read", phone, "--filter", "sideways"}).code == cli::usage);
  CHECK(star_cli({"read", phone, "--format", "xml"}).code == cli::usage);
  auto bad = star_cli({"read", "-"}, "session(s(0),[],all).\nbogus\n");
  CHECK(bad.code == cli::invalid);
  CHECK(bad.err.find("-:") == 0);
  CHECK(star_cli({}).code == cli::usage);
  CHECK(star_cli({"sing"}).code == cli::usage);
  CHECK(star_cli({"--help"}).code == cli::ok);
}

TEST_CASE("read with a longer horizon") {
  auto r = star_cli({"read", phone, "--horizon", "24"});
  REQUIRE(r.code == cli::ok);
  CHECK(r.out.find("\n24:") != std::string::npos);
}

TEST_CASE("nl2star") {
  auto r = star_cli({"nl2star", testing::source_path("tests/fixtures/phone_story.annotated.json"), "--trace"});
  REQUIRE(r.code == cli::ok);
  CHECK(testing::squeeze_whitespace(r.out) ==
        testing::squeeze_whitespace(testing::read_file("tests/fixtures/phone_story.expected.star")));
  CHECK(r.err.find("sentence 0 [statement, s(1), t=6]: call(bob,mary,phone1)") != std::string::npos);

  CHECK(star_cli({"nl2star", "-"}, "{\"blocks\": 3}").code == cli::invalid);
  CHECK(star_cli({"nl2star", "-", "--annotator", "http://127.0.0.1:1", "--timeout-ms", "500"}, "Bob called.").code ==
        cli::annotator);
}

TEST_CASE("graph") {
  auto json_out = star_cli({"graph", phone});
  REQUIRE(json_out.code == cli::ok);
  auto star_out = star_cli({"graph", "-", "--to", "star"}, json_out.out);
  REQUIRE(star_out.code == cli::ok);
  CHECK(star_out.out.find("c(42) >> c(41).") != std::string::npos);
  CHECK(star_cli({"graph", phone, "--validate"}).code == cli::ok);
  CHECK(star_cli({"graph", phone, "--to", "graphml"}).out.find("<graphml") != std::string::npos);

  auto broken = nlohmann::json::parse(json_out.out);
  broken["edges"].erase(broken["edges"].begin());
  auto r = star_cli({"graph", "-", "--validate"}, broken.dump());
  CHECK(r.code == cli::invalid);
  CHECK_FALSE(r.err.empty());
  CHECK(star_cli({"graph", "-"}, "{\"nodes\": 1").code == cli::invalid);
}

}  // TEST_SUITE
