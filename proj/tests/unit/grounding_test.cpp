#include <doctest.h>

#include <algorithm>

#include "star/grounding.hpp"
#include "star/parser.hpp"
#include "../support/files.hpp"

using namespace star;

namespace {

Domain domain_of(const std::string& text) {
  auto r = parse_domain(text);
  REQUIRE_MESSAGE(r.ok(), (r.diagnostics.empty() ? std::string() : to_string(r.diagnostics.front())));
  return *r.domain;
}

std::size_t count_label(const Grounding& g, RuleLabel label) {
  return static_cast<std::size_t>(std::count_if(g.instances.begin(), g.instances.end(), [&](const auto& i) {
    return i.origin == OriginKind::rule && i.label == label;
  }));
}

}  // namespace

TEST_SUITE("grounding") {

TEST_CASE("universe grows with the sessions read") {
  Domain d = domain_of(testing::read_file("data/examples/phone.star"));
  auto g1 = ground(d, 1);
  auto g3 = ground(d, 3);
  CHECK(g1.constants == std::set<std::string>{"bob", "favor1", "mary", "phone1"});
  CHECK(g1.horizon == 10);
  CHECK(g3.horizon == 20);
  CHECK(ground(d, 2).horizon == 14);
  CHECK(g3.constant_types.count("is_person/1"));
  CHECK(g3.fluent_signatures.size() == 6);
}

TEST_CASE("typing literals restrict substitutions") {
  Domain d = domain_of(testing::read_file("data/examples/phone.star"));
  auto g = ground(d, 1);
  // c(41): P1, P2 over persons (2 x 2), D over phones (1), at 10 causal time-points.
  CHECK(count_label(g, {RuleKind::causal, 41}) == 4 * 10);
  // c(01) has no typing literal: 4 constants for each of 3 variables.
  CHECK(count_label(g, {RuleKind::causal, 1}) == 64 * 10);
  // p(11): property instances run over 0..horizon.
  CHECK(count_label(g, {RuleKind::property, 11}) == 64 * 11);
}

TEST_CASE("causal heads follow their body by one step, property heads share it") {
  Domain d = domain_of(testing::read_file("data/examples/phone.star"));
  auto g = ground(d, 2);
  for (const auto& inst : g.instances) {
    for (const auto& b : inst.body) {
      if (inst.is_property()) {
        CHECK(b.time == inst.head.time);
      } else {
        CHECK(b.time + 1 == inst.head.time);
      }
    }
  }
}

TEST_CASE("persistence covers each fluent atom in both polarities") {
  Domain d = domain_of("session(s(0),[],all).\nsession(s(1),[],all).\ns(1) :: on at 3.\nfluents([on]).\n");
  auto g = ground(d, 1);
  CHECK(g.horizon == 3);
  CHECK(g.instances.size() == 2 * 3);
  for (const auto& inst : g.instances) {
    CHECK(inst.is_persistence());
    CHECK(inst.body.front().negative == inst.head.negative);
  }
}

TEST_CASE("always statements hold at every time-point") {
  Domain d = domain_of(
      "session(s(0),[],all).\nsession(s(1),[],all).\ns(0) :: is_person(bob) at always.\ns(1) :: a(bob) at 5.\n");
  auto g = ground(d, 1);
  CHECK(g.premises.size() == 6 + 1);
}

TEST_CASE("horizon override and caps") {
  Domain d = domain_of(testing::read_file("data/examples/phone.star"));
  CHECK(ground(d, 3, {.horizon = 30}).horizon == 30);
  CHECK_THROWS_AS(ground(d, 3, {.horizon = {}, .instance_cap = 1000}), GroundingError);
  CHECK_THROWS_AS(ground(d, 9), std::invalid_argument);
  CHECK(max_time_point(d) == 20);
  CHECK(default_horizon(d, 0) == 0);
}

TEST_CASE("instance text") {
  Domain d = domain_of(testing::read_file("data/examples/phone.star"));
  auto g = ground(d, 1);
  auto it = std::find_if(g.instances.begin(), g.instances.end(), [](const auto& i) { return i.is_persistence(); });
  REQUIRE(it != g.instances.end());
  CHECK(to_text(*it, g.atoms).rfind("persist@", 0) == 0);
}

}  // TEST_SUITE
