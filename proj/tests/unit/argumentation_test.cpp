#include <doctest.h>

#include <map>
#include <random>

#include "star/argumentation.hpp"
#include "star/parser.hpp"
#include "../support/files.hpp"
#include "../support/oracles.hpp"

using namespace star;

TEST_SUITE("argumentation") {

TEST_CASE("grounded extension matches naive iteration and enumeration") {
  std::mt19937 rng(7);
  for (int i = 0; i < 300; ++i) {
    auto g = testing::random_attack_graph(rng, 10);
    auto members = grounded_extension(g);
    auto bits = testing::to_bits(members);
    CHECK(bits == testing::grounded_by_iteration(g));
    CHECK(bits == testing::grounded_by_enumeration(g));
    CHECK(is_conflict_free(g, members));
    CHECK(defends_members(g, members));
    CHECK(std::is_sorted(members.begin(), members.end()));
  }
}

TEST_CASE("classic frameworks") {
  SUBCASE("chain a <- b <- c") {
    AttackGraph g{3, {{1, 0}, {2, 1}}};
    CHECK(grounded_extension(g) == std::vector<std::uint32_t>{0, 2});
  }
  SUBCASE("mutual attack leaves both out") {
    AttackGraph g{2, {{0, 1}, {1, 0}}};
    CHECK(grounded_extension(g).empty());
  }
  SUBCASE("self attack") {
    AttackGraph g{2, {{0, 0}, {0, 1}}};
    CHECK(grounded_extension(g).empty());
  }
  SUBCASE("unattacked") {
    AttackGraph g{3, {}};
    CHECK(grounded_extension(g).size() == 3);
  }
}

TEST_CASE("conflict-freeness and defence checks") {
  AttackGraph g{3, {{0, 1}, {1, 2}}};
  std::vector<std::uint32_t> bad{0, 1};
  CHECK_FALSE(is_conflict_free(g, bad));
  std::vector<std::uint32_t> undefended{2};
  CHECK_FALSE(defends_members(g, undefended));
  std::vector<std::uint32_t> good{0, 2};
  CHECK(defends_members(g, good));
}

TEST_CASE("arguments over the phone story") {
  auto d = *parse_domain(testing::read_file("data/examples/phone.star")).domain;
  auto g = ground(d, 1);
  auto set = build_arguments(g);
  REQUIRE_FALSE(set.arguments.empty());
  CHECK_FALSE(set.truncated);
  std::size_t premises = 0;
  for (const auto& a : set.arguments) {
    if (a.top.kind == StepKind::premise) ++premises;
    // Steps are sorted and unique.
    CHECK(std::is_sorted(a.steps.begin(), a.steps.end()));
    CHECK(std::adjacent_find(a.steps.begin(), a.steps.end()) == a.steps.end());
    // No conclusion repeats within one tree.
    std::set<std::uint64_t> seen;
    for (const auto& s : a.steps) CHECK(seen.insert(s.conclusion.key()).second);
  }
  CHECK(premises == g.premises.size());

  auto edges = attacks(g, set, d.priorities());
  for (const auto& e : edges) {
    // Premises are never attacked.
    CHECK(set.arguments[e.target].top.kind != StepKind::premise);
    const bool contradicts = e.attacking.conclusion == e.attacked.conclusion.contrary();
    const bool clips = e.attacked.kind == StepKind::backward && g.instances[e.attacked.index].is_persistence() &&
                       g.instances[e.attacked.index].head == e.attacking.conclusion.contrary();
    CHECK((contradicts || clips));
  }
  auto graph = AttackGraph::from(set.arguments.size(), edges);
  auto ext = grounded_extension(graph);
  CHECK(is_conflict_free(graph, ext));
  CHECK(defends_members(graph, ext));
}

TEST_CASE("caps produce warnings instead of failures") {
  auto d = *parse_domain(testing::read_file("data/examples/phone.star")).domain;
  auto g = ground(d, 3);
  auto set = build_arguments(g, {.depth_cap = 2, .argument_cap = 50});
  CHECK(set.truncated);
  CHECK_FALSE(set.warnings.empty());
  CHECK(set.arguments.size() <= 50);
}

TEST_CASE("declared priority beats the weaker rule, causal beats persistence") {
  auto d = *parse_domain(testing::read_file("data/examples/phone.star")).domain;
  auto g = ground(d, 3);
  Preference pref(g, d.priorities());
  ProofStep c41, c42, persist;
  for (std::uint32_t i = 0; i < g.instances.size(); ++i) {
    const auto& inst = g.instances[i];
    if (inst.is_persistence()) persist = {StepKind::forward, i, -1, inst.head};
    if (inst.is_causal() && inst.label.index == 41) c41 = {StepKind::forward, i, -1, inst.head};
    if (inst.is_causal() && inst.label.index == 42) c42 = {StepKind::forward, i, -1, inst.head};
  }
  CHECK(pref.less_preferred(c41, c42));
  CHECK_FALSE(pref.less_preferred(c42, c41));
  CHECK(pref.less_preferred(persist, c41));
  CHECK_FALSE(pref.less_preferred(c41, persist));
}

}  // TEST_SUITE

namespace {

// Small random narratives over a fixed vocabulary of events and fluents.
std::string random_narrative(std::mt19937& rng) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const char* events[] = {"x", "y", "z"};
  const char* fluents[] = {"a", "b", "c"};
  std::string text = "session(s(0),[],all).\nsession(s(1),[],all).\ns(1) :: tick at 10.\n";
  for (int k = pick(1, 4); k > 0; --k) {
    text += std::string("s(1) :: ") + (pick(0, 3) == 0 ? "-" : "") +
            (pick(0, 2) == 0 ? fluents[pick(0, 2)] : events[pick(0, 2)]) + " at " + std::to_string(pick(0, 9)) + ".\n";
  }
  text += "fluents([a, b, c]).\n";
  int rules = pick(1, 4);
  for (int r = 1; r <= rules; ++r) {
    bool causal = pick(0, 2) != 0;
    std::string body;
    for (int b = pick(1, 2); b > 0; --b) {
      if (!body.empty()) body += ", ";
      const char* pool = pick(0, 1) ? events[pick(0, 2)] : fluents[pick(0, 2)];
      body += std::string(pick(0, 3) == 0 ? "-" : "") + pool;
    }
    text += std::string(causal ? "c(" : "p(") + std::to_string(r) + ") :: " + body + (causal ? " causes " : " implies ") +
            (pick(0, 1) ? "-" : "") + fluents[pick(0, 2)] + ".\n";
  }
  if (rules >= 2 && pick(0, 1)) text += "c(1) >> c(2).\n";
  return text;
}

}  // namespace

TEST_SUITE("argumentation") {

TEST_CASE("step-level labelling agrees with the explicit attack graph") {
  std::mt19937 rng(99);
  int compared = 0;
  for (int i = 0; i < 150; ++i) {
    std::string text = random_narrative(rng);
    auto parsed = parse_domain(text);
    if (!parsed.ok()) continue;  // e.g. c(1) >> c(2) where p(2) was drawn
    auto g = ground(*parsed.domain, 1);
    auto set = build_arguments(g, {.depth_cap = {}, .argument_cap = 3000});
    auto fast = grounded_arguments(g, set, parsed.domain->priorities());
    auto edges = attacks(g, set, parsed.domain->priorities());
    auto graph = AttackGraph::from(set.arguments.size(), edges);
    CHECK_MESSAGE(fast.members == grounded_extension(graph), text);
    ++compared;
  }
  CHECK(compared > 100);
}

TEST_CASE("larger proofs of the same step are not kept") {
  auto d = *parse_domain(testing::read_file("data/examples/phone.star")).domain;
  auto g = ground(d, 3);
  auto set = build_arguments(g);
  std::map<ProofStep, std::vector<const Argument*>> by_top;
  for (const auto& a : set.arguments) by_top[a.top].push_back(&a);
  for (const auto& [top, group] : by_top) {
    for (auto* x : group) {
      for (auto* y : group) {
        if (x == y) continue;
        CHECK_FALSE(std::includes(y->steps.begin(), y->steps.end(), x->steps.begin(), x->steps.end()));
      }
    }
  }
}

}  // TEST_SUITE
