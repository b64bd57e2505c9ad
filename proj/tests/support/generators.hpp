// Random well-formed Domains for property tests.

#ifndef STAR_TESTS_GENERATORS_HPP
#define STAR_TESTS_GENERATORS_HPP

#include <algorithm>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "star/syntax.hpp"

namespace star::testing {

class DomainGenerator {
 public:
  explicit DomainGenerator(std::uint32_t seed) : rng_(seed) {}

  Domain next() {
    DomainParts parts;
    const int sessions = pick(1, 4);
    int question_id = 1;
    for (int s = 0; s < sessions; ++s) {
      SessionDecl decl{s, {}};
      if (s > 0) {
        for (int k = pick(0, 2); k > 0; --k) {
          Question q{question_id, {}};
          for (int c = pick(1, 3); c > 0; --c) q.choices.push_back({literal(true), pick(0, 30)});
          parts.questions.push_back(q);
          decl.questions.push_back(question_id++);
        }
      }
      parts.sessions.push_back(decl);
    }
    for (int k = pick(0, 4); k > 0; --k) {
      parts.statements.push_back({0, Literal(Atom(pick_of(types_), {Term::constant(pick_of(constants_))})),
                                  TimePoint::always()});
    }
    for (int k = pick(0, 8); k > 0 && sessions > 1; --k) {
      parts.statements.push_back({pick(1, sessions - 1), literal(true), TimePoint::at(pick(0, 40))});
    }
    std::set<std::pair<std::string, int>> fluents;
    for (int k = pick(0, 3); k > 0; --k) {
      auto name = pick_of(predicates_);
      int arity = pick(0, 3);
      if (fluents.insert({name, arity}).second) parts.fluents.push_back({name, arity});
    }
    std::set<RuleLabel> labels;
    for (int k = pick(0, 6); k > 0; --k) {
      RuleLabel label{coin() ? RuleKind::causal : RuleKind::property, pick(1, 120)};
      if (!labels.insert(label).second) continue;
      Rule r;
      r.label = label;
      if (pick(0, 5) == 0) {
        r.body = RuleBody::tautology();
      } else {
        std::vector<Literal> body;
        for (int b = pick(1, 4); b > 0; --b) body.push_back(literal(false));
        r.body = RuleBody::of(std::move(body));
      }
      r.head = literal(false);
      parts.rules.push_back(std::move(r));
    }
    std::vector<RuleLabel> all(labels.begin(), labels.end());
    for (int k = pick(0, 2); k > 0 && all.size() > 1; --k) {
      auto a = all[pick(0, static_cast<int>(all.size()) - 1)];
      auto b = all[pick(0, static_cast<int>(all.size()) - 1)];
      if (a != b) parts.priorities.push_back({a, b});
    }
    return Domain(std::move(parts));
  }

 private:
  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return pick(0, 1) == 1; }
  const std::string& pick_of(const std::vector<std::string>& v) {
    return v[pick(0, static_cast<int>(v.size()) - 1)];
  }

  Term term(bool ground, int depth) {
    int roll = pick(0, 9);
    if (roll < 2 && depth < 2) {
      std::vector<Term> args;
      for (int a = pick(1, 2); a > 0; --a) args.push_back(term(ground, depth + 1));
      return Term::compound(pick_of(functors_), std::move(args));
    }
    if (!ground && roll < 7) return Term::variable(pick_of(variables_));
    return Term::constant(pick_of(constants_));
  }

  Literal literal(bool ground) {
    std::vector<Term> args;
    for (int a = pick(0, 3); a > 0; --a) args.push_back(term(ground, 0));
    return Literal(Atom(pick_of(predicates_), std::move(args)), coin());
  }

  std::mt19937 rng_;
  std::vector<std::string> predicates_ = {"call", "is_ringing", "have_ask", "holds", "p2", "open_door", "x"};
  std::vector<std::string> types_ = {"is_person", "is_phone", "is_room"};
  std::vector<std::string> constants_ = {"bob", "mary", "phone1", "a", "favor_2", "z9"};
  std::vector<std::string> variables_ = {"P", "P1", "X", "Y_2", "D"};
  std::vector<std::string> functors_ = {"do", "answer", "f"};
};

}  // namespace star::testing

#endif  // STAR_TESTS_GENERATORS_HPP
