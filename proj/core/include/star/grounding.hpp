// Grounding of a Domain over the constants of the story read so far.
//
// Rule schemata are instantiated for every substitution drawn from the story's
// constants, at every time-point up to the horizon. Positive body literals of
// constant-type predicates (those only ever stated `at always`) restrict the
// substitutions to the typing facts, so `is_person(P)` only binds persons.

#ifndef STAR_GROUNDING_HPP
#define STAR_GROUNDING_HPP

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "star/syntax.hpp"

namespace star {

using AtomId = std::uint32_t;

class AtomTable {
 public:
  /// `atom` must be ground.
  AtomId intern(const Atom& atom);
  std::optional<AtomId> find(const Atom& atom) const;
  std::optional<AtomId> find(const std::string& text) const;

  const Atom& atom(AtomId id) const { return atoms_[id]; }
  const std::string& text(AtomId id) const { return texts_[id]; }
  std::string signature(AtomId id) const { return predicate_signature(atoms_[id]); }
  std::size_t size() const { return atoms_.size(); }

 private:
  std::unordered_map<std::string, AtomId> index_;
  std::vector<Atom> atoms_;
  std::vector<std::string> texts_;
};

struct TimedLiteral {
  AtomId atom = 0;
  bool negative = false;
  int time = 0;

  TimedLiteral contrary() const { return {atom, !negative, time}; }
  std::uint64_t key() const {
    return (static_cast<std::uint64_t>(atom) << 33) | (static_cast<std::uint64_t>(negative) << 32) |
           static_cast<std::uint32_t>(time);
  }

  friend auto operator<=>(const TimedLiteral&, const TimedLiteral&) = default;
};

enum class OriginKind : std::uint8_t { rule, persistence };

/// A rule (or implicit persistence rule) instantiated at a time-point.
/// Property: body and head share one time. Causal and persistence: the head
/// is one step after the body.
struct TimedRuleInstance {
  OriginKind origin = OriginKind::rule;
  RuleLabel label;  // meaningful for OriginKind::rule only
  std::vector<TimedLiteral> body;
  TimedLiteral head;

  bool is_persistence() const { return origin == OriginKind::persistence; }
  bool is_causal() const { return origin == OriginKind::rule && label.kind == RuleKind::causal; }
  bool is_property() const {
    return origin == OriginKind::rule && label.kind == RuleKind::property;
  }
  /// Time of the body (the instance's own time-point).
  int time() const { return is_property() ? head.time : head.time - 1; }
};

/// An indefeasible story statement at a concrete time. `at always` statements
/// expand to one premise per time-point.
struct Premise {
  TimedLiteral literal;
  int session = 0;
};

class GroundingError : public std::runtime_error {
 public:
  GroundingError(const std::string& message, std::string rule)
      : std::runtime_error(message), rule_(std::move(rule)) {}
  const std::string& rule() const { return rule_; }

 private:
  std::string rule_;
};

struct GroundingOptions {
  std::optional<int> horizon;
  std::size_t instance_cap = 1'000'000;
};

struct Grounding {
  int up_to = 0;
  int horizon = 0;
  AtomTable atoms;
  std::vector<TimedRuleInstance> instances;
  std::vector<Premise> premises;
  std::set<std::string> constants;          // Herbrand universe used
  std::set<std::string> constant_types;     // signatures stated `at always`
  std::set<std::string> fluent_signatures;  // declared fluents

  bool is_constant_type(AtomId atom) const {
    return constant_types.count(atoms.signature(atom)) > 0;
  }
  bool is_fluent(AtomId atom) const { return fluent_signatures.count(atoms.signature(atom)) > 0; }
};

/// Largest time-point among statements and question choices of sessions
/// 0..up_to (0 when there are none).
int default_horizon(const Domain& domain, int up_to);

/// Largest time-point mentioned anywhere in the domain.
int max_time_point(const Domain& domain);

/// Throws GroundingError when the instance count would exceed the cap, and
/// std::invalid_argument when `up_to` names no session.
Grounding ground(const Domain& domain, int up_to, const GroundingOptions& options = {});

std::string to_text(const TimedLiteral& literal, const AtomTable& atoms);
std::string literal_text(const TimedLiteral& literal, const AtomTable& atoms);
/// e.g. `c(41)@6 :: is_person(bob), ... causes is_ringing(phone1)` or
/// `persist@16 :: is_ringing(phone1)`.
std::string to_text(const TimedRuleInstance& instance, const AtomTable& atoms);

}  // namespace star

#endif  // STAR_GROUNDING_HPP
