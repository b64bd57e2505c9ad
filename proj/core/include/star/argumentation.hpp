// Arguments over a Grounding, the attack relation between them, and the
// grounded extension of the resulting framework.

#ifndef STAR_ARGUMENTATION_HPP
#define STAR_ARGUMENTATION_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "star/grounding.hpp"

namespace star {

using ArgumentId = std::uint32_t;

enum class StepKind : std::uint8_t { premise, forward, backward };

/// One node of a proof tree. `index` is a premise index for premise steps and
/// an instance index otherwise. A backward step concludes the negation of
/// body literal `negated_body` from the negated head and the other body
/// literals (modus tollens).
struct ProofStep {
  StepKind kind = StepKind::premise;
  std::uint32_t index = 0;
  std::int32_t negated_body = -1;
  TimedLiteral conclusion;

  friend auto operator<=>(const ProofStep&, const ProofStep&) = default;
};

/// A proof tree rooted at `top`. Sub-arguments support the top step; `steps`
/// lists every distinct step of the tree, sorted.
struct Argument {
  ProofStep top;
  std::vector<ArgumentId> subs;
  int height = 1;
  std::vector<ProofStep> steps;

  const TimedLiteral& conclusion() const { return top.conclusion; }
};

struct ArgumentOptions {
  /// Maximum proof-tree height; unset means the number of grounded instances.
  std::optional<int> depth_cap;
  std::size_t argument_cap = 500'000;
};

struct ArgumentSet {
  std::vector<Argument> arguments;
  std::vector<std::string> warnings;
  bool truncated = false;
};

/// Closes the premises under forward and backward rule application. No rule
/// instance and no conclusion repeats along a root-to-leaf path, and literals
/// stated by the story are only ever concluded by their premise.
ArgumentSet build_arguments(const Grounding& grounding, const ArgumentOptions& options = {});

struct AttackEdge {
  ArgumentId attacker = 0;
  ArgumentId target = 0;
  ProofStep attacking;  // the attacker's top step
  ProofStep attacked;   // the step of the target that is contradicted

  friend bool operator==(const AttackEdge&, const AttackEdge&) = default;
};

/// Strict preference between the rules behind two steps: explicit `>>` pairs
/// (unless declared both ways) and causal rules over persistence. Not
/// transitively closed.
class Preference {
 public:
  Preference(const Grounding& grounding, std::span<const Priority> priorities);
  /// True when the rule of `a` is strictly less preferred than the rule of `b`.
  bool less_preferred(const ProofStep& a, const ProofStep& b) const;

 private:
  const Grounding* grounding_;
  std::vector<Priority> priorities_;
  bool declared(RuleLabel stronger, RuleLabel weaker) const;
};

/// An argument attacks another when its conclusion contradicts a step of the
/// other (its conclusion or an intermediate one) and its top rule is not less
/// preferred than that step's rule. Premises attack every contrary step and
/// are never attacked. A forward causal step concluding L at t+1 also attacks
/// any backward use of the persistence instance (not L at t -> not L at t+1),
/// which is what carries L back across the causal change. At most one edge is
/// reported per ordered pair of arguments.
std::vector<AttackEdge> attacks(const Grounding& grounding, const ArgumentSet& arguments,
                                std::span<const Priority> priorities);

/// An abstract argumentation framework: nodes 0..size-1 and attack pairs.
struct AttackGraph {
  std::size_t size = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;  // (attacker, target)

  static AttackGraph from(std::size_t size, std::span<const AttackEdge> edges);
};

/// Least fixpoint of the characteristic function, computed by propagation.
/// Returns member ids in increasing order.
std::vector<std::uint32_t> grounded_extension(const AttackGraph& graph);

/// An attack at the level of proof steps: `attacker` is the top step of some
/// argument and contradicts (or clips) `attacked`, a step of some argument.
/// Argument A attacks argument B exactly when A's top step attacks a step of B.
struct StepAttack {
  ProofStep attacker;
  ProofStep attacked;

  friend auto operator<=>(const StepAttack&, const StepAttack&) = default;
};

struct StructuredExtension {
  std::vector<ArgumentId> members;     // increasing
  std::vector<StepAttack> attacks;     // sorted
  std::vector<StepAttack> effective;   // attacks whose attacker tops an accepted argument
};

/// Grounded extension of the framework `arguments` + attacks(), computed
/// without materialising argument-to-argument edges, which grow
/// quadratically. Same members as grounded_extension(AttackGraph::from(...)).
StructuredExtension grounded_arguments(const Grounding& grounding, const ArgumentSet& arguments,
                                       std::span<const Priority> priorities);

bool is_conflict_free(const AttackGraph& graph, std::span<const std::uint32_t> members);
/// Every attacker of every member is attacked by some member.
bool defends_members(const AttackGraph& graph, std::span<const std::uint32_t> members);

std::string to_text(const ProofStep& step, const Grounding& grounding);

}  // namespace star

#endif  // STAR_ARGUMENTATION_HPP
