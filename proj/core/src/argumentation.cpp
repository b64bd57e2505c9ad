#include "star/argumentation.hpp"

#include <algorithm>
#include <deque>
#include <iterator>
#include <map>
#include <unordered_map>
#include <unordered_set>

namespace star {

namespace {

class Builder {
 public:
  Builder(const Grounding& g, const ArgumentOptions& options) : g_(g), options_(options) {
    depth_cap_ = options.depth_cap.value_or(static_cast<int>(
        std::max<std::size_t>(g.instances.size(), 1)));
    for (const auto& p : g.premises) premise_keys_.insert(p.literal.key());
    for (std::uint32_t i = 0; i < g.instances.size(); ++i) {
      const auto& inst = g.instances[i];
      for (std::uint32_t pos = 0; pos < inst.body.size(); ++pos) {
        body_index_[inst.body[pos].key()].emplace_back(i, pos);
      }
      neg_head_index_[inst.head.contrary().key()].push_back(i);
    }
  }

  ArgumentSet run() {
    std::vector<ArgumentId> frontier;
    for (std::uint32_t i = 0; i < g_.premises.size(); ++i) {
      ProofStep step{StepKind::premise, i, -1, g_.premises[i].literal};
      add(step, {}, frontier, true);
    }
    for (std::uint32_t i = 0; i < g_.instances.size(); ++i) {
      if (g_.instances[i].body.empty()) {
        add({StepKind::forward, i, -1, g_.instances[i].head}, {}, frontier);
      }
    }
    while (!frontier.empty() && !capped_) {
      std::vector<ArgumentId> next;
      for (ArgumentId a : frontier) {
        expand(a, next);
        if (capped_) break;
      }
      frontier = std::move(next);
    }
    if (truncated_depth_) {
      out_.warnings.push_back("proof depth cap of " + std::to_string(depth_cap_) +
                              " reached; deeper arguments were not built");
    }
    if (capped_) {
      out_.warnings.push_back("argument cap of " + std::to_string(options_.argument_cap) +
                              " reached; argument construction stopped early");
    }
    out_.truncated = truncated_depth_ || capped_;
    return std::move(out_);
  }

 private:
  struct Slot {
    TimedLiteral literal;
    bool fixed = false;
  };

  void expand(ArgumentId a, std::vector<ArgumentId>& next) {
    const TimedLiteral lit = out_.arguments[a].conclusion();
    if (auto it = body_index_.find(lit.key()); it != body_index_.end()) {
      const auto uses = it->second;
      for (auto [inst_id, pos] : uses) {
        const auto& inst = g_.instances[inst_id];
        // forward
        {
          std::vector<Slot> slots;
          for (std::uint32_t k = 0; k < inst.body.size(); ++k) slots.push_back({inst.body[k], k == pos});
          combine({StepKind::forward, inst_id, -1, inst.head}, slots, a, next);
        }
        // backward onto another body literal
        for (std::uint32_t j = 0; j < inst.body.size(); ++j) {
          if (j == pos || !backward_target_ok(inst.body[j])) continue;
          std::vector<Slot> slots{{inst.head.contrary(), false}};
          for (std::uint32_t k = 0; k < inst.body.size(); ++k) {
            if (k != j) slots.push_back({inst.body[k], k == pos});
          }
          combine({StepKind::backward, inst_id, static_cast<std::int32_t>(j), inst.body[j].contrary()},
                  slots, a, next);
        }
      }
    }
    if (auto it = neg_head_index_.find(lit.key()); it != neg_head_index_.end()) {
      const auto uses = it->second;
      for (std::uint32_t inst_id : uses) {
        const auto& inst = g_.instances[inst_id];
        for (std::uint32_t j = 0; j < inst.body.size(); ++j) {
          if (!backward_target_ok(inst.body[j])) continue;
          std::vector<Slot> slots{{inst.head.contrary(), true}};
          for (std::uint32_t k = 0; k < inst.body.size(); ++k) {
            if (k != j) slots.push_back({inst.body[k], false});
          }
          combine({StepKind::backward, inst_id, static_cast<std::int32_t>(j), inst.body[j].contrary()},
                  slots, a, next);
        }
      }
    }
  }

  static std::uint64_t step_bit(const ProofStep& st) {
    std::uint64_t h = st.conclusion.key() * 0x9E3779B97F4A7C15ull;
    h ^= (static_cast<std::uint64_t>(st.index) << 3 | static_cast<std::uint64_t>(st.kind)) * 0xC2B2AE3D27D4EB4Full;
    h ^= static_cast<std::uint64_t>(st.negated_body + 1) * 0x165667B19E3779F9ull;
    return std::uint64_t{1} << (h >> 58);
  }

  bool backward_target_ok(const TimedLiteral& body_lit) const {
    // Typing facts are fixed by the story; never argue against them.
    return !g_.is_constant_type(body_lit.atom);
  }

  void combine(const ProofStep& top, const std::vector<Slot>& slots, ArgumentId fixed,
               std::vector<ArgumentId>& next) {
    if (premise_keys_.count(top.conclusion.key())) return;
    // Candidates per slot, by reference: add() only appends to these lists,
    // and the size is fixed up front so new arguments wait for the next round.
    struct Choice {
      const std::vector<ArgumentId>* list = nullptr;
      std::size_t size = 1;
    };
    std::vector<Choice> choices;
    choices.reserve(slots.size());
    for (const auto& s : slots) {
      if (s.fixed) {
        choices.push_back({});
        continue;
      }
      auto it = by_conclusion_.find(s.literal.key());
      if (it == by_conclusion_.end() || it->second.empty()) return;
      choices.push_back({&it->second, it->second.size()});
    }
    std::vector<std::size_t> odo(choices.size(), 0);
    std::vector<ArgumentId> subs(choices.size());
    while (true) {
      for (std::size_t k = 0; k < choices.size(); ++k) {
        subs[k] = choices[k].list ? (*choices[k].list)[odo[k]] : fixed;
      }
      add(top, subs, next);
      if (capped_) return;
      std::size_t k = 0;
      while (k < odo.size() && ++odo[k] == choices[k].size) {
        odo[k] = 0;
        ++k;
      }
      if (k == odo.size()) break;
    }
  }

  void add(const ProofStep& top, const std::vector<ArgumentId>& subs, std::vector<ArgumentId>& next,
           bool is_premise = false) {
    std::string sig;
    sig.reserve(12 + subs.size() * 4);
    auto put = [&](std::uint32_t v) { sig.append(reinterpret_cast<const char*>(&v), sizeof v); };
    put(static_cast<std::uint32_t>(top.kind));
    put(top.index);
    put(static_cast<std::uint32_t>(top.negated_body));
    for (auto s : subs) put(s);
    if (!seen_.insert(sig).second) return;

    // Sub-arguments keep their steps sorted, so the union is a chain of merges.
    int height = 0;
    union_.clear();
    for (auto s : subs) {
      const auto& sub = out_.arguments[s];
      height = std::max(height, sub.height);
      merged_.clear();
      std::set_union(union_.begin(), union_.end(), sub.steps.begin(), sub.steps.end(), std::back_inserter(merged_));
      union_.swap(merged_);
    }
    if (!is_premise) {
      for (const auto& st : union_) {
        if (st.conclusion == top.conclusion) return;
        if (st.kind != StepKind::premise && st.index == top.index) return;
      }
    }
    if (height + 1 > depth_cap_) {
      truncated_depth_ = true;
      return;
    }
    union_.insert(std::lower_bound(union_.begin(), union_.end(), top), top);
    const auto& candidate = union_;
    // Keep only subset-minimal proofs per top step: a larger proof of the same
    // step attacks the same arguments and is attacked by more of them.
    // A 64-bit set signature rules out most candidates before the exact test.
    std::uint64_t signature = 0;
    for (const auto& st : candidate) signature |= step_bit(st);
    auto& same_top = by_top_[top];
    for (auto [other_signature, other] : same_top) {
      if (other_signature & ~signature) continue;
      const auto& os = out_.arguments[other].steps;
      if (std::includes(candidate.begin(), candidate.end(), os.begin(), os.end())) return;
    }
    if (out_.arguments.size() >= options_.argument_cap) {
      capped_ = true;
      return;
    }
    Argument arg;
    arg.top = top;
    arg.subs = subs;
    arg.height = height + 1;
    arg.steps = candidate;
    auto id = static_cast<ArgumentId>(out_.arguments.size());
    out_.arguments.push_back(std::move(arg));
    same_top.emplace_back(signature, id);
    by_conclusion_[top.conclusion.key()].push_back(id);
    next.push_back(id);
  }

  const Grounding& g_;
  ArgumentOptions options_;
  int depth_cap_ = 0;
  bool truncated_depth_ = false;
  bool capped_ = false;
  std::unordered_set<std::uint64_t> premise_keys_;
  std::unordered_map<std::uint64_t, std::vector<std::pair<std::uint32_t, std::uint32_t>>> body_index_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> neg_head_index_;
  std::unordered_map<std::uint64_t, std::vector<ArgumentId>> by_conclusion_;
  std::unordered_set<std::string> seen_;
  std::map<ProofStep, std::vector<std::pair<std::uint64_t, ArgumentId>>> by_top_;
  std::vector<ProofStep> union_, merged_;  // scratch for add()
  ArgumentSet out_;
};

}  // namespace

ArgumentSet build_arguments(const Grounding& grounding, const ArgumentOptions& options) {
  return Builder(grounding, options).run();
}

Preference::Preference(const Grounding& grounding, std::span<const Priority> priorities)
    : grounding_(&grounding), priorities_(priorities.begin(), priorities.end()) {}

bool Preference::declared(RuleLabel stronger, RuleLabel weaker) const {
  return std::any_of(priorities_.begin(), priorities_.end(), [&](const Priority& p) {
    return p.stronger == stronger && p.weaker == weaker;
  });
}

bool Preference::less_preferred(const ProofStep& a, const ProofStep& b) const {
  if (a.kind == StepKind::premise) return false;
  if (b.kind == StepKind::premise) return true;
  const auto& ia = grounding_->instances[a.index];
  const auto& ib = grounding_->instances[b.index];
  if (ia.is_persistence()) return ib.is_causal();
  if (ib.is_persistence()) return false;
  return declared(ib.label, ia.label) && !declared(ia.label, ib.label);
}

std::vector<AttackEdge> attacks(const Grounding& grounding, const ArgumentSet& set,
                                std::span<const Priority> priorities) {
  Preference pref(grounding, priorities);
  struct Ref {
    ArgumentId arg;
    const ProofStep* step;
  };
  std::unordered_map<std::uint64_t, std::vector<Ref>> by_step_conclusion;
  std::unordered_map<std::uint64_t, std::vector<Ref>> by_clipped_persistence;
  const auto& args = set.arguments;
  for (ArgumentId id = 0; id < args.size(); ++id) {
    for (const auto& st : args[id].steps) {
      if (st.kind == StepKind::premise) continue;
      by_step_conclusion[st.conclusion.key()].push_back({id, &st});
      if (st.kind == StepKind::backward && grounding.instances[st.index].is_persistence()) {
        by_clipped_persistence[grounding.instances[st.index].head.contrary().key()].push_back({id, &st});
      }
    }
  }

  std::vector<AttackEdge> edges;
  std::unordered_set<std::uint64_t> seen;
  auto emit = [&](ArgumentId attacker, const Ref& target) {
    std::uint64_t k = (static_cast<std::uint64_t>(attacker) << 32) | target.arg;
    if (!seen.insert(k).second) return;
    edges.push_back({attacker, target.arg, args[attacker].top, *target.step});
  };

  for (ArgumentId id = 0; id < args.size(); ++id) {
    const ProofStep& top = args[id].top;
    if (auto it = by_step_conclusion.find(top.conclusion.contrary().key());
        it != by_step_conclusion.end()) {
      for (const auto& ref : it->second) {
        if (!pref.less_preferred(top, *ref.step)) emit(id, ref);
      }
    }
    if (top.kind == StepKind::forward && grounding.instances[top.index].is_causal()) {
      if (auto it = by_clipped_persistence.find(top.conclusion.key());
          it != by_clipped_persistence.end()) {
        for (const auto& ref : it->second) emit(id, ref);
      }
    }
  }
  std::sort(edges.begin(), edges.end(), [](const AttackEdge& x, const AttackEdge& y) {
    return std::pair(x.attacker, x.target) < std::pair(y.attacker, y.target);
  });
  return edges;
}

StructuredExtension grounded_arguments(const Grounding& grounding, const ArgumentSet& set,
                                       std::span<const Priority> priorities) {
  Preference pref(grounding, priorities);
  const auto& args = set.arguments;

  // Distinct steps, the arguments holding each, and the arguments topped by each.
  struct StepHash {
    std::size_t operator()(const ProofStep& st) const {
      std::uint64_t h = st.conclusion.key() * 0x9E3779B97F4A7C15ull;
      h ^= (static_cast<std::uint64_t>(st.index) << 3 | static_cast<std::uint64_t>(st.kind)) + 0x632BE59BD9B4E019ull +
           (h << 6) + (h >> 2);
      return static_cast<std::size_t>(h ^ static_cast<std::uint64_t>(st.negated_body + 1) << 40);
    }
  };
  std::unordered_map<ProofStep, std::uint32_t, StepHash> step_ids;
  std::vector<const ProofStep*> steps;
  // Step ids of argument a are arg_steps[arg_begin[a] .. arg_begin[a + 1]).
  std::vector<std::size_t> arg_begin(args.size() + 1, 0);
  std::vector<std::uint32_t> arg_steps;
  std::vector<std::uint32_t> top_of(args.size());
  for (ArgumentId a = 0; a < args.size(); ++a) {
    arg_begin[a] = arg_steps.size();
    for (const auto& st : args[a].steps) {
      auto [it, fresh] = step_ids.emplace(st, static_cast<std::uint32_t>(steps.size()));
      if (fresh) steps.push_back(&it->first);
      arg_steps.push_back(it->second);
    }
    top_of[a] = step_ids.at(args[a].top);
  }
  arg_begin[args.size()] = arg_steps.size();
  auto steps_of = [&](ArgumentId a) {
    return std::span<const std::uint32_t>(arg_steps.data() + arg_begin[a], arg_begin[a + 1] - arg_begin[a]);
  };
  const std::size_t n = steps.size();
  std::vector<std::vector<ArgumentId>> holders(n), topped(n);
  for (ArgumentId a = 0; a < args.size(); ++a) {
    for (auto sid : steps_of(a)) holders[sid].push_back(a);
    topped[top_of[a]].push_back(a);
  }

  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> by_conclusion, by_clipped;
  for (std::uint32_t sid = 0; sid < n; ++sid) {
    const ProofStep& st = *steps[sid];
    if (st.kind == StepKind::premise) continue;
    by_conclusion[st.conclusion.key()].push_back(sid);
    if (st.kind == StepKind::backward && grounding.instances[st.index].is_persistence()) {
      by_clipped[grounding.instances[st.index].head.contrary().key()].push_back(sid);
    }
  }
  std::vector<std::vector<std::uint32_t>> targets(n);  // by attacking top step
  std::vector<std::size_t> live_attackers(n, 0);        // attacking tops not yet fully out
  for (std::uint32_t u = 0; u < n; ++u) {
    if (topped[u].empty()) continue;
    const ProofStep& top = *steps[u];
    std::vector<std::uint32_t>& out = targets[u];
    if (auto it = by_conclusion.find(top.conclusion.contrary().key()); it != by_conclusion.end()) {
      for (auto sid : it->second) {
        if (!pref.less_preferred(top, *steps[sid])) out.push_back(sid);
      }
    }
    if (top.kind == StepKind::forward && grounding.instances[top.index].is_causal()) {
      if (auto it = by_clipped.find(top.conclusion.key()); it != by_clipped.end()) {
        out.insert(out.end(), it->second.begin(), it->second.end());
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    for (auto sid : out) ++live_attackers[sid];
  }

  // Grounded labelling: an argument is in once every step it holds is only
  // attacked by tops whose arguments are all out, and out as soon as one of
  // its steps is attacked by the top of an accepted argument.
  enum : std::uint8_t { undecided, in, out };
  std::vector<std::uint8_t> label(args.size(), undecided);
  std::vector<std::size_t> unsafe(args.size(), 0);
  std::vector<std::size_t> not_out(n, 0);
  std::vector<bool> top_in(n, false), defeated(n, false);
  for (std::uint32_t u = 0; u < n; ++u) not_out[u] = topped[u].size();
  std::deque<ArgumentId> became_in, became_out;
  for (ArgumentId a = 0; a < args.size(); ++a) {
    for (auto sid : steps_of(a)) unsafe[a] += live_attackers[sid] > 0;
    if (unsafe[a] == 0) {
      label[a] = in;
      became_in.push_back(a);
    }
  }
  while (!became_in.empty() || !became_out.empty()) {
    if (!became_in.empty()) {
      ArgumentId a = became_in.front();
      became_in.pop_front();
      auto u = top_of[a];
      if (top_in[u]) continue;
      top_in[u] = true;
      for (auto sid : targets[u]) {
        if (defeated[sid]) continue;
        defeated[sid] = true;
        for (ArgumentId b : holders[sid]) {
          if (label[b] != undecided) continue;
          label[b] = out;
          became_out.push_back(b);
        }
      }
      continue;
    }
    ArgumentId b = became_out.front();
    became_out.pop_front();
    auto u = top_of[b];
    if (--not_out[u] != 0) continue;
    for (auto sid : targets[u]) {
      if (--live_attackers[sid] != 0) continue;
      for (ArgumentId c : holders[sid]) {
        if (--unsafe[c] == 0 && label[c] == undecided) {
          label[c] = in;
          became_in.push_back(c);
        }
      }
    }
  }

  StructuredExtension result;
  for (ArgumentId a = 0; a < args.size(); ++a) {
    if (label[a] == in) result.members.push_back(a);
  }
  for (std::uint32_t u = 0; u < n; ++u) {
    for (auto sid : targets[u]) {
      result.attacks.push_back({*steps[u], *steps[sid]});
      if (top_in[u]) result.effective.push_back({*steps[u], *steps[sid]});
    }
  }
  std::sort(result.attacks.begin(), result.attacks.end());
  std::sort(result.effective.begin(), result.effective.end());
  return result;
}

AttackGraph AttackGraph::from(std::size_t size, std::span<const AttackEdge> edges) {
  AttackGraph g;
  g.size = size;
  g.edges.reserve(edges.size());
  for (const auto& e : edges) g.edges.emplace_back(e.attacker, e.target);
  return g;
}

std::vector<std::uint32_t> grounded_extension(const AttackGraph& graph) {
  auto edges = graph.edges;
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  std::vector<std::vector<std::uint32_t>> targets(graph.size);
  std::vector<std::size_t> live_attackers(graph.size, 0);
  for (auto [a, b] : edges) {
    targets[a].push_back(b);
    ++live_attackers[b];
  }
  enum : std::uint8_t { undecided, in, out };
  std::vector<std::uint8_t> label(graph.size, undecided);
  std::deque<std::uint32_t> queue;
  for (std::uint32_t v = 0; v < graph.size; ++v) {
    if (live_attackers[v] == 0) {
      label[v] = in;
      queue.push_back(v);
    }
  }
  while (!queue.empty()) {
    std::uint32_t v = queue.front();
    queue.pop_front();
    for (std::uint32_t w : targets[v]) {
      if (label[w] != undecided) continue;
      label[w] = out;
      for (std::uint32_t x : targets[w]) {
        if (--live_attackers[x] == 0 && label[x] == undecided) {
          label[x] = in;
          queue.push_back(x);
        }
      }
    }
  }
  std::vector<std::uint32_t> members;
  for (std::uint32_t v = 0; v < graph.size; ++v) {
    if (label[v] == in) members.push_back(v);
  }
  return members;
}

bool is_conflict_free(const AttackGraph& graph, std::span<const std::uint32_t> members) {
  std::vector<bool> in(graph.size, false);
  for (auto m : members) in[m] = true;
  return std::none_of(graph.edges.begin(), graph.edges.end(),
                      [&](const auto& e) { return in[e.first] && in[e.second]; });
}

bool defends_members(const AttackGraph& graph, std::span<const std::uint32_t> members) {
  std::vector<bool> in(graph.size, false), countered(graph.size, false);
  for (auto m : members) in[m] = true;
  for (auto [a, b] : graph.edges) {
    if (in[a]) countered[b] = true;
  }
  for (auto [a, b] : graph.edges) {
    if (in[b] && !countered[a]) return false;
  }
  return true;
}

std::string to_text(const ProofStep& step, const Grounding& grounding) {
  switch (step.kind) {
    case StepKind::premise:
      return "story :: " + to_text(step.conclusion, grounding.atoms);
    case StepKind::forward:
      return to_text(grounding.instances[step.index], grounding.atoms);
    case StepKind::backward:
      break;
  }
  return to_text(grounding.instances[step.index], grounding.atoms) + " (backward: " +
         to_text(step.conclusion, grounding.atoms) + ")";
}

}  // namespace star
