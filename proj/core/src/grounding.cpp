#include "star/grounding.hpp"

#include <algorithm>
#include <functional>
#include <map>

namespace star {

namespace {

using Substitution = std::map<std::string, Term>;

void collect_constants(const Term& t, std::set<std::string>& out) {
  if (t.is_constant()) out.insert(t.name());
  for (const auto& a : t.args()) collect_constants(a, out);
}

void collect_variables(const Term& t, std::vector<std::string>& out) {
  if (t.is_variable()) {
    if (std::find(out.begin(), out.end(), t.name()) == out.end()) out.push_back(t.name());
  }
  for (const auto& a : t.args()) collect_variables(a, out);
}

// Gives every `_` occurrence its own variable name.
Term rename_anonymous(const Term& t, int& counter) {
  if (t.is_anonymous()) return Term::variable("_" + std::to_string(++counter));
  if (t.is_compound()) {
    std::vector<Term> args;
    for (const auto& a : t.args()) args.push_back(rename_anonymous(a, counter));
    return Term::compound(t.name(), std::move(args));
  }
  return t;
}

Literal rename_anonymous(const Literal& l, int& counter) {
  std::vector<Term> args;
  for (const auto& a : l.atom.args) args.push_back(rename_anonymous(a, counter));
  return Literal(Atom(l.atom.predicate, std::move(args)), l.negative);
}

Term substitute(const Term& t, const Substitution& s) {
  if (t.is_variable()) {
    auto it = s.find(t.name());
    return it == s.end() ? t : it->second;
  }
  if (t.is_compound()) {
    std::vector<Term> args;
    args.reserve(t.args().size());
    for (const auto& a : t.args()) args.push_back(substitute(a, s));
    return Term::compound(t.name(), std::move(args));
  }
  return t;
}

Atom substitute(const Atom& a, const Substitution& s) {
  std::vector<Term> args;
  args.reserve(a.args.size());
  for (const auto& t : a.args) args.push_back(substitute(t, s));
  return Atom(a.predicate, std::move(args));
}

bool match(const Term& pattern, const Term& ground, Substitution& s) {
  if (pattern.is_variable()) {
    auto [it, inserted] = s.emplace(pattern.name(), ground);
    return inserted || it->second == ground;
  }
  if (pattern.kind() != ground.kind() || pattern.name() != ground.name() ||
      pattern.args().size() != ground.args().size()) {
    return false;
  }
  for (std::size_t i = 0; i < pattern.args().size(); ++i) {
    if (!match(pattern.args()[i], ground.args()[i], s)) return false;
  }
  return true;
}

bool match(const Atom& pattern, const Atom& ground, Substitution& s) {
  if (pattern.predicate != ground.predicate || pattern.arity() != ground.arity()) return false;
  for (std::size_t i = 0; i < pattern.args.size(); ++i) {
    if (!match(pattern.args[i], ground.args[i], s)) return false;
  }
  return true;
}

std::vector<int> sessions_up_to(const Domain& domain, int up_to) {
  std::vector<int> ids;
  for (const auto& s : domain.sessions()) {
    if (s.id <= up_to) ids.push_back(s.id);
  }
  return ids;
}

}  // namespace

AtomId AtomTable::intern(const Atom& atom) {
  std::string text = canonical_text(atom);
  auto it = index_.find(text);
  if (it != index_.end()) return it->second;
  auto id = static_cast<AtomId>(atoms_.size());
  atoms_.push_back(atom);
  texts_.push_back(text);
  index_.emplace(std::move(text), id);
  return id;
}

std::optional<AtomId> AtomTable::find(const Atom& atom) const { return find(canonical_text(atom)); }

std::optional<AtomId> AtomTable::find(const std::string& text) const {
  auto it = index_.find(text);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int default_horizon(const Domain& domain, int up_to) {
  int horizon = 0;
  for (const auto& st : domain.statements()) {
    if (st.session <= up_to && !st.when.is_always()) horizon = std::max(horizon, st.when.time());
  }
  for (const auto& s : domain.sessions()) {
    if (s.id > up_to) continue;
    for (int qid : s.questions) {
      if (const auto* q = domain.find_question(qid)) {
        for (const auto& c : q->choices) horizon = std::max(horizon, c.time);
      }
    }
  }
  return horizon;
}

int max_time_point(const Domain& domain) {
  int t = 0;
  for (const auto& st : domain.statements()) {
    if (!st.when.is_always()) t = std::max(t, st.when.time());
  }
  for (const auto& q : domain.questions()) {
    for (const auto& c : q.choices) t = std::max(t, c.time);
  }
  return t;
}

Grounding ground(const Domain& domain, int up_to, const GroundingOptions& options) {
  if (!domain.find_session(up_to)) {
    throw std::invalid_argument("no session s(" + std::to_string(up_to) + ")");
  }
  Grounding g;
  g.up_to = up_to;
  g.horizon = options.horizon.value_or(default_horizon(domain, up_to));
  const int horizon = g.horizon;

  for (const auto& f : domain.fluents()) {
    g.fluent_signatures.insert(f.name + "/" + std::to_string(f.arity));
  }

  std::vector<Atom> typing_facts;
  for (const auto& st : domain.statements()) {
    if (st.session > up_to) continue;
    for (const auto& t : st.literal.atom.args) collect_constants(t, g.constants);
    if (st.when.is_always()) {
      g.constant_types.insert(predicate_signature(st.literal));
      if (!st.literal.negative) typing_facts.push_back(st.literal.atom);
    }
  }

  // Premises first so their atoms get the lowest ids.
  for (const auto& st : domain.statements()) {
    if (st.session > up_to) continue;
    AtomId id = g.atoms.intern(st.literal.atom);
    if (st.when.is_always()) {
      for (int t = 0; t <= horizon; ++t) g.premises.push_back({{id, st.literal.negative, t}, st.session});
    } else if (st.when.time() <= horizon) {
      g.premises.push_back({{id, st.literal.negative, st.when.time()}, st.session});
    }
  }
  for (int sid : sessions_up_to(domain, up_to)) {
    for (int qid : domain.find_session(sid)->questions) {
      if (const auto* q = domain.find_question(qid)) {
        for (const auto& c : q->choices) {
          if (c.literal.atom.is_ground()) g.atoms.intern(c.literal.atom);
        }
      }
    }
  }

  const std::vector<Term> universe = [&] {
    std::vector<Term> u;
    for (const auto& c : g.constants) u.push_back(Term::constant(c));
    return u;
  }();

  std::size_t produced = 0;
  for (const auto& rule : domain.rules()) {
    int anon = 0;
    std::vector<Literal> body;
    for (const auto& l : rule.body.literals()) body.push_back(rename_anonymous(l, anon));
    Literal head = rename_anonymous(rule.head, anon);

    std::vector<std::string> vars;
    for (const auto& l : body) {
      for (const auto& t : l.atom.args) collect_variables(t, vars);
    }
    for (const auto& t : head.atom.args) collect_variables(t, vars);

    std::vector<const Literal*> filters;
    for (const auto& l : body) {
      if (!l.negative && g.constant_types.count(predicate_signature(l))) filters.push_back(&l);
    }

    std::vector<Substitution> partial;
    std::function<void(std::size_t, const Substitution&)> join = [&](std::size_t i,
                                                                     const Substitution& s) {
      if (i == filters.size()) {
        partial.push_back(s);
        return;
      }
      for (const auto& fact : typing_facts) {
        Substitution next = s;
        if (match(filters[i]->atom, fact, next)) join(i + 1, next);
      }
    };
    join(0, {});

    const int times = rule.label.kind == RuleKind::causal ? horizon : horizon + 1;
    // Size check before materialising anything.
    long double count = 0;
    for (const auto& s : partial) {
      long double per = 1;
      for (const auto& v : vars) {
        if (!s.count(v)) per *= static_cast<long double>(universe.size());
      }
      count += per;
    }
    count *= std::max(times, 0);
    if (static_cast<long double>(produced) + count > static_cast<long double>(options.instance_cap)) {
      throw GroundingError("grounding " + canonical_text(rule.label) + " exceeds the cap of " +
                               std::to_string(options.instance_cap) + " timed instances",
                           canonical_text(rule.label));
    }

    std::vector<Substitution> full;
    for (const auto& s : partial) {
      std::vector<std::string> free;
      for (const auto& v : vars) {
        if (!s.count(v)) free.push_back(v);
      }
      std::function<void(std::size_t, Substitution&)> extend = [&](std::size_t i, Substitution& cur) {
        if (i == free.size()) {
          full.push_back(cur);
          return;
        }
        for (const auto& c : universe) {
          cur.insert_or_assign(free[i], c);
          extend(i + 1, cur);
        }
        cur.erase(free[i]);
      };
      Substitution cur = s;
      extend(0, cur);
    }

    for (const auto& s : full) {
      std::vector<std::pair<AtomId, bool>> ground_body;
      for (const auto& l : body) ground_body.emplace_back(g.atoms.intern(substitute(l.atom, s)), l.negative);
      AtomId head_atom = g.atoms.intern(substitute(head.atom, s));
      for (int t = 0; t < times; ++t) {
        TimedRuleInstance inst;
        inst.origin = OriginKind::rule;
        inst.label = rule.label;
        for (const auto& [a, neg] : ground_body) inst.body.push_back({a, neg, t});
        int head_time = rule.label.kind == RuleKind::causal ? t + 1 : t;
        inst.head = {head_atom, head.negative, head_time};
        g.instances.push_back(std::move(inst));
        ++produced;
      }
    }
  }

  for (AtomId a = 0; a < g.atoms.size(); ++a) {
    if (!g.is_fluent(a)) continue;
    if (produced + 2 * static_cast<std::size_t>(horizon) > options.instance_cap) {
      throw GroundingError("persistence of " + g.atoms.signature(a) + " exceeds the cap of " +
                               std::to_string(options.instance_cap) + " timed instances",
                           "persist(" + g.atoms.signature(a) + ")");
    }
    for (bool neg : {false, true}) {
      for (int t = 0; t < horizon; ++t) {
        TimedRuleInstance inst;
        inst.origin = OriginKind::persistence;
        inst.body.push_back({a, neg, t});
        inst.head = {a, neg, t + 1};
        g.instances.push_back(std::move(inst));
        ++produced;
      }
    }
  }
  return g;
}

std::string literal_text(const TimedLiteral& literal, const AtomTable& atoms) {
  return (literal.negative ? "-" : "") + atoms.text(literal.atom);
}

std::string to_text(const TimedLiteral& literal, const AtomTable& atoms) {
  return literal_text(literal, atoms) + " at " + std::to_string(literal.time);
}

std::string to_text(const TimedRuleInstance& instance, const AtomTable& atoms) {
  std::string out;
  if (instance.is_persistence()) {
    return "persist@" + std::to_string(instance.time()) + " :: " +
           literal_text(instance.head, atoms);
  }
  out = canonical_text(instance.label) + "@" + std::to_string(instance.time()) + " :: ";
  if (instance.body.empty()) out += "true";
  for (std::size_t i = 0; i < instance.body.size(); ++i) {
    if (i) out += ", ";
    out += literal_text(instance.body[i], atoms);
  }
  out += instance.is_causal() ? " causes " : " implies ";
  return out + literal_text(instance.head, atoms);
}

}  // namespace star
