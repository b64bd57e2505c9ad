#include "star/syntax.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <set>
#include <utility>

namespace star {

namespace {

bool is_ident_tail(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool tail_ok(std::string_view s) {
  return std::all_of(s.begin() + 1, s.end(), is_ident_tail);
}

void append_args(std::string& out, const std::vector<Term>& args) {
  if (args.empty()) return;
  out += '(';
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ',';
    out += canonical_text(args[i]);
  }
  out += ')';
}

}  // namespace

bool is_constant_name(std::string_view name) {
  return !name.empty() && name[0] >= 'a' && name[0] <= 'z' && tail_ok(name);
}

bool is_variable_name(std::string_view name) {
  return !name.empty() && ((name[0] >= 'A' && name[0] <= 'Z') || name[0] == '_') &&
         tail_ok(name);
}

Term Term::constant(std::string name) {
  if (!is_constant_name(name)) throw SyntaxError("invalid constant name '" + name + "'");
  return Term(Kind::constant, std::move(name), {});
}

Term Term::variable(std::string name) {
  if (!is_variable_name(name)) throw SyntaxError("invalid variable name '" + name + "'");
  return Term(Kind::variable, std::move(name), {});
}

Term Term::compound(std::string functor, std::vector<Term> args) {
  if (!is_constant_name(functor)) throw SyntaxError("invalid functor name '" + functor + "'");
  if (args.empty()) throw SyntaxError("compound term '" + functor + "' needs at least one argument");
  return Term(Kind::compound, std::move(functor), std::move(args));
}

bool Term::is_ground() const {
  if (kind_ == Kind::variable) return false;
  return std::all_of(args_.begin(), args_.end(), [](const Term& t) { return t.is_ground(); });
}

Atom::Atom(std::string predicate_, std::vector<Term> args_)
    : predicate(std::move(predicate_)), args(std::move(args_)) {
  if (!is_constant_name(predicate)) throw SyntaxError("invalid predicate name '" + predicate + "'");
}

bool Atom::is_ground() const {
  return std::all_of(args.begin(), args.end(), [](const Term& t) { return t.is_ground(); });
}

TimePoint TimePoint::at(int t) {
  if (t < 0) throw SyntaxError("time-points are non-negative");
  return TimePoint(t);
}

int TimePoint::time() const {
  if (!time_) throw std::logic_error("'always' has no numeric time");
  return *time_;
}

RuleBody RuleBody::of(std::vector<Literal> literals) {
  if (literals.empty()) throw SyntaxError("a rule body is `true` or a non-empty literal list");
  RuleBody body;
  body.literals_ = std::move(literals);
  return body;
}

std::vector<std::string> domain_problems(const DomainParts& parts) {
  std::vector<std::string> problems;

  std::set<int> session_ids;
  for (std::size_t i = 0; i < parts.sessions.size(); ++i) {
    const auto& s = parts.sessions[i];
    if (!session_ids.insert(s.id).second) {
      problems.push_back("session s(" + std::to_string(s.id) + ") declared twice");
    }
  }
  int expected = 0;
  for (int id : session_ids) {
    if (id != expected) {
      problems.push_back("session ids must be consecutive from s(0); s(" +
                         std::to_string(expected) + ") is missing");
      break;
    }
    ++expected;
  }

  std::set<int> question_ids;
  for (const auto& q : parts.questions) {
    if (!question_ids.insert(q.id).second) {
      problems.push_back("question q(" + std::to_string(q.id) + ") declared twice");
    }
    if (q.choices.empty()) {
      problems.push_back("question q(" + std::to_string(q.id) + ") has no choices");
    }
  }
  for (const auto& s : parts.sessions) {
    for (int q : s.questions) {
      if (!question_ids.count(q)) {
        problems.push_back("session s(" + std::to_string(s.id) + ") references unknown question q(" +
                           std::to_string(q) + ")");
      }
    }
  }

  for (const auto& st : parts.statements) {
    if (!session_ids.count(st.session)) {
      problems.push_back("statement refers to undeclared session s(" + std::to_string(st.session) +
                         ")");
    }
    if (st.session == 0 && !st.when.is_always()) {
      problems.push_back("session s(0) holds typing statements only; use `at always`");
    }
    if (st.session != 0 && st.when.is_always()) {
      problems.push_back("statements of session s(" + std::to_string(st.session) +
                         ") need a numeric time-point");
    }
    if (!st.literal.atom.is_ground()) {
      problems.push_back("story statement " + canonical_text(st.literal) + " must be ground");
    }
  }

  std::set<std::pair<std::string, int>> fluent_sigs;
  for (const auto& f : parts.fluents) {
    if (!fluent_sigs.insert({f.name, f.arity}).second) {
      problems.push_back("fluent " + f.name + "/" + std::to_string(f.arity) + " declared twice");
    }
  }

  std::set<RuleLabel> labels;
  for (const auto& r : parts.rules) {
    if (!labels.insert(r.label).second) {
      problems.push_back("duplicate rule label " + canonical_text(r.label));
    }
  }
  for (const auto& p : parts.priorities) {
    if (p.stronger == p.weaker) {
      problems.push_back("rule " + canonical_text(p.stronger) + " cannot be stronger than itself");
    }
    for (const auto& l : {p.stronger, p.weaker}) {
      if (!labels.count(l)) {
        problems.push_back("priority refers to undeclared rule " + canonical_text(l));
      }
    }
  }
  return problems;
}

Domain::Domain(DomainParts parts) : parts_(std::move(parts)) {
  auto problems = domain_problems(parts_);
  if (!problems.empty()) throw SyntaxError(problems.front());
}

const Question* Domain::find_question(int id) const {
  for (const auto& q : parts_.questions) {
    if (q.id == id) return &q;
  }
  return nullptr;
}

const Rule* Domain::find_rule(RuleLabel label) const {
  for (const auto& r : parts_.rules) {
    if (r.label == label) return &r;
  }
  return nullptr;
}

const SessionDecl* Domain::find_session(int id) const {
  for (const auto& s : parts_.sessions) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

bool Domain::is_fluent(std::string_view name, std::size_t arity) const {
  return std::any_of(parts_.fluents.begin(), parts_.fluents.end(), [&](const FluentDecl& f) {
    return f.name == name && static_cast<std::size_t>(f.arity) == arity;
  });
}

bool Domain::empty() const {
  return parts_.sessions.empty() && parts_.statements.empty() && parts_.questions.empty() &&
         parts_.fluents.empty() && parts_.rules.empty() && parts_.priorities.empty();
}

bool operator==(const Domain& a, const Domain& b) {
  const auto& x = a.parts_;
  const auto& y = b.parts_;
  return x.sessions == y.sessions && x.statements == y.statements && x.questions == y.questions &&
         x.fluents == y.fluents && x.rules == y.rules && x.priorities == y.priorities;
}

std::string canonical_text(const Term& term) {
  std::string out = term.name();
  append_args(out, term.args());
  return out;
}

std::string canonical_text(const Atom& atom) {
  std::string out = atom.predicate;
  append_args(out, atom.args);
  return out;
}

std::string canonical_text(const Literal& literal) {
  return (literal.negative ? "-" : "") + canonical_text(literal.atom);
}

std::string canonical_text(const TimePoint& when) {
  return when.is_always() ? "always" : std::to_string(when.time());
}

std::string canonical_text(const RuleLabel& label) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c(%02d)", label.kind == RuleKind::causal ? 'c' : 'p',
                label.index);
  return buf;
}

std::string canonical_text(const StoryStatement& statement) {
  return "s(" + std::to_string(statement.session) + ") :: " + canonical_text(statement.literal) +
         " at " + canonical_text(statement.when) + ".";
}

std::string canonical_text(const Question& question) {
  std::string out = "q(" + std::to_string(question.id) + ") ?? ";
  for (std::size_t i = 0; i < question.choices.size(); ++i) {
    if (i) out += "; ";
    out += canonical_text(question.choices[i].literal) + " at " +
           std::to_string(question.choices[i].time);
  }
  return out + ".";
}

std::string canonical_text(const SessionDecl& session) {
  std::string out = "session(s(" + std::to_string(session.id) + "),[";
  for (std::size_t i = 0; i < session.questions.size(); ++i) {
    if (i) out += ',';
    out += "q(" + std::to_string(session.questions[i]) + ")";
  }
  return out + "],all).";
}

std::string canonical_text(const Rule& rule) {
  std::string out = canonical_text(rule.label) + " :: ";
  if (rule.body.is_tautology()) {
    out += "true";
  } else {
    bool first = true;
    for (const auto& lit : rule.body.literals()) {
      if (!first) out += ", ";
      first = false;
      out += canonical_text(lit);
    }
  }
  out += rule.label.kind == RuleKind::causal ? " causes " : " implies ";
  return out + canonical_text(rule.head) + ".";
}

std::string canonical_text(const Priority& priority) {
  return canonical_text(priority.stronger) + " >> " + canonical_text(priority.weaker) + ".";
}

std::string canonical_text(const FluentDecl& fluent) {
  std::string out = fluent.name;
  if (fluent.arity > 0) {
    out += '(';
    for (int i = 0; i < fluent.arity; ++i) {
      if (i) out += ',';
      out += '_';
    }
    out += ')';
  }
  return out;
}

std::string canonical_text(std::span<const FluentDecl> fluents) {
  std::string out = "fluents([";
  for (std::size_t i = 0; i < fluents.size(); ++i) {
    if (i) out += ", ";
    out += canonical_text(fluents[i]);
  }
  return out + "]).";
}

std::string predicate_signature(const Atom& atom) {
  return atom.predicate + "/" + std::to_string(atom.arity());
}

std::string predicate_signature(const Literal& literal) {
  return predicate_signature(literal.atom);
}

}  // namespace star
