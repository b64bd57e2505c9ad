// Abstract syntax of STAR domain files: terms, literals, timed story
// statements, questions, rules, priorities and the Domain that holds them.
// Every type here is an immutable value once constructed.

#ifndef STAR_SYNTAX_HPP
#define STAR_SYNTAX_HPP

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace star {

/// Raised when a value would violate a structural invariant.
class SyntaxError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

bool is_constant_name(std::string_view name);
bool is_variable_name(std::string_view name);

class Term {
 public:
  enum class Kind : std::uint8_t { constant, variable, compound };

  static Term constant(std::string name);
  static Term variable(std::string name);
  static Term compound(std::string functor, std::vector<Term> args);

  Kind kind() const { return kind_; }
  bool is_constant() const { return kind_ == Kind::constant; }
  bool is_variable() const { return kind_ == Kind::variable; }
  bool is_compound() const { return kind_ == Kind::compound; }
  bool is_anonymous() const { return kind_ == Kind::variable && name_ == "_"; }
  bool is_ground() const;

  // Constant name, variable name or functor.
  const std::string& name() const { return name_; }
  const std::vector<Term>& args() const { return args_; }

  friend bool operator==(const Term&, const Term&) = default;

 private:
  Term(Kind kind, std::string name, std::vector<Term> args)
      : kind_(kind), name_(std::move(name)), args_(std::move(args)) {}

  Kind kind_ = Kind::constant;
  std::string name_;
  std::vector<Term> args_;
};

/// A predicate instance: name plus ordered arguments. Arity 0 is allowed.
struct Atom {
  std::string predicate;
  std::vector<Term> args;

  Atom() = default;
  Atom(std::string predicate, std::vector<Term> args = {});

  std::size_t arity() const { return args.size(); }
  bool is_ground() const;

  friend bool operator==(const Atom&, const Atom&) = default;
};

/// A possibly negated atom. Negation is a flag, so double negation cannot be
/// written down.
struct Literal {
  bool negative = false;
  Atom atom;

  Literal() = default;
  Literal(Atom atom, bool negative = false)
      : negative(negative), atom(std::move(atom)) {}

  static Literal positive(Atom atom) { return Literal(std::move(atom), false); }
  static Literal negated(Atom atom) { return Literal(std::move(atom), true); }

  Literal negation() const { return Literal(atom, !negative); }

  friend bool operator==(const Literal&, const Literal&) = default;
};

class TimePoint {
 public:
  static TimePoint at(int t);
  static TimePoint always() { return TimePoint(); }

  bool is_always() const { return !time_.has_value(); }
  int time() const;

  friend bool operator==(const TimePoint&, const TimePoint&) = default;

 private:
  TimePoint() = default;
  explicit TimePoint(int t) : time_(t) {}
  std::optional<int> time_;
};

struct StoryStatement {
  int session = 0;
  Literal literal;
  TimePoint when = TimePoint::always();

  friend bool operator==(const StoryStatement&, const StoryStatement&) = default;
};

struct QuestionChoice {
  Literal literal;
  int time = 0;

  friend bool operator==(const QuestionChoice&, const QuestionChoice&) = default;
};

struct Question {
  int id = 0;
  std::vector<QuestionChoice> choices;

  friend bool operator==(const Question&, const Question&) = default;
};

/// `session(s(N),[q(...),...],all).` The visibility token is always `all`.
struct SessionDecl {
  int id = 0;
  std::vector<int> questions;

  friend bool operator==(const SessionDecl&, const SessionDecl&) = default;
};

enum class RuleKind : std::uint8_t { causal, property };

struct RuleLabel {
  RuleKind kind = RuleKind::causal;
  int index = 0;

  friend auto operator<=>(const RuleLabel&, const RuleLabel&) = default;
};

/// Either the tautology `true` or a non-empty list of literals.
class RuleBody {
 public:
  static RuleBody tautology() { return RuleBody(); }
  static RuleBody of(std::vector<Literal> literals);

  bool is_tautology() const { return literals_.empty(); }
  std::span<const Literal> literals() const { return literals_; }

  friend bool operator==(const RuleBody&, const RuleBody&) = default;

 private:
  RuleBody() = default;
  std::vector<Literal> literals_;
};

struct Rule {
  RuleLabel label;
  RuleBody body = RuleBody::tautology();
  Literal head;

  friend bool operator==(const Rule&, const Rule&) = default;
};

struct Priority {
  RuleLabel stronger;
  RuleLabel weaker;

  friend bool operator==(const Priority&, const Priority&) = default;
};

/// A fluent signature. Declared with `_` placeholders, which only give arity.
struct FluentDecl {
  std::string name;
  int arity = 0;

  friend bool operator==(const FluentDecl&, const FluentDecl&) = default;
};

/// Raw lists a Domain is assembled from; Domain validates them.
struct DomainParts {
  std::vector<SessionDecl> sessions;
  std::vector<StoryStatement> statements;
  std::vector<Question> questions;
  std::vector<FluentDecl> fluents;
  std::vector<Rule> rules;
  std::vector<Priority> priorities;
};

class Domain {
 public:
  Domain() = default;
  /// Throws SyntaxError when the parts break a Domain invariant.
  explicit Domain(DomainParts parts);

  const std::vector<SessionDecl>& sessions() const { return parts_.sessions; }
  const std::vector<StoryStatement>& statements() const { return parts_.statements; }
  const std::vector<Question>& questions() const { return parts_.questions; }
  const std::vector<FluentDecl>& fluents() const { return parts_.fluents; }
  const std::vector<Rule>& rules() const { return parts_.rules; }
  const std::vector<Priority>& priorities() const { return parts_.priorities; }
  const DomainParts& parts() const { return parts_; }

  const Question* find_question(int id) const;
  const Rule* find_rule(RuleLabel label) const;
  const SessionDecl* find_session(int id) const;
  bool is_fluent(std::string_view name, std::size_t arity) const;

  bool empty() const;

  friend bool operator==(const Domain& a, const Domain& b);

 private:
  DomainParts parts_;
};

/// Lists every invariant violation in `parts`; empty when Domain(parts) would
/// succeed.
std::vector<std::string> domain_problems(const DomainParts& parts);

// Canonical serialisation in STAR concrete syntax.
std::string canonical_text(const Term& term);
std::string canonical_text(const Atom& atom);
std::string canonical_text(const Literal& literal);
std::string canonical_text(const TimePoint& when);
std::string canonical_text(const RuleLabel& label);
std::string canonical_text(const StoryStatement& statement);
std::string canonical_text(const Question& question);
std::string canonical_text(const SessionDecl& session);
std::string canonical_text(const Rule& rule);
std::string canonical_text(const Priority& priority);
std::string canonical_text(const FluentDecl& fluent);
/// `fluents([a(_), b(_,_)]).` for a whole declaration list.
std::string canonical_text(std::span<const FluentDecl> fluents);

/// `name/arity`, counting top-level arguments only.
std::string predicate_signature(const Literal& literal);
std::string predicate_signature(const Atom& atom);

}  // namespace star

#endif  // STAR_SYNTAX_HPP
