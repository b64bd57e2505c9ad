#include "star/parser.hpp"

#include <cctype>
#include <charconv>
#include <map>
#include <set>
#include <sstream>

namespace star {

namespace {

enum class Tok {
  ident,     // lowercase-initial identifier
  variable,  // uppercase-initial or `_`
  integer,
  lparen,
  rparen,
  lbracket,
  rbracket,
  comma,
  period,
  semicolon,
  minus,
  implies_sep,  // ::
  query_sep,    // ??
  stronger,     // >>
  bad,
  eof
};

struct Token {
  Tok kind = Tok::eof;
  std::string text;
  int line = 1;
  int column = 1;
};

std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::eof:
      return "end of input";
    case Tok::bad:
      return "unexpected character '" + t.text + "'";
    default:
      return "'" + t.text + "'";
  }
}

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  int last_line = 1, last_col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      last_line = line;
      last_col = col;
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '%') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.column = col;
    std::size_t start = i;
    auto ident_char = [&](std::size_t k) {
      return k < src.size() && (std::isalnum(static_cast<unsigned char>(src[k])) || src[k] == '_');
    };
    if (std::islower(static_cast<unsigned char>(c))) {
      std::size_t k = i;
      while (ident_char(k)) ++k;
      t.kind = Tok::ident;
      t.text = std::string(src.substr(start, k - start));
      advance(k - i);
    } else if (std::isupper(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t k = i;
      while (ident_char(k)) ++k;
      t.kind = Tok::variable;
      t.text = std::string(src.substr(start, k - start));
      advance(k - i);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t k = i;
      while (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) ++k;
      t.kind = Tok::integer;
      t.text = std::string(src.substr(start, k - start));
      advance(k - i);
    } else {
      auto two = src.substr(i, 2);
      if (two == "::") {
        t.kind = Tok::implies_sep;
      } else if (two == "??") {
        t.kind = Tok::query_sep;
      } else if (two == ">>") {
        t.kind = Tok::stronger;
      }
      if (t.kind != Tok::eof) {
        t.text = std::string(two);
        advance(2);
      } else {
        switch (c) {
          case '(': t.kind = Tok::lparen; break;
          case ')': t.kind = Tok::rparen; break;
          case '[': t.kind = Tok::lbracket; break;
          case ']': t.kind = Tok::rbracket; break;
          case ',': t.kind = Tok::comma; break;
          case '.': t.kind = Tok::period; break;
          case ';': t.kind = Tok::semicolon; break;
          case '-': t.kind = Tok::minus; break;
          default: t.kind = Tok::bad; break;
        }
        t.text = std::string(1, c);
        advance(1);
      }
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.kind = Tok::eof;
  // Anchor end-of-input diagnostics on the last character of the source.
  end.line = src.empty() ? 1 : last_line;
  end.column = src.empty() ? 1 : last_col;
  out.push_back(end);
  return out;
}

struct ParseFailure {
  Token at;
  std::string message;
  std::string hint;
};

struct Located {
  int line;
  int column;
};

enum class Pane { full, story };

class Parser {
 public:
  Parser(std::string_view src, Pane pane) : toks_(lex(src)), pane_(pane) {}

  ParseResult run() {
    while (peek().kind != Tok::eof) {
      std::size_t start = pos_;
      try {
        clause();
      } catch (const ParseFailure& f) {
        report(f.at.line, f.at.column, f.message, f.hint);
        recover(start);
      }
    }
    check_semantics();
    ParseResult result;
    result.diagnostics = std::move(diags_);
    bool has_error = false;
    for (const auto& d : result.diagnostics) has_error |= d.severity == Severity::error;
    if (!has_error) {
      try {
        result.domain = Domain(std::move(parts_));
      } catch (const SyntaxError& e) {
        result.diagnostics.push_back(
            {Severity::error, 1, 1, e.what(), std::string("fix the inconsistent declarations")});
      }
    }
    return result;
  }

  // Entry points for single terms/literals.
  std::optional<Term> single_term() {
    try {
      Term t = term();
      if (peek().kind != Tok::eof) return std::nullopt;
      return t;
    } catch (const ParseFailure&) {
      return std::nullopt;
    } catch (const SyntaxError&) {
      return std::nullopt;
    }
  }

  std::optional<Literal> single_literal() {
    try {
      Literal l = literal();
      if (peek().kind != Tok::eof) return std::nullopt;
      return l;
    } catch (const ParseFailure&) {
      return std::nullopt;
    } catch (const SyntaxError&) {
      return std::nullopt;
    }
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    std::size_t k = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[k];
  }

  Token next() {
    Token t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }

  [[noreturn]] void fail(const Token& at, std::string message, std::string hint) {
    throw ParseFailure{at, std::move(message), std::move(hint)};
  }

  Token expect(Tok kind, const char* what, const char* hint) {
    const Token& t = peek();
    if (t.kind != kind) {
      if (t.kind == Tok::eof) {
        fail(t, "unterminated clause: expected " + std::string(what) + " before end of input",
             "end every clause with '.'");
      }
      fail(t, "expected " + std::string(what) + " but found " + describe(t), hint);
    }
    return next();
  }

  bool is_keyword(const Token& t, std::string_view kw) const {
    return t.kind == Tok::ident && t.text == kw;
  }

  void report(int line, int column, std::string message, std::string hint) {
    diags_.push_back({Severity::error, line, column, std::move(message), std::move(hint)});
  }

  // Skip to just past the next period (or to EOF).
  void recover(std::size_t start) {
    if (pos_ == start && peek().kind != Tok::eof) {
      if (next().kind == Tok::period) return;
    }
    while (peek().kind != Tok::eof) {
      if (next().kind == Tok::period) return;
    }
  }

  int integer(const char* what) {
    Token t = expect(Tok::integer, what, "write a non-negative integer");
    int value = 0;
    auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), value);
    if (ec != std::errc()) fail(t, "integer out of range", "use a smaller number");
    return value;
  }

  // `x(N)` where x is a fixed letter; returns N.
  int tagged_index(const char* tag) {
    Token t = next();
    if (!is_keyword(t, tag)) {
      fail(t, std::string("expected ") + tag + "(N)", std::string("write ") + tag + "(N)");
    }
    expect(Tok::lparen, "'('", "write the index in parentheses");
    int n = integer("an index");
    expect(Tok::rparen, "')'", "close the parentheses");
    return n;
  }

  void clause() {
    const Token& t = peek();
    if (t.kind == Tok::ident && peek(1).kind == Tok::lparen) {
      if (t.text == "session") return session_clause();
      if (t.text == "fluents") return fluents_clause();
      if (t.text == "s" && peek(4).kind == Tok::implies_sep) return statement_clause();
      if (t.text == "q" && peek(4).kind == Tok::query_sep) return question_clause();
      if ((t.text == "c" || t.text == "p") && peek(4).kind == Tok::implies_sep) {
        return rule_clause();
      }
      if ((t.text == "c" || t.text == "p") && peek(4).kind == Tok::stronger) {
        return priority_clause();
      }
    }
    fail(t, "unknown clause starting with " + describe(t),
         "clauses are session(...), s(N) :: ..., q(N) ?? ..., fluents([...]), c(N)/p(N) :: ..., "
         "or c(N) >> c(M)");
  }

  void end_clause() {
    const Token& t = peek();
    if (t.kind == Tok::period) {
      next();
      return;
    }
    if (t.kind == Tok::eof) {
      fail(t, "unterminated clause", "end every clause with '.'");
    }
    fail(t, "expected '.' but found " + describe(t), "end the clause with '.'");
  }

  void knowledge_in_story_pane(const Token& at) {
    if (pane_ == Pane::story) {
      fail(at, "background-knowledge clause in story pane",
           "move fluents, rules and priorities to the background knowledge pane");
    }
  }

  void session_clause() {
    Token start = next();  // session
    expect(Tok::lparen, "'('", "write session(s(N),[...],all).");
    SessionDecl decl;
    decl.id = tagged_index("s");
    expect(Tok::comma, "','", "separate the session id and the question list with ','");
    expect(Tok::lbracket, "'['", "list the session's questions in brackets");
    if (peek().kind != Tok::rbracket) {
      while (true) {
        decl.questions.push_back(tagged_index("q"));
        if (peek().kind == Tok::comma) {
          next();
          continue;
        }
        break;
      }
    }
    expect(Tok::rbracket, "']'", "close the question list with ']'");
    expect(Tok::comma, "','", "follow the question list with ',all'");
    Token vis = next();
    if (!is_keyword(vis, "all")) fail(vis, "session visibility must be 'all'", "write ',all)'");
    expect(Tok::rparen, "')'", "close session(...)");
    end_clause();
    session_pos_.push_back({start.line, start.column});
    parts_.sessions.push_back(std::move(decl));
  }

  void fluents_clause() {
    Token start = next();
    knowledge_in_story_pane(start);
    expect(Tok::lparen, "'('", "write fluents([name(_,...), ...]).");
    expect(Tok::lbracket, "'['", "list fluents in brackets");
    std::vector<FluentDecl> decls;
    if (peek().kind != Tok::rbracket) {
      while (true) {
        Token at = peek();
        Literal lit = literal();
        if (lit.negative) fail(at, "fluent declarations cannot be negated", "drop the '-'");
        for (const auto& arg : lit.atom.args) {
          if (!arg.is_variable()) {
            fail(at, "fluent declarations use '_' placeholders for arguments",
                 "write e.g. is_ringing(_)");
          }
        }
        decls.push_back({lit.atom.predicate, static_cast<int>(lit.atom.arity())});
        fluent_pos_.push_back({at.line, at.column});
        if (peek().kind == Tok::comma) {
          next();
          continue;
        }
        break;
      }
    }
    expect(Tok::rbracket, "']'", "close the fluent list with ']'");
    expect(Tok::rparen, "')'", "close fluents(...)");
    end_clause();
    for (auto& d : decls) parts_.fluents.push_back(std::move(d));
  }

  void statement_clause() {
    Token start = peek();
    int session = tagged_index("s");
    expect(Tok::implies_sep, "'::'", "write s(N) :: Literal at T.");
    Literal lit = literal();
    TimePoint when = time_point();
    end_clause();
    statement_pos_.push_back({start.line, start.column});
    parts_.statements.push_back({session, std::move(lit), when});
  }

  TimePoint time_point() {
    Token at = next();
    if (!is_keyword(at, "at")) {
      fail(at, "expected 'at' but found " + describe(at), "give the time-point: '... at 6.'");
    }
    const Token& t = peek();
    if (is_keyword(t, "always")) {
      next();
      return TimePoint::always();
    }
    if (t.kind != Tok::integer) {
      fail(t, "expected a time-point but found " + describe(t),
           "time-points are 'always' or a non-negative integer");
    }
    return TimePoint::at(integer("a time-point"));
  }

  void question_clause() {
    Token start = peek();
    Question q;
    q.id = tagged_index("q");
    expect(Tok::query_sep, "'?\?'", "write q(N) ?? Literal at T.");
    while (true) {
      Literal lit = literal();
      Token at = peek();
      TimePoint when = time_point();
      if (when.is_always()) {
        fail(at, "question choices need a numeric time-point", "replace 'always' with a number");
      }
      q.choices.push_back({std::move(lit), when.time()});
      if (peek().kind == Tok::semicolon) {
        next();
        continue;
      }
      break;
    }
    end_clause();
    question_pos_.push_back({start.line, start.column});
    parts_.questions.push_back(std::move(q));
  }

  RuleLabel rule_label() {
    Token t = next();
    RuleLabel label;
    if (is_keyword(t, "c")) {
      label.kind = RuleKind::causal;
    } else if (is_keyword(t, "p")) {
      label.kind = RuleKind::property;
    } else {
      fail(t, "expected a rule label c(N) or p(N)", "causal rules are c(N), property rules p(N)");
    }
    expect(Tok::lparen, "'('", "write the rule index in parentheses");
    label.index = integer("a rule index");
    expect(Tok::rparen, "')'", "close the rule label");
    return label;
  }

  void rule_clause() {
    Token start = peek();
    knowledge_in_story_pane(start);
    Rule rule;
    rule.label = rule_label();
    expect(Tok::implies_sep, "'::'", "write c(N) :: Body causes Head.");
    std::vector<Literal> body;
    bool tautology = false;
    if (is_keyword(peek(), "true") && peek(1).kind != Tok::lparen) {
      next();
      tautology = true;
    } else {
      while (true) {
        body.push_back(literal());
        if (peek().kind == Tok::comma) {
          next();
          continue;
        }
        break;
      }
    }
    Token conn = next();
    bool causes = is_keyword(conn, "causes");
    bool implies = is_keyword(conn, "implies");
    if (!causes && !implies) {
      fail(conn, "expected 'causes' or 'implies' but found " + describe(conn),
           "separate body and head with 'causes' (c rules) or 'implies' (p rules)");
    }
    if (causes && rule.label.kind != RuleKind::causal) {
      fail(conn, "property rule " + canonical_text(rule.label) + " must use 'implies'",
           "relabel it c(N) or write 'implies'");
    }
    if (implies && rule.label.kind != RuleKind::property) {
      fail(conn, "causal rule " + canonical_text(rule.label) + " must use 'causes'",
           "relabel it p(N) or write 'causes'");
    }
    rule.head = literal();
    if (peek().kind == Tok::comma) {
      fail(peek(), "rule must have exactly one head literal",
           "split the rule into one rule per head literal");
    }
    end_clause();
    rule.body = tautology ? RuleBody::tautology() : RuleBody::of(std::move(body));
    rule_pos_.push_back({start.line, start.column});
    parts_.rules.push_back(std::move(rule));
  }

  void priority_clause() {
    Token start = peek();
    knowledge_in_story_pane(start);
    Priority p;
    p.stronger = rule_label();
    expect(Tok::stronger, "'>>'", "write c(N) >> c(M).");
    p.weaker = rule_label();
    end_clause();
    priority_pos_.push_back({start.line, start.column});
    parts_.priorities.push_back(p);
  }

  Literal literal() {
    bool negative = false;
    if (peek().kind == Tok::minus) {
      next();
      negative = true;
      if (peek().kind == Tok::minus) {
        fail(peek(), "double negation is not allowed", "remove one '-'");
      }
    }
    Token name = peek();
    if (name.kind != Tok::ident) {
      if (name.kind == Tok::eof) fail(name, "unterminated clause", "end every clause with '.'");
      fail(name, "expected a predicate name but found " + describe(name),
           "predicate names start with a lowercase letter");
    }
    if (name.text == "causes" || name.text == "implies" || name.text == "at") {
      fail(name, "missing literal before '" + name.text + "'", "add the missing literal");
    }
    next();
    std::vector<Term> args;
    if (peek().kind == Tok::lparen) args = term_list();
    return Literal(Atom(name.text, std::move(args)), negative);
  }

  std::vector<Term> term_list() {
    expect(Tok::lparen, "'('", "open the argument list");
    std::vector<Term> args;
    if (peek().kind == Tok::rparen) {
      fail(peek(), "empty argument list", "drop the parentheses for zero-arity predicates");
    }
    while (true) {
      args.push_back(term());
      if (peek().kind == Tok::comma) {
        next();
        continue;
      }
      break;
    }
    expect(Tok::rparen, "')'", "close the argument list");
    return args;
  }

  Term term() {
    Token t = peek();
    if (t.kind == Tok::variable) {
      next();
      return Term::variable(t.text);
    }
    if (t.kind == Tok::ident) {
      next();
      if (peek().kind == Tok::lparen) return Term::compound(t.text, term_list());
      return Term::constant(t.text);
    }
    fail(t, "expected a term but found " + describe(t),
         "terms are constants (lowercase), variables (uppercase) or f(...)");
  }

  void check_semantics() {
    auto at = [&](Located loc, std::string message, std::string hint) {
      report(loc.line, loc.column, std::move(message), std::move(hint));
    };

    std::set<int> session_ids;
    for (std::size_t i = 0; i < parts_.sessions.size(); ++i) {
      const auto& s = parts_.sessions[i];
      if (!session_ids.insert(s.id).second) {
        at(session_pos_[i], "session s(" + std::to_string(s.id) + ") declared twice",
           "remove the duplicate session clause");
      }
    }
    {
      int expected = 0;
      for (int id : session_ids) {
        if (id != expected) {
          std::size_t k = 0;
          while (parts_.sessions[k].id != id) ++k;
          at(session_pos_[k],
             "session ids must be consecutive from s(0); s(" + std::to_string(expected) +
                 ") is missing",
             "declare session(s(" + std::to_string(expected) + "),[],all).");
          break;
        }
        ++expected;
      }
    }

    std::set<int> question_ids;
    for (std::size_t i = 0; i < parts_.questions.size(); ++i) {
      if (!question_ids.insert(parts_.questions[i].id).second) {
        at(question_pos_[i], "question q(" + std::to_string(parts_.questions[i].id) + ") declared twice",
           "give each question a distinct number");
      }
    }
    for (std::size_t i = 0; i < parts_.sessions.size(); ++i) {
      for (int q : parts_.sessions[i].questions) {
        if (!question_ids.count(q)) {
          at(session_pos_[i], "unknown question q(" + std::to_string(q) + ") in session clause",
             "declare q(" + std::to_string(q) + ") ?? ... or remove it from the session");
        }
      }
    }

    for (std::size_t i = 0; i < parts_.statements.size(); ++i) {
      const auto& st = parts_.statements[i];
      if (!session_ids.count(st.session)) {
        at(statement_pos_[i], "unknown session s(" + std::to_string(st.session) + ")",
           "declare session(s(" + std::to_string(st.session) + "),[...],all).");
      }
      if (st.session == 0 && !st.when.is_always()) {
        at(statement_pos_[i], "session s(0) holds typing statements only",
           "write the typing statement 'at always' or move it to a later session");
      }
      if (st.session != 0 && st.when.is_always()) {
        at(statement_pos_[i], "'at always' is reserved for session s(0) typing statements",
           "give the statement a numeric time-point");
      }
      if (!st.literal.atom.is_ground()) {
        at(statement_pos_[i], "story statements must not contain variables",
           "replace variables with constants");
      }
    }

    std::set<std::pair<std::string, int>> fluents;
    for (std::size_t i = 0; i < parts_.fluents.size(); ++i) {
      const auto& f = parts_.fluents[i];
      if (!fluents.insert({f.name, f.arity}).second) {
        at(fluent_pos_[i], "fluent " + f.name + "/" + std::to_string(f.arity) + " declared twice",
           "remove the duplicate declaration");
      }
    }

    std::set<RuleLabel> labels;
    for (std::size_t i = 0; i < parts_.rules.size(); ++i) {
      if (!labels.insert(parts_.rules[i].label).second) {
        at(rule_pos_[i], "duplicate rule label " + canonical_text(parts_.rules[i].label),
           "give every rule a unique label");
      }
    }
    for (std::size_t i = 0; i < parts_.priorities.size(); ++i) {
      const auto& p = parts_.priorities[i];
      if (p.stronger == p.weaker) {
        at(priority_pos_[i], "rule " + canonical_text(p.stronger) + " cannot be stronger than itself",
           "remove the priority");
      }
      for (const auto& l : {p.stronger, p.weaker}) {
        if (!labels.count(l)) {
          at(priority_pos_[i], "priority refers to undeclared rule " + canonical_text(l),
             "declare " + canonical_text(l) + " or fix the label");
        }
      }
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  Pane pane_;
  DomainParts parts_;
  std::vector<Diagnostic> diags_;
  std::vector<Located> session_pos_, statement_pos_, question_pos_, fluent_pos_, rule_pos_,
      priority_pos_;
};

}  // namespace

ParseResult parse_domain(std::string_view source) { return Parser(source, Pane::full).run(); }

ParseResult parse_story_only(std::string_view source) {
  return Parser(source, Pane::story).run();
}

std::optional<Term> parse_term(std::string_view text) {
  return Parser(text, Pane::full).single_term();
}

std::optional<Literal> parse_literal(std::string_view text) {
  return Parser(text, Pane::full).single_literal();
}

std::string format_domain(const Domain& domain) {
  std::vector<std::vector<std::string>> groups(6);
  for (const auto& s : domain.sessions()) groups[0].push_back(canonical_text(s));
  for (const auto& st : domain.statements()) groups[1].push_back(canonical_text(st));
  for (const auto& q : domain.questions()) groups[2].push_back(canonical_text(q));
  if (!domain.fluents().empty()) groups[3].push_back(canonical_text(std::span(domain.fluents())));
  for (const auto& r : domain.rules()) groups[4].push_back(canonical_text(r));
  for (const auto& p : domain.priorities()) groups[5].push_back(canonical_text(p));

  std::string out;
  for (const auto& g : groups) {
    if (g.empty()) continue;
    if (!out.empty()) out += '\n';
    for (const auto& line : g) {
      out += line;
      out += '\n';
    }
  }
  return out;
}

std::string to_string(const Diagnostic& d) {
  std::ostringstream os;
  os << d.line << ':' << d.column << ": "
     << (d.severity == Severity::error ? "error" : "warning") << ": " << d.message;
  if (d.hint) os << " (hint: " << *d.hint << ")";
  return os.str();
}

}  // namespace star
