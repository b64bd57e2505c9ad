#ifndef STAR_PARSER_HPP
#define STAR_PARSER_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "star/syntax.hpp"

namespace star {

enum class Severity { error, warning };

struct Diagnostic {
  Severity severity = Severity::error;
  int line = 1;    // 1-based
  int column = 1;  // 1-based
  std::string message;
  std::optional<std::string> hint;
};

/// `domain` is present iff no diagnostic has error severity.
struct ParseResult {
  std::optional<Domain> domain;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return domain.has_value(); }
};

ParseResult parse_domain(std::string_view source);

/// Story pane: session, statement and question clauses only.
ParseResult parse_story_only(std::string_view source);

/// One clause per line, grouped (sessions, statements, questions,
/// fluents, rules, priorities) with a blank line between non-empty groups.
std::string format_domain(const Domain& domain);

/// `line:column: error: message (hint: ...)`
std::string to_string(const Diagnostic& diagnostic);

/// Parses a single term such as `do(S)` or `P1`; used by the graph model for
/// edge argument labels.
std::optional<Term> parse_term(std::string_view text);

/// Parses a single literal such as `-is_ringing(phone1)`.
std::optional<Literal> parse_literal(std::string_view text);

}  // namespace star

#endif  // STAR_PARSER_HPP
