// Conversion of an annotated natural-language story into STAR story clauses.

#ifndef STAR_NL2STAR_HPP
#define STAR_NL2STAR_HPP

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "star/annotations.hpp"
#include "star/syntax.hpp"

namespace star {

class ConversionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Session k (k >= 1) holds the statement sentences and question sentences
/// listed for it, as global sentence indices.
struct SessionPlan {
  int id = 0;
  std::vector<int> statements;
  std::vector<int> questions;
};

/// Throws ConversionError for an empty story or one that opens with questions.
std::vector<SessionPlan> segment_sessions(const AnnotatedStory& story);

struct TraceEntry {
  int sentence = 0;  // global index
  std::string text;
  bool question = false;
  std::optional<Literal> literal;  // absent when the sentence could not be converted
  std::vector<std::string> sources;  // dependency relations consumed
  int time = 0;
  int session = 0;
  std::vector<std::string> notes;
  std::optional<std::string> error;
};

struct ConversionTrace {
  std::vector<TraceEntry> sentences;
};

/// Constant naming and typing for every noun, named entity and pronoun.
class EntityTable {
 public:
  explicit EntityTable(const AnnotatedStory& story);

  /// Constant for token `token` (1-based) of global sentence `sentence`.
  std::string constant(int sentence, int token);
  /// `is_person(bob)`-style typing atoms, sorted by canonical text.
  std::vector<Atom> typing() const;
  const std::vector<std::string>& notes() const { return notes_; }

 private:
  const Sentence& sentence(int index) const { return *sentences_[index]; }
  std::string fresh(const std::string& stem, const std::string& type);

  std::vector<const Sentence*> sentences_;
  std::map<std::pair<int, int>, std::string> assigned_;
  std::map<std::string, int> counters_;
  std::map<std::string, std::string> latest_;  // lemma -> most recent constant
  std::map<std::string, std::string> types_;   // constant -> type predicate
  std::vector<std::string> notes_;
};

struct BuiltPredicate {
  std::optional<Literal> literal;
  std::vector<std::string> sources;
  std::vector<std::string> notes;
  std::optional<std::string> error;
};

/// Predicate of one sentence. `sentence_index` is the global index used for
/// coreference lookups.
BuiltPredicate build_predicate(const Sentence& sentence, int sentence_index, EntityTable& entities);

/// ROOT has an `aux` dependent with lemma `have` tagged VBD.
bool is_past_perfect(const Sentence& sentence);

struct ConversionResult {
  Domain domain;
  std::string text;  // format_domain(domain)
  ConversionTrace trace;
};

ConversionResult convert(const AnnotatedStory& story);

/// `sentence 3 [s(2), t=12]: -do_want(mary,answer(phone1)) <- aux neg nsubj xcomp`
std::string to_string(const TraceEntry& entry);

}  // namespace star

#endif  // STAR_NL2STAR_HPP
