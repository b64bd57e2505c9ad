// Session-by-session reading of a Domain: grounding, arguments, grounded
// extension, the resulting comprehension model and question verdicts, plus
// the text rendering of reports.

#ifndef STAR_COMPREHENSION_HPP
#define STAR_COMPREHENSION_HPP

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "star/syntax.hpp"

namespace star {

class ReasoningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Truth : std::uint8_t { unknown, positive, negative };
enum class ConceptClass : std::uint8_t { action, fluent, constant };
enum class Verdict : std::uint8_t { accepted, rejected, possible };

std::string_view to_string(Truth truth);
std::string_view to_string(ConceptClass cls);
std::string_view to_string(Verdict verdict);

/// One ground concept across the time-line.
struct ModelRow {
  std::string atom;       // canonical text, e.g. is_ringing(phone1)
  std::string signature;  // name/arity
  ConceptClass cls = ConceptClass::action;
  bool causal_participant = false;  // occurs in a causal instance of an accepted argument
  int rule_occurrences = 0;         // literals of this predicate across all rules
  std::vector<Truth> values;        // index = time-point, size horizon+1
  std::vector<bool> observed;       // value stated by the story at that time-point
};

struct ComprehensionModel {
  int horizon = 0;
  std::vector<ModelRow> rows;  // sorted by atom text

  const ModelRow* find(std::string_view atom) const;
  Truth value(std::string_view atom, int time) const;
};

struct ModelFilter {
  bool changing_only = false;
  bool no_fluents = false;
  bool no_actions = false;
  bool no_constants = false;
  bool causal_participants_only = false;
  std::optional<int> min_frequency;  // minimum rule_occurrences

  bool empty() const;
};

/// Accepts `changing-only`, `no-fluents`, `no-actions`, `no-constants`,
/// `causal-participants-only` and `min-frequency=K`; nullopt otherwise.
std::optional<ModelFilter> add_filter(ModelFilter filter, std::string_view spec);

ComprehensionModel filter_model(const ComprehensionModel& model, const ModelFilter& filter);

struct Answer {
  int question = 0;
  QuestionChoice choice;
  Verdict verdict = Verdict::possible;
};

struct Qualification {
  std::string attacked;
  std::string attacker;

  friend auto operator<=>(const Qualification&, const Qualification&) = default;
};

struct SessionReport {
  int session = 0;
  int horizon = 0;
  ComprehensionModel model;
  std::vector<Answer> answers;
  std::vector<std::string> universal;   // every rule instance used by some argument
  std::vector<std::string> acceptable;  // instances used by the grounded extension
  std::vector<std::string> retracted;   // acceptable in the previous session only
  std::vector<std::string> elaborated;  // acceptable in this session only
  std::vector<Qualification> qualified;
  std::vector<std::pair<std::string, double>> timings;  // phase, milliseconds
  std::vector<std::string> warnings;
  std::size_t argument_count = 0;
  std::size_t attack_count = 0;
  std::size_t extension_size = 0;
};

struct ReaderOptions {
  bool universal = false;
  bool acceptable = false;
  bool retracted = false;
  bool elaborated = false;
  bool qualified = false;
  bool timings = false;
  bool show_story = false;
  std::optional<int> horizon;    // must be >= every time-point of the domain
  std::optional<int> depth_cap;  // default: number of grounded instances
  std::size_t instance_cap = 1'000'000;
  std::size_t argument_cap = 500'000;
  ModelFilter filter;            // applied when rendering
};

struct ProgressEvent {
  enum class Kind { session_started, grounding_done, arguments_done, extension_done, answers_ready };
  Kind kind = Kind::session_started;
  int session = 0;
  double elapsed_ms = 0;
  std::string detail;
};

std::string_view to_string(ProgressEvent::Kind kind);

using ProgressSink = std::function<void(const ProgressEvent&)>;

/// One report per non-zero session, in order. Throws ReasoningError on
/// grounding failures or an inconsistent model, std::invalid_argument on a
/// horizon override below the domain's time-points.
std::vector<SessionReport> read_story(const Domain& domain, const ReaderOptions& options = {},
                                      const ProgressSink& progress = {});

/// Raw output of one session: banner, requested sections, model, answers.
std::string render_report(const SessionReport& report, const ReaderOptions& options,
                          const Domain& domain);

/// All sessions followed by the closing line.
std::string render_story(const std::vector<SessionReport>& reports, const ReaderOptions& options,
                         const Domain& domain);

/// `,[is_embarrassed(mary)at 20]`
std::string choice_text(const QuestionChoice& choice);

/// Machine-readable reports (JSON) for tooling and the web timeline.
std::string structured_output(const std::vector<SessionReport>& reports,
                              const ReaderOptions& options);

}  // namespace star

#endif  // STAR_COMPREHENSION_HPP
