// Annotated natural-language stories: the in-memory form consumed by
// nl2star, its JSON file format, and a client for a CoreNLP-compatible
// annotation server.

#ifndef STAR_ANNOTATIONS_HPP
#define STAR_ANNOTATIONS_HPP

#include <chrono>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace star {

struct Token {
  std::string word;
  std::string lemma;
  std::string pos;
  std::string ner;  // lowercase entity type, or "none"

  friend bool operator==(const Token&, const Token&) = default;
};

/// Token indices are 1-based; governor 0 is ROOT.
struct Dependency {
  std::string rel;
  int gov = 0;
  int dep = 0;

  friend bool operator==(const Dependency&, const Dependency&) = default;
};

/// Token `token` of this sentence refers to token `ref_token` of sentence
/// `ref_sentence` (0-based over the whole story).
struct CorefLink {
  int token = 0;
  int ref_sentence = 0;
  int ref_token = 0;

  friend bool operator==(const CorefLink&, const CorefLink&) = default;
};

struct Sentence {
  std::vector<Token> tokens;
  std::vector<Dependency> deps;
  std::vector<CorefLink> corefs;

  std::string text() const;
  friend bool operator==(const Sentence&, const Sentence&) = default;
};

enum class BlockKind { statement, question };

struct Block {
  BlockKind kind = BlockKind::statement;
  std::vector<Sentence> sentences;

  friend bool operator==(const Block&, const Block&) = default;
};

struct AnnotatedStory {
  std::vector<Block> blocks;

  std::size_t sentence_count() const;
  friend bool operator==(const AnnotatedStory&, const AnnotatedStory&) = default;
};

class AnnotationFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads the AnnotatedStory JSON document. Throws AnnotationFormatError.
AnnotatedStory parse_annotated_story(std::string_view json_text);
std::string to_json(const AnnotatedStory& story);

/// Maps a CoreNLP server JSON response (sentences with tokens and
/// basicDependencies, plus corefs) to an AnnotatedStory. Sentences ending in
/// `?` are questions; consecutive sentences of one kind share a block.
AnnotatedStory from_corenlp_json(std::string_view response);

class AnnotatorError : public std::runtime_error {
 public:
  enum class Kind { empty_input, network, timeout, http_status, malformed };

  AnnotatorError(Kind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }
  /// Whether repeating the same request may succeed.
  bool retryable() const { return kind_ != Kind::empty_input && kind_ != Kind::malformed; }

 private:
  Kind kind_;
};

std::string_view to_string(AnnotatorError::Kind kind);

struct AnnotatorEndpoint {
  std::string url = "http://localhost:9000";  // scheme://host[:port][/path]
  std::chrono::milliseconds timeout{30'000};
};

/// POSTs `text` to the annotation server and parses its response.
AnnotatedStory fetch_annotations(std::string_view text, const AnnotatorEndpoint& endpoint);

}  // namespace star

#endif  // STAR_ANNOTATIONS_HPP
