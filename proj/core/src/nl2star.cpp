#include "star/nl2star.hpp"

#include <algorithm>
#include <set>

#include "star/parser.hpp"

namespace star {

namespace {

const std::set<std::string> entity_kinds = {"location", "person", "organization", "money",
                                            "percent",  "date",   "time"};

// Base relations we know about; anything else is noted and ignored.
const std::set<std::string> known_relations = {
    "acl",   "advcl", "advmod", "amod",   "appos",    "aux",   "auxpass",   "case",  "cc",
    "ccomp", "compound", "conj", "cop",   "csubj",    "csubjpass", "dep",   "det",   "discourse",
    "dobj",  "expl",  "fixed",  "flat",   "goeswith", "iobj",  "list",      "mark",  "mwe",
    "neg",   "nmod",  "npadvmod", "nsubj", "nsubjpass", "nummod", "obj",    "obl",   "orphan",
    "parataxis", "poss", "predet", "preconj", "prt", "punct", "ref", "remnant", "reparandum",
    "root",  "tmod",  "vocative", "xcomp"};

const std::set<std::string> argument_relations = {"nsubj", "nsubjpass", "dobj", "obj", "iobj",
                                                  "nmod", "obl", "xcomp"};

std::string base_relation(const std::string& rel) {
  std::string r = rel;
  std::transform(r.begin(), r.end(), r.begin(), [](unsigned char c) { return std::tolower(c); });
  if (r == "aux:pass") return "auxpass";
  if (r == "nsubj:pass") return "nsubjpass";
  if (r == "compound:prt") return "prt";
  auto colon = r.find(':');
  return colon == std::string::npos ? r : r.substr(0, colon);
}

// Lowercase and keep only characters legal in a constant name.
std::string identifier(const std::string& text) {
  std::string out;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      out += static_cast<char>(std::tolower(c));
    } else if (!out.empty() && out.back() != '_') {
      out += '_';
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  if (out.empty()) return "x";
  if (!std::islower(static_cast<unsigned char>(out.front()))) out = "x" + out;
  return out;
}

std::vector<const Dependency*> children(const Sentence& s, int head) {
  std::vector<const Dependency*> out;
  for (const auto& d : s.deps) {
    if (d.gov == head && d.dep != head) out.push_back(&d);
  }
  std::sort(out.begin(), out.end(), [](const Dependency* a, const Dependency* b) { return a->dep < b->dep; });
  return out;
}

const Token& token(const Sentence& s, int index) { return s.tokens.at(index - 1); }

std::string lemma_of(const Sentence& s, int index) {
  const Token& t = token(s, index);
  return t.lemma.empty() ? t.word : t.lemma;
}

bool is_noun(const Token& t) { return t.pos.starts_with("NN"); }
bool is_pronoun(const Token& t) { return t.pos == "PRP"; }

}  // namespace

std::vector<SessionPlan> segment_sessions(const AnnotatedStory& story) {
  if (story.sentence_count() == 0) throw ConversionError("story is empty");
  std::vector<SessionPlan> plans;
  std::vector<int> pending;
  int index = 0;
  for (const auto& block : story.blocks) {
    std::vector<int> ids;
    for (std::size_t i = 0; i < block.sentences.size(); ++i) ids.push_back(index++);
    if (ids.empty()) continue;
    if (block.kind == BlockKind::statement) {
      pending.insert(pending.end(), ids.begin(), ids.end());
      continue;
    }
    if (pending.empty()) {
      if (plans.empty()) throw ConversionError("no statements precede questions");
      auto& q = plans.back().questions;
      q.insert(q.end(), ids.begin(), ids.end());
      continue;
    }
    plans.push_back({static_cast<int>(plans.size()) + 1, std::move(pending), ids});
    pending.clear();
  }
  if (!pending.empty()) plans.push_back({static_cast<int>(plans.size()) + 1, std::move(pending), {}});
  return plans;
}

EntityTable::EntityTable(const AnnotatedStory& story) {
  for (const auto& b : story.blocks) {
    for (const auto& s : b.sentences) sentences_.push_back(&s);
  }
}

std::string EntityTable::fresh(const std::string& stem, const std::string& type) {
  std::string name;
  do {
    name = stem + std::to_string(++counters_[stem]);
  } while (types_.count(name));
  latest_[stem] = name;
  types_[name] = type;
  return name;
}

std::string EntityTable::constant(int sentence_index, int token_index) {
  const auto key = std::pair(sentence_index, token_index);
  if (auto it = assigned_.find(key); it != assigned_.end()) return it->second;
  const Sentence& s = sentence(sentence_index);

  for (const auto& link : s.corefs) {
    if (link.token != token_index) continue;
    if (link.ref_sentence == sentence_index && link.ref_token == token_index) break;
    if (static_cast<std::size_t>(link.ref_sentence) >= sentences_.size() ||
        link.ref_token > static_cast<int>(sentence(link.ref_sentence).tokens.size())) {
      break;
    }
    assigned_[key] = "";  // guards against cyclic chains
    std::string c = constant(link.ref_sentence, link.ref_token);
    if (!c.empty()) {
      assigned_[key] = c;
      return c;
    }
    assigned_.erase(key);
    break;
  }

  const Token& t = token(s, token_index);
  std::string name;
  if (entity_kinds.count(t.ner)) {
    // Multi-word names: the run of neighbouring tokens with the same label.
    int first = token_index, last = token_index;
    while (first > 1 && token(s, first - 1).ner == t.ner && is_noun(token(s, first - 1))) --first;
    while (last < static_cast<int>(s.tokens.size()) && token(s, last + 1).ner == t.ner &&
           is_noun(token(s, last + 1))) {
      ++last;
    }
    std::string words;
    for (int i = first; i <= last; ++i) words += (words.empty() ? "" : "_") + token(s, i).word;
    name = identifier(words);
    types_.emplace(name, t.ner);
  } else if (t.pos.starts_with("NNP")) {
    name = identifier(t.word);
    types_.emplace(name, "entity");
  } else if (is_pronoun(t)) {
    name = fresh("person", "person");
    notes_.push_back("unresolved pronoun '" + t.word + "' in sentence " +
                     std::to_string(sentence_index) + " became " + name);
  } else {
    const std::string stem = identifier(lemma_of(s, token_index));
    bool indefinite = false;
    for (const auto* d : children(s, token_index)) {
      if (base_relation(d->rel) != "det") continue;
      std::string det = identifier(lemma_of(s, d->dep));
      if (det == "a" || det == "an") indefinite = true;
    }
    auto latest = latest_.find(stem);
    name = (!indefinite && latest != latest_.end()) ? latest->second : fresh(stem, stem);
  }
  assigned_[key] = name;
  return name;
}

std::vector<Atom> EntityTable::typing() const {
  std::vector<Atom> atoms;
  for (const auto& [constant, type] : types_) {
    atoms.emplace_back("is_" + identifier(type), std::vector<Term>{Term::constant(constant)});
  }
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return canonical_text(a) < canonical_text(b); });
  return atoms;
}

bool is_past_perfect(const Sentence& sentence) {
  for (const auto& d : sentence.deps) {
    if (d.gov != 0) continue;
    for (const auto* c : children(sentence, d.dep)) {
      if (base_relation(c->rel) == "aux" && identifier(lemma_of(sentence, c->dep)) == "have" &&
          token(sentence, c->dep).pos == "VBD") {
        return true;
      }
    }
  }
  return false;
}

namespace {

Term argument_term(const Sentence& s, int sentence_index, int head, EntityTable& entities,
                   std::vector<std::string>& notes, int depth);

std::vector<Term> arguments_of(const Sentence& s, int sentence_index, int head,
                               EntityTable& entities, std::vector<std::string>& sources,
                               std::vector<std::string>& notes, int depth) {
  std::vector<Term> args;
  for (const auto* d : children(s, head)) {
    const std::string base = base_relation(d->rel);
    if (!argument_relations.count(base)) continue;
    sources.push_back(d->rel);
    if (base == "xcomp") {
      args.push_back(argument_term(s, sentence_index, d->dep, entities, notes, depth + 1));
    } else {
      args.push_back(Term::constant(entities.constant(sentence_index, d->dep)));
    }
  }
  return args;
}

// An xcomp dependent becomes a nested compound over its own arguments.
Term argument_term(const Sentence& s, int sentence_index, int head, EntityTable& entities,
                   std::vector<std::string>& notes, int depth) {
  const std::string name = identifier(lemma_of(s, head));
  if (depth > 8) return Term::constant(name);
  std::vector<std::string> ignored;
  auto args = arguments_of(s, sentence_index, head, entities, ignored, notes, depth);
  if (args.empty()) return Term::constant(name);
  return Term::compound(name, std::move(args));
}

}  // namespace

BuiltPredicate build_predicate(const Sentence& s, int sentence_index, EntityTable& entities) {
  BuiltPredicate out;
  std::vector<int> roots;
  for (const auto& d : s.deps) {
    if (d.gov == 0) roots.push_back(d.dep);
  }
  if (roots.empty()) {
    out.error = "sentence has no ROOT dependency";
    return out;
  }
  if (roots.size() > 1) {
    out.error = "sentence has more than one ROOT dependency";
    return out;
  }
  const int root = roots.front();

  std::vector<std::string> prefix, suffix;
  bool negative = false;
  for (const auto* d : children(s, root)) {
    const std::string base = base_relation(d->rel);
    if (!known_relations.count(base)) {
      out.notes.push_back("ignored unknown relation '" + d->rel + "'");
      continue;
    }
    std::string lemma = identifier(lemma_of(s, d->dep));
    if (base == "aux" || base == "auxpass" || base == "cop") {
      prefix.push_back(lemma == "be" ? "is" : lemma);
      out.sources.push_back(d->rel);
    } else if (base == "prt" || base == "amod" || base == "case") {
      suffix.push_back(lemma);
      out.sources.push_back(d->rel);
    } else if (base == "neg" || (base == "advmod" && (lemma == "not" || lemma == "n_t" || lemma == "never"))) {
      negative = true;
      out.sources.push_back(d->rel);
    }
  }

  std::string name;
  for (const auto& p : prefix) name += p + "_";
  name += identifier(lemma_of(s, root));
  for (const auto& p : suffix) name += "_" + p;

  auto args = arguments_of(s, sentence_index, root, entities, out.sources, out.notes, 0);
  if (args.empty()) out.notes.push_back("ROOT has no argument dependents; predicate has no arguments");
  out.literal = Literal(Atom(name, std::move(args)), negative);
  return out;
}

ConversionResult convert(const AnnotatedStory& story) {
  auto plans = segment_sessions(story);

  std::vector<const Sentence*> sentences;
  std::vector<bool> question;
  for (const auto& b : story.blocks) {
    for (const auto& s : b.sentences) {
      sentences.push_back(&s);
      question.push_back(b.kind == BlockKind::question);
    }
  }

  EntityTable entities(story);
  // Every noun, named entity and personal pronoun gets its constant in
  // document order, whether or not it ends up as an argument.
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    for (std::size_t k = 0; k < sentences[i]->tokens.size(); ++k) {
      const Token& t = sentences[i]->tokens[k];
      if (is_noun(t) || is_pronoun(t) || entity_kinds.count(t.ner)) {
        entities.constant(static_cast<int>(i), static_cast<int>(k) + 1);
      }
    }
  }

  ConversionTrace trace;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    TraceEntry e;
    e.sentence = static_cast<int>(i);
    e.text = sentences[i]->text();
    e.question = question[i];
    auto built = build_predicate(*sentences[i], static_cast<int>(i), entities);
    e.literal = built.literal;
    e.sources = std::move(built.sources);
    e.notes = std::move(built.notes);
    e.error = built.error;
    trace.sentences.push_back(std::move(e));
  }
  for (const auto& plan : plans) {
    for (int i : plan.statements) trace.sentences[i].session = plan.id;
    for (int i : plan.questions) trace.sentences[i].session = plan.id;
  }

  // Past-perfect statements first (2, 4, ...), then everything else in
  // document order, continuing from the largest time so far.
  int time = 0;
  for (auto& e : trace.sentences) {
    if (!e.question && e.literal && is_past_perfect(*sentences[e.sentence])) e.time = (time += 2);
  }
  for (auto& e : trace.sentences) {
    if (e.literal && e.time == 0) e.time = (time += 2);
  }

  DomainParts parts;
  parts.sessions.push_back({0, {}});
  for (const auto& atom : entities.typing()) {
    parts.statements.push_back({0, Literal(atom), TimePoint::always()});
  }
  int next_question = 1;
  for (const auto& plan : plans) {
    SessionDecl decl{plan.id, {}};
    for (int i : plan.statements) {
      const auto& e = trace.sentences[i];
      if (e.literal) parts.statements.push_back({plan.id, *e.literal, TimePoint::at(e.time)});
    }
    for (int i : plan.questions) {
      const auto& e = trace.sentences[i];
      if (!e.literal) continue;
      parts.questions.push_back({next_question, {{*e.literal, e.time}}});
      decl.questions.push_back(next_question++);
    }
    parts.sessions.push_back(std::move(decl));
  }
  for (const auto& note : entities.notes()) {
    if (!trace.sentences.empty()) trace.sentences.front().notes.push_back(note);
  }

  ConversionResult result{Domain(std::move(parts)), {}, std::move(trace)};
  result.text = format_domain(result.domain);
  return result;
}

std::string to_string(const TraceEntry& e) {
  std::string out = "sentence " + std::to_string(e.sentence) + " [" + (e.question ? "question" : "statement");
  if (e.literal) out += ", s(" + std::to_string(e.session) + "), t=" + std::to_string(e.time);
  out += "]: ";
  if (e.error) {
    out += "error: " + *e.error;
  } else if (e.literal) {
    out += canonical_text(*e.literal);
    if (!e.sources.empty()) {
      out += " <-";
      for (const auto& s : e.sources) out += " " + s;
    }
  }
  for (const auto& n : e.notes) out += "; " + n;
  return out;
}

}  // namespace star
