#include "star/annotations.hpp"

#include <algorithm>
#include <map>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace star {

using nlohmann::json;

namespace {

bool attaches_left(const std::string& w) {
  static const char* const tight[] = {".", ",", "?", "!", ";", ":", "'s", "n't", "'", ")"};
  return std::any_of(std::begin(tight), std::end(tight), [&](const char* t) { return w == t; });
}

void check_sentence(const Sentence& s, std::size_t sentence_count, const std::string& where) {
  const int n = static_cast<int>(s.tokens.size());
  for (const auto& d : s.deps) {
    if (d.gov < 0 || d.gov > n || d.dep < 1 || d.dep > n) {
      throw AnnotationFormatError(where + ": dependency " + d.rel + " refers to a missing token");
    }
  }
  for (const auto& c : s.corefs) {
    if (c.token < 1 || c.token > n || c.ref_sentence < 0 ||
        static_cast<std::size_t>(c.ref_sentence) >= sentence_count || c.ref_token < 1) {
      throw AnnotationFormatError(where + ": coreference link out of range");
    }
  }
}

std::string normalise_ner(const std::string& tag) {
  static const std::map<std::string, std::string> kinds = {
      {"PERSON", "person"},         {"LOCATION", "location"}, {"CITY", "location"},
      {"COUNTRY", "location"},      {"STATE_OR_PROVINCE", "location"},
      {"ORGANIZATION", "organization"}, {"MONEY", "money"},   {"PERCENT", "percent"},
      {"DATE", "date"},             {"TIME", "time"}};
  auto it = kinds.find(tag);
  return it == kinds.end() ? "none" : it->second;
}

}  // namespace

std::string Sentence::text() const {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty() && !attaches_left(t.word)) out += ' ';
    out += t.word;
  }
  return out;
}

std::size_t AnnotatedStory::sentence_count() const {
  std::size_t n = 0;
  for (const auto& b : blocks) n += b.sentences.size();
  return n;
}

AnnotatedStory parse_annotated_story(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw AnnotationFormatError(std::string("annotations are not valid JSON: ") + e.what());
  }
  AnnotatedStory story;
  try {
    for (const auto& jb : doc.at("blocks")) {
      Block b;
      const auto kind = jb.at("kind").get<std::string>();
      if (kind == "statement") {
        b.kind = BlockKind::statement;
      } else if (kind == "question") {
        b.kind = BlockKind::question;
      } else {
        throw AnnotationFormatError("unknown block kind '" + kind + "'");
      }
      for (const auto& js : jb.at("sentences")) {
        Sentence s;
        for (const auto& jt : js.at("tokens")) {
          s.tokens.push_back({jt.at("word").get<std::string>(), jt.at("lemma").get<std::string>(),
                              jt.at("pos").get<std::string>(), jt.value("ner", std::string("none"))});
        }
        for (const auto& jd : js.at("deps")) {
          s.deps.push_back({jd.at("rel").get<std::string>(), jd.at("gov").get<int>(), jd.at("dep").get<int>()});
        }
        for (const auto& jc : js.value("corefs", json::array())) {
          s.corefs.push_back({jc.at("token").get<int>(), jc.at("refSentence").get<int>(),
                              jc.at("refToken").get<int>()});
        }
        b.sentences.push_back(std::move(s));
      }
      story.blocks.push_back(std::move(b));
    }
  } catch (const json::exception& e) {
    throw AnnotationFormatError(std::string("annotations are missing a field: ") + e.what());
  }
  int index = 0;
  for (const auto& b : story.blocks) {
    for (const auto& s : b.sentences) {
      check_sentence(s, story.sentence_count(), "sentence " + std::to_string(index++));
    }
  }
  return story;
}

std::string to_json(const AnnotatedStory& story) {
  json blocks = json::array();
  for (const auto& b : story.blocks) {
    json sentences = json::array();
    for (const auto& s : b.sentences) {
      json tokens = json::array(), deps = json::array(), corefs = json::array();
      for (const auto& t : s.tokens) {
        tokens.push_back({{"word", t.word}, {"lemma", t.lemma}, {"pos", t.pos}, {"ner", t.ner}});
      }
      for (const auto& d : s.deps) deps.push_back({{"rel", d.rel}, {"gov", d.gov}, {"dep", d.dep}});
      for (const auto& c : s.corefs) {
        corefs.push_back({{"token", c.token}, {"refSentence", c.ref_sentence}, {"refToken", c.ref_token}});
      }
      sentences.push_back({{"tokens", tokens}, {"deps", deps}, {"corefs", corefs}});
    }
    blocks.push_back({{"kind", b.kind == BlockKind::statement ? "statement" : "question"},
                      {"sentences", sentences}});
  }
  return json{{"blocks", blocks}}.dump(2) + "\n";
}

AnnotatedStory from_corenlp_json(std::string_view response) {
  json doc;
  try {
    doc = json::parse(response);
  } catch (const json::parse_error& e) {
    throw AnnotationFormatError(std::string("annotation response is not valid JSON: ") + e.what());
  }
  std::vector<Sentence> sentences;
  try {
    for (const auto& js : doc.at("sentences")) {
      Sentence s;
      for (const auto& jt : js.at("tokens")) {
        s.tokens.push_back({jt.at("word").get<std::string>(), jt.at("lemma").get<std::string>(),
                            jt.at("pos").get<std::string>(),
                            normalise_ner(jt.value("ner", std::string("O")))});
      }
      const json& deps = js.contains("basicDependencies") ? js.at("basicDependencies")
                                                          : js.at("basic-dependencies");
      for (const auto& jd : deps) {
        s.deps.push_back({jd.at("dep").get<std::string>(), jd.at("governor").get<int>(),
                          jd.at("dependent").get<int>()});
      }
      sentences.push_back(std::move(s));
    }
    if (doc.contains("corefs")) {
      for (const auto& [id, chain] : doc.at("corefs").items()) {
        const json* rep = nullptr;
        for (const auto& m : chain) {
          if (m.value("isRepresentativeMention", false)) rep = &m;
        }
        if (!rep) continue;
        const int rep_sentence = rep->at("sentNum").get<int>() - 1;
        const int rep_token = rep->at("headIndex").get<int>();
        for (const auto& m : chain) {
          if (&m == rep) continue;
          const int sn = m.at("sentNum").get<int>() - 1;
          if (sn < 0 || static_cast<std::size_t>(sn) >= sentences.size()) {
            throw AnnotationFormatError("coreference mention in a missing sentence");
          }
          sentences[sn].corefs.push_back({m.at("headIndex").get<int>(), rep_sentence, rep_token});
        }
      }
    }
  } catch (const json::exception& e) {
    throw AnnotationFormatError(std::string("annotation response is missing a field: ") + e.what());
  }
  for (auto& s : sentences) {
    std::sort(s.corefs.begin(), s.corefs.end(),
              [](const CorefLink& a, const CorefLink& b) { return a.token < b.token; });
  }

  AnnotatedStory story;
  for (auto& s : sentences) {
    BlockKind kind = !s.tokens.empty() && s.tokens.back().word == "?" ? BlockKind::question
                                                                      : BlockKind::statement;
    if (story.blocks.empty() || story.blocks.back().kind != kind) story.blocks.push_back({kind, {}});
    story.blocks.back().sentences.push_back(std::move(s));
  }
  int index = 0;
  for (const auto& b : story.blocks) {
    for (const auto& s : b.sentences) {
      check_sentence(s, story.sentence_count(), "sentence " + std::to_string(index++));
    }
  }
  return story;
}

std::string_view to_string(AnnotatorError::Kind kind) {
  switch (kind) {
    case AnnotatorError::Kind::empty_input: return "empty_input";
    case AnnotatorError::Kind::network: return "network";
    case AnnotatorError::Kind::timeout: return "timeout";
    case AnnotatorError::Kind::http_status: return "http_status";
    case AnnotatorError::Kind::malformed: break;
  }
  return "malformed";
}

AnnotatedStory fetch_annotations(std::string_view text, const AnnotatorEndpoint& endpoint) {
  using Kind = AnnotatorError::Kind;
  if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); })) {
    throw AnnotatorError(Kind::empty_input, "story text is empty");
  }
  const std::string& url = endpoint.url;
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos || url.substr(0, scheme_end) != "http") {
    throw AnnotatorError(Kind::network, "annotator URL must start with http://: " + url);
  }
  auto path_start = url.find('/', scheme_end + 3);
  std::string origin = path_start == std::string::npos ? url : url.substr(0, path_start);
  std::string path = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!path.empty() && path.back() == '/') path.pop_back();

  const std::string properties =
      R"({"annotators":"tokenize,ssplit,pos,lemma,ner,depparse,coref","outputFormat":"json"})";
  std::string target = path + "/?properties=" + httplib::detail::encode_query_param(properties);

  httplib::Client client(origin);
  const auto timeout = endpoint.timeout;
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count(),
                                static_cast<long>((timeout.count() % 1000) * 1000));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count(),
                          static_cast<long>((timeout.count() % 1000) * 1000));
  client.set_write_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count(),
                           static_cast<long>((timeout.count() % 1000) * 1000));

  const auto start = std::chrono::steady_clock::now();
  auto res = client.Post(target, std::string(text), "text/plain; charset=utf-8");
  if (!res) {
    const auto elapsed = std::chrono::steady_clock::now() - start;
    const auto err = res.error();
    if (err == httplib::Error::ConnectionTimeout ||
        (err == httplib::Error::Read && elapsed >= timeout * 9 / 10)) {
      throw AnnotatorError(Kind::timeout, "annotator did not answer within " +
                                              std::to_string(timeout.count()) + " ms");
    }
    throw AnnotatorError(Kind::network, "annotator request failed: " + httplib::to_string(err));
  }
  if (res->status != 200) {
    throw AnnotatorError(Kind::http_status, "annotator answered HTTP " + std::to_string(res->status));
  }
  try {
    AnnotatedStory story = from_corenlp_json(res->body);
    if (story.blocks.empty()) throw AnnotationFormatError("annotator returned no sentences");
    return story;
  } catch (const AnnotationFormatError& e) {
    throw AnnotatorError(Kind::malformed, e.what());
  }
}

}  // namespace star
