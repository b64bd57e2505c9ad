#include "star/comprehension.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "star/argumentation.hpp"
#include "star/grounding.hpp"

namespace star {

std::string_view to_string(Truth truth) {
  switch (truth) {
    case Truth::positive: return "positive";
    case Truth::negative: return "negative";
    case Truth::unknown: break;
  }
  return "unknown";
}

std::string_view to_string(ConceptClass cls) {
  switch (cls) {
    case ConceptClass::fluent: return "fluent";
    case ConceptClass::constant: return "constant";
    case ConceptClass::action: break;
  }
  return "action";
}

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::accepted: return "accepted";
    case Verdict::rejected: return "rejected";
    case Verdict::possible: break;
  }
  return "possible";
}

std::string_view to_string(ProgressEvent::Kind kind) {
  switch (kind) {
    case ProgressEvent::Kind::session_started: return "session_started";
    case ProgressEvent::Kind::grounding_done: return "grounding_done";
    case ProgressEvent::Kind::arguments_done: return "arguments_done";
    case ProgressEvent::Kind::extension_done: return "extension_done";
    case ProgressEvent::Kind::answers_ready: break;
  }
  return "answers_ready";
}

const ModelRow* ComprehensionModel::find(std::string_view atom) const {
  auto it = std::lower_bound(rows.begin(), rows.end(), atom,
                             [](const ModelRow& r, std::string_view a) { return r.atom < a; });
  if (it == rows.end() || it->atom != atom) return nullptr;
  return &*it;
}

Truth ComprehensionModel::value(std::string_view atom, int time) const {
  const ModelRow* row = find(atom);
  if (!row || time < 0 || time >= static_cast<int>(row->values.size())) return Truth::unknown;
  return row->values[time];
}

bool ModelFilter::empty() const {
  return !changing_only && !no_fluents && !no_actions && !no_constants &&
         !causal_participants_only && !min_frequency;
}

std::optional<ModelFilter> add_filter(ModelFilter filter, std::string_view spec) {
  if (spec == "changing-only") {
    filter.changing_only = true;
  } else if (spec == "no-fluents") {
    filter.no_fluents = true;
  } else if (spec == "no-actions") {
    filter.no_actions = true;
  } else if (spec == "no-constants") {
    filter.no_constants = true;
  } else if (spec == "causal-participants-only") {
    filter.causal_participants_only = true;
  } else if (spec.starts_with("min-frequency=")) {
    auto digits = spec.substr(14);
    if (digits.empty() || digits.size() > 6 ||
        !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      return std::nullopt;
    }
    filter.min_frequency = std::stoi(std::string(digits));
  } else {
    return std::nullopt;
  }
  return filter;
}

namespace {

bool passes(const ModelRow& row, const ModelFilter& f) {
  if (f.no_fluents && row.cls == ConceptClass::fluent) return false;
  if (f.no_actions && row.cls == ConceptClass::action) return false;
  if (f.no_constants && row.cls == ConceptClass::constant) return false;
  if (f.causal_participants_only && !row.causal_participant) return false;
  if (f.changing_only) {
    bool changes = std::adjacent_find(row.values.begin(), row.values.end(),
                                      std::not_equal_to<>()) != row.values.end();
    if (!changes) return false;
  }
  if (f.min_frequency && row.rule_occurrences < *f.min_frequency) return false;
  return true;
}

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::vector<std::string> sorted_difference(const std::vector<std::string>& a,
                                           const std::vector<std::string>& b) {
  std::vector<std::string> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::vector<std::string> instance_texts(const Grounding& g, const ArgumentSet& set,
                                        const std::vector<std::uint32_t>* only) {
  std::set<std::uint32_t> used;
  auto collect = [&](const Argument& a) {
    for (const auto& st : a.steps) {
      if (st.kind != StepKind::premise) used.insert(st.index);
    }
  };
  if (only) {
    for (auto id : *only) collect(set.arguments[id]);
  } else {
    for (const auto& a : set.arguments) collect(a);
  }
  std::set<std::string> texts;
  for (auto i : used) texts.insert(to_text(g.instances[i], g.atoms));
  return {texts.begin(), texts.end()};
}

ComprehensionModel build_model(const Grounding& g, const ArgumentSet& set,
                               const std::vector<std::uint32_t>& accepted,
                               const std::map<std::string, int>& occurrences) {
  const int width = g.horizon + 1;
  std::vector<std::vector<Truth>> values(g.atoms.size(), std::vector<Truth>(width, Truth::unknown));
  std::vector<std::vector<bool>> observed(g.atoms.size(), std::vector<bool>(width, false));
  std::vector<bool> participant(g.atoms.size(), false);

  auto assign = [&](const TimedLiteral& l) {
    if (l.time < 0 || l.time >= width) return;
    Truth v = l.negative ? Truth::negative : Truth::positive;
    Truth& slot = values[l.atom][l.time];
    if (slot != Truth::unknown && slot != v) {
      throw ReasoningError("inconsistent comprehension model: " + g.atoms.text(l.atom) +
                           " is both true and false at " + std::to_string(l.time));
    }
    slot = v;
  };

  for (const auto& p : g.premises) {
    assign(p.literal);
    if (p.literal.time < width) observed[p.literal.atom][p.literal.time] = true;
  }
  for (auto id : accepted) {
    for (const auto& st : set.arguments[id].steps) {
      assign(st.conclusion);
      if (st.kind == StepKind::premise) continue;
      const auto& inst = g.instances[st.index];
      if (!inst.is_causal()) continue;
      participant[inst.head.atom] = true;
      for (const auto& b : inst.body) participant[b.atom] = true;
    }
  }

  ComprehensionModel model;
  model.horizon = g.horizon;
  for (AtomId a = 0; a < g.atoms.size(); ++a) {
    if (std::all_of(values[a].begin(), values[a].end(), [](Truth v) { return v == Truth::unknown; })) {
      continue;
    }
    ModelRow row;
    row.atom = g.atoms.text(a);
    row.signature = g.atoms.signature(a);
    row.cls = g.is_fluent(a)              ? ConceptClass::fluent
              : g.is_constant_type(a)     ? ConceptClass::constant
                                          : ConceptClass::action;
    row.causal_participant = participant[a];
    if (auto it = occurrences.find(row.signature); it != occurrences.end()) row.rule_occurrences = it->second;
    row.values = std::move(values[a]);
    row.observed = std::move(observed[a]);
    model.rows.push_back(std::move(row));
  }
  std::sort(model.rows.begin(), model.rows.end(),
            [](const ModelRow& x, const ModelRow& y) { return x.atom < y.atom; });
  return model;
}

Verdict verdict_for(const ComprehensionModel& model, const QuestionChoice& c) {
  Truth v = model.value(canonical_text(c.literal.atom), c.time);
  if (v == Truth::unknown) return Verdict::possible;
  bool holds = (v == Truth::positive) != c.literal.negative;
  return holds ? Verdict::accepted : Verdict::rejected;
}

}  // namespace

ComprehensionModel filter_model(const ComprehensionModel& model, const ModelFilter& filter) {
  ComprehensionModel out;
  out.horizon = model.horizon;
  for (const auto& row : model.rows) {
    if (passes(row, filter)) out.rows.push_back(row);
  }
  return out;
}

std::vector<SessionReport> read_story(const Domain& domain, const ReaderOptions& options,
                                      const ProgressSink& progress) {
  if (options.horizon && *options.horizon < max_time_point(domain)) {
    throw std::invalid_argument("horizon " + std::to_string(*options.horizon) +
                                " is below the latest time-point of the domain (" +
                                std::to_string(max_time_point(domain)) + ")");
  }
  auto emit = [&](ProgressEvent::Kind kind, int session, double ms, std::string detail) {
    if (progress) progress({kind, session, ms, std::move(detail)});
  };

  std::map<std::string, int> occurrences;
  for (const auto& rule : domain.rules()) {
    for (const auto& l : rule.body.literals()) ++occurrences[predicate_signature(l)];
    ++occurrences[predicate_signature(rule.head)];
  }

  std::vector<SessionReport> reports;
  std::vector<std::string> previous_acceptable;
  for (const auto& session : domain.sessions()) {
    if (session.id == 0) continue;
    SessionReport report;
    report.session = session.id;
    emit(ProgressEvent::Kind::session_started, session.id, 0, "s(" + std::to_string(session.id) + ")");

    auto t0 = Clock::now();
    Grounding g;
    try {
      GroundingOptions go;
      go.horizon = options.horizon;
      go.instance_cap = options.instance_cap;
      g = ground(domain, session.id, go);
    } catch (const GroundingError& e) {
      throw ReasoningError(e.what());
    }
    report.horizon = g.horizon;
    double ms = ms_since(t0);
    report.timings.emplace_back("grounding", ms);
    emit(ProgressEvent::Kind::grounding_done, session.id, ms,
         std::to_string(g.instances.size()) + " instances");

    t0 = Clock::now();
    ArgumentOptions ao;
    ao.depth_cap = options.depth_cap;
    ao.argument_cap = options.argument_cap;
    ArgumentSet args = build_arguments(g, ao);
    report.warnings = args.warnings;
    report.argument_count = args.arguments.size();
    ms = ms_since(t0);
    report.timings.emplace_back("arguments", ms);
    emit(ProgressEvent::Kind::arguments_done, session.id, ms,
         std::to_string(args.arguments.size()) + " arguments");

    t0 = Clock::now();
    StructuredExtension grounded = grounded_arguments(g, args, domain.priorities());
    report.attack_count = grounded.attacks.size();
    const auto& extension = grounded.members;
    // Members hold no step attacked by an accepted top (conflict-free).
    {
      std::set<ProofStep> defeated;
      for (const auto& e : grounded.effective) defeated.insert(e.attacked);
      for (auto id : extension) {
        for (const auto& st : args.arguments[id].steps) {
          if (defeated.count(st)) {
            throw ReasoningError("grounded extension failed its soundness check in s(" +
                                 std::to_string(session.id) + ")");
          }
        }
      }
    }
    report.extension_size = extension.size();
    ms = ms_since(t0);
    report.timings.emplace_back("extension", ms);
    emit(ProgressEvent::Kind::extension_done, session.id, ms,
         std::to_string(extension.size()) + " accepted arguments");

    t0 = Clock::now();
    report.model = build_model(g, args, extension, occurrences);
    for (int qid : session.questions) {
      const Question* q = domain.find_question(qid);
      if (!q) continue;
      for (const auto& c : q->choices) report.answers.push_back({qid, c, verdict_for(report.model, c)});
    }

    report.universal = instance_texts(g, args, nullptr);
    report.acceptable = instance_texts(g, args, &extension);
    report.retracted = sorted_difference(previous_acceptable, report.acceptable);
    report.elaborated = sorted_difference(report.acceptable, previous_acceptable);
    previous_acceptable = report.acceptable;

    std::set<Qualification> qualified;
    for (const auto& e : grounded.effective) {
      qualified.insert({to_text(e.attacked, g), to_text(e.attacker, g)});
    }
    report.qualified.assign(qualified.begin(), qualified.end());
    ms = ms_since(t0);
    report.timings.emplace_back("answering", ms);
    emit(ProgressEvent::Kind::answers_ready, session.id, ms,
         std::to_string(report.answers.size()) + " answers");
    reports.push_back(std::move(report));
  }
  return reports;
}

std::string choice_text(const QuestionChoice& choice) {
  return ",[" + canonical_text(choice.literal) + "at " + std::to_string(choice.time) + "]";
}

namespace {

const std::string banner = "===================================";

void section(std::string& out, const std::string& title, bool show,
             const std::vector<std::string>& items) {
  out += ">>> " + title + "\n";
  if (!show) return;
  for (const auto& i : items) out += "    " + i + "\n";
}

}  // namespace

std::string render_report(const SessionReport& report, const ReaderOptions& options,
                          const Domain& domain) {
  std::string out;
  out += banner + "\n>>> Reading story up to scene s(" + std::to_string(report.session) + ")\n" +
         banner + "\n";
  if (options.show_story) {
    out += ">>> Story of scene s(" + std::to_string(report.session) + "):\n";
    for (const auto& st : domain.statements()) {
      if (st.session == report.session) out += "    " + canonical_text(st) + "\n";
    }
  }
  section(out, "Universal argument...", options.universal, report.universal);
  section(out, "Acceptable argument...", options.acceptable, report.acceptable);
  if (options.retracted) section(out, "Retracted argument...", true, report.retracted);
  if (options.elaborated) section(out, "Elaborated argument...", true, report.elaborated);
  if (options.qualified) {
    out += ">>> Qualified argument...\n";
    for (const auto& q : report.qualified) {
      out += "    " + q.attacked + "\n      attacked by " + q.attacker + "\n";
    }
  }
  for (const auto& w : report.warnings) out += ">>> Warning: " + w + "\n";

  out += "\n>>> Comprehension model:\n\n";
  ComprehensionModel model = filter_model(report.model, options.filter);
  for (int t = 0; t <= model.horizon; ++t) {
    std::string line;
    for (const auto& row : model.rows) {
      Truth v = row.values[t];
      if (v == Truth::unknown) continue;
      std::string lit = (v == Truth::negative ? "-" : "") + row.atom;
      line += row.observed[t] ? " < " + lit + ">" : " " + lit;
    }
    if (line.empty()) continue;
    out += std::to_string(t) + ":" + line + "\n\n";
  }

  int current = -1;
  for (const auto& a : report.answers) {
    if (a.question != current) {
      if (current != -1) out += "\n";
      current = a.question;
      out += ">>> Answering question q(" + std::to_string(a.question) + "):\n";
    }
    const char* mark = a.verdict == Verdict::accepted   ? "+ accepted"
                       : a.verdict == Verdict::rejected ? "- rejected"
                                                        : "? possible";
    out += std::string(mark) + " choice: " + choice_text(a.choice) + "\n";
  }
  if (current != -1) out += "\n";

  if (options.timings) {
    out += ">>> Timings:\n";
    char buf[64];
    for (const auto& [phase, ms] : report.timings) {
      std::snprintf(buf, sizeof buf, "%.3f", ms);
      out += "    " + phase + ": " + buf + " ms\n";
    }
    out += "\n";
  }
  return out;
}

std::string render_story(const std::vector<SessionReport>& reports, const ReaderOptions& options,
                         const Domain& domain) {
  std::string out;
  for (const auto& r : reports) out += render_report(r, options, domain);
  return out + ">>> Finished reading the story!\n";
}

std::string structured_output(const std::vector<SessionReport>& reports,
                              const ReaderOptions& options) {
  using nlohmann::json;
  json sessions = json::array();
  for (const auto& r : reports) {
    json rows = json::array();
    for (const auto& row : filter_model(r.model, options.filter).rows) {
      json values = json::array();
      json observed = json::array();
      for (std::size_t t = 0; t < row.values.size(); ++t) {
        values.push_back(to_string(row.values[t]));
        if (row.observed[t]) observed.push_back(t);
      }
      rows.push_back({{"atom", row.atom},
                      {"signature", row.signature},
                      {"class", to_string(row.cls)},
                      {"causalParticipant", row.causal_participant},
                      {"ruleOccurrences", row.rule_occurrences},
                      {"values", values},
                      {"observed", observed}});
    }
    json answers = json::array();
    for (const auto& a : r.answers) {
      answers.push_back({{"question", a.question},
                         {"literal", canonical_text(a.choice.literal)},
                         {"time", a.choice.time},
                         {"verdict", to_string(a.verdict)},
                         {"text", choice_text(a.choice)}});
    }
    json qualified = json::array();
    for (const auto& q : r.qualified) qualified.push_back({{"attacked", q.attacked}, {"attacker", q.attacker}});
    json s = {{"session", r.session},
              {"horizon", r.horizon},
              {"model", {{"horizon", r.model.horizon}, {"rows", rows}}},
              {"answers", answers},
              {"universal", r.universal},
              {"acceptable", r.acceptable},
              {"retracted", r.retracted},
              {"elaborated", r.elaborated},
              {"qualified", qualified},
              {"warnings", r.warnings},
              {"counts",
               {{"arguments", r.argument_count},
                {"attacks", r.attack_count},
                {"accepted", r.extension_size}}}};
    if (options.timings) {
      json timings = json::object();
      for (const auto& [phase, ms] : r.timings) timings[phase] = ms;
      s["timings"] = timings;
    }
    sessions.push_back(std::move(s));
  }
  return json{{"sessions", sessions}}.dump(2) + "\n";
}

}  // namespace star
