#include "star/kb_graph.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "star/parser.hpp"

namespace star {

using nlohmann::json;

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::causal_rule: return "causal-rule";
    case NodeKind::property_rule: return "property-rule";
    case NodeKind::group: return "group";
    case NodeKind::literal: break;
  }
  return "literal";
}

std::string_view to_string(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::head: return "head";
    case EdgeKind::priority: return "priority";
    case EdgeKind::body: break;
  }
  return "body";
}

const GraphNode* KnowledgeGraph::find_node(std::string_view id) const {
  auto it = std::find_if(nodes.begin(), nodes.end(), [&](const GraphNode& n) { return n.id == id; });
  return it == nodes.end() ? nullptr : &*it;
}

const GraphEdge* KnowledgeGraph::find_edge(std::string_view id) const {
  auto it = std::find_if(edges.begin(), edges.end(), [&](const GraphEdge& e) { return e.id == id; });
  return it == edges.end() ? nullptr : &*it;
}

std::optional<RuleLabel> parse_rule_label(std::string_view label) {
  if (label.size() < 2 || (label[0] != 'c' && label[0] != 'p')) return std::nullopt;
  RuleLabel out{label[0] == 'c' ? RuleKind::causal : RuleKind::property, 0};
  std::string_view digits = label.substr(1);
  if (digits.size() >= 2 && digits.front() == '(' && digits.back() == ')') {
    digits = digits.substr(1, digits.size() - 2);
  }
  if (digits.empty() || digits.size() > 9) return std::nullopt;
  auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), out.index);
  if (ec != std::errc() || end != digits.data() + digits.size()) return std::nullopt;
  return out;
}

std::string node_label(const RuleLabel& label) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%c%02d", label.kind == RuleKind::causal ? 'c' : 'p', label.index);
  return buf;
}

namespace {

struct LiteralLabel {
  std::string name;
  std::size_t arity = 0;
};

std::optional<LiteralLabel> parse_literal_label(std::string_view label) {
  auto slash = label.rfind('/');
  if (slash == std::string_view::npos) return std::nullopt;
  LiteralLabel out{std::string(label.substr(0, slash)), 0};
  if (!is_constant_name(out.name)) return std::nullopt;
  std::string_view digits = label.substr(slash + 1);
  if (digits.empty() || digits.size() > 4) return std::nullopt;
  auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), out.arity);
  if (ec != std::errc() || end != digits.data() + digits.size()) return std::nullopt;
  return out;
}

bool is_rule_kind(NodeKind k) { return k == NodeKind::causal_rule || k == NodeKind::property_rule; }

std::string describe(const GraphNode& n) {
  return std::string(to_string(n.kind)) + " '" + n.label + "'";
}

std::optional<Literal> edge_literal(const GraphNode& literal, const GraphEdge& edge) {
  auto label = parse_literal_label(literal.label);
  if (!label) return std::nullopt;
  std::vector<Term> args;
  for (const auto& a : edge.arguments) {
    auto t = parse_term(a);
    if (!t) return std::nullopt;
    args.push_back(*t);
  }
  return Literal(Atom(label->name, std::move(args)), literal.negative);
}

}  // namespace

std::string to_string(const GuidanceDiagnostic& d) {
  std::string out = d.message;
  std::vector<std::string> ids = d.nodes;
  ids.insert(ids.end(), d.edges.begin(), d.edges.end());
  if (!ids.empty()) {
    out += " [";
    for (std::size_t i = 0; i < ids.size(); ++i) out += (i ? ", " : "") + ids[i];
    out += "]";
  }
  if (!d.hint.empty()) out += " (hint: " + d.hint + ")";
  return out;
}

std::vector<GuidanceDiagnostic> validate(const KnowledgeGraph& g) {
  std::vector<GuidanceDiagnostic> out;
  auto report = [&](std::string message, std::vector<std::string> nodes, std::vector<std::string> edges,
                    std::string hint) {
    // Only ids present in the graph are highlighted.
    std::erase_if(nodes, [&](const std::string& id) { return !g.find_node(id); });
    std::erase_if(edges, [&](const std::string& id) { return !g.find_edge(id); });
    out.push_back({std::move(message), std::move(nodes), std::move(edges), std::move(hint)});
  };

  std::set<std::string> seen_nodes, seen_edges;
  std::map<RuleLabel, std::string> rule_labels;
  for (const auto& n : g.nodes) {
    if (n.id.empty() || !seen_nodes.insert(n.id).second) {
      report("node id '" + n.id + "' is empty or used twice", {n.id}, {}, "give every node a unique id");
    }
    if (is_rule_kind(n.kind)) {
      auto label = parse_rule_label(n.label);
      const char want = n.kind == NodeKind::causal_rule ? 'c' : 'p';
      if (!label || n.label[0] != want) {
        report("rule node label '" + n.label + "' is malformed", {n.id},
               {}, std::string("label ") + to_string(n.kind).data() + " nodes as " + want + "NN, e.g. " +
                       want + "01");
      } else if (auto [it, fresh] = rule_labels.emplace(*label, n.id); !fresh) {
        report("rule label " + node_label(*label) + " is used by two rule nodes", {it->second, n.id}, {},
               "rename one of them; the next free label is " + next_rule_label(g, label->kind));
      }
    } else if (n.kind == NodeKind::literal) {
      if (!parse_literal_label(n.label)) {
        report("literal node label '" + n.label + "' is malformed", {n.id}, {},
               "label literals as name/arity, e.g. have_ask/3");
      }
    } else if (n.label.empty()) {
      report("group node '" + n.id + "' has no label", {n.id}, {}, "name the group");
    }
    if (n.parent) {
      const GraphNode* p = g.find_node(*n.parent);
      if (!p || p->kind != NodeKind::group) {
        report(describe(n) + " belongs to '" + *n.parent + "', which is not a group", {n.id}, {},
               "remove the node from the group or create the group first");
      } else if (n.kind == NodeKind::group) {
        report("group '" + n.label + "' is nested inside group '" + p->label + "'", {n.id, p->id}, {},
               "groups are flat; ungroup one of them");
      }
    }
  }

  std::map<std::string, std::vector<std::string>> heads;  // rule id -> head edge ids
  std::set<std::string> connected;
  for (const auto& e : g.edges) {
    if (e.id.empty() || !seen_edges.insert(e.id).second) {
      report("edge id '" + e.id + "' is empty or used twice", {}, {e.id}, "give every edge a unique id");
    }
    const GraphNode* s = g.find_node(e.source);
    const GraphNode* t = g.find_node(e.target);
    if (!s || !t) {
      report("edge " + e.id + " points to a missing node", {}, {e.id}, "reconnect or delete the edge");
      continue;
    }
    connected.insert(s->id);
    connected.insert(t->id);
    if (s->kind == NodeKind::group || t->kind == NodeKind::group) {
      report("edge " + e.id + " touches group '" + (s->kind == NodeKind::group ? s->label : t->label) + "'",
             {s->id, t->id}, {e.id}, "connect the rules inside the group instead");
      continue;
    }
    if (s->kind == NodeKind::literal && t->kind == NodeKind::literal) {
      report("literals connect only to rules", {s->id, t->id}, {e.id},
             "draw the edge from the literal to a rule node, or from a rule to its head literal");
      continue;
    }
    const GraphNode* literal = nullptr;
    switch (e.kind) {
      case EdgeKind::body:
        if (s->kind != NodeKind::literal || !t->is_rule()) {
          report("body edge " + e.id + " must run from a literal to a rule", {s->id, t->id}, {e.id},
                 "reverse the edge or make it a head edge");
          continue;
        }
        literal = s;
        break;
      case EdgeKind::head:
        if (!s->is_rule() || t->kind != NodeKind::literal) {
          report("head edge " + e.id + " must run from a rule to a literal", {s->id, t->id}, {e.id},
                 "reverse the edge or make it a body edge");
          continue;
        }
        literal = t;
        heads[s->id].push_back(e.id);
        break;
      case EdgeKind::priority:
        if (!s->is_rule() || !t->is_rule()) {
          report("priority edge " + e.id + " must connect two rules", {s->id, t->id}, {e.id},
                 "draw priorities as dashed edges between rule nodes");
        } else if (s->id == t->id) {
          report("rule '" + s->label + "' is given priority over itself", {s->id}, {e.id},
                 "delete the priority edge");
        } else if (!e.arguments.empty()) {
          report("priority edge " + e.id + " carries arguments", {}, {e.id}, "remove the edge labels");
        }
        continue;
    }
    auto label = parse_literal_label(literal->label);
    if (!label) continue;
    if (e.arguments.size() != label->arity) {
      report("literal " + literal->label + " expects " + std::to_string(label->arity) + " argument(s) but edge " +
                 e.id + " gives " + std::to_string(e.arguments.size()),
             {literal->id}, {e.id}, "edit the edge labels so there is one argument per position");
      continue;
    }
    for (const auto& a : e.arguments) {
      if (!parse_term(a)) {
        report("argument '" + a + "' on edge " + e.id + " is not a term", {}, {e.id},
               "use a Variable, a constant or f(Args)");
      }
    }
  }

  for (const auto& n : g.nodes) {
    if (n.is_rule()) {
      auto it = heads.find(n.id);
      std::size_t count = it == heads.end() ? 0 : it->second.size();
      if (count == 0) {
        report("rule " + n.label + " has no head literal", {n.id}, {},
               "draw one edge from the rule to the literal it concludes");
      } else if (count > 1) {
        report("rule " + n.label + " has " + std::to_string(count) + " head literals; a rule has exactly one head",
               {n.id}, it->second, "keep one head edge and delete the others");
      }
    } else if (n.kind == NodeKind::literal && !connected.count(n.id)) {
      report("literal " + n.label + " is not connected to any rule", {n.id}, {},
             "connect it to a rule or delete it");
    }
  }
  return out;
}

GraphConversion graph_to_star(const KnowledgeGraph& g) {
  GraphConversion out;
  out.diagnostics = validate(g);
  if (!out.ok()) return out;

  std::vector<std::pair<RuleLabel, const GraphNode*>> rules;
  for (const auto& n : g.nodes) {
    if (n.is_rule()) rules.emplace_back(*parse_rule_label(n.label), &n);
  }
  std::sort(rules.begin(), rules.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  std::string text;
  if (!g.fluents.empty()) text += canonical_text(std::span<const FluentDecl>(g.fluents)) + "\n";
  for (const auto& [label, node] : rules) {
    Rule rule;
    rule.label = label;
    std::vector<Literal> body;
    for (const auto& e : g.edges) {
      if (e.kind == EdgeKind::body && e.target == node->id) {
        body.push_back(*edge_literal(*g.find_node(e.source), e));
      } else if (e.kind == EdgeKind::head && e.source == node->id) {
        rule.head = *edge_literal(*g.find_node(e.target), e);
      }
    }
    rule.body = body.empty() ? RuleBody::tautology() : RuleBody::of(std::move(body));
    text += canonical_text(rule) + "\n";
  }
  for (const auto& e : g.edges) {
    if (e.kind != EdgeKind::priority) continue;
    Priority p{*parse_rule_label(g.find_node(e.source)->label), *parse_rule_label(g.find_node(e.target)->label)};
    text += canonical_text(p) + "\n";
  }
  out.text = std::move(text);
  return out;
}

KnowledgeGraph star_to_graph(std::span<const Rule> rules, std::span<const Priority> priorities,
                             std::span<const FluentDecl> fluents) {
  KnowledgeGraph g;
  g.fluents.assign(fluents.begin(), fluents.end());
  int edge_no = 0;
  auto edge_id = [&] { return "e" + std::to_string(++edge_no); };
  auto rule_id = [](const RuleLabel& l) { return "rule:" + node_label(l); };

  for (const auto& r : rules) {
    g.nodes.push_back({rule_id(r.label),
                       r.label.kind == RuleKind::causal ? NodeKind::causal_rule : NodeKind::property_rule,
                       node_label(r.label), false, std::nullopt, std::nullopt});
  }
  std::vector<GraphNode> literals;
  auto literal_node = [&](const Literal& l) {
    std::string label = predicate_signature(l);
    std::string id = std::string("lit:") + (l.negative ? "-" : "") + label;
    if (std::none_of(literals.begin(), literals.end(), [&](const GraphNode& n) { return n.id == id; })) {
      literals.push_back({id, NodeKind::literal, label, l.negative, std::nullopt, std::nullopt});
    }
    return id;
  };
  auto terms = [](const Literal& l) {
    std::vector<std::string> out;
    for (const auto& t : l.atom.args) out.push_back(canonical_text(t));
    return out;
  };
  for (const auto& r : rules) {
    for (const auto& b : r.body.literals()) {
      g.edges.push_back({edge_id(), EdgeKind::body, literal_node(b), rule_id(r.label), terms(b)});
    }
    g.edges.push_back({edge_id(), EdgeKind::head, rule_id(r.label), literal_node(r.head), terms(r.head)});
  }
  for (const auto& p : priorities) {
    g.edges.push_back({edge_id(), EdgeKind::priority, rule_id(p.stronger), rule_id(p.weaker), {}});
  }
  g.nodes.insert(g.nodes.end(), literals.begin(), literals.end());
  return g;
}

KnowledgeGraph star_to_graph(const Domain& domain) {
  return star_to_graph(domain.rules(), domain.priorities(), domain.fluents());
}

std::optional<ExportFormat> parse_export_format(std::string_view name) {
  if (name == "json") return ExportFormat::json;
  if (name == "graphml") return ExportFormat::graphml;
  if (name == "manifest") return ExportFormat::manifest;
  return std::nullopt;
}

namespace {

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string fluent_signature(const FluentDecl& f) { return f.name + "/" + std::to_string(f.arity); }

std::string graphml(const KnowledgeGraph& g) {
  std::string out =
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\"\n"
      "         xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\"\n"
      "         xsi:schemaLocation=\"http://graphml.graphdrawing.org/xmlns "
      "http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd\">\n"
      "  <key id=\"fluents\" for=\"graph\" attr.name=\"fluents\" attr.type=\"string\"/>\n"
      "  <key id=\"kind\" for=\"all\" attr.name=\"kind\" attr.type=\"string\"/>\n"
      "  <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n"
      "  <key id=\"polarity\" for=\"node\" attr.name=\"polarity\" attr.type=\"string\"/>\n"
      "  <key id=\"parent\" for=\"node\" attr.name=\"parent\" attr.type=\"string\"/>\n"
      "  <key id=\"x\" for=\"node\" attr.name=\"x\" attr.type=\"double\"/>\n"
      "  <key id=\"y\" for=\"node\" attr.name=\"y\" attr.type=\"double\"/>\n"
      "  <key id=\"argumentLabel\" for=\"edge\" attr.name=\"argumentLabel\" attr.type=\"string\"/>\n"
      "  <graph id=\"knowledge\" edgedefault=\"directed\">\n";
  if (!g.fluents.empty()) {
    std::vector<std::string> sigs;
    for (const auto& f : g.fluents) sigs.push_back(fluent_signature(f));
    out += "    <data key=\"fluents\">" + xml_escape(join(sigs, " ")) + "</data>\n";
  }
  for (const auto& n : g.nodes) {
    out += "    <node id=\"" + xml_escape(n.id) + "\">\n";
    out += "      <data key=\"kind\">" + std::string(to_string(n.kind)) + "</data>\n";
    out += "      <data key=\"label\">" + xml_escape(n.label) + "</data>\n";
    if (n.kind == NodeKind::literal) {
      out += std::string("      <data key=\"polarity\">") + (n.negative ? "negative" : "positive") + "</data>\n";
    }
    if (n.parent) out += "      <data key=\"parent\">" + xml_escape(*n.parent) + "</data>\n";
    if (n.position) {
      out += "      <data key=\"x\">" + std::to_string(n.position->x) + "</data>\n";
      out += "      <data key=\"y\">" + std::to_string(n.position->y) + "</data>\n";
    }
    out += "    </node>\n";
  }
  for (const auto& e : g.edges) {
    out += "    <edge id=\"" + xml_escape(e.id) + "\" source=\"" + xml_escape(e.source) + "\" target=\"" +
           xml_escape(e.target) + "\">\n";
    out += "      <data key=\"kind\">" + std::string(to_string(e.kind)) + "</data>\n";
    if (e.kind != EdgeKind::priority) {
      out += "      <data key=\"argumentLabel\">" + xml_escape(join(e.arguments, ",")) + "</data>\n";
    }
    out += "    </edge>\n";
  }
  out += "  </graph>\n</graphml>\n";
  return out;
}

std::string manifest(const KnowledgeGraph& g) {
  json elements = json::array();
  std::size_t rule_row = 0, literal_row = 0, group_row = 0;
  for (const auto& n : g.nodes) {
    Position p;
    if (n.position) {
      p = *n.position;
    } else if (n.is_rule()) {
      p = {240.0, 80.0 * static_cast<double>(rule_row++)};
    } else if (n.kind == NodeKind::literal) {
      p = {0.0, 60.0 * static_cast<double>(literal_row++)};
    } else {
      p = {480.0, 120.0 * static_cast<double>(group_row++)};
    }
    const char* shape = n.kind == NodeKind::causal_rule     ? "octagon"
                        : n.kind == NodeKind::property_rule ? "round-rectangle"
                        : n.kind == NodeKind::literal       ? "ellipse"
                                                            : "rectangle";
    const char* color = n.is_rule()                    ? "blue"
                        : n.kind == NodeKind::literal ? (n.negative ? "red" : "green")
                                                      : "grey";
    json el = {{"type", "node"}, {"id", n.id},       {"kind", to_string(n.kind)}, {"label", n.label},
               {"shape", shape}, {"color", color},   {"position", {{"x", p.x}, {"y", p.y}}}};
    if (n.parent) el["parent"] = *n.parent;
    elements.push_back(std::move(el));
  }
  for (const auto& e : g.edges) {
    elements.push_back({{"type", "edge"},
                        {"id", e.id},
                        {"kind", to_string(e.kind)},
                        {"source", e.source},
                        {"target", e.target},
                        {"label", join(e.arguments, ", ")},
                        {"line", e.kind == EdgeKind::priority ? "dashed" : "solid"}});
  }
  return json{{"format", "star-graph-manifest"}, {"version", 1}, {"elements", elements}}.dump(2) + "\n";
}

}  // namespace

std::string to_json(const KnowledgeGraph& g) {
  json nodes = json::array(), edges = json::array(), fluents = json::array();
  for (const auto& n : g.nodes) {
    json j = {{"id", n.id}, {"kind", to_string(n.kind)}, {"label", n.label}};
    if (n.kind == NodeKind::literal) j["polarity"] = n.negative ? "negative" : "positive";
    j["parent"] = n.parent ? json(*n.parent) : json(nullptr);
    j["position"] = n.position ? json{{"x", n.position->x}, {"y", n.position->y}} : json(nullptr);
    nodes.push_back(std::move(j));
  }
  for (const auto& e : g.edges) {
    edges.push_back({{"id", e.id},
                     {"kind", to_string(e.kind)},
                     {"source", e.source},
                     {"target", e.target},
                     {"arguments", e.arguments}});
  }
  for (const auto& f : g.fluents) fluents.push_back(fluent_signature(f));
  return json{{"nodes", nodes}, {"edges", edges}, {"fluents", fluents}}.dump(2) + "\n";
}

KnowledgeGraph graph_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw GraphError(std::string("graph is not valid JSON: ") + e.what());
  }
  KnowledgeGraph g;
  try {
    for (const auto& jn : doc.value("nodes", json::array())) {
      GraphNode n;
      n.id = jn.at("id").get<std::string>();
      const auto kind = jn.at("kind").get<std::string>();
      if (kind == "causal-rule") {
        n.kind = NodeKind::causal_rule;
      } else if (kind == "property-rule") {
        n.kind = NodeKind::property_rule;
      } else if (kind == "literal") {
        n.kind = NodeKind::literal;
      } else if (kind == "group") {
        n.kind = NodeKind::group;
      } else {
        throw GraphError("node '" + n.id + "' has unknown kind '" + kind + "'");
      }
      n.label = jn.at("label").get<std::string>();
      const auto polarity = jn.value("polarity", std::string("positive"));
      if (polarity != "positive" && polarity != "negative") {
        throw GraphError("node '" + n.id + "' has unknown polarity '" + polarity + "'");
      }
      n.negative = polarity == "negative";
      if (jn.contains("parent") && !jn.at("parent").is_null()) n.parent = jn.at("parent").get<std::string>();
      if (jn.contains("position") && !jn.at("position").is_null()) {
        n.position = Position{jn.at("position").at("x").get<double>(), jn.at("position").at("y").get<double>()};
      }
      g.nodes.push_back(std::move(n));
    }
    for (const auto& je : doc.value("edges", json::array())) {
      GraphEdge e;
      e.id = je.at("id").get<std::string>();
      const auto kind = je.at("kind").get<std::string>();
      if (kind == "body") {
        e.kind = EdgeKind::body;
      } else if (kind == "head") {
        e.kind = EdgeKind::head;
      } else if (kind == "priority") {
        e.kind = EdgeKind::priority;
      } else {
        throw GraphError("edge '" + e.id + "' has unknown kind '" + kind + "'");
      }
      e.source = je.at("source").get<std::string>();
      e.target = je.at("target").get<std::string>();
      e.arguments = je.value("arguments", std::vector<std::string>{});
      g.edges.push_back(std::move(e));
    }
    for (const auto& jf : doc.value("fluents", json::array())) {
      auto label = parse_literal_label(jf.get<std::string>());
      if (!label) throw GraphError("fluent '" + jf.get<std::string>() + "' is not name/arity");
      g.fluents.push_back({label->name, static_cast<int>(label->arity)});
    }
  } catch (const json::exception& e) {
    throw GraphError(std::string("graph JSON is missing a field: ") + e.what());
  }
  return g;
}

std::string export_graph(const KnowledgeGraph& graph, ExportFormat format) {
  auto problems = validate(graph);
  if (!problems.empty()) throw GraphError("cannot export an invalid graph: " + to_string(problems.front()));
  switch (format) {
    case ExportFormat::graphml: return graphml(graph);
    case ExportFormat::manifest: return manifest(graph);
    case ExportFormat::json: break;
  }
  return to_json(graph);
}

KnowledgeGraph group_rules(const KnowledgeGraph& graph, std::span<const std::string> members,
                           const std::string& label) {
  if (label.empty()) throw GraphError("a group needs a label");
  if (members.empty()) throw GraphError("a group needs at least one member");
  KnowledgeGraph g = graph;
  for (const auto& id : members) {
    const GraphNode* n = g.find_node(id);
    if (!n) throw GraphError("no node '" + id + "'");
    if (n->kind == NodeKind::group) throw GraphError("groups cannot be nested ('" + id + "' is a group)");
    if (n->parent) throw GraphError("node '" + id + "' already belongs to group '" + *n->parent + "'");
  }
  int k = 1;
  while (g.find_node("group" + std::to_string(k))) ++k;
  const std::string gid = "group" + std::to_string(k);
  for (auto& n : g.nodes) {
    if (std::find(members.begin(), members.end(), n.id) != members.end()) n.parent = gid;
  }
  g.nodes.push_back({gid, NodeKind::group, label, false, std::nullopt, std::nullopt});
  return g;
}

std::string next_rule_label(const KnowledgeGraph& graph, RuleKind kind) {
  int highest = 0;
  for (const auto& n : graph.nodes) {
    if (!n.is_rule()) continue;
    if (auto l = parse_rule_label(n.label); l && l->kind == kind) highest = std::max(highest, l->index);
  }
  return node_label({kind, highest + 1});
}

std::vector<std::string> disconnected_rules(const KnowledgeGraph& g) {
  std::map<std::string, std::set<std::string>> literal_rules;  // literal -> rules touching it
  std::map<std::string, std::set<std::string>> rule_literals;
  for (const auto& e : g.edges) {
    if (e.kind == EdgeKind::body) {
      literal_rules[e.source].insert(e.target);
      rule_literals[e.target].insert(e.source);
    } else if (e.kind == EdgeKind::head) {
      literal_rules[e.target].insert(e.source);
      rule_literals[e.source].insert(e.target);
    }
  }
  std::vector<std::string> out;
  for (const auto& n : g.nodes) {
    if (!n.is_rule()) continue;
    bool linked = false;
    for (const auto& lit : rule_literals[n.id]) {
      if (literal_rules[lit].size() > 1) linked = true;
    }
    if (!linked) out.push_back(n.id);
  }
  return out;
}

std::vector<std::string> low_density_rules(const KnowledgeGraph& g, std::size_t min_degree) {
  std::map<std::string, std::size_t> degree;
  for (const auto& e : g.edges) {
    ++degree[e.source];
    ++degree[e.target];
  }
  std::vector<std::string> out;
  for (const auto& n : g.nodes) {
    if (n.is_rule() && degree[n.id] < min_degree) out.push_back(n.id);
  }
  return out;
}

}  // namespace star
