// Background knowledge as a graph: rule nodes, literal nodes, body/head edges
// carrying argument lists, priority edges, and flat groups. Converts to and
// from STAR rule text and exports to JSON, GraphML and a drawing manifest.

#ifndef STAR_KB_GRAPH_HPP
#define STAR_KB_GRAPH_HPP

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "star/syntax.hpp"

namespace star {

enum class NodeKind { causal_rule, property_rule, literal, group };
enum class EdgeKind { body, head, priority };

std::string_view to_string(NodeKind kind);
std::string_view to_string(EdgeKind kind);

struct Position {
  double x = 0;
  double y = 0;

  friend bool operator==(const Position&, const Position&) = default;
};

/// Rule labels look like `c01`/`p11`; literal labels like `have_ask/3`.
struct GraphNode {
  std::string id;
  NodeKind kind = NodeKind::literal;
  std::string label;
  bool negative = false;  // literals only
  std::optional<std::string> parent;
  std::optional<Position> position;

  bool is_rule() const { return kind == NodeKind::causal_rule || kind == NodeKind::property_rule; }
  friend bool operator==(const GraphNode&, const GraphNode&) = default;
};

/// Body edges run literal -> rule, head edges rule -> literal and priority
/// edges stronger rule -> weaker rule. `arguments` holds one term per
/// argument of the literal, e.g. {"P1", "do(S)"}.
struct GraphEdge {
  std::string id;
  EdgeKind kind = EdgeKind::body;
  std::string source;
  std::string target;
  std::vector<std::string> arguments;

  friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
};

struct KnowledgeGraph {
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;
  std::vector<FluentDecl> fluents;

  const GraphNode* find_node(std::string_view id) const;
  const GraphEdge* find_edge(std::string_view id) const;
  friend bool operator==(const KnowledgeGraph&, const KnowledgeGraph&) = default;
};

struct GuidanceDiagnostic {
  std::string message;
  std::vector<std::string> nodes;  // highlighted node ids
  std::vector<std::string> edges;  // highlighted edge ids
  std::string hint;
};

std::string to_string(const GuidanceDiagnostic& diagnostic);

/// Every problem that would stop graph_to_star; empty for a valid graph.
std::vector<GuidanceDiagnostic> validate(const KnowledgeGraph& graph);

struct GraphConversion {
  std::string text;  // empty when diagnostics are present
  std::vector<GuidanceDiagnostic> diagnostics;

  bool ok() const { return diagnostics.empty(); }
};

/// Emits the fluents clause (if any), the rules ordered by label, then the
/// priorities. Refuses (empty text) when validate() reports anything.
GraphConversion graph_to_star(const KnowledgeGraph& graph);

KnowledgeGraph star_to_graph(std::span<const Rule> rules, std::span<const Priority> priorities,
                             std::span<const FluentDecl> fluents = {});
KnowledgeGraph star_to_graph(const Domain& domain);

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ExportFormat { json, graphml, manifest };
std::optional<ExportFormat> parse_export_format(std::string_view name);

/// Throws GraphError for an invalid graph.
std::string export_graph(const KnowledgeGraph& graph, ExportFormat format);

std::string to_json(const KnowledgeGraph& graph);
/// Throws GraphError on malformed input.
KnowledgeGraph graph_from_json(std::string_view text);

/// Adds a group node holding `members`. Members must exist, must not be
/// groups and must not already belong to a group.
KnowledgeGraph group_rules(const KnowledgeGraph& graph, std::span<const std::string> members,
                           const std::string& label);

/// Next free label of the kind, e.g. `c03` when c01 and c02 exist.
std::string next_rule_label(const KnowledgeGraph& graph, RuleKind kind);

/// Rule nodes sharing no literal node with any other rule.
std::vector<std::string> disconnected_rules(const KnowledgeGraph& graph);
/// Rule nodes with fewer than `min_degree` incident edges.
std::vector<std::string> low_density_rules(const KnowledgeGraph& graph, std::size_t min_degree);

std::optional<RuleLabel> parse_rule_label(std::string_view label);
/// `c01` form used on rule nodes.
std::string node_label(const RuleLabel& label);

}  // namespace star

#endif  // STAR_KB_GRAPH_HPP
