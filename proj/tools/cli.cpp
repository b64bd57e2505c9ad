#include "cli.hpp"

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "star/annotations.hpp"
#include "star/grounding.hpp"
#include "star/kb_graph.hpp"
#include "star/nl2star.hpp"
#include "star/parser.hpp"
#include "star/service/jobs.hpp"
#include "star/service/server.hpp"

namespace star::cli {

namespace {

struct InputMissing : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path, std::istream& in) {
  std::stringstream buffer;
  if (path == "-") {
    buffer << in.rdbuf();
    return buffer.str();
  }
  std::ifstream file(path, std::ios::binary);
  if (!file) throw InputMissing("cannot read " + path);
  buffer << file.rdbuf();
  return buffer.str();
}

void print_diagnostics(const std::vector<Diagnostic>& diagnostics, const std::string& source, std::ostream& err) {
  for (const auto& d : diagnostics) err << source << ":" << to_string(d) << "\n";
}

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted = true; }

}  // namespace

int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Story comprehension through argumentation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "star 0.1.0");

  // read
  auto* read = app.add_subcommand("read", "Read a STAR domain session by session");
  std::string read_path;
  std::string format = "raw";
  ReaderOptions options;
  std::vector<std::string> filters;
  std::optional<int> horizon;
  read->add_option("file", read_path, "Domain file, or - for stdin")->required();
  read->add_option("--format", format, "raw or structured")->check(CLI::IsMember({"raw", "structured"}));
  read->add_flag("--universal", options.universal, "Print every rule instance used by an argument");
  read->add_flag("--acceptable", options.acceptable, "Print instances used by the grounded extension");
  read->add_flag("--retracted", options.retracted, "Print instances dropped since the previous session");
  read->add_flag("--elaborated", options.elaborated, "Print instances new in this session");
  read->add_flag("--qualified", options.qualified, "Print attacked instances with their attackers");
  read->add_flag("--timings", options.timings, "Print per-phase timings");
  read->add_flag("--show-story", options.show_story, "Print the story read so far");
  read->add_option("--filter", filters,
                   "changing-only, no-fluents, no-actions, no-constants, causal-participants-only, min-frequency=K");
  read->add_option("--horizon", horizon, "Last time-point of the model");

  // nl2star
  auto* nl = app.add_subcommand("nl2star", "Convert an annotated story into STAR clauses");
  std::string nl_path;
  std::optional<std::string> annotator_url;
  int timeout_ms = 30'000;
  bool trace = false;
  nl->add_option("file", nl_path, "Annotation JSON (or plain text with --annotator), or - for stdin")->required();
  nl->add_option("--annotator", annotator_url, "Annotation server URL; the input is then plain text");
  nl->add_option("--timeout-ms", timeout_ms, "Annotation request timeout")->check(CLI::PositiveNumber);
  nl->add_flag("--trace", trace, "Explain each sentence on stderr");

  // graph
  auto* graph = app.add_subcommand("graph", "Convert between STAR knowledge and the graph model");
  std::string graph_path;
  std::string to = "json";
  bool validate_only = false;
  graph->add_option("file", graph_path, "STAR knowledge or graph JSON, or - for stdin")->required();
  graph->add_option("--to", to, "star, json, graphml or manifest")
      ->check(CLI::IsMember({"star", "json", "graphml", "manifest"}));
  graph->add_flag("--validate", validate_only, "Only report guidance diagnostics");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  service::ServiceConfig config = service::config_from_env({});
  std::size_t workers = config.queue.workers;
  serve->add_option("--host", config.host, "Listen address");
  serve->add_option("--port", config.port, "Listen port, 0 for any")->check(CLI::Range(0, 65535));
  serve->add_option("--db", config.database, "SQLite database file");
  serve->add_option("--examples", config.examples_dir, "Directory of example .star files");
  serve->add_option("--annotator", config.annotator_url, "Annotation server URL");
  serve->add_option("--workers", workers, "Reading worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ExitCode::ok : ExitCode::usage;
  }

  try {
    if (*read) {
      for (const auto& f : filters) {
        auto next = add_filter(options.filter, f);
        if (!next) {
          err << "star read: unknown filter '" << f << "'\n";
          return ExitCode::usage;
        }
        options.filter = *next;
      }
      options.horizon = horizon;
      const std::string text = slurp(read_path, in);
      try {
        auto result = service::run_reading(text, options);
        out << (format == "structured" ? result.structured : result.text);
      } catch (const service::DomainRejected& e) {
        print_diagnostics(e.diagnostics(), read_path, err);
        return ExitCode::invalid;
      } catch (const std::invalid_argument& e) {
        err << "star read: " << e.what() << "\n";
        return ExitCode::usage;
      }
      return ExitCode::ok;
    }

    if (*nl) {
      const std::string text = slurp(nl_path, in);
      AnnotatedStory story;
      try {
        story = annotator_url ? fetch_annotations(text, {*annotator_url, std::chrono::milliseconds(timeout_ms)})
                              : parse_annotated_story(text);
      } catch (const AnnotatorError& e) {
        err << "star nl2star: annotator " << to_string(e.kind()) << ": " << e.what() << "\n";
        return ExitCode::annotator;
      } catch (const AnnotationFormatError& e) {
        err << "star nl2star: " << e.what() << "\n";
        return ExitCode::invalid;
      }
      try {
        auto result = convert(story);
        out << result.text;
        if (trace) {
          for (const auto& entry : result.trace.sentences) err << to_string(entry) << "\n";
        }
      } catch (const ConversionError& e) {
        err << "star nl2star: " << e.what() << "\n";
        return ExitCode::invalid;
      }
      return ExitCode::ok;
    }

    if (*graph) {
      const std::string text = slurp(graph_path, in);
      const auto first = text.find_first_not_of(" \t\r\n");
      KnowledgeGraph g;
      if (first != std::string::npos && text[first] == '{') {
        try {
          g = graph_from_json(text);
        } catch (const GraphError& e) {
          err << "star graph: " << e.what() << "\n";
          return ExitCode::invalid;
        }
      } else {
        auto parsed = parse_domain(text);
        if (!parsed.ok()) {
          print_diagnostics(parsed.diagnostics, graph_path, err);
          return ExitCode::invalid;
        }
        g = star_to_graph(*parsed.domain);
      }
      auto diagnostics = validate(g);
      for (const auto& d : diagnostics) err << to_string(d) << "\n";
      if (!diagnostics.empty()) return ExitCode::invalid;
      if (validate_only) return ExitCode::ok;
      if (to == "star") {
        out << graph_to_star(g).text;
      } else {
        out << export_graph(g, *parse_export_format(to));
      }
      return ExitCode::ok;
    }

    if (*serve) {
      config.queue.workers = workers;
      service::Server server(config);
      try {
        server.start();
      } catch (const service::BindError& e) {
        err << "star serve: " << e.what() << "\n";
        return ExitCode::io;
      }
      out << "listening on " << config.host << ":" << server.port() << std::endl;
      g_interrupted = false;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      server.stop();
      return ExitCode::ok;
    }
  } catch (const InputMissing& e) {
    err << "star: " << e.what() << "\n";
    return ExitCode::io;
  } catch (const ReasoningError& e) {
    err << "star: reasoning failed: " << e.what() << "\n";
    return ExitCode::reasoning;
  } catch (const GroundingError& e) {
    err << "star: grounding failed: " << e.what() << "\n";
    return ExitCode::reasoning;
  } catch (const service::StoreError& e) {
    err << "star: " << e.what() << "\n";
    return ExitCode::io;
  }
  return ExitCode::usage;
}

}  // namespace star::cli
