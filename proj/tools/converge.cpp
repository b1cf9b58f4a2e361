#include <csignal>
#include <cstdio>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "converge/bundle.hpp"
#include "converge/config.hpp"
#include "converge/error.hpp"
#include "converge/server.hpp"

using namespace converge;
namespace fs = std::filesystem;

namespace {

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

PipelineConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  return config_from_json(nlohmann::json::parse(read_file(path)));
}

HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"converge: opinion convergence analysis for team presentations"};
  app.require_subcommand(1);
  std::string bundle_dir = "bundle";
  unsigned threads = 1;

  auto add_bundle = [&](CLI::App* cmd) {
    cmd->add_option("-b,--bundle", bundle_dir, "Bundle directory")->capture_default_str();
  };

  // ingest
  std::string corpus_path, pseudonyms, config_path;
  auto* ingest = app.add_subcommand("ingest", "Validate a corpus and start a bundle");
  ingest->add_option("corpus", corpus_path, "Corpus JSON")->required();
  ingest->add_option("--anonymize", pseudonyms, "Presenter pseudonym map (JSON object)");
  ingest->add_option("--config", config_path, "Pipeline config JSON");
  add_bundle(ingest);

  auto* extract = app.add_subcommand("extract", "Extract grounded viewpoints");
  add_bundle(extract);
  extract->add_option("--threads", threads, "Concurrent provider calls")->check(CLI::PositiveNumber);

  auto* flows = app.add_subcommand("flows", "Infer opinion flows");
  add_bundle(flows);

  std::optional<double> percentile;
  std::string mode;
  auto* graph = app.add_subcommand("graph", "Build the similarity graph");
  add_bundle(graph);
  graph->add_option("--percentile", percentile, "Threshold percentile in (0, 100)");
  graph->add_option("--mode", mode, "above or below")->check(CLI::IsMember({"above", "below"}));

  std::optional<std::uint64_t> seed;
  auto* layout = app.add_subcommand("layout", "Compute the 3D layout of the exported graph");
  add_bundle(layout);
  layout->add_option("--seed", seed, "Layout seed");

  std::optional<double> theta_dom;
  auto* influence = app.add_subcommand("influence", "Domain graphs, eigenvector centrality and EC matrix");
  add_bundle(influence);
  influence->add_option("--theta-dom", theta_dom, "Domain affinity threshold");

  std::string selector;
  auto* temporal = app.add_subcommand("temporal", "Cumulative flow graphs and edge-to-node ratio");
  add_bundle(temporal);
  temporal->add_option("--flows", selector, "all or accepted")->check(CLI::IsMember({"all", "accepted"}));

  auto* survey = app.add_subcommand("survey", "Review survey export and import");
  survey->require_subcommand(1);
  std::string survey_format = "json", survey_out, survey_in;
  auto* survey_export_cmd = survey->add_subcommand("export", "Write the review survey");
  add_bundle(survey_export_cmd);
  survey_export_cmd->add_option("--format", survey_format, "json or text")->check(CLI::IsMember({"json", "text"}));
  survey_export_cmd->add_option("-o,--out", survey_out, "Output file (default: stdout)");
  auto* survey_import_cmd = survey->add_subcommand("import", "Record reviewer responses");
  add_bundle(survey_import_cmd);
  survey_import_cmd->add_option("responses", survey_in, "Responses JSON or filled survey JSON")->required();

  auto* report = app.add_subcommand("report", "Cross-layer reports");
  report->require_subcommand(1);
  auto* consistency = report->add_subcommand("consistency", "Cross-layer consistency report");
  add_bundle(consistency);

  std::string bind = "127.0.0.1:8080";
  auto* serve = app.add_subcommand("serve", "Serve the bundle over HTTP");
  add_bundle(serve);
  serve->add_option("--bind", bind, "host:port")->capture_default_str();

  std::optional<std::uint64_t> run_seed;
  std::string provider;
  auto* run = app.add_subcommand("run", "Run the full pipeline");
  run->add_option("corpus", corpus_path, "Corpus JSON")->required();
  run->add_option("-o,--out", bundle_dir, "Bundle directory")->capture_default_str();
  run->add_option("--config", config_path, "Pipeline config JSON");
  run->add_option("--anonymize", pseudonyms, "Presenter pseudonym map (JSON object)");
  run->add_option("--seed", run_seed, "Seed for layout and providers");
  run->add_option("--provider", provider, "mock or http")->check(CLI::IsMember({"mock", "http"}));
  run->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    const Bundle bundle(bundle_dir);
    std::optional<fs::path> map_path;
    if (!pseudonyms.empty()) map_path = pseudonyms;

    if (ingest->parsed()) {
      auto config = load_config(config_path);
      config.validate();
      print_warnings(stage_ingest(bundle, corpus_path, config, map_path));
      std::cout << "ingested " << bundle.corpus().presentations.size() << " presentations into " << bundle_dir << "\n";
    } else if (extract->parsed()) {
      const auto config = bundle.config();
      check_startup(config);
      auto p = make_provider(config);
      print_warnings(stage_extract(bundle, *p, threads));
      std::cout << bundle.viewpoints().size() << " viewpoints\n";
    } else if (flows->parsed()) {
      const auto config = bundle.config();
      check_startup(config);
      auto p = make_provider(config);
      print_warnings(stage_flows(bundle, *p));
      std::cout << bundle.proposed_flows().size() << " flows\n";
    } else if (graph->parsed()) {
      const auto config = bundle.config();
      check_startup(config);
      auto e = make_embedder(config);
      std::optional<GraphMode> m;
      if (!mode.empty()) m = parse_graph_mode(mode);
      print_warnings(stage_graph(bundle, *e, percentile, m));
      const auto doc = bundle.read_json("graph.json");
      std::cout << doc["nodes"].size() << " nodes, " << doc["edges"].size() << " edges (threshold "
                << doc["meta"]["threshold"].get<double>() << ")\n";
    } else if (layout->parsed()) {
      print_warnings(stage_layout(bundle, seed));
      const auto doc = bundle.read_json("layout.json");
      std::cout << "layout converged in " << doc["iterations_used"] << " iterations\n";
    } else if (influence->parsed()) {
      const auto config = bundle.config();
      check_startup(config);
      auto p = make_provider(config);
      auto e = make_embedder(config);
      print_warnings(stage_influence(bundle, *e, *p, theta_dom));
      std::cout << read_file(bundle.path("ec_matrix.txt"));
    } else if (temporal->parsed()) {
      std::optional<FlowSelector> sel;
      if (!selector.empty()) sel = parse_flow_selector(selector);
      print_warnings(stage_temporal(bundle, sel));
      std::cout << read_file(bundle.path("ratio.csv"));
    } else if (survey_export_cmd->parsed()) {
      print_warnings(stage_survey(bundle));
      const auto text = survey_format == "json" ? read_file(bundle.path("survey.json"))
                                                : read_file(bundle.path("survey.txt"));
      if (survey_out.empty()) std::cout << text;
      else write_file(survey_out, text);
    } else if (survey_import_cmd->parsed()) {
      const auto responses = responses_from_json(nlohmann::json::parse(read_file(survey_in)));
      const auto result = import_responses(bundle, responses);
      std::cout << "reviewed " << result.stats.reviewed << " of " << result.stats.total_items
                << " items, disagreement rate " << result.stats.rate_text() << "%\n";
    } else if (consistency->parsed()) {
      print_warnings(stage_report(bundle));
      std::cout << read_file(bundle.path("report.json"));
    } else if (serve->parsed()) {
      const auto colon = bind.rfind(':');
      if (colon == std::string::npos) throw ValidationError("--bind expects host:port", bind);
      HttpServer server(bundle_dir);
      const int port = server.bind(bind.substr(0, colon), std::stoi(bind.substr(colon + 1)));
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << "serving " << bundle_dir << " on " << bind.substr(0, colon) << ":" << port << std::endl;
      server.listen();
      g_server = nullptr;
    } else if (run->parsed()) {
      auto config = load_config(config_path);
      if (run_seed) {
        config.seed = *run_seed;
        config.layout.seed = *run_seed;
        config.limits.seed = *run_seed;
      }
      if (!provider.empty()) config.provider = config.embedding = parse_backend(provider);
      config.threads = threads;
      const auto summary = run_pipeline(config, corpus_path, bundle_dir, map_path);
      print_warnings(summary.warnings);
      std::cout << summary.presentations << " presentations, " << summary.viewpoints << " viewpoints, "
                << summary.flows << " flows -> " << bundle_dir << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
