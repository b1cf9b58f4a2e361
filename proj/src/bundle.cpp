#include "converge/bundle.hpp"

#include <algorithm>
#include <map>

#include "converge/error.hpp"
#include "converge/layout3d.hpp"

namespace converge {

using nlohmann::json;
namespace fs = std::filesystem;

Bundle::Bundle(fs::path root) : root_(std::move(root)) {}

bool Bundle::has(std::string_view name) const { return fs::exists(path(name)); }

json Bundle::read_json(std::string_view name) const {
  const auto p = path(name);
  if (!fs::exists(p)) throw ValidationError("bundle file missing", p.string());
  try {
    return json::parse(read_file(p));
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("corrupt bundle file: ") + e.what(), p.string());
  }
}

void Bundle::write_json(std::string_view name, const json& doc) const { write_file(path(name), dump_json(doc)); }

void Bundle::write_text(std::string_view name, std::string_view text) const { write_file(path(name), text); }

PipelineConfig Bundle::config() const {
  if (!has("config.json")) return {};
  return config_from_json(read_json("config.json"));
}

Corpus Bundle::corpus() const { return load_corpus(path("corpus.json")); }

std::vector<Viewpoint> Bundle::viewpoints() const {
  return read_json("viewpoints.json").at("viewpoints").get<std::vector<Viewpoint>>();
}

std::vector<FlowCandidate> Bundle::proposed_flows() const {
  return read_json("flows.json").at("flows").get<std::vector<FlowCandidate>>();
}

std::string Bundle::flows_fingerprint() const {
  return read_json("flows.json").at("meta").at("corpus_fingerprint").get<std::string>();
}

std::vector<SurveyResponse> Bundle::responses() const {
  if (!has("responses.json")) return {};
  return responses_from_json(read_json("responses.json"));
}

IngestResult Bundle::review_state() const {
  const auto viewpoints = this->viewpoints();
  auto flows = proposed_flows();
  return ingest_responses(generate_survey(flows, viewpoints), flows, responses());
}

SimilarityMatrix Bundle::similarity() const { return similarity_from_json(read_json("similarity.json")); }

EcMatrix Bundle::ec_matrix() const { return ec_matrix_from_json(read_json("ec_matrix.json")); }

json export_meta(const PipelineConfig& config, const std::string& corpus_fingerprint) {
  return {{"config", config_to_json(config)}, {"corpus_fingerprint", corpus_fingerprint}};
}

namespace {

template <class F>
std::vector<std::string> guarded(const char* stage, F&& body) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e.what());
  } catch (const json::exception& e) {
    throw StageError(stage, std::string("malformed artifact: ") + e.what());
  }
}

json meta_for(const Bundle& bundle) { return export_meta(bundle.config(), corpus_fingerprint(bundle.corpus())); }

std::vector<FlowCandidate> selected_flows(const Bundle& bundle, FlowSelector selector) {
  return select_flows(bundle.review_state().flows, selector);
}

}  // namespace

json graph_export(const Bundle& bundle, double percentile, GraphMode mode) {
  if (!(percentile > 0.0 && percentile < 100.0)) throw ValidationError("percentile must be in (0, 100)");
  const auto sim = bundle.similarity();
  const auto viewpoints = bundle.viewpoints();
  const auto labels = labels_for(viewpoints);
  auto graph = build_view_graph(sim, percentile_threshold(sim, percentile), mode, labels);
  graph.percentile = percentile;
  auto doc = view_graph_to_json(graph);
  doc["meta"].update(meta_for(bundle));
  return doc;
}

json layout_export(const Bundle& bundle, std::uint64_t seed) {
  auto params = bundle.config().layout;
  params.seed = seed;
  const auto graph = view_graph_from_json(bundle.read_json("graph.json"));
  auto doc = layout_to_json(run_layout(graph, params), params);
  doc["meta"] = meta_for(bundle);
  return doc;
}

json flows_export(const Bundle& bundle, FlowSelector selector) {
  auto doc = flow_map_json(presentation_slots(bundle.corpus()), bundle.viewpoints(), selected_flows(bundle, selector));
  doc["selector"] = to_string(selector);
  doc["meta"] = meta_for(bundle);
  return doc;
}

json ratio_export(const Bundle& bundle, FlowSelector selector) {
  const auto graphs =
      build_cumulative_graphs(bundle.viewpoints(), selected_flows(bundle, selector), presentation_slots(bundle.corpus()));
  const auto series = ratio_series(graphs);
  std::vector<std::string> warnings;
  std::optional<TrendReport> trend;
  if (series.entries.size() >= 2) trend = trend_report(series);
  else warnings.push_back("fewer than three presentations: no trend reported");
  auto doc = ratio_to_json(series, trend ? &*trend : nullptr);
  doc["selector"] = to_string(selector);
  doc["warnings"] = warnings;
  doc["meta"] = meta_for(bundle);
  return doc;
}

json survey_export(const Bundle& bundle) {
  auto doc = survey_to_json(bundle.review_state().survey);
  doc["meta"] = meta_for(bundle);
  return doc;
}

json consistency_export(const Bundle& bundle) {
  const auto config = bundle.config();
  const auto sim = bundle.similarity();
  const auto ec = bundle.ec_matrix();
  const auto flows = selected_flows(bundle, config.flow_selector);
  const auto viewpoints = bundle.viewpoints();
  ReportLayers layers{&sim, &ec, &flows, bundle.flows_fingerprint(), &viewpoints};
  auto doc = consistency_to_json(consistency_report(layers));
  doc["selector"] = to_string(config.flow_selector);
  doc["meta"] = meta_for(bundle);
  return doc;
}

std::vector<std::string> stage_ingest(const Bundle& bundle, const fs::path& corpus_path, const PipelineConfig& config,
                                      const std::optional<fs::path>& pseudonyms) {
  return guarded("ingest", [&] {
    auto corpus = load_corpus(corpus_path);
    if (pseudonyms) corpus = pseudonymize(corpus, load_pseudonym_map(*pseudonyms));
    validate_corpus(corpus);
    fs::create_directories(bundle.root());
    save_corpus(corpus, bundle.path("corpus.json"));
    bundle.write_json("config.json", config_to_json(config));
    return std::vector<std::string>{};
  });
}

std::vector<std::string> stage_extract(const Bundle& bundle, Provider& provider, unsigned threads) {
  return guarded("extract", [&] {
    const auto config = bundle.config();
    const auto corpus = bundle.corpus();
    const auto results = extract_corpus(corpus, provider, config.limits, threads);
    json viewpoints = json::array(), raw = json::array();
    std::vector<std::string> warnings;
    for (const auto& r : results) {
      for (const auto& v : r.viewpoints) viewpoints.push_back(v);
      for (const auto& v : r.raw) raw.push_back(v);
      for (const auto& w : r.warnings) warnings.push_back(r.presentation_id + ": " + w);
    }
    bundle.write_json("viewpoints.json", {{"viewpoints", std::move(viewpoints)},
                                          {"raw", std::move(raw)},
                                          {"warnings", warnings},
                                          {"meta", export_meta(config, corpus_fingerprint(corpus))}});
    return warnings;
  });
}

std::vector<std::string> stage_flows(const Bundle& bundle, Provider& provider) {
  return guarded("flows", [&] {
    const auto config = bundle.config();
    const auto corpus = bundle.corpus();
    std::vector<std::string> warnings;
    FlowInferenceResult result;
    if (corpus.presentations.size() < 2) warnings.push_back("single presentation: no flows inferred");
    else result = infer_flows(bundle.viewpoints(), provider, config.limits);
    bundle.write_json("flows.json", {{"flows", result.flows},
                                     {"log", result.log},
                                     {"warnings", warnings},
                                     {"meta", export_meta(config, corpus_fingerprint(corpus))}});
    return warnings;
  });
}

std::vector<std::string> stage_graph(const Bundle& bundle, Embedder& embedder, std::optional<double> percentile,
                                     std::optional<GraphMode> mode) {
  return guarded("graph", [&] {
    const auto config = bundle.config();
    const auto viewpoints = bundle.viewpoints();
    std::vector<std::string> ids;
    for (const auto& v : viewpoints) ids.push_back(v.id);
    const auto vectors = embed_viewpoints(viewpoints, embedder, config.embed_quotes);
    auto sim = similarity_matrix(ids, vectors);
    sim.corpus_fingerprint = corpus_fingerprint(bundle.corpus());
    bundle.write_json("similarity.json", similarity_to_json(sim));
    bundle.write_json("graph.json", graph_export(bundle, percentile.value_or(config.percentile), mode.value_or(config.mode)));
    return std::vector<std::string>{};
  });
}

std::vector<std::string> stage_layout(const Bundle& bundle, std::optional<std::uint64_t> seed) {
  return guarded("layout", [&] {
    const auto doc = layout_export(bundle, seed.value_or(bundle.config().seed));
    std::vector<std::string> warnings;
    if (doc.at("hit_max_iterations").get<bool>()) warnings.push_back("layout stopped at the iteration cap");
    bundle.write_json("layout.json", doc);
    return warnings;
  });
}

std::vector<std::string> stage_influence(const Bundle& bundle, Embedder& embedder, Provider& provider,
                                         std::optional<double> theta_dom) {
  return guarded("influence", [&] {
    const auto config = bundle.config();
    const auto corpus = bundle.corpus();
    const auto viewpoints = bundle.viewpoints();
    const auto domains = corpus.domain_codes();
    const auto table = config.affinity == AffinityBackend::Embedding
                           ? compute_affinities(viewpoints, corpus.domains, embedder)
                           : compute_affinities(viewpoints, corpus.domains, provider, config.seed);
    double theta = 0.0;
    if (theta_dom) theta = *theta_dom;
    else if (config.theta_dom) theta = *config.theta_dom;
    else if (config.affinity == AffinityBackend::Embedding) theta = default_embedding_theta(table, viewpoints);
    else theta = kDefaultProviderTheta;

    std::vector<std::string> warnings;
    std::vector<CentralityVector> centralities;
    json graphs = json::array();
    for (const auto& p : corpus.presentations) {
      std::vector<std::vector<double>> rows;
      for (std::size_t i = 0; i < viewpoints.size(); ++i)
        if (viewpoints[i].presentation_id == p.id) rows.push_back(table.scores[i]);
      if (rows.empty()) {
        warnings.push_back(p.id + ": no viewpoints, skipped in the EC matrix");
        continue;
      }
      const auto g = build_domain_graph(p.id, p.domain_code, domains, rows, theta);
      if (g.degenerate) warnings.push_back(p.id + ": no domain passes theta_dom, centrality is the presenter alone");
      centralities.push_back(eigenvector_centrality(g));
      graphs.push_back(domain_graph_to_json(g, &centralities.back()));
    }
    auto ec = build_ec_matrix(centralities, domains);
    ec.corpus_fingerprint = corpus_fingerprint(corpus);
    const auto meta = export_meta(config, ec.corpus_fingerprint);
    bundle.write_json("domain_graphs.json", {{"affinity", to_string(config.affinity)},
                                             {"theta_dom", theta},
                                             {"graphs", std::move(graphs)},
                                             {"warnings", warnings},
                                             {"meta", meta}});
    auto doc = ec_matrix_to_json(ec);
    doc["meta"] = meta;
    bundle.write_json("ec_matrix.json", doc);
    bundle.write_text("ec_matrix.txt", render_ec_table(ec));
    return warnings;
  });
}

std::vector<std::string> stage_temporal(const Bundle& bundle, std::optional<FlowSelector> selector) {
  return guarded("temporal", [&] {
    const auto sel = selector.value_or(bundle.config().flow_selector);
    bundle.write_json("flow_map.json", flows_export(bundle, sel));
    const auto ratio = ratio_export(bundle, sel);
    RatioSeries series;
    for (const auto& e : ratio.at("entries")) {
      RatioEntry entry;
      entry.t = e.at("t").get<int>();
      entry.nodes = e.at("V").get<std::size_t>();
      entry.edges = e.at("E").get<std::size_t>();
      entry.ratio = e.at("r").get<double>();
      series.entries.push_back(entry);
    }
    bundle.write_json("ratio.json", ratio);
    bundle.write_text("ratio.csv", ratio_csv(series));
    return ratio.at("warnings").get<std::vector<std::string>>();
  });
}

std::vector<std::string> stage_survey(const Bundle& bundle) {
  return guarded("survey", [&] {
    if (!bundle.has("responses.json")) bundle.write_json("responses.json", responses_to_json({}));
    const auto doc = survey_export(bundle);
    bundle.write_json("survey.json", doc);
    bundle.write_text("survey.txt", render_survey_text(bundle.review_state().survey));
    return doc.at("warnings").get<std::vector<std::string>>();
  });
}

std::vector<std::string> stage_report(const Bundle& bundle) {
  return guarded("report", [&] {
    bundle.write_json("report.json", consistency_export(bundle));
    return std::vector<std::string>{};
  });
}

IngestResult import_responses(const Bundle& bundle, const std::vector<SurveyResponse>& incoming) {
  auto stored = bundle.responses();
  std::vector<SurveyResponse> fresh;
  for (const auto& r : incoming) {
    const bool known = std::find(stored.begin(), stored.end(), r) != stored.end() ||
                       std::find(fresh.begin(), fresh.end(), r) != fresh.end();
    if (!known) fresh.push_back(r);
  }
  const auto viewpoints = bundle.viewpoints();
  auto flows = bundle.proposed_flows();
  const auto survey = ingest_responses(generate_survey(flows, viewpoints), flows, stored).survey;
  auto result = ingest_responses(survey, flows, fresh);

  stored.insert(stored.end(), fresh.begin(), fresh.end());
  bundle.write_json("responses.json", responses_to_json(stored));
  bundle.write_json("survey.json", survey_export(bundle));
  bundle.write_text("survey.txt", render_survey_text(result.survey));
  return result;
}

RunSummary run_pipeline(const PipelineConfig& config, const fs::path& corpus_path, const fs::path& out,
                        const std::optional<fs::path>& pseudonyms) {
  check_startup(config);
  const Bundle bundle(out);
  auto provider = make_provider(config);
  auto embedder = make_embedder(config);

  RunSummary summary;
  auto collect = [&](std::vector<std::string> w) {
    summary.warnings.insert(summary.warnings.end(), w.begin(), w.end());
  };
  collect(stage_ingest(bundle, corpus_path, config, pseudonyms));
  bundle.write_json("responses.json", responses_to_json({}));
  collect(stage_extract(bundle, *provider, config.threads));
  collect(stage_flows(bundle, *provider));
  collect(stage_graph(bundle, *embedder));
  collect(stage_layout(bundle));
  collect(stage_influence(bundle, *embedder, *provider));
  collect(stage_temporal(bundle));
  collect(stage_survey(bundle));
  collect(stage_report(bundle));

  const auto corpus = bundle.corpus();
  summary.presentations = corpus.presentations.size();
  summary.viewpoints = bundle.viewpoints().size();
  summary.flows = bundle.proposed_flows().size();
  bundle.write_json("manifest.json",
                    {{"bundle_version", kBundleVersion},
                     {"corpus_fingerprint", corpus_fingerprint(corpus)},
                     {"config_fingerprint", config_fingerprint(config)},
                     {"counts",
                      {{"presentations", summary.presentations},
                       {"viewpoints", summary.viewpoints},
                       {"flows", summary.flows}}},
                     {"files", {"config.json", "corpus.json", "viewpoints.json", "flows.json", "similarity.json",
                                "graph.json", "layout.json", "domain_graphs.json", "ec_matrix.json", "ec_matrix.txt",
                                "flow_map.json", "ratio.json", "ratio.csv", "survey.json", "survey.txt",
                                "responses.json", "report.json"}},
                     {"warnings", summary.warnings}});
  return summary;
}

}  // namespace converge
