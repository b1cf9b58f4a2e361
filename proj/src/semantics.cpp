#include "converge/semantics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <thread>

#include "converge/error.hpp"
#include "converge/text.hpp"

namespace converge {

using nlohmann::json;

double EmbeddingVector::norm() const {
  double s = 0.0;
  for (double v : values) s += v * v;
  return std::sqrt(s);
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dimension() != b.dimension())
    throw ValidationError("embedding dimension mismatch: " + std::to_string(a.dimension()) + " vs " +
                          std::to_string(b.dimension()));
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw ValidationError("zero-norm embedding vector");
  double dot = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) dot += a.values[i] * b.values[i];
  return std::clamp(dot / (na * nb), -1.0, 1.0);
}

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Uniform in [-1, 1), portable bit-for-bit.
double unit_uniform(std::uint64_t& state) {
  return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-52 - 1.0;
}

}  // namespace

MockEmbedder::MockEmbedder(std::uint64_t seed, std::size_t dimension) : seed_(seed), dimension_(dimension) {
  if (dimension_ == 0) throw ValidationError("embedding dimension must be positive");
}

EmbeddingVector MockEmbedder::embed(std::string_view text_in) {
  EmbeddingVector out{std::vector<double>(dimension_, 0.0)};
  for (const auto& token : text::content_tokens(text_in)) {
    std::uint64_t state = text::fnv1a64(token) ^ (seed_ * 0x9e3779b97f4a7c15ULL);
    for (auto& v : out.values) v += unit_uniform(state);
  }
  return out;
}

std::vector<double> SimilarityMatrix::upper_triangle() const {
  std::vector<double> out;
  const auto n = size();
  out.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) out.push_back(at(i, j));
  return out;
}

void SimilarityMatrix::validate() const {
  const auto n = size();
  if (values.size() != n * n) throw ValidationError("similarity matrix has the wrong number of cells");
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(at(i, i) - 1.0) > 1e-9) throw ValidationError("similarity diagonal is not 1", ids[i]);
    for (std::size_t j = 0; j < n; ++j) {
      if (at(i, j) != at(j, i)) throw ValidationError("similarity matrix is not symmetric", ids[i]);
      if (!(at(i, j) >= -1.0 && at(i, j) <= 1.0)) throw ValidationError("similarity out of [-1,1]", ids[i]);
    }
  }
}

SimilarityMatrix similarity_matrix(std::vector<std::string> ids, std::span<const EmbeddingVector> vectors,
                                   unsigned threads) {
  if (ids.size() != vectors.size()) throw ValidationError("ids and vectors differ in length");
  const std::size_t n = ids.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (vectors[i].dimension() != vectors[0].dimension())
      throw ValidationError("embedding dimension mismatch", ids[i]);
    if (vectors[i].norm() == 0.0) throw ValidationError("zero-norm embedding vector", ids[i]);
  }

  SimilarityMatrix m;
  m.ids = std::move(ids);
  m.values.assign(n * n, 0.0);
  auto fill_rows = [&](std::size_t row_begin, std::size_t row_end) {
    for (std::size_t i = row_begin; i < row_end; ++i) {
      m.at(i, i) = 1.0;
      for (std::size_t j = i + 1; j < n; ++j) m.at(i, j) = cosine_similarity(vectors[i], vectors[j]);
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    fill_rows(0, n);
  } else {
    std::vector<std::thread> workers;
    const std::size_t block = (n + threads - 1) / threads;
    for (std::size_t b = 0; b < n; b += block) workers.emplace_back(fill_rows, b, std::min(n, b + block));
    for (auto& w : workers) w.join();
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) m.at(i, j) = m.at(j, i);
  return m;
}

std::vector<EmbeddingVector> embed_viewpoints(std::span<const Viewpoint> viewpoints, Embedder& embedder,
                                              bool include_quote) {
  std::vector<EmbeddingVector> out;
  out.reserve(viewpoints.size());
  for (const auto& v : viewpoints) {
    auto e = embedder.embed(include_quote ? v.summary + " " + v.quote : v.summary);
    if (e.norm() == 0.0) throw ValidationError("viewpoint embeds to a zero vector", v.id);
    out.push_back(std::move(e));
  }
  return out;
}

double nearest_rank_percentile(std::vector<double> values, double p) {
  if (values.empty()) throw ValidationError("percentile of an empty set");
  if (!(p > 0.0 && p < 100.0)) throw ValidationError("percentile must lie in (0, 100)");
  std::sort(values.begin(), values.end());
  const double exact = p * static_cast<double>(values.size()) / 100.0;
  auto rank = static_cast<std::size_t>(std::ceil(exact - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

double percentile_threshold(const SimilarityMatrix& matrix, double p) {
  if (matrix.size() < 2) throw ValidationError("percentile threshold needs at least two viewpoints");
  return nearest_rank_percentile(matrix.upper_triangle(), p);
}

std::string to_string(GraphMode m) { return m == GraphMode::Above ? "above" : "below"; }

GraphMode parse_graph_mode(std::string_view s) {
  if (s == "above") return GraphMode::Above;
  if (s == "below") return GraphMode::Below;
  throw ValidationError("graph mode must be 'above' or 'below'");
}

ViewGraph build_view_graph(const SimilarityMatrix& matrix, double threshold, GraphMode mode,
                           std::span<const NodeLabel> labels, Boundary boundary) {
  if (!labels.empty() && labels.size() != matrix.size())
    throw ValidationError("node labels and similarity matrix differ in size");
  ViewGraph g;
  g.mode = mode;
  g.threshold = threshold;
  g.nodes.reserve(matrix.size());
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    ViewNode node{matrix.ids[i], {}, {}, 0};
    if (!labels.empty()) {
      node.domain = labels[i].domain;
      node.nabc = labels[i].nabc;
    }
    g.nodes.push_back(std::move(node));
  }
  const bool inclusive = boundary == Boundary::Inclusive;
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    for (std::size_t j = i + 1; j < matrix.size(); ++j) {
      const double s = matrix.at(i, j);
      const bool keep = mode == GraphMode::Above ? (inclusive ? s >= threshold : s > threshold)
                                                 : (inclusive ? s <= threshold : s < threshold);
      if (!keep) continue;
      g.edges.push_back({i, j, s});
      ++g.nodes[i].degree;
      ++g.nodes[j].degree;
    }
  }
  return g;
}

std::vector<NodeLabel> labels_for(std::span<const Viewpoint> viewpoints) {
  std::vector<NodeLabel> labels;
  labels.reserve(viewpoints.size());
  for (const auto& v : viewpoints) labels.push_back({v.domain_code, std::string(1, nabc_letter(v.nabc))});
  return labels;
}

json view_graph_to_json(const ViewGraph& g) {
  json doc;
  doc["nodes"] = json::array();
  for (const auto& n : g.nodes)
    doc["nodes"].push_back({{"id", n.id}, {"domain", n.domain}, {"nabc", n.nabc}, {"degree", n.degree}});
  doc["edges"] = json::array();
  for (const auto& e : g.edges)
    doc["edges"].push_back({{"source", g.nodes[e.source].id}, {"target", g.nodes[e.target].id}, {"weight", e.weight}});
  doc["meta"] = {{"mode", to_string(g.mode)},
                 {"threshold", g.threshold},
                 {"percentile", g.percentile ? json(*g.percentile) : json(nullptr)}};
  return doc;
}

ViewGraph view_graph_from_json(const json& doc) {
  ViewGraph g;
  std::map<std::string, std::size_t> index;
  for (const auto& n : doc.at("nodes")) {
    index[n.at("id").get<std::string>()] = g.nodes.size();
    g.nodes.push_back({n.at("id").get<std::string>(), n.value("domain", ""), n.value("nabc", ""),
                       n.value("degree", std::size_t{0})});
  }
  for (const auto& e : doc.at("edges")) {
    auto s = index.find(e.at("source").get<std::string>());
    auto t = index.find(e.at("target").get<std::string>());
    if (s == index.end() || t == index.end()) throw ValidationError("graph edge references an unknown node");
    g.edges.push_back({s->second, t->second, e.at("weight").get<double>()});
  }
  const auto& meta = doc.at("meta");
  g.mode = parse_graph_mode(meta.at("mode").get<std::string>());
  g.threshold = meta.at("threshold").get<double>();
  if (meta.contains("percentile") && !meta["percentile"].is_null()) g.percentile = meta["percentile"].get<double>();
  return g;
}

json similarity_to_json(const SimilarityMatrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.size(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.size(); ++j) row.push_back(m.at(i, j));
    rows.push_back(std::move(row));
  }
  return {{"ids", m.ids}, {"values", std::move(rows)}, {"corpus_fingerprint", m.corpus_fingerprint}};
}

SimilarityMatrix similarity_from_json(const json& doc) {
  SimilarityMatrix m;
  m.ids = doc.at("ids").get<std::vector<std::string>>();
  m.corpus_fingerprint = doc.value("corpus_fingerprint", "");
  const auto& rows = doc.at("values");
  if (rows.size() != m.ids.size()) throw ValidationError("similarity matrix row count mismatch");
  m.values.reserve(m.ids.size() * m.ids.size());
  for (const auto& row : rows) {
    if (row.size() != m.ids.size()) throw ValidationError("similarity matrix column count mismatch");
    for (const auto& v : row) m.values.push_back(v.get<double>());
  }
  m.validate();
  return m;
}

}  // namespace converge
