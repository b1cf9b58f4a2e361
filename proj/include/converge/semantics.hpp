#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "converge/extraction.hpp"

namespace converge {

struct EmbeddingVector {
  std::vector<double> values;

  std::size_t dimension() const noexcept { return values.size(); }
  double norm() const;
};

/// dot(a,b) / (|a| |b|), clamped to [-1, 1].
/// Throws ValidationError on dimension mismatch or a zero-norm vector.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual EmbeddingVector embed(std::string_view text) = 0;
  virtual std::string name() const = 0;
};

/// Seeded hash-based bag-of-words projection. Every content token maps to a
/// fixed pseudo-random direction; a text embeds as the sum of its token
/// directions, so shared keywords raise cosine similarity and identical texts
/// embed identically.
class MockEmbedder final : public Embedder {
 public:
  explicit MockEmbedder(std::uint64_t seed = 42, std::size_t dimension = 64);
  EmbeddingVector embed(std::string_view text) override;
  std::string name() const override { return "mock"; }

 private:
  std::uint64_t seed_;
  std::size_t dimension_;
};

/// Symmetric matrix of pairwise cosine similarities over viewpoint ids.
struct SimilarityMatrix {
  std::vector<std::string> ids;
  std::vector<double> values;  // row-major n x n
  std::string corpus_fingerprint;

  std::size_t size() const noexcept { return ids.size(); }
  double at(std::size_t i, std::size_t j) const { return values[i * ids.size() + j]; }
  double& at(std::size_t i, std::size_t j) { return values[i * ids.size() + j]; }

  /// Off-diagonal upper-triangle values, row by row.
  std::vector<double> upper_triangle() const;
  /// Checks symmetry, unit diagonal (1e-9) and bounds; throws ValidationError.
  void validate() const;
};

/// Each cell is computed independently, so the result does not depend on how
/// rows are split across `threads`.
SimilarityMatrix similarity_matrix(std::vector<std::string> ids, std::span<const EmbeddingVector> vectors,
                                   unsigned threads = 1);

/// Embeds viewpoint summaries (optionally summary + quote).
std::vector<EmbeddingVector> embed_viewpoints(std::span<const Viewpoint> viewpoints, Embedder& embedder,
                                              bool include_quote = false);

/// Nearest-rank percentile: the ceil(p/100 * N)-th smallest value.
double nearest_rank_percentile(std::vector<double> values, double p);

/// Nearest-rank percentile over the n(n-1)/2 off-diagonal pairs. Needs n >= 2
/// and p in (0, 100).
double percentile_threshold(const SimilarityMatrix& matrix, double p);

enum class GraphMode { Above, Below };
std::string to_string(GraphMode m);
GraphMode parse_graph_mode(std::string_view s);

/// Whether a pair exactly at the threshold becomes an edge.
enum class Boundary { Inclusive, Exclusive };

struct NodeLabel {
  std::string domain;
  std::string nabc;
};

struct ViewNode {
  std::string id;
  std::string domain;
  std::string nabc;
  std::size_t degree = 0;
};

struct ViewEdge {
  std::size_t source = 0;  // indices into nodes, source < target
  std::size_t target = 0;
  double weight = 0.0;
};

/// Thresholded similarity (above) or dissimilarity (below) graph. Isolated
/// nodes are kept; degree is stored so every consumer agrees on node size.
struct ViewGraph {
  std::vector<ViewNode> nodes;
  std::vector<ViewEdge> edges;
  GraphMode mode = GraphMode::Above;
  double threshold = 0.0;
  std::optional<double> percentile;
};

ViewGraph build_view_graph(const SimilarityMatrix& matrix, double threshold, GraphMode mode,
                           std::span<const NodeLabel> labels = {}, Boundary boundary = Boundary::Inclusive);

std::vector<NodeLabel> labels_for(std::span<const Viewpoint> viewpoints);

nlohmann::json view_graph_to_json(const ViewGraph& graph);
ViewGraph view_graph_from_json(const nlohmann::json& doc);

nlohmann::json similarity_to_json(const SimilarityMatrix& m);
SimilarityMatrix similarity_from_json(const nlohmann::json& doc);

}  // namespace converge
