#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "converge/corpus.hpp"
#include "converge/extraction.hpp"
#include "converge/semantics.hpp"

namespace converge {

/// Dense square matrix, row-major.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  bool is_symmetric() const;
  double max_entry() const;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Domain connectivity graph of one presentation. Star-shaped around the
/// presenter's domain: adjacency(k, j) counts the presenter's viewpoints that
/// are similar to domain j.
struct DomainGraph {
  std::string presentation_id;
  std::string presenter_domain;
  std::vector<std::string> domains;
  SquareMatrix adjacency;
  bool degenerate = false;  // no viewpoint cleared the threshold

  std::size_t index_of(const std::string& code) const;
  double weight(const std::string& a, const std::string& b) const;
};

/// Viewpoint-to-domain affinity scores, one row per viewpoint, one column
/// per domain (in corpus registry order).
struct AffinityTable {
  std::vector<std::string> viewpoint_ids;
  std::vector<std::string> domains;
  std::vector<std::vector<double>> scores;
};

enum class AffinityBackend { Embedding, Provider };
std::string to_string(AffinityBackend b);
AffinityBackend parse_affinity_backend(std::string_view s);

/// Cosine similarity between the summary embedding and the centroid of the
/// keyword embeddings.
double domain_affinity(const Viewpoint& viewpoint, const Domain& domain, Embedder& embedder);
/// Structured provider judgement in [0, 1].
double domain_affinity(const Viewpoint& viewpoint, const Domain& domain, Provider& provider,
                       std::uint64_t seed = 42, int max_retries = 2);

AffinityTable compute_affinities(const std::vector<Viewpoint>& viewpoints, const std::vector<Domain>& domains,
                                 Embedder& embedder);
AffinityTable compute_affinities(const std::vector<Viewpoint>& viewpoints, const std::vector<Domain>& domains,
                                 Provider& provider, std::uint64_t seed = 42);

/// Default threshold for the embedding backend: the 75th nearest-rank
/// percentile of every viewpoint's affinity to the domains other than its own.
double default_embedding_theta(const AffinityTable& table, const std::vector<Viewpoint>& viewpoints);

inline constexpr double kDefaultProviderTheta = 0.5;

/// A[k][j] = number of rows with affinity to j >= theta, for j != k, mirrored.
/// `rows` are the affinity rows (domain order = `domains`) of one
/// presentation's viewpoints.
DomainGraph build_domain_graph(const std::string& presentation_id, const std::string& presenter_domain,
                               const std::vector<std::string>& domains,
                               const std::vector<std::vector<double>>& rows, double theta);

struct EigenResult {
  std::vector<double> vector;  // unit L2 norm, non-negative
  double eigenvalue = 0.0;
  int iterations = 0;
  double residual = 0.0;  // |A x - lambda x|_inf / |x|_inf
};

/// Dominant eigenpair of a symmetric non-negative matrix by power iteration
/// on A + c I (c = max entry), from the uniform positive start. When `anchor`
/// is given, only its connected component takes part and every other
/// component is 0. Converged when successive iterates differ by < tol in the
/// max norm. Throws NumericError on an all-zero (component) matrix or on
/// non-convergence.
EigenResult dominant_eigenpair(const SquareMatrix& a, std::optional<std::size_t> anchor = std::nullopt,
                               double tol = 1e-10, int max_iter = 10'000);

struct CentralityVector {
  std::string presentation_id;
  std::string presenter_domain;
  std::vector<std::string> domains;
  std::vector<double> values;  // max component == 1
  double dominant_eigenvalue = 0.0;
  double residual = 0.0;
  int iterations = 0;

  double value(const std::string& code) const;
};

CentralityVector eigenvector_centrality(const DomainGraph& graph, double tol = 1e-10, int max_iter = 10'000);

/// Mean EC per (presenter domain, connected domain). Rows and columns follow
/// `domains`; rows without any contributing presentation only carry the
/// unit diagonal.
struct EcMatrix {
  std::vector<std::string> domains;
  std::vector<std::vector<std::optional<double>>> cells;  // [presenter][connected]
  std::vector<std::vector<std::size_t>> counts;
  std::string corpus_fingerprint;

  std::optional<double> cell(const std::string& presenter, const std::string& connected) const;
};

EcMatrix build_ec_matrix(const std::vector<CentralityVector>& centralities, const std::vector<std::string>& domains);

/// Plain-text table, rows = presenter domain, blanks for absent cells.
std::string render_ec_table(const EcMatrix& m);

nlohmann::json ec_matrix_to_json(const EcMatrix& m);
EcMatrix ec_matrix_from_json(const nlohmann::json& doc);
nlohmann::json domain_graph_to_json(const DomainGraph& g, const CentralityVector* centrality);

}  // namespace converge
