#include "converge/influence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <sstream>

#include "converge/error.hpp"
#include "structured.hpp"

namespace converge {

using nlohmann::json;

bool SquareMatrix::is_symmetric() const {
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j)
      if ((*this)(i, j) != (*this)(j, i)) return false;
  return true;
}

double SquareMatrix::max_entry() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, v);
  return m;
}

std::size_t DomainGraph::index_of(const std::string& code) const {
  auto it = std::find(domains.begin(), domains.end(), code);
  if (it == domains.end()) throw ValidationError("unknown domain " + code, presentation_id);
  return static_cast<std::size_t>(it - domains.begin());
}

double DomainGraph::weight(const std::string& a, const std::string& b) const {
  return adjacency(index_of(a), index_of(b));
}

std::string to_string(AffinityBackend b) { return b == AffinityBackend::Embedding ? "embedding" : "provider"; }

AffinityBackend parse_affinity_backend(std::string_view s) {
  if (s == "embedding") return AffinityBackend::Embedding;
  if (s == "provider") return AffinityBackend::Provider;
  throw ValidationError("affinity backend must be 'embedding' or 'provider'");
}

namespace {

EmbeddingVector keyword_centroid(const Domain& domain, Embedder& embedder) {
  if (domain.keywords.empty()) throw ValidationError("domain has an empty keyword bag", domain.code);
  EmbeddingVector centroid;
  std::size_t used = 0;
  for (const auto& k : domain.keywords) {
    auto e = embedder.embed(k);
    if (e.norm() == 0.0) continue;
    if (centroid.values.empty()) centroid.values.assign(e.dimension(), 0.0);
    if (e.dimension() != centroid.dimension()) throw ValidationError("embedding dimension mismatch", domain.code);
    for (std::size_t i = 0; i < e.dimension(); ++i) centroid.values[i] += e.values[i];
    ++used;
  }
  if (used == 0) throw ValidationError("no keyword of the domain produces an embedding", domain.code);
  for (auto& v : centroid.values) v /= static_cast<double>(used);
  return centroid;
}

}  // namespace

double domain_affinity(const Viewpoint& viewpoint, const Domain& domain, Embedder& embedder) {
  const auto centroid = keyword_centroid(domain, embedder);
  return cosine_similarity(embedder.embed(viewpoint.summary), centroid);
}

double domain_affinity(const Viewpoint& viewpoint, const Domain& domain, Provider& provider, std::uint64_t seed,
                       int max_retries) {
  if (domain.keywords.empty()) throw ValidationError("domain has an empty keyword bag", domain.code);
  const json input = {{"summary", viewpoint.summary}, {"domain", domain.name}, {"keywords", domain.keywords}};
  CompletionRequest request{detail::instruction_for("domain_affinity", ExtractionLimits{}), input.dump(), seed};
  return detail::complete_with_retries(provider, request, max_retries, [](const std::string& raw) {
    const json doc = detail::parse_structured(raw);
    if (!doc.contains("score") || !doc["score"].is_number()) throw SchemaError("field 'score' missing", raw);
    const double s = doc["score"].get<double>();
    if (!(s >= 0.0 && s <= 1.0)) throw SchemaError("score outside [0, 1]", raw);
    return s;
  });
}

AffinityTable compute_affinities(const std::vector<Viewpoint>& viewpoints, const std::vector<Domain>& domains,
                                 Embedder& embedder) {
  AffinityTable t;
  std::vector<EmbeddingVector> centroids;
  for (const auto& d : domains) {
    t.domains.push_back(d.code);
    centroids.push_back(keyword_centroid(d, embedder));
  }
  for (const auto& v : viewpoints) {
    t.viewpoint_ids.push_back(v.id);
    const auto e = embedder.embed(v.summary);
    std::vector<double> row;
    for (const auto& c : centroids) row.push_back(cosine_similarity(e, c));
    t.scores.push_back(std::move(row));
  }
  return t;
}

AffinityTable compute_affinities(const std::vector<Viewpoint>& viewpoints, const std::vector<Domain>& domains,
                                 Provider& provider, std::uint64_t seed) {
  AffinityTable t;
  for (const auto& d : domains) t.domains.push_back(d.code);
  for (const auto& v : viewpoints) {
    t.viewpoint_ids.push_back(v.id);
    std::vector<double> row;
    for (const auto& d : domains) row.push_back(domain_affinity(v, d, provider, seed));
    t.scores.push_back(std::move(row));
  }
  return t;
}

double default_embedding_theta(const AffinityTable& table, const std::vector<Viewpoint>& viewpoints) {
  std::vector<double> observed;
  for (std::size_t r = 0; r < table.scores.size(); ++r) {
    for (std::size_t c = 0; c < table.domains.size(); ++c) {
      if (table.domains[c] != viewpoints[r].domain_code) observed.push_back(table.scores[r][c]);
    }
  }
  if (observed.empty()) throw ValidationError("no cross-domain affinities to derive a threshold from");
  return nearest_rank_percentile(std::move(observed), 75.0);
}

DomainGraph build_domain_graph(const std::string& presentation_id, const std::string& presenter_domain,
                               const std::vector<std::string>& domains,
                               const std::vector<std::vector<double>>& rows, double theta) {
  if (rows.empty()) throw ValidationError("presentation has no viewpoints", presentation_id);
  DomainGraph g;
  g.presentation_id = presentation_id;
  g.presenter_domain = presenter_domain;
  g.domains = domains;
  g.adjacency = SquareMatrix(domains.size());
  const std::size_t k = g.index_of(presenter_domain);
  bool any = false;
  for (std::size_t j = 0; j < domains.size(); ++j) {
    if (j == k) continue;
    double count = 0.0;
    for (const auto& row : rows) {
      if (row.size() != domains.size()) throw ValidationError("affinity row has the wrong width", presentation_id);
      if (row[j] >= theta) count += 1.0;
    }
    g.adjacency(k, j) = count;
    g.adjacency(j, k) = count;
    any = any || count > 0.0;
  }
  g.degenerate = !any;
  return g;
}

EigenResult dominant_eigenpair(const SquareMatrix& a, std::optional<std::size_t> anchor, double tol, int max_iter) {
  const std::size_t n = a.size();
  if (n == 0) throw NumericError("eigenvector centrality of an empty matrix");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (!(a(i, j) >= 0.0) || !std::isfinite(a(i, j))) throw NumericError("adjacency must be finite and non-negative");

  std::vector<std::size_t> members;
  if (anchor) {
    if (*anchor >= n) throw NumericError("anchor index out of range");
    std::vector<bool> seen(n, false);
    std::deque<std::size_t> queue{*anchor};
    seen[*anchor] = true;
    while (!queue.empty()) {
      const auto i = queue.front();
      queue.pop_front();
      members.push_back(i);
      for (std::size_t j = 0; j < n; ++j) {
        if (!seen[j] && (a(i, j) > 0.0 || a(j, i) > 0.0)) {
          seen[j] = true;
          queue.push_back(j);
        }
      }
    }
    std::sort(members.begin(), members.end());
  } else {
    for (std::size_t i = 0; i < n; ++i) members.push_back(i);
  }

  const std::size_t m = members.size();
  double shift = 0.0;
  for (auto i : members)
    for (auto j : members) shift = std::max(shift, a(i, j));
  if (shift == 0.0) throw NumericError("all-zero adjacency: eigenvector centrality is undefined");

  auto multiply = [&](const std::vector<double>& x, double c) {
    std::vector<double> y(m, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
      double s = c * x[r];
      for (std::size_t q = 0; q < m; ++q) s += a(members[r], members[q]) * x[q];
      y[r] = s;
    }
    return y;
  };

  std::vector<double> x(m, 1.0 / std::sqrt(static_cast<double>(m)));
  EigenResult result;
  double diff = 0.0;
  bool converged = false;
  for (int it = 1; it <= max_iter; ++it) {
    auto y = multiply(x, shift);
    double norm = 0.0;
    for (double v : y) norm += v * v;
    norm = std::sqrt(norm);
    if (!(norm > 0.0) || !std::isfinite(norm)) throw NumericError("power iteration collapsed to zero");
    diff = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
      y[r] /= norm;
      diff = std::max(diff, std::abs(y[r] - x[r]));
    }
    x = std::move(y);
    result.iterations = it;
    if (diff < tol) {
      converged = true;
      break;
    }
  }

  const auto ax = multiply(x, 0.0);
  double lambda = 0.0;
  for (std::size_t r = 0; r < m; ++r) lambda += x[r] * ax[r];
  double res = 0.0, xmax = 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    res = std::max(res, std::abs(ax[r] - lambda * x[r]));
    xmax = std::max(xmax, std::abs(x[r]));
  }
  result.eigenvalue = lambda;
  result.residual = res / xmax;
  if (!converged) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "power iteration did not converge in %d iterations (step %.3e, residual %.3e)",
                  max_iter, diff, result.residual);
    throw NumericError(buf);
  }
  result.vector.assign(n, 0.0);
  for (std::size_t r = 0; r < m; ++r) result.vector[members[r]] = x[r];
  return result;
}

double CentralityVector::value(const std::string& code) const {
  auto it = std::find(domains.begin(), domains.end(), code);
  return it == domains.end() ? 0.0 : values[static_cast<std::size_t>(it - domains.begin())];
}

CentralityVector eigenvector_centrality(const DomainGraph& graph, double tol, int max_iter) {
  if (graph.degenerate) throw NumericError("all-zero adjacency for " + graph.presentation_id);
  const auto eig = dominant_eigenpair(graph.adjacency, graph.index_of(graph.presenter_domain), tol, max_iter);
  CentralityVector c;
  c.presentation_id = graph.presentation_id;
  c.presenter_domain = graph.presenter_domain;
  c.domains = graph.domains;
  c.dominant_eigenvalue = eig.eigenvalue;
  c.residual = eig.residual;
  c.iterations = eig.iterations;
  const double top = *std::max_element(eig.vector.begin(), eig.vector.end());
  for (double v : eig.vector) c.values.push_back(v / top);
  return c;
}

std::optional<double> EcMatrix::cell(const std::string& presenter, const std::string& connected) const {
  auto r = std::find(domains.begin(), domains.end(), presenter);
  auto c = std::find(domains.begin(), domains.end(), connected);
  if (r == domains.end() || c == domains.end()) return std::nullopt;
  return cells[static_cast<std::size_t>(r - domains.begin())][static_cast<std::size_t>(c - domains.begin())];
}

EcMatrix build_ec_matrix(const std::vector<CentralityVector>& centralities, const std::vector<std::string>& domains) {
  const std::size_t n = domains.size();
  EcMatrix m;
  m.domains = domains;
  m.cells.assign(n, std::vector<std::optional<double>>(n));
  m.counts.assign(n, std::vector<std::size_t>(n, 0));
  std::vector<std::vector<double>> sums(n, std::vector<double>(n, 0.0));

  for (const auto& c : centralities) {
    auto it = std::find(domains.begin(), domains.end(), c.presenter_domain);
    if (it == domains.end()) throw ValidationError("centrality for unregistered domain " + c.presenter_domain);
    const auto k = static_cast<std::size_t>(it - domains.begin());
    for (std::size_t i = 0; i < n; ++i) {
      sums[k][i] += c.value(domains[i]);
      ++m.counts[k][i];
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (m.counts[k][i] > 0) m.cells[k][i] = sums[k][i] / static_cast<double>(m.counts[k][i]);
    }
    m.cells[k][k] = 1.0;
  }
  return m;
}

std::string render_ec_table(const EcMatrix& m) {
  std::ostringstream out;
  char buf[32];
  out << "presenter \\ connected";
  for (const auto& d : m.domains) {
    std::snprintf(buf, sizeof buf, "%7s", d.c_str());
    out << buf;
  }
  out << "\n";
  for (std::size_t k = 0; k < m.domains.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%-21s", m.domains[k].c_str());
    out << buf;
    for (std::size_t i = 0; i < m.domains.size(); ++i) {
      if (m.cells[k][i]) std::snprintf(buf, sizeof buf, "%7.2f", *m.cells[k][i]);
      else std::snprintf(buf, sizeof buf, "%7s", "");
      out << buf;
    }
    out << "\n";
  }
  return out.str();
}

json ec_matrix_to_json(const EcMatrix& m) {
  json cells = json::array(), counts = json::array();
  for (std::size_t k = 0; k < m.domains.size(); ++k) {
    json row = json::array();
    for (const auto& c : m.cells[k]) row.push_back(c ? json(*c) : json(nullptr));
    cells.push_back(std::move(row));
    counts.push_back(m.counts[k]);
  }
  return {{"rows", m.domains},
          {"cols", m.domains},
          {"cells", std::move(cells)},
          {"counts", std::move(counts)},
          {"corpus_fingerprint", m.corpus_fingerprint}};
}

EcMatrix ec_matrix_from_json(const json& doc) {
  EcMatrix m;
  m.domains = doc.at("rows").get<std::vector<std::string>>();
  if (doc.at("cols").get<std::vector<std::string>>() != m.domains)
    throw ValidationError("EC matrix rows and cols must list the same domains");
  m.corpus_fingerprint = doc.value("corpus_fingerprint", "");
  for (const auto& row : doc.at("cells")) {
    std::vector<std::optional<double>> r;
    for (const auto& v : row) r.push_back(v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()));
    if (r.size() != m.domains.size()) throw ValidationError("EC matrix row has the wrong width");
    m.cells.push_back(std::move(r));
  }
  m.counts = doc.at("counts").get<std::vector<std::vector<std::size_t>>>();
  if (m.cells.size() != m.domains.size() || m.counts.size() != m.domains.size())
    throw ValidationError("EC matrix has the wrong number of rows");
  return m;
}

json domain_graph_to_json(const DomainGraph& g, const CentralityVector* centrality) {
  json adjacency = json::array();
  for (std::size_t i = 0; i < g.domains.size(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < g.domains.size(); ++j) row.push_back(g.adjacency(i, j));
    adjacency.push_back(std::move(row));
  }
  json out = {{"presentation_id", g.presentation_id},
              {"presenter_domain", g.presenter_domain},
              {"domains", g.domains},
              {"adjacency", std::move(adjacency)},
              {"degenerate", g.degenerate}};
  if (centrality) {
    out["centrality"] = {{"values", centrality->values},
                         {"dominant_eigenvalue", centrality->dominant_eigenvalue},
                         {"residual", centrality->residual},
                         {"iterations", centrality->iterations}};
  } else {
    out["centrality"] = nullptr;
  }
  return out;
}

}  // namespace converge
