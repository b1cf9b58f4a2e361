#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "converge/bundle.hpp"
#include "converge/error.hpp"
#include "converge/influence.hpp"
#include "support.hpp"

using namespace converge;
using test_support::fixture;
using test_support::TempDir;

namespace {

const std::vector<std::string> kSix = {"PSS", "WT", "CR", "SSH", "DS", "WL"};

DomainGraph star(const std::string& center, const std::vector<std::pair<std::string, double>>& leaves,
                 const std::vector<std::string>& domains = kSix) {
  DomainGraph g;
  g.presentation_id = "P";
  g.presenter_domain = center;
  g.domains = domains;
  g.adjacency = SquareMatrix(domains.size());
  const auto k = g.index_of(center);
  for (const auto& [code, w] : leaves) {
    const auto j = g.index_of(code);
    g.adjacency(k, j) = g.adjacency(j, k) = w;
  }
  return g;
}

// Rows of one presentation's affinities that produce the given counts.
std::vector<std::vector<double>> rows_for_counts(const std::vector<int>& counts) {
  int most = 0;
  for (int c : counts) most = std::max(most, c);
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(most), std::vector<double>(counts.size(), 0.1));
  for (std::size_t j = 0; j < counts.size(); ++j)
    for (int r = 0; r < counts[j]; ++r) rows[static_cast<std::size_t>(r)][j] = 0.9;
  return rows;
}

}  // namespace

TEST_CASE("power iteration agrees with a dense eigensolver") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 9;
    SquareMatrix a(n);
    Eigen::MatrixXd e(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        // Keep a positive path i -- i+1 so the matrix stays irreducible.
        double w = (j == i + 1 || u(rng) > 0.25) ? u(rng) * 5.0 : 0.0;
        if (i == j) w = 0.0;
        a(i, j) = a(j, i) = w;
        e(i, j) = e(j, i) = w;
      }
    }
    const auto got = dominant_eigenpair(a);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(e);
    const double lambda = solver.eigenvalues()(static_cast<Eigen::Index>(n) - 1);
    Eigen::VectorXd v = solver.eigenvectors().col(static_cast<Eigen::Index>(n) - 1);
    if (v.sum() < 0) v = -v;
    CHECK(std::abs(got.eigenvalue - lambda) < 1e-8);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(got.vector[i] - v(static_cast<Eigen::Index>(i))) < 1e-8);
    CHECK(got.residual < 1e-8);
  }
}

TEST_CASE("star with leaf weights 3,3,2,2,1") {
  const auto g = star("PSS", {{"WT", 3}, {"CR", 3}, {"SSH", 2}, {"DS", 2}, {"WL", 1}});
  const auto c = eigenvector_centrality(g);
  CHECK(c.dominant_eigenvalue == doctest::Approx(std::sqrt(27.0)).epsilon(1e-9));
  CHECK(c.value("PSS") == 1.0);
  // leaf_i = w_i / sqrt(sum w^2) with sum w^2 = 27
  CHECK(std::abs(c.value("WT") - 3.0 / std::sqrt(27.0)) < 1e-6);
  CHECK(std::abs(c.value("CR") - 3.0 / std::sqrt(27.0)) < 1e-6);
  CHECK(std::abs(c.value("SSH") - 2.0 / std::sqrt(27.0)) < 1e-6);
  CHECK(std::abs(c.value("DS") - 2.0 / std::sqrt(27.0)) < 1e-6);
  CHECK(std::abs(c.value("WL") - 1.0 / std::sqrt(27.0)) < 1e-6);
  CHECK(std::abs(c.value("WT") - 0.577) < 1e-3);
  CHECK(std::abs(c.value("SSH") - 0.385) < 1e-3);
  CHECK(std::abs(c.value("WL") - 0.192) < 1e-3);
  CHECK(c.residual < 1e-8);
}

TEST_CASE("complete graph on four domains is uniform") {
  DomainGraph g;
  g.presentation_id = "P";
  g.presenter_domain = "A";
  g.domains = {"A", "B", "C", "D"};
  g.adjacency = SquareMatrix(4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      if (i != j) g.adjacency(i, j) = 1.0;
  const auto c = eigenvector_centrality(g);
  CHECK(c.dominant_eigenvalue == doctest::Approx(3.0));
  for (double v : c.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("two-node graph") {
  const auto c = eigenvector_centrality(star("A", {{"B", 2.5}}, {"A", "B"}));
  CHECK(c.dominant_eigenvalue == doctest::Approx(2.5));
  CHECK(c.value("A") == doctest::Approx(1.0));
  CHECK(c.value("B") == doctest::Approx(1.0));
}

TEST_CASE("scaling the adjacency leaves centrality unchanged") {
  auto g = star("WT", {{"PSS", 1}, {"CR", 4}, {"DS", 2}});
  const auto base = eigenvector_centrality(g);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) g.adjacency(i, j) *= 7.5;
  const auto scaled = eigenvector_centrality(g);
  CHECK(scaled.dominant_eigenvalue == doctest::Approx(7.5 * base.dominant_eigenvalue).epsilon(1e-10));
  for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(scaled.values[i] - base.values[i]) < 1e-9);
}

TEST_CASE("domains outside the presenter's star get zero") {
  const auto c = eigenvector_centrality(star("WT", {{"PSS", 1}, {"CR", 1}}));
  CHECK(c.value("SSH") == 0.0);
  CHECK(c.value("DS") == 0.0);
  CHECK(c.value("WL") == 0.0);
}

TEST_CASE("domain graph counts viewpoints per domain above theta") {
  // columns in kSix order: PSS WT CR SSH DS WL
  const auto g = build_domain_graph("P1", "PSS", kSix, rows_for_counts({0, 3, 3, 2, 2, 1}), 0.5);
  CHECK(g.weight("PSS", "WT") == 3.0);
  CHECK(g.weight("CR", "PSS") == 3.0);
  CHECK(g.weight("PSS", "SSH") == 2.0);
  CHECK(g.weight("PSS", "DS") == 2.0);
  CHECK(g.weight("PSS", "WL") == 1.0);
  CHECK(g.weight("WT", "CR") == 0.0);
  CHECK(g.adjacency.is_symmetric());
  CHECK_FALSE(g.degenerate);

  const auto dead = build_domain_graph("P2", "PSS", kSix, {std::vector<double>(6, 0.1)}, 0.5);
  CHECK(dead.degenerate);
  CHECK(dead.adjacency.max_entry() == 0.0);
  CHECK_THROWS_AS(eigenvector_centrality(dead), NumericError);

  const auto uniform = build_domain_graph("P3", "PSS", kSix, {std::vector<double>(6, 0.9)}, 0.5);
  for (const auto& d : kSix)
    if (d != "PSS") CHECK(uniform.weight("PSS", d) == 1.0);

  CHECK_THROWS_AS(build_domain_graph("P4", "PSS", kSix, {}, 0.5), ValidationError);
  CHECK_THROWS_AS(build_domain_graph("P5", "XX", kSix, {std::vector<double>(6, 0.9)}, 0.5), ValidationError);
}

TEST_CASE("EC matrix takes the mean per presenter domain") {
  CentralityVector a, b;
  for (auto* c : {&a, &b}) {
    c->presenter_domain = "PSS";
    c->domains = {"PSS", "WT"};
  }
  a.values = {1.0, 0.4};
  b.values = {1.0, 0.6};
  const auto m = build_ec_matrix({a, b}, {"PSS", "WT"});
  CHECK(*m.cell("PSS", "WT") == doctest::Approx(0.5));
  CHECK(*m.cell("PSS", "PSS") == 1.0);
  CHECK(*m.cell("WT", "WT") == 1.0);
  CHECK_FALSE(m.cell("WT", "PSS").has_value());
  CHECK(m.counts[0][1] == 2);

  const auto single = build_ec_matrix({a}, {"PSS", "WT"});
  CHECK(*single.cell("PSS", "WT") == 0.4);
}

TEST_CASE("EC matrix keeps asymmetric influence") {
  // WT presentations lean heavily on PSS; PSS presentations barely touch WT.
  std::vector<CentralityVector> cs;
  cs.push_back(eigenvector_centrality(star("WT", {{"PSS", 3}, {"CR", 1}})));
  cs.push_back(eigenvector_centrality(star("PSS", {{"WT", 1}, {"SSH", 3}, {"DS", 3}})));
  const auto m = build_ec_matrix(cs, kSix);
  CHECK(*m.cell("WT", "PSS") > *m.cell("PSS", "WT"));
  for (std::size_t k = 0; k < 6; ++k) {
    CHECK(m.cells[k][k] == 1.0);
    for (const auto& cell : m.cells[k])
      if (cell) CHECK((*cell >= 0.0 && *cell <= 1.0));
  }
  const auto back = ec_matrix_from_json(ec_matrix_to_json(m));
  CHECK(back.cells == m.cells);
  CHECK(back.counts == m.counts);
  const auto table = render_ec_table(m);
  CHECK(table.find("PSS") != std::string::npos);
}

TEST_CASE("two-presentation fixture matches the hand computation") {
  // P01 (WT): WL from both viewpoints, CR from one -> star weights WL 2, CR 1.
  // P02 (WT): WL 1, DS 1.
  const double p01_wl = 2.0 / std::sqrt(5.0), p01_cr = 1.0 / std::sqrt(5.0);
  const double p02 = 1.0 / std::sqrt(2.0);
  TempDir dir("two_pres");
  write_file(dir / "config.json", R"({"affinity": "provider", "theta_dom": 0.5})");
  const auto config = config_from_json(nlohmann::json::parse(read_file(dir / "config.json")));
  run_pipeline(config, fixture("two_presentation_corpus.json"), dir / "bundle");
  const auto m = Bundle(dir / "bundle").ec_matrix();
  CHECK(std::abs(*m.cell("WT", "WL") - (p01_wl + p02) / 2.0) < 1e-9);
  CHECK(std::abs(*m.cell("WT", "CR") - p01_cr / 2.0) < 1e-9);
  CHECK(std::abs(*m.cell("WT", "DS") - p02 / 2.0) < 1e-9);
  CHECK(*m.cell("WT", "WT") == 1.0);
  for (const auto& d : {"WL", "CR", "DS"}) {
    CHECK(*m.cell(d, d) == 1.0);
    CHECK_FALSE(m.cell(d, "WT").has_value());
  }
}

TEST_CASE("mock embedding affinity prefers summaries with domain keywords") {
  MockEmbedder e;
  Domain wt{"WT", "Water", {"water", "filtration"}};
  Viewpoint with, without;
  with.summary = "portable water filtration for villages";
  without.summary = "tenant rights in the courts";
  CHECK(domain_affinity(with, wt, e) > domain_affinity(without, wt, e));
  Viewpoint exact;
  exact.summary = "water";
  CHECK(domain_affinity(exact, Domain{"WT", "Water", {"water"}}, e) == doctest::Approx(1.0));
  CHECK_THROWS_AS(domain_affinity(with, Domain{"WT", "Water", {}}, e), ValidationError);
}
