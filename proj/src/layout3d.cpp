#include "converge/layout3d.hpp"

#include <algorithm>
#include <cmath>

#include "converge/error.hpp"

namespace converge {

using nlohmann::json;

void LayoutParams::validate() const {
  if (!(attraction_gain > 0.0)) throw ValidationError("attraction_gain must be > 0");
  if (!(repulsion_gain > 0.0)) throw ValidationError("repulsion_gain must be > 0");
  if (!(rest_length_base > 0.0)) throw ValidationError("rest_length_base must be > 0");
  if (!(damping > 0.0 && damping < 1.0)) throw ValidationError("damping must lie in (0, 1)");
  if (!(convergence_epsilon > 0.0)) throw ValidationError("convergence_epsilon must be > 0");
  if (max_iterations < 0) throw ValidationError("max_iterations must be >= 0");
}

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double uniform_pm1(std::uint64_t& state) {
  return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-52 - 1.0;
}

struct Neighbor {
  std::size_t other;
  double rest_length;
};

}  // namespace

Layout run_layout(const ViewGraph& graph, const LayoutParams& params) {
  params.validate();
  const std::size_t n = graph.nodes.size();
  if (n == 0) throw ValidationError("layout needs a non-empty graph");

  Layout layout;
  layout.ids.reserve(n);
  for (const auto& node : graph.nodes) layout.ids.push_back(node.id);

  std::uint64_t state = params.seed;
  std::vector<Vec3> pos(n);
  for (auto& p : pos)
    for (auto& c : p) c = uniform_pm1(state);

  std::vector<std::vector<Neighbor>> adjacency(n);
  for (const auto& e : graph.edges) {
    const double rest = params.rest_length_base * (1.0 - e.weight);
    adjacency[e.source].push_back({e.target, rest});
    adjacency[e.target].push_back({e.source, rest});
  }

  // Forces are accumulated per node in a fixed order, so the sum for node i
  // never depends on how nodes are scheduled.
  std::vector<Vec3> force(n);
  auto accumulate = [&](std::size_t i) {
    Vec3 f{0.0, 0.0, 0.0};
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      Vec3 d{pos[i][0] - pos[j][0], pos[i][1] - pos[j][1], pos[i][2] - pos[j][2]};
      double dist = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
      if (dist == 0.0) {
        // Coincident pair: separate along a fixed axis chosen by index order.
        d = {i < j ? -1.0 : 1.0, 0.0, 0.0};
        dist = 1.0;
      }
      const double capped = std::max(dist, kMinRepulsionDistance);
      const double mag = params.repulsion_gain / (capped * capped) / dist;
      for (int k = 0; k < 3; ++k) f[k] += mag * d[k];
    }
    for (const auto& nb : adjacency[i]) {
      const Vec3 d{pos[nb.other][0] - pos[i][0], pos[nb.other][1] - pos[i][1], pos[nb.other][2] - pos[i][2]};
      const double dist = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
      if (dist == 0.0) continue;
      const double mag = params.attraction_gain * (dist - nb.rest_length) / dist;
      for (int k = 0; k < 3; ++k) f[k] += mag * d[k];
    }
    for (int k = 0; k < 3; ++k) {
      if (!std::isfinite(f[k]))
        throw NumericError("non-finite force on node " + graph.nodes[i].id);
    }
    force[i] = f;
  };

  if (n > 1) {
    for (int it = 0; it < params.max_iterations; ++it) {
      for (std::size_t i = 0; i < n; ++i) accumulate(i);
      double residual = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double step2 = 0.0;
        for (int k = 0; k < 3; ++k) {
          const double step = params.damping * force[i][k];
          pos[i][k] += step;
          step2 += step * step;
        }
        residual = std::max(residual, std::sqrt(step2));
      }
      layout.iterations_used = it + 1;
      layout.final_residual = residual;
      if (residual < params.convergence_epsilon) break;
    }
    layout.hit_max_iterations = layout.iterations_used >= params.max_iterations &&
                                layout.final_residual >= params.convergence_epsilon;
  }

  Vec3 centroid{0.0, 0.0, 0.0};
  for (const auto& p : pos)
    for (int k = 0; k < 3; ++k) centroid[k] += p[k];
  for (auto& c : centroid) c /= static_cast<double>(n);
  for (auto& p : pos)
    for (int k = 0; k < 3; ++k) p[k] -= centroid[k];

  layout.positions = std::move(pos);
  return layout;
}

json layout_params_to_json(const LayoutParams& p) {
  return {{"attraction_gain", p.attraction_gain},   {"repulsion_gain", p.repulsion_gain},
          {"rest_length_base", p.rest_length_base}, {"damping", p.damping},
          {"max_iterations", p.max_iterations},     {"convergence_epsilon", p.convergence_epsilon},
          {"seed", p.seed}};
}

LayoutParams layout_params_from_json(const json& doc) {
  LayoutParams p;
  p.attraction_gain = doc.value("attraction_gain", p.attraction_gain);
  p.repulsion_gain = doc.value("repulsion_gain", p.repulsion_gain);
  p.rest_length_base = doc.value("rest_length_base", p.rest_length_base);
  p.damping = doc.value("damping", p.damping);
  p.max_iterations = doc.value("max_iterations", p.max_iterations);
  p.convergence_epsilon = doc.value("convergence_epsilon", p.convergence_epsilon);
  p.seed = doc.value("seed", p.seed);
  p.validate();
  return p;
}

json layout_to_json(const Layout& layout, const LayoutParams& params) {
  json positions = json::object();
  for (std::size_t i = 0; i < layout.ids.size(); ++i)
    positions[layout.ids[i]] = {layout.positions[i][0], layout.positions[i][1], layout.positions[i][2]};
  return {{"positions", std::move(positions)},
          {"params", layout_params_to_json(params)},
          {"iterations_used", layout.iterations_used},
          {"final_residual", layout.final_residual},
          {"hit_max_iterations", layout.hit_max_iterations}};
}

Layout layout_from_json(const json& doc) {
  Layout layout;
  for (const auto& [id, xyz] : doc.at("positions").items()) {
    layout.ids.push_back(id);
    layout.positions.push_back({xyz.at(0).get<double>(), xyz.at(1).get<double>(), xyz.at(2).get<double>()});
  }
  layout.iterations_used = doc.value("iterations_used", 0);
  layout.final_residual = doc.value("final_residual", 0.0);
  layout.hit_max_iterations = doc.value("hit_max_iterations", false);
  return layout;
}

}  // namespace converge
