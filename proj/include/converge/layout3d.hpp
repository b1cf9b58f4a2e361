#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "converge/semantics.hpp"

namespace converge {

using Vec3 = std::array<double, 3>;

struct LayoutParams {
  double attraction_gain = 0.05;   // spring stiffness k_a
  double repulsion_gain = 0.01;    // inverse-square gain k_r
  double rest_length_base = 1.0;   // L0; an edge of similarity s rests at L0 * (1 - s)
  double damping = 0.9;            // displacement per unit force, in (0, 1)
  int max_iterations = 5000;
  double convergence_epsilon = 1e-5;  // stop when the largest step is below this
  std::uint64_t seed = 42;

  void validate() const;
};

inline constexpr double kMinRepulsionDistance = 1e-3;

struct Layout {
  std::vector<std::string> ids;
  std::vector<Vec3> positions;
  int iterations_used = 0;
  double final_residual = 0.0;  // largest node displacement in the last step
  bool hit_max_iterations = false;
};

/// Force-directed 3D equilibrium. Positions start uniform in [-1,1]^3 from
/// the seed; edges pull toward their rest length, every pair repels with
/// k_r / max(d, d_min)^2, and each node moves by damping * net force. Output
/// is recentred on the origin. Bit-identical for identical inputs.
Layout run_layout(const ViewGraph& graph, const LayoutParams& params);

nlohmann::json layout_to_json(const Layout& layout, const LayoutParams& params);
Layout layout_from_json(const nlohmann::json& doc);
nlohmann::json layout_params_to_json(const LayoutParams& params);
LayoutParams layout_params_from_json(const nlohmann::json& doc);

}  // namespace converge
