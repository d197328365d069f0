#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ndcharge {

/// Uniform radial grid on [0, radius] with node 0 at the sphere center and
/// the last node exactly on the surface.
struct RadialGrid {
  double radius_nm = 20.0;
  double step_nm = 0.5;
  std::vector<double> nodes;

  RadialGrid() { rebuild(); }
  RadialGrid(double radius, double step) : radius_nm(radius), step_nm(step) {
    rebuild();
  }

  std::size_t node_count() const { return nodes.size(); }

  double depth_nm(std::size_t i) const { return radius_nm - nodes[i]; }

  void rebuild() {
    if (!(radius_nm > 0.0) || !(step_nm > 0.0))
      throw std::invalid_argument("grid radius and step must be > 0");
    const double ratio = radius_nm / step_nm;
    const auto intervals = static_cast<std::size_t>(std::llround(ratio));
    if (intervals < 1 || std::abs(ratio - static_cast<double>(intervals)) > 1e-6)
      throw std::invalid_argument("radius must be an integer multiple of step");
    // Recompute the step so the last node lands exactly on the surface.
    step_nm = radius_nm / static_cast<double>(intervals);
    nodes.resize(intervals + 1);
    for (std::size_t i = 0; i <= intervals; ++i)
      nodes[i] = static_cast<double>(i) * step_nm;
    nodes.back() = radius_nm;
  }
};

}  // namespace ndcharge
