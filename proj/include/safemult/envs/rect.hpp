#pragma once

#include <algorithm>
#include <cmath>

namespace safemult::envs {

// Axis-aligned rectangle given by center and half extents.
struct Rect {
  double cx = 0.0, cy = 0.0, hw = 0.0, hh = 0.0;

  bool contains(double x, double y) const {
    return std::abs(x - cx) <= hw && std::abs(y - cy) <= hh;
  }

  // Euclidean distance from a point to the rectangle (0 inside).
  double distance(double x, double y) const {
    const double dx = std::max(std::abs(x - cx) - hw, 0.0);
    const double dy = std::max(std::abs(y - cy) - hh, 0.0);
    return std::sqrt(dx * dx + dy * dy);
  }
};

}  // namespace safemult::envs
