#pragma once

#include "mogi/geometry.hpp"

#include <vector>

namespace mogi::detail {

/// A facet plane of a 3D convex hull: n·x = d with n the unit outer normal. Coplanar
/// triangles are merged (normals within 1e-9, offsets within 1e-9 of the point scale).
struct HullPlane {
  Vec n;
  double d;
  std::vector<int> points;  // hull vertices on the plane
};

/// Incremental convex hull. Throws GeometryError when the points are (nearly) coplanar.
std::vector<HullPlane> convex_hull_3d(const std::vector<Vec>& pts);

}  // namespace mogi::detail
