#pragma once

#include "mogi/geometry.hpp"

#include <memory>
#include <string>
#include <vector>

namespace mogi {

/// Radial projection of a facet onto the sphere.
struct SphericalCell {
  int facet = -1;
  bool empty = true;
  // 2D: angular interval [begin, end] (end > begin, end may exceed 2π).
  double begin = 0.0, end = 0.0;
  // 3D: directions of the facet's vertices in cyclic order (geodesic polygon).
  std::vector<Vec> corners;
};

/// Convex polytope containing the origin in its interior, given by outer facet normals
/// and support numbers. Facets that touch the body in a set of zero (n-1)-area are kept
/// but marked inactive.
class Polytope {
 public:
  /// Intersection of the halfspaces {x·u_i <= h_i}. Throws GeometryError when the
  /// normals lie in a closed hemisphere (unbounded body) or are repeated.
  static Polytope from_halfspaces(int dim, const std::vector<Vec>& normals,
                                  const std::vector<double>& support);
  /// Convex hull of points; the origin must be interior.
  static Polytope from_points(int dim, const std::vector<Vec>& points);

  int dim() const { return dim_; }
  int size() const { return static_cast<int>(normals_.size()); }
  const std::vector<Vec>& normals() const { return normals_; }
  const std::vector<double>& support() const { return support_; }
  const Vec& normal(int i) const { return normals_[i]; }
  double support(int i) const { return support_[i]; }
  const std::vector<Vec>& vertices() const { return vertices_; }
  bool active(int i) const { return active_[i]; }
  const std::vector<bool>& active_mask() const { return active_; }
  int active_count() const;
  bool symmetric() const { return symmetric_; }

  /// Max of x·u over vertices.
  double support_value(const Vec& u) const;
  /// min over facets with ξ·u_i > 0 of h_i / (ξ·u_i).
  double radial_value(const Vec& xi) const;
  /// Index of the facet hit by the ray ξ (ties to the lowest index, relative 1e-12).
  int alpha_index(const Vec& xi) const;
  Vec alpha(const Vec& xi) const { return normals_[alpha_index(xi)]; }

  /// Facet polygon: 2D the two endpoints, 3D the vertices in counterclockwise order seen
  /// from outside. Empty for inactive facets.
  const std::vector<Vec>& facet_vertices(int i) const { return facets_[i]; }
  /// (n-1)-dimensional area of facet i (0 for inactive facets).
  double facet_area(int i) const { return areas_[i]; }
  const std::vector<SphericalCell>& cells() const { return cells_; }
  double cell_measure(int i) const;

  double volume() const;
  double circumradius() const;
  double inradius() const;

  Polytope scaled(double c) const;
  Polytope transformed(const Eigen::Matrix3d& R) const;

 private:
  void build2d();
  void build3d();
  void finish();

  int dim_ = 2;
  std::vector<Vec> normals_;
  std::vector<double> support_;
  std::vector<Vec> vertices_;
  std::vector<bool> active_;
  std::vector<std::vector<Vec>> facets_;
  std::vector<double> areas_;
  std::vector<SphericalCell> cells_;
  bool symmetric_ = false;
};

/// Exact test that a finite direction set is not contained in any closed hemisphere
/// (2D: largest angular gap < π; 3D: origin strictly inside the hull of the directions).
bool directions_span_sphere(int dim, const std::vector<Vec>& dirs);

Polytope wulff_shape(int dim, const std::vector<Vec>& omega, const std::vector<double>& f);
Polytope convex_hull_body(int dim, const std::vector<Vec>& omega, const std::vector<double>& f);
Polytope polar(const Polytope& p);

/// Hausdorff distance via sup |h_K - h_L| over both normal sets, both vertex direction
/// sets and a dense direction grid.
double hausdorff_distance(const Polytope& a, const Polytope& b);

/// Builtin bodies. `ball` is the polytope circumscribed about the unit ball with m normals.
namespace body {
Polytope ball(int dim, int m, double radius = 1.0);
Polytope square();
Polytope cube();
Polytope simplex(int dim);
Polytope random(int dim, unsigned long long seed, int m);
}  // namespace body

/// Builtin by name: "ball", "ball:<m>", "square", "cube", "simplex", "random(seed,m)".
Polytope builtin_body(int dim, const std::string& name);

/// Sampled radial data of a smooth body, used for density and Monge-Ampère diagnostics.
struct RadialSampleBody {
  int dim = 2;
  std::vector<Vec> directions;
  std::vector<double> rho;
  std::vector<double> h;  // optional, same grid
  /// Every sample point ρ(ξ)ξ lies within the hull of the samples inflated by tol.
  bool convexity_ok(double tol = 1e-8) const;
};

/// 2D body from support samples h(2πk/N): ρ by the envelope formula on the same grid.
RadialSampleBody radial_sample_from_support_2d(const std::vector<double>& h);

}  // namespace mogi
