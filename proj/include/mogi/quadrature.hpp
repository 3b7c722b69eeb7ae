#pragma once

#include "mogi/geometry.hpp"

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace mogi {

using ScalarFn = std::function<double(double)>;
using PointFn = std::function<double(const Vec&)>;

/// Adaptive Gauss-Kronrod (7/15) integration on [a, b] to the given absolute
/// tolerance. `error` receives the final error estimate when non-null.
double integrate_interval(const ScalarFn& f, double a, double b, double abs_tol,
                          double* error = nullptr);

/// Barycentric rule on the reference triangle: points (l0, l1, l2), weights sum to 1.
struct TriangleRule {
  std::vector<std::array<double, 3>> bary;
  std::vector<double> weights;
};

/// Collapsed Gauss-Legendre product rule with `order` points per direction
/// (exact for polynomials of degree 2*order - 1).
const TriangleRule& collapsed_gauss_rule(int order);

/// Fixed-rule integral of f over the flat triangle (a, b, c).
double triangle_rule_sum(const PointFn& f, const Vec& a, const Vec& b, const Vec& c,
                         const TriangleRule& rule);

/// Adaptive integral over the flat triangle (a, b, c) by 4-way subdivision until
/// parent and children estimates agree to the locally apportioned tolerance.
double integrate_triangle(const PointFn& f, const Vec& a, const Vec& b, const Vec& c,
                          double abs_tol, int max_depth = 12, int min_depth = 0);

/// Area of the spherical triangle with unit vertices a, b, c.
double spherical_triangle_area(const Vec& a, const Vec& b, const Vec& c);

/// Integral of f over the spherical triangle with unit vertices a, b, c, computed
/// on the flat triangle through the radial map (Jacobian (x·n)|x|^{-3}).
double integrate_spherical_triangle(const PointFn& f, const Vec& a, const Vec& b, const Vec& c,
                                    double abs_tol, int max_depth = 12);

/// Spherical triangles of an icosahedron subdivided `level` times (unit vertices).
std::vector<std::array<Vec, 3>> icosphere_triangles(int level);

/// Adaptive integral of f over the whole sphere S^{dim-1}. In 2D the circle is
/// split into `pieces` arcs first; extra breakpoints (angles) can be given.
double integrate_sphere(const PointFn& f, int dim, double abs_tol,
                        const std::vector<double>& breakpoints = {});

/// Fixed node set on S^{n-1} with positive weights summing to |S^{n-1}|.
struct QuadratureRule {
  int dim = 2;
  std::vector<Vec> nodes;
  std::vector<double> weights;
  std::string scheme;
  double target_tolerance = 0.0;

  double apply(const PointFn& f) const;
};

/// 2D: periodic trapezoid with `resolution` nodes. 3D: icosphere of level
/// `resolution` with a 3x3 collapsed Gauss rule on each flat sub-triangle.
QuadratureRule make_quadrature_rule(int dim, int resolution);
QuadratureRule default_quadrature_rule(int dim);

/// Values of the periodic function at N uniform angles -> derivative values at the
/// same angles (spectral differentiation). `order` is 1 or 2.
std::vector<double> spectral_derivative(const std::vector<double>& samples, int order);

/// Trigonometric interpolation of uniform periodic samples at an arbitrary angle,
/// together with first and second derivatives.
struct TrigValue {
  double value, d1, d2;
};
TrigValue trig_interpolate(const std::vector<double>& samples, double theta);

}  // namespace mogi
