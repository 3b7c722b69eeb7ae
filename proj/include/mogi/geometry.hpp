#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mogi {

/// Points and directions are stored as 3-vectors; in dimension 2 the third
/// component is zero.
using Vec = Eigen::Vector3d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Tolerance on | |u| - 1 | for anything accepted as a direction.
inline constexpr double kUnitTol = 1e-12;

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void check_dim(int dim) {
  if (dim != 2 && dim != 3) throw DomainError("dimension must be 2 or 3, got " + std::to_string(dim));
}

inline bool is_unit(const Vec& u) { return std::abs(u.norm() - 1.0) <= kUnitTol; }

inline void require_unit(const Vec& u, const char* what) {
  if (!is_unit(u)) {
    throw DomainError(std::string(what) + ": direction is not unit length (|u| = " +
                      std::to_string(u.norm()) + ")");
  }
}

inline Vec unit2(double theta) { return {std::cos(theta), std::sin(theta), 0.0}; }

/// Angle of a 2D vector in [0, 2π).
inline double angle2(const Vec& v) {
  double a = std::atan2(v.y(), v.x());
  if (a < 0) a += kTwoPi;
  return a;
}

/// Surface area of S^{n-1}.
inline double sphere_area(int dim) { return dim == 2 ? kTwoPi : 4.0 * kPi; }

/// Angle between two unit vectors, accurate for nearly (anti)parallel inputs.
inline double angular_distance(const Vec& a, const Vec& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

/// Pairwise (cascade) summation in fixed order.
double pairwise_sum(std::span<const double> values);

/// Deterministic direction sets.
std::vector<Vec> circle_directions(int count, double offset = 0.0);
std::vector<Vec> fibonacci_directions(int count);

/// Rotation taking e3 to the given unit vector (columns form an orthonormal frame
/// whose third column is `axis`).
Eigen::Matrix3d frame_from_axis(const Vec& axis);

}  // namespace mogi
