#pragma once

// Independent brute-force oracles shared by the unit and acceptance tests. Nothing here
// calls the library's geometry beyond reading a polytope's normals and support numbers.

#include "mogi/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

using mogi::Polytope;
using mogi::Vec;

inline bool feasible(const Polytope& P, const Vec& x, double tol) {
  for (int i = 0; i < P.size(); ++i) {
    if (x.dot(P.normal(i)) > P.support(i) + tol) return false;
  }
  return true;
}

// Vertex oracle: every intersection of n facet planes that satisfies all constraints.
inline std::vector<Vec> brute_vertices(const Polytope& P) {
  std::vector<Vec> out;
  const int m = P.size();
  auto add = [&](const Vec& x) {
    if (!feasible(P, x, 1e-9)) return;
    for (const auto& y : out) {
      if ((x - y).norm() < 1e-8) return;
    }
    out.push_back(x);
  };
  if (P.dim() == 2) {
    for (int i = 0; i < m; ++i) {
      for (int j = i + 1; j < m; ++j) {
        Eigen::Matrix2d A;
        A << P.normal(i).x(), P.normal(i).y(), P.normal(j).x(), P.normal(j).y();
        if (std::abs(A.determinant()) < 1e-12) continue;
        const Eigen::Vector2d x = A.partialPivLu().solve(Eigen::Vector2d(P.support(i), P.support(j)));
        add(Vec(x.x(), x.y(), 0));
      }
    }
  } else {
    for (int i = 0; i < m; ++i) {
      for (int j = i + 1; j < m; ++j) {
        for (int k = j + 1; k < m; ++k) {
          Eigen::Matrix3d A;
          A.row(0) = P.normal(i).transpose();
          A.row(1) = P.normal(j).transpose();
          A.row(2) = P.normal(k).transpose();
          if (std::abs(A.determinant()) < 1e-10) continue;
          add(A.lu().solve(Vec(P.support(i), P.support(j), P.support(k))));
        }
      }
    }
  }
  return out;
}

// (n-1)-area of facet i from the brute-force vertices lying on its plane.
inline double facet_area(const Polytope& P, int i, const std::vector<Vec>& verts) {
  const Vec& u = P.normal(i);
  std::vector<Vec> on;
  for (const auto& v : verts) {
    if (std::abs(v.dot(u) - P.support(i)) < 1e-8) on.push_back(v);
  }
  if (P.dim() == 2) {
    if (on.size() < 2) return 0.0;
    double best = 0.0;
    for (const auto& a : on)
      for (const auto& b : on) best = std::max(best, (a - b).norm());
    return best;
  }
  if (on.size() < 3) return 0.0;
  Vec c = Vec::Zero();
  for (const auto& v : on) c += v;
  c /= static_cast<double>(on.size());
  const Vec a0 = (std::abs(u.x()) < 0.9 ? Vec(1, 0, 0) : Vec(0, 1, 0)).cross(u).normalized();
  const Vec a1 = u.cross(a0);
  std::sort(on.begin(), on.end(), [&](const Vec& p, const Vec& q) {
    return std::atan2((p - c).dot(a1), (p - c).dot(a0)) < std::atan2((q - c).dot(a1), (q - c).dot(a0));
  });
  double area = 0.0;
  for (std::size_t k = 0; k < on.size(); ++k) area += 0.5 * (on[k] - c).cross(on[(k + 1) % on.size()] - c).norm();
  return area;
}

// Volume as the sum of cones over facets: Σ h_i area_i / n, with areas from the oracle above.
inline double volume(const Polytope& P) {
  const auto verts = brute_vertices(P);
  double v = 0.0;
  for (int i = 0; i < P.size(); ++i) v += P.support(i) * facet_area(P, i, verts) / P.dim();
  return v;
}

}  // namespace oracle
