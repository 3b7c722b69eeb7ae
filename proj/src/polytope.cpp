#include "mogi/polytope.hpp"

#include "hull3d.hpp"
#include "mogi/quadrature.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <regex>
#include <sstream>

namespace mogi {

namespace {

Vec intersect_lines(const Vec& ua, double ha, const Vec& ub, double hb) {
  const double det = ua.x() * ub.y() - ua.y() * ub.x();
  return {(ha * ub.y() - hb * ua.y()) / det, (ua.x() * hb - ub.x() * ha) / det, 0.0};
}

// Counterclockwise angle from a to b in [0, 2π).
double ccw_gap(double a, double b) {
  double g = b - a;
  while (g < 0) g += kTwoPi;
  while (g >= kTwoPi) g -= kTwoPi;
  return g;
}

}  // namespace

bool directions_span_sphere(int dim, const std::vector<Vec>& dirs) {
  check_dim(dim);
  if (dirs.size() < static_cast<std::size_t>(dim + 1)) return false;
  if (dim == 2) {
    std::vector<double> ang;
    for (const auto& d : dirs) ang.push_back(angle2(d));
    std::sort(ang.begin(), ang.end());
    double gap = ang.front() + kTwoPi - ang.back();
    for (std::size_t k = 1; k < ang.size(); ++k) gap = std::max(gap, ang[k] - ang[k - 1]);
    return gap < kPi - 1e-12;
  }
  try {
    const auto planes = detail::convex_hull_3d(dirs);
    for (const auto& pl : planes) {
      if (!(pl.d > 1e-12)) return false;
    }
    return true;
  } catch (const GeometryError&) {
    return false;
  }
}

Polytope Polytope::from_halfspaces(int dim, const std::vector<Vec>& normals,
                                   const std::vector<double>& support) {
  check_dim(dim);
  if (normals.size() != support.size()) throw GeometryError("normals/support size mismatch");
  Polytope P;
  P.dim_ = dim;
  for (std::size_t i = 0; i < normals.size(); ++i) {
    require_unit(normals[i], "facet normal");
    if (dim == 2 && normals[i].z() != 0.0) throw GeometryError("2D normal with nonzero z");
    if (!(support[i] > 0.0) || !std::isfinite(support[i])) {
      throw GeometryError("support numbers must be positive and finite");
    }
  }
  for (std::size_t i = 0; i < normals.size(); ++i) {
    for (std::size_t j = i + 1; j < normals.size(); ++j) {
      if (angular_distance(normals[i], normals[j]) <= 1e-12) {
        throw GeometryError("repeated facet normal at indices " + std::to_string(i) + " and " +
                            std::to_string(j));
      }
    }
  }
  if (!directions_span_sphere(dim, normals)) {
    throw GeometryError("normals lie in a closed hemisphere: the halfspace intersection is unbounded");
  }
  P.normals_ = normals;
  P.support_ = support;
  if (dim == 2) P.build2d();
  else P.build3d();
  P.finish();
  return P;
}

void Polytope::build2d() {
  const int m = size();
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> ang(m);
  for (int i = 0; i < m; ++i) ang[i] = angle2(normals_[i]);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return ang[a] < ang[b]; });
  const double hs = *std::max_element(support_.begin(), support_.end());
  std::vector<int> act = order;
  bool changed = true;
  while (changed && act.size() > 3) {
    changed = false;
    for (std::size_t k = 0; k < act.size() && act.size() > 3; ++k) {
      const int i = act[k];
      const int a = act[(k + act.size() - 1) % act.size()];
      const int b = act[(k + 1) % act.size()];
      if (ccw_gap(ang[a], ang[b]) >= kPi - 1e-15) continue;
      const Vec v = intersect_lines(normals_[a], support_[a], normals_[b], support_[b]);
      if (v.dot(normals_[i]) <= support_[i] + 1e-12 * hs) {
        act.erase(act.begin() + static_cast<long>(k));
        changed = true;
        --k;
      }
    }
  }
  active_.assign(m, false);
  facets_.assign(m, {});
  cells_.assign(m, {});
  const std::size_t na = act.size();
  std::vector<Vec> verts(na);  // verts[k] = act[k] ∩ act[k+1]
  for (std::size_t k = 0; k < na; ++k) {
    const int a = act[k], b = act[(k + 1) % na];
    verts[k] = intersect_lines(normals_[a], support_[a], normals_[b], support_[b]);
  }
  vertices_ = verts;
  for (std::size_t k = 0; k < na; ++k) {
    const int i = act[k];
    const Vec& v0 = verts[(k + na - 1) % na];
    const Vec& v1 = verts[k];
    active_[i] = true;
    facets_[i] = {v0, v1};
    SphericalCell c;
    c.facet = i;
    c.empty = false;
    c.begin = angle2(v0);
    c.end = c.begin + ccw_gap(c.begin, angle2(v1));
    cells_[i] = c;
  }
  for (int i = 0; i < m; ++i) {
    if (!active_[i]) cells_[i].facet = i;
  }
}

void Polytope::build3d() {
  const int m = size();
  std::vector<Vec> dual(m);
  for (int i = 0; i < m; ++i) dual[i] = normals_[i] / support_[i];
  const auto planes = detail::convex_hull_3d(dual);
  double rscale = 0.0;
  vertices_.clear();
  for (const auto& pl : planes) {
    if (!(pl.d > 0)) throw GeometryError("origin is not interior to the dual hull");
    const Vec x = pl.n / pl.d;
    bool dup = false;
    for (const auto& y : vertices_) dup = dup || (x - y).norm() <= 1e-9 * std::max(1.0, x.norm());
    if (!dup) vertices_.push_back(x);
    rscale = std::max(rscale, x.norm());
  }
  active_.assign(m, false);
  facets_.assign(m, {});
  cells_.assign(m, {});
  for (int i = 0; i < m; ++i) {
    cells_[i].facet = i;
    const Vec& u = normals_[i];
    std::vector<Vec> inc;
    for (const auto& x : vertices_) {
      if (std::abs(x.dot(u) - support_[i]) <= 1e-9 * std::max(support_[i], x.norm())) inc.push_back(x);
    }
    if (inc.size() < 3) continue;
    Vec c = Vec::Zero();
    for (const auto& x : inc) c += x;
    c /= static_cast<double>(inc.size());
    const Eigen::Matrix3d fr = frame_from_axis(u);
    std::vector<std::pair<double, Vec>> sorted;
    for (const auto& x : inc) {
      const Vec d = x - c;
      sorted.push_back({std::atan2(d.dot(fr.col(1)), d.dot(fr.col(0))), x});
    }
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<Vec> poly;
    for (const auto& s : sorted) poly.push_back(s.second);
    double area = 0.0;
    for (std::size_t k = 0; k < poly.size(); ++k) {
      area += 0.5 * (poly[k] - c).cross(poly[(k + 1) % poly.size()] - c).dot(u);
    }
    if (area <= 1e-12 * rscale * rscale) continue;
    active_[i] = true;
    facets_[i] = poly;
    SphericalCell& cell = cells_[i];
    cell.empty = false;
    for (const auto& x : poly) cell.corners.push_back(x.normalized());
  }
}

void Polytope::finish() {
  const int m = size();
  areas_.assign(m, 0.0);
  for (int i = 0; i < m; ++i) {
    if (!active_[i]) continue;
    const auto& f = facets_[i];
    if (dim_ == 2) {
      areas_[i] = (f[1] - f[0]).norm();
    } else {
      Vec c = Vec::Zero();
      for (const auto& x : f) c += x;
      c /= static_cast<double>(f.size());
      double a = 0.0;
      for (std::size_t k = 0; k < f.size(); ++k) a += 0.5 * (f[k] - c).cross(f[(k + 1) % f.size()] - c).norm();
      areas_[i] = a;
    }
  }
  symmetric_ = m % 2 == 0;
  for (int i = 0; i < m && symmetric_; ++i) {
    bool found = false;
    for (int j = 0; j < m; ++j) {
      if (angular_distance(normals_[i], -normals_[j]) <= 1e-10 &&
          std::abs(support_[i] - support_[j]) <= 1e-12 * std::max(support_[i], support_[j])) {
        found = true;
        break;
      }
    }
    symmetric_ = found;
  }
}

Polytope Polytope::from_points(int dim, const std::vector<Vec>& points) {
  check_dim(dim);
  if (points.size() < static_cast<std::size_t>(dim + 1)) throw GeometryError("too few points for a body");
  double scale = 0.0;
  for (const auto& x : points) scale = std::max(scale, x.norm());
  std::vector<Vec> normals;
  std::vector<double> support;
  if (dim == 2) {
    std::vector<Vec> pts = points;
    std::sort(pts.begin(), pts.end(), [](const Vec& a, const Vec& b) {
      return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    auto cross = [](const Vec& o, const Vec& a, const Vec& b) {
      return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
    };
    std::vector<Vec> hull(2 * pts.size());
    std::size_t k = 0;
    const double tol = 1e-14 * scale * scale;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= tol) --k;
      hull[k++] = pts[i];
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
      while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= tol) --k;
      hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    if (hull.size() < 3) throw GeometryError("points are collinear");
    for (std::size_t i = 0; i < hull.size(); ++i) {
      const Vec e = hull[(i + 1) % hull.size()] - hull[i];
      Vec n(e.y(), -e.x(), 0.0);
      n.normalize();
      normals.push_back(n);
      support.push_back(n.dot(hull[i]));
    }
  } else {
    for (const auto& pl : detail::convex_hull_3d(points)) {
      normals.push_back(pl.n);
      support.push_back(pl.d);
    }
  }
  for (double h : support) {
    if (!(h > 1e-12 * scale)) throw GeometryError("origin is not in the interior of the convex hull");
  }
  return from_halfspaces(dim, normals, support);
}

int Polytope::active_count() const {
  return static_cast<int>(std::count(active_.begin(), active_.end(), true));
}

double Polytope::support_value(const Vec& u) const {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& v : vertices_) best = std::max(best, v.dot(u));
  return best;
}

double Polytope::radial_value(const Vec& xi) const {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < size(); ++i) {
    const double c = xi.dot(normals_[i]);
    if (c > 0) best = std::min(best, support_[i] / c);
  }
  return best;
}

int Polytope::alpha_index(const Vec& xi) const {
  const double r = radial_value(xi);
  for (int i = 0; i < size(); ++i) {
    const double c = xi.dot(normals_[i]);
    if (c > 0 && support_[i] / c <= r * (1.0 + 1e-12)) return i;
  }
  return 0;
}

double Polytope::cell_measure(int i) const {
  const SphericalCell& c = cells_[i];
  if (c.empty) return 0.0;
  if (dim_ == 2) return c.end - c.begin;
  Vec cen = Vec::Zero();
  for (const auto& x : facets_[i]) cen += x;
  cen = cen.normalized();
  double a = 0.0;
  for (std::size_t k = 0; k < c.corners.size(); ++k) {
    a += spherical_triangle_area(cen, c.corners[k], c.corners[(k + 1) % c.corners.size()]);
  }
  return a;
}

double Polytope::volume() const {
  double v = 0.0;
  for (int i = 0; i < size(); ++i) v += support_[i] * areas_[i];
  return v / dim_;
}

double Polytope::circumradius() const {
  double r = 0.0;
  for (const auto& v : vertices_) r = std::max(r, v.norm());
  return r;
}

double Polytope::inradius() const {
  double r = std::numeric_limits<double>::infinity();
  for (int i = 0; i < size(); ++i) {
    if (active_[i]) r = std::min(r, support_[i]);
  }
  return r;
}

Polytope Polytope::scaled(double c) const {
  if (!(c > 0)) throw GeometryError("scale factor must be positive");
  Polytope P = *this;
  for (auto& h : P.support_) h *= c;
  for (auto& v : P.vertices_) v *= c;
  for (auto& f : P.facets_) {
    for (auto& x : f) x *= c;
  }
  for (auto& a : P.areas_) a *= std::pow(c, dim_ - 1);
  return P;
}

Polytope Polytope::transformed(const Eigen::Matrix3d& R) const {
  std::vector<Vec> n;
  for (const auto& u : normals_) {
    Vec w = R * u;
    if (dim_ == 2) w.z() = 0.0;
    n.push_back(w.normalized());
  }
  return from_halfspaces(dim_, n, support_);
}

Polytope wulff_shape(int dim, const std::vector<Vec>& omega, const std::vector<double>& f) {
  return Polytope::from_halfspaces(dim, omega, f);
}

Polytope convex_hull_body(int dim, const std::vector<Vec>& omega, const std::vector<double>& f) {
  check_dim(dim);
  if (omega.size() != f.size()) throw GeometryError("direction/value size mismatch");
  for (std::size_t i = 0; i < omega.size(); ++i) {
    require_unit(omega[i], "direction");
    if (!(f[i] > 0.0) || !std::isfinite(f[i])) throw GeometryError("hull values must be positive");
  }
  if (!directions_span_sphere(dim, omega)) {
    throw GeometryError("directions lie in a closed hemisphere: the origin is not interior to the hull");
  }
  std::vector<Vec> pts;
  for (std::size_t i = 0; i < omega.size(); ++i) pts.push_back(f[i] * omega[i]);
  return Polytope::from_points(dim, pts);
}

Polytope polar(const Polytope& p) {
  std::vector<Vec> n;
  std::vector<double> h;
  for (const auto& v : p.vertices()) {
    const double r = v.norm();
    n.push_back(v / r);
    h.push_back(1.0 / r);
  }
  return Polytope::from_halfspaces(p.dim(), n, h);
}

double hausdorff_distance(const Polytope& a, const Polytope& b) {
  if (a.dim() != b.dim()) throw GeometryError("dimension mismatch");
  std::vector<Vec> dirs = a.dim() == 2 ? circle_directions(4096, 0.000123) : fibonacci_directions(4000);
  for (const auto& u : a.normals()) dirs.push_back(u);
  for (const auto& u : b.normals()) dirs.push_back(u);
  for (const auto& v : a.vertices()) dirs.push_back(v.normalized());
  for (const auto& v : b.vertices()) dirs.push_back(v.normalized());
  double d = 0.0;
  for (const auto& u : dirs) d = std::max(d, std::abs(a.support_value(u) - b.support_value(u)));
  return d;
}

namespace body {

Polytope ball(int dim, int m, double radius) {
  check_dim(dim);
  const std::vector<Vec> n = dim == 2 ? circle_directions(m) : fibonacci_directions(m);
  return Polytope::from_halfspaces(dim, n, std::vector<double>(n.size(), radius));
}

Polytope square() {
  return Polytope::from_halfspaces(2, {Vec(1, 0, 0), Vec(0, 1, 0), Vec(-1, 0, 0), Vec(0, -1, 0)},
                                   {1, 1, 1, 1});
}

Polytope cube() {
  return Polytope::from_halfspaces(3,
                                   {Vec(1, 0, 0), Vec(-1, 0, 0), Vec(0, 1, 0), Vec(0, -1, 0),
                                    Vec(0, 0, 1), Vec(0, 0, -1)},
                                   std::vector<double>(6, 1.0));
}

Polytope simplex(int dim) {
  check_dim(dim);
  if (dim == 2) {
    return Polytope::from_halfspaces(2, {unit2(kPi / 2), unit2(kPi / 2 + kTwoPi / 3), unit2(kPi / 2 + 2 * kTwoPi / 3)},
                                     {1, 1, 1});
  }
  const double s = 1.0 / std::sqrt(3.0);
  return Polytope::from_halfspaces(3, {Vec(s, s, s), Vec(s, -s, -s), Vec(-s, s, -s), Vec(-s, -s, s)},
                                   {1, 1, 1, 1});
}

Polytope random(int dim, unsigned long long seed, int m) {
  check_dim(dim);
  if (m < dim + 1) throw GeometryError("random body needs at least dim + 1 facets");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::vector<Vec> n;
    std::vector<double> h;
    for (int i = 0; i < m; ++i) {
      Vec u;
      if (dim == 2) {
        u = unit2(kTwoPi * uni(rng));
      } else {
        u = Vec(gauss(rng), gauss(rng), gauss(rng)).normalized();
      }
      n.push_back(u);
      h.push_back(0.5 + uni(rng));
    }
    bool distinct = true;
    for (int i = 0; i < m && distinct; ++i) {
      for (int j = i + 1; j < m; ++j) distinct = distinct && angular_distance(n[i], n[j]) > 1e-6;
    }
    if (distinct && directions_span_sphere(dim, n)) return Polytope::from_halfspaces(dim, n, h);
  }
  throw GeometryError("could not draw a bounded random polytope");
}

}  // namespace body

Polytope builtin_body(int dim, const std::string& name) {
  std::smatch mm;
  if (name == "ball") return body::ball(dim, dim == 2 ? 256 : 400);
  if (std::regex_match(name, mm, std::regex(R"(ball:(\d+))"))) return body::ball(dim, std::stoi(mm[1]));
  if (name == "square") {
    if (dim != 2) throw GeometryError("square is a 2D body");
    return body::square();
  }
  if (name == "cube") {
    if (dim != 3) throw GeometryError("cube is a 3D body");
    return body::cube();
  }
  if (name == "simplex") return body::simplex(dim);
  if (std::regex_match(name, mm, std::regex(R"(random\(\s*(\d+)\s*,\s*(\d+)\s*\))"))) {
    return body::random(dim, std::stoull(mm[1]), std::stoi(mm[2]));
  }
  throw GeometryError("unknown builtin body '" + name + "'");
}

bool RadialSampleBody::convexity_ok(double tol) const {
  std::vector<Vec> pts;
  for (std::size_t k = 0; k < directions.size(); ++k) pts.push_back(rho[k] * directions[k]);
  try {
    const Polytope hull = Polytope::from_points(dim, pts);
    for (const auto& x : pts) {
      for (int i = 0; i < hull.size(); ++i) {
        if (x.dot(hull.normal(i)) > hull.support(i) + tol) return false;
      }
    }
    // Each sample must also be on the hull boundary: its radial value matches.
    for (std::size_t k = 0; k < directions.size(); ++k) {
      if (hull.radial_value(directions[k]) > rho[k] * (1.0 + tol) + tol) return false;
    }
    return true;
  } catch (const GeometryError&) {
    return false;
  }
}

RadialSampleBody radial_sample_from_support_2d(const std::vector<double>& h) {
  const int n = static_cast<int>(h.size());
  RadialSampleBody b;
  b.dim = 2;
  b.h = h;
  b.directions = circle_directions(n);
  b.rho.resize(n);
  for (int k = 0; k < n; ++k) {
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
      const double c = b.directions[k].dot(b.directions[j]);
      if (c > 1e-12) best = std::min(best, h[j] / c);
    }
    b.rho[k] = best;
  }
  return b;
}

}  // namespace mogi
