#include "hull3d.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace mogi::detail {

namespace {

struct Face {
  int v[3];
  Vec n;  // unnormalized outward normal
  double off;
  bool alive = true;
};

Face make_face(const std::vector<Vec>& p, int a, int b, int c, const Vec& inside) {
  Face f{{a, b, c}, (p[b] - p[a]).cross(p[c] - p[a]), 0.0, true};
  if (f.n.dot(inside - p[a]) > 0) {
    std::swap(f.v[1], f.v[2]);
    f.n = -f.n;
  }
  const double len = f.n.norm();
  if (len > 0) f.n /= len;
  f.off = f.n.dot(p[a]);
  return f;
}

}  // namespace

std::vector<HullPlane> convex_hull_3d(const std::vector<Vec>& p) {
  const int n = static_cast<int>(p.size());
  if (n < 4) throw GeometryError("3D hull needs at least 4 points");
  double scale = 0.0;
  for (const auto& x : p) scale = std::max(scale, x.norm());
  const double eps = 1e-12 * scale;

  // Initial tetrahedron.
  int i0 = 0, i1 = -1, i2 = -1, i3 = -1;
  double best = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = (p[i] - p[i0]).norm();
    if (d > best) best = d, i1 = i;
  }
  if (i1 < 0 || best <= 1e-10 * scale) throw GeometryError("3D hull: points coincide");
  best = 0.0;
  const Vec dir = (p[i1] - p[i0]).normalized();
  for (int i = 0; i < n; ++i) {
    const double d = (p[i] - p[i0]).cross(dir).norm();
    if (d > best) best = d, i2 = i;
  }
  if (i2 < 0 || best <= 1e-10 * scale) throw GeometryError("3D hull: points are collinear");
  best = 0.0;
  const Vec nrm = (p[i1] - p[i0]).cross(p[i2] - p[i0]).normalized();
  for (int i = 0; i < n; ++i) {
    const double d = std::abs(nrm.dot(p[i] - p[i0]));
    if (d > best) best = d, i3 = i;
  }
  if (i3 < 0 || best <= 1e-10 * scale) throw GeometryError("3D hull: points are coplanar");

  const Vec inside = 0.25 * (p[i0] + p[i1] + p[i2] + p[i3]);
  std::vector<Face> faces;
  std::map<std::pair<int, int>, int> edge_face;  // directed edge -> face
  auto add_face = [&](int a, int b, int c) {
    faces.push_back(make_face(p, a, b, c, inside));
    const int id = static_cast<int>(faces.size()) - 1;
    const Face& f = faces.back();
    for (int k = 0; k < 3; ++k) edge_face[{f.v[k], f.v[(k + 1) % 3]}] = id;
  };
  add_face(i0, i1, i2);
  add_face(i0, i1, i3);
  add_face(i0, i2, i3);
  add_face(i1, i2, i3);

  for (int i = 0; i < n; ++i) {
    if (i == i0 || i == i1 || i == i2 || i == i3) continue;
    std::vector<int> visible;
    for (int f = 0; f < static_cast<int>(faces.size()); ++f) {
      if (faces[f].alive && faces[f].n.dot(p[i]) - faces[f].off > eps) visible.push_back(f);
    }
    if (visible.empty()) continue;
    std::set<int> vis(visible.begin(), visible.end());
    std::vector<std::pair<int, int>> horizon;
    for (int f : visible) {
      for (int k = 0; k < 3; ++k) {
        const int a = faces[f].v[k], b = faces[f].v[(k + 1) % 3];
        auto it = edge_face.find({b, a});
        if (it == edge_face.end() || !vis.count(it->second)) horizon.push_back({a, b});
      }
    }
    for (int f : visible) {
      faces[f].alive = false;
      for (int k = 0; k < 3; ++k) edge_face.erase({faces[f].v[k], faces[f].v[(k + 1) % 3]});
    }
    for (const auto& [a, b] : horizon) add_face(a, b, i);
  }

  // Merge coplanar triangles, using the largest triangle of each group for the plane.
  struct Group {
    Vec n;
    double d;
    double area;
    std::set<int> pts;
  };
  std::vector<Group> groups;
  for (const auto& f : faces) {
    if (!f.alive) continue;
    const double area = 0.5 * (p[f.v[1]] - p[f.v[0]]).cross(p[f.v[2]] - p[f.v[0]]).norm();
    bool merged = false;
    for (auto& g : groups) {
      if ((g.n - f.n).norm() <= 1e-9 && std::abs(g.d - f.off) <= 1e-9 * scale) {
        g.pts.insert(f.v, f.v + 3);
        if (area > g.area) g.n = f.n, g.d = f.off, g.area = area;
        merged = true;
        break;
      }
    }
    if (!merged) groups.push_back({f.n, f.off, area, std::set<int>(f.v, f.v + 3)});
  }
  std::vector<HullPlane> out;
  for (auto& g : groups) out.push_back({g.n, g.d, std::vector<int>(g.pts.begin(), g.pts.end())});
  return out;
}

}  // namespace mogi::detail
