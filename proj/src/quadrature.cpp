#include "mogi/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <array>
#include <map>
#include <queue>
#include <mutex>

namespace mogi {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 15>;

// Globally adaptive GK15: always bisect the piece with the largest error estimate, so an
// unreachable tolerance costs at most `max_pieces` subdivisions instead of a recursion blowup.
double gk_adaptive(const ScalarFn& f, double a, double b, double abs_tol, int max_pieces, double* err_out) {
  struct Piece {
    double a, b, val, err;
    bool operator<(const Piece& o) const { return err < o.err; }
  };
  auto eval = [&](double lo, double hi) {
    double e = 0.0;
    const double v = GK::integrate(f, lo, hi, 0, 0.0, &e);
    return Piece{lo, hi, v, e};
  };
  std::priority_queue<Piece> heap;
  heap.push(eval(a, b));
  double total_err = heap.top().err;
  const double width = std::abs(b - a);
  int stalled = 0;
  for (int n = 1; n < max_pieces && total_err > abs_tol && stalled < 10; ++n) {
    const Piece top = heap.top();
    // worst piece already at roundoff level: nothing left to gain
    if (top.err <= 4e-15 * std::abs(top.val) || std::abs(top.b - top.a) <= 1e-14 * width) break;
    heap.pop();
    const double mid = 0.5 * (top.a + top.b);
    const Piece l = eval(top.a, mid), r = eval(mid, top.b);
    // Roundoff detection in the spirit of QUADPACK: bisection no longer changes the value
    // nor reduces the error.
    if (std::abs(l.val + r.val - top.val) <= 1e-5 * std::abs(l.val + r.val) && l.err + r.err >= 0.99 * top.err) {
      ++stalled;
    }
    total_err += l.err + r.err - top.err;
    heap.push(l);
    heap.push(r);
  }
  std::vector<double> vals;
  double err = 0.0;
  vals.reserve(heap.size());
  while (!heap.empty()) {
    vals.push_back(heap.top().val);
    err += heap.top().err;
    heap.pop();
  }
  if (err_out) *err_out = err;
  return pairwise_sum(vals);
}

std::vector<double> gauss_nodes_01(int order, std::vector<double>& weights) {
  // Symmetric Legendre nodes on [-1, 1] mapped to [0, 1].
  std::vector<double> x, w;
  auto push = [&](auto tag) {
    using Q = decltype(tag);
    const auto& ab = Q::abscissa();
    const auto& wt = Q::weights();
    const bool odd = (order % 2) == 1;
    for (std::size_t i = 0; i < ab.size(); ++i) {
      if (i == 0 && odd) {
        x.push_back(0.0);
        w.push_back(wt[0]);
      } else {
        x.push_back(ab[i]);
        w.push_back(wt[i]);
        x.push_back(-ab[i]);
        w.push_back(wt[i]);
      }
    }
  };
  switch (order) {
    case 3: push(boost::math::quadrature::gauss<double, 3>{}); break;
    case 4: push(boost::math::quadrature::gauss<double, 4>{}); break;
    case 5: push(boost::math::quadrature::gauss<double, 5>{}); break;
    case 6: push(boost::math::quadrature::gauss<double, 6>{}); break;
    case 7: push(boost::math::quadrature::gauss<double, 7>{}); break;
    case 8: push(boost::math::quadrature::gauss<double, 8>{}); break;
    default: throw std::invalid_argument("collapsed_gauss_rule: unsupported order");
  }
  weights.clear();
  std::vector<double> out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.push_back(0.5 * (x[i] + 1.0));
    weights.push_back(0.5 * w[i]);
  }
  return out;
}

}  // namespace

double integrate_interval(const ScalarFn& f, double a, double b, double abs_tol, double* error) {
  if (a == b) {
    if (error) *error = 0.0;
    return 0.0;
  }
  return gk_adaptive(f, a, b, abs_tol, 4000, error);
}

const TriangleRule& collapsed_gauss_rule(int order) {
  static std::mutex mtx;
  static std::map<int, TriangleRule> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(order);
  if (it != cache.end()) return it->second;
  std::vector<double> w;
  const std::vector<double> x = gauss_nodes_01(order, w);
  TriangleRule rule;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double u = x[i];
      const double v = x[j];
      // point = A + u (B - A) + u v (C - B)
      rule.bary.push_back({1.0 - u, u * (1.0 - v), u * v});
      rule.weights.push_back(2.0 * w[i] * w[j] * u);
    }
  }
  return cache.emplace(order, std::move(rule)).first->second;
}

double triangle_rule_sum(const PointFn& f, const Vec& a, const Vec& b, const Vec& c,
                         const TriangleRule& rule) {
  const double area = 0.5 * (b - a).cross(c - a).norm();
  double s = 0.0;
  for (std::size_t k = 0; k < rule.weights.size(); ++k) {
    const auto& l = rule.bary[k];
    s += rule.weights[k] * f(l[0] * a + l[1] * b + l[2] * c);
  }
  return area * s;
}

namespace {

struct TriPiece {
  Vec a, b, c;
  double val, err;
  std::array<double, 4> kids;
  int depth;
  bool operator<(const TriPiece& o) const { return err < o.err; }
};

std::array<std::array<Vec, 3>, 4> split4(const Vec& a, const Vec& b, const Vec& c) {
  const Vec ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
  return {{{a, ab, ca}, {ab, b, bc}, {ca, bc, c}, {ab, bc, ca}}};
}

TriPiece tri_eval(const PointFn& f, const Vec& a, const Vec& b, const Vec& c, double parent, int depth,
                  const TriangleRule& rule) {
  TriPiece p{a, b, c, 0.0, 0.0, {}, depth};
  const auto ch = split4(a, b, c);
  for (int k = 0; k < 4; ++k) p.kids[k] = triangle_rule_sum(f, ch[k][0], ch[k][1], ch[k][2], rule);
  p.val = (p.kids[0] + p.kids[1]) + (p.kids[2] + p.kids[3]);
  p.err = std::abs(p.val - parent);
  return p;
}

}  // namespace

double integrate_triangle(const PointFn& f, const Vec& a, const Vec& b, const Vec& c,
                          double abs_tol, int max_depth, int min_depth) {
  const TriangleRule& rule = collapsed_gauss_rule(6);
  // Globally adaptive: refine the triangle with the largest parent/children mismatch.
  std::priority_queue<TriPiece> heap;
  std::vector<double> done;
  heap.push(tri_eval(f, a, b, c, triangle_rule_sum(f, a, b, c, rule), 0, rule));
  double total_err = heap.top().err;
  const int budget = 2000;
  int stalled = 0;
  for (int n = 0; n < budget && !heap.empty(); ++n) {
    const TriPiece top = heap.top();
    const bool forced = top.depth < min_depth;
    if (!forced && total_err <= abs_tol) break;
    if (!forced && top.err <= 1e-15 * std::abs(top.val)) break;
    heap.pop();
    total_err -= top.err;
    if (top.depth >= max_depth) {
      done.push_back(top.val);
      continue;
    }
    const auto ch = split4(top.a, top.b, top.c);
    double kid_val = 0.0, kid_err = 0.0;
    for (int k = 0; k < 4; ++k) {
      TriPiece p = tri_eval(f, ch[k][0], ch[k][1], ch[k][2], top.kids[k], top.depth + 1, rule);
      kid_val += p.val;
      kid_err += p.err;
      heap.push(std::move(p));
    }
    total_err += kid_err;
    if (!forced && std::abs(kid_val - top.val) <= 1e-5 * std::abs(kid_val) && kid_err >= 0.99 * top.err) {
      if (++stalled >= 10) break;
    }
  }
  while (!heap.empty()) {
    done.push_back(heap.top().val);
    heap.pop();
  }
  return pairwise_sum(done);
}

double spherical_triangle_area(const Vec& a, const Vec& b, const Vec& c) {
  const double num = std::abs(a.dot(b.cross(c)));
  const double den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
  return 2.0 * std::atan2(num, den);
}

double integrate_spherical_triangle(const PointFn& f, const Vec& a, const Vec& b, const Vec& c,
                                    double abs_tol, int max_depth) {
  Vec n = (b - a).cross(c - a);
  const double nn = n.norm();
  if (nn == 0.0) return 0.0;
  n /= nn;
  const double d = std::abs(a.dot(n));
  PointFn g = [&](const Vec& x) {
    const double r = x.norm();
    return f(x / r) * d / (r * r * r);
  };
  return integrate_triangle(g, a, b, c, abs_tol, max_depth);
}

std::vector<std::array<Vec, 3>> icosphere_triangles(int level) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                        {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : v) p.normalize();
  const int faces[20][3] = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                            {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                            {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                            {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  std::vector<std::array<Vec, 3>> tris;
  for (const auto& f : faces) tris.push_back({v[f[0]], v[f[1]], v[f[2]]});
  for (int l = 0; l < level; ++l) {
    std::vector<std::array<Vec, 3>> next;
    next.reserve(tris.size() * 4);
    for (const auto& tr : tris) {
      const Vec ab = (tr[0] + tr[1]).normalized();
      const Vec bc = (tr[1] + tr[2]).normalized();
      const Vec ca = (tr[2] + tr[0]).normalized();
      next.push_back({tr[0], ab, ca});
      next.push_back({ab, tr[1], bc});
      next.push_back({ca, bc, tr[2]});
      next.push_back({ab, bc, ca});
    }
    tris = std::move(next);
  }
  return tris;
}

double integrate_sphere(const PointFn& f, int dim, double abs_tol,
                        const std::vector<double>& breakpoints) {
  check_dim(dim);
  if (dim == 2) {
    std::vector<double> cuts;
    for (int k = 0; k <= 8; ++k) cuts.push_back(kTwoPi * k / 8.0);
    for (double b : breakpoints) {
      double x = std::fmod(b, kTwoPi);
      if (x < 0) x += kTwoPi;
      cuts.push_back(x);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-15; }),
               cuts.end());
    std::vector<double> parts;
    const double piece_tol = abs_tol / static_cast<double>(cuts.size());
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      parts.push_back(integrate_interval([&](double th) { return f(unit2(th)); }, cuts[k],
                                         cuts[k + 1], piece_tol));
    }
    return pairwise_sum(parts);
  }
  const auto tris = icosphere_triangles(1);
  std::vector<double> parts;
  const double piece_tol = abs_tol / static_cast<double>(tris.size());
  for (const auto& tr : tris) {
    parts.push_back(integrate_spherical_triangle(f, tr[0], tr[1], tr[2], piece_tol));
  }
  return pairwise_sum(parts);
}

double QuadratureRule::apply(const PointFn& f) const {
  std::vector<double> terms(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) terms[k] = weights[k] * f(nodes[k]);
  return pairwise_sum(terms);
}

QuadratureRule make_quadrature_rule(int dim, int resolution) {
  check_dim(dim);
  QuadratureRule rule;
  rule.dim = dim;
  if (dim == 2) {
    if (resolution < 8) throw std::invalid_argument("2D rule needs at least 8 nodes");
    rule.nodes = circle_directions(resolution);
    rule.weights.assign(resolution, kTwoPi / resolution);
    rule.scheme = "trapezoid-periodic-" + std::to_string(resolution);
    rule.target_tolerance = 1e-10;
    return rule;
  }
  const TriangleRule& tri = collapsed_gauss_rule(3);
  for (const auto& tr : icosphere_triangles(resolution)) {
    Vec n = (tr[1] - tr[0]).cross(tr[2] - tr[0]);
    const double area = 0.5 * n.norm();
    n.normalize();
    const double d = std::abs(tr[0].dot(n));
    const std::size_t first = rule.weights.size();
    double sum = 0.0;
    for (std::size_t k = 0; k < tri.weights.size(); ++k) {
      const auto& l = tri.bary[k];
      const Vec x = l[0] * tr[0] + l[1] * tr[1] + l[2] * tr[2];
      const double r = x.norm();
      rule.nodes.push_back(x / r);
      rule.weights.push_back(area * tri.weights[k] * d / (r * r * r));
      sum += rule.weights.back();
    }
    // rescale so each spherical triangle gets its exact area
    const double exact = spherical_triangle_area(tr[0], tr[1], tr[2]);
    for (std::size_t k = first; k < rule.weights.size(); ++k) rule.weights[k] *= exact / sum;
  }
  rule.scheme = "icosphere-L" + std::to_string(resolution) + "-collapsed-gauss-3";
  rule.target_tolerance = 1e-6;
  return rule;
}

QuadratureRule default_quadrature_rule(int dim) {
  return dim == 2 ? make_quadrature_rule(2, 1024) : make_quadrature_rule(3, 3);
}

namespace {

struct TrigCoeffs {
  double a0 = 0.0;
  std::vector<double> a, b;  // k = 1..K
  double nyquist = 0.0;
  bool has_nyquist = false;
};

// cos/sin of 2πm/n for m = 0..n-1, mirrored so the table is exactly symmetric.
void unit_roots(int n, std::vector<double>& co, std::vector<double>& si) {
  co.assign(n, 0.0);
  si.assign(n, 0.0);
  for (int m = 0; 2 * m <= n; ++m) {
    co[m] = std::cos(kTwoPi * m / n);
    si[m] = std::sin(kTwoPi * m / n);
    if (m > 0 && m < n - m) {
      co[n - m] = co[m];
      si[n - m] = -si[m];
    }
  }
}

TrigCoeffs trig_coeffs(const std::vector<double>& s) {
  const int n = static_cast<int>(s.size());
  TrigCoeffs c;
  const int kmax = (n - 1) / 2;
  std::vector<double> co, si;
  unit_roots(n, co, si);
  c.a.assign(kmax, 0.0);
  c.b.assign(kmax, 0.0);
  c.a0 = pairwise_sum(s) / n;
  std::vector<double> ta(n), tb(n);
  for (int k = 1; k <= kmax; ++k) {
    for (int j = 0; j < n; ++j) {
      const int m = static_cast<int>((static_cast<long long>(k) * j) % n);
      ta[j] = s[j] * co[m];
      tb[j] = s[j] * si[m];
    }
    c.a[k - 1] = 2.0 * pairwise_sum(ta) / n;
    c.b[k - 1] = 2.0 * pairwise_sum(tb) / n;
  }
  if (n % 2 == 0) {
    c.has_nyquist = true;
    for (int j = 0; j < n; ++j) ta[j] = (j % 2 == 0) ? s[j] : -s[j];
    c.nyquist = pairwise_sum(ta) / n;
  }
  return c;
}

TrigValue trig_eval(const TrigCoeffs& c, int n, double theta) {
  TrigValue r{c.a0, 0.0, 0.0};
  for (std::size_t i = 0; i < c.a.size(); ++i) {
    const double k = static_cast<double>(i + 1);
    const double co = std::cos(k * theta);
    const double si = std::sin(k * theta);
    r.value += c.a[i] * co + c.b[i] * si;
    r.d1 += k * (-c.a[i] * si + c.b[i] * co);
    r.d2 += -k * k * (c.a[i] * co + c.b[i] * si);
  }
  if (c.has_nyquist) {
    const double k = n / 2.0;
    r.value += c.nyquist * std::cos(k * theta);
    r.d2 += -k * k * c.nyquist * std::cos(k * theta);
  }
  return r;
}

}  // namespace

std::vector<double> spectral_derivative(const std::vector<double>& samples, int order) {
  if (order != 1 && order != 2) throw std::invalid_argument("spectral_derivative: order 1 or 2");
  const int n = static_cast<int>(samples.size());
  // Periodic differentiation matrices applied to differences s_l - s_j (rows sum to
  // zero), so constants differentiate to exactly zero.
  const bool even = n % 2 == 0;
  std::vector<double> entry(n, 0.0);
  for (int k = 1; k < n; ++k) {
    const double x = kPi * k / n;  // k h / 2
    const double sg = (k % 2 == 0) ? 1.0 : -1.0;
    const double sn = std::sin(x);
    if (order == 1) entry[k] = even ? 0.5 * sg * std::cos(x) / sn : 0.5 * sg / sn;
    else entry[k] = even ? -0.5 * sg / (sn * sn) : -0.5 * sg * std::cos(x) / (sn * sn);
  }
  std::vector<double> out(n), terms(n);
  for (int j = 0; j < n; ++j) {
    for (int l = 0; l < n; ++l) {
      const int k = ((j - l) % n + n) % n;
      terms[l] = k == 0 ? 0.0 : entry[k] * (samples[l] - samples[j]);
    }
    out[j] = pairwise_sum(terms);
  }
  return out;
}

TrigValue trig_interpolate(const std::vector<double>& samples, double theta) {
  return trig_eval(trig_coeffs(samples), static_cast<int>(samples.size()), theta);
}

}  // namespace mogi
