#include <doctest.h>

#include "mogi/polytope.hpp"
#include "oracles.hpp"

#include <random>

using namespace mogi;
using namespace oracle;

namespace {
const Vec e1(1, 0, 0), e2(0, 1, 0), e3(0, 0, 1);

// Radial oracle: bisection on the membership test along the ray.
double ray_shoot(const Polytope& P, const Vec& xi) {
  double lo = 0.0, hi = 1.0;
  while (feasible(P, hi * xi, 0.0)) hi *= 2.0;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (feasible(P, mid * xi, 0.0) ? lo : hi) = mid;
  }
  return lo;
}

Vec random_dir(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> g;
  if (dim == 2) return unit2(std::uniform_real_distribution<double>(0, kTwoPi)(rng));
  return Vec(g(rng), g(rng), g(rng)).normalized();
}
}  // namespace

TEST_CASE("square: support, radial, alpha") {
  const Polytope sq = body::square();
  CHECK(sq.support_value(e1) == doctest::Approx(1.0));
  CHECK(sq.support_value(Vec(1, 1, 0).normalized()) == doctest::Approx(std::sqrt(2.0)));
  CHECK(sq.radial_value(Vec(1, 1, 0).normalized()) == doctest::Approx(std::sqrt(2.0)));
  CHECK(sq.alpha(e1) == e1);
  // corner direction: tie broken to the lowest facet index (0 = e1)
  CHECK(sq.alpha_index(Vec(1, 1, 0).normalized()) == 0);
  CHECK(sq.volume() == doctest::Approx(4.0));
  for (int i = 0; i < 4; ++i) {
    CHECK(sq.cell_measure(i) == doctest::Approx(kPi / 2).epsilon(1e-14));
    CHECK(sq.facet_area(i) == doctest::Approx(2.0));
  }
  CHECK(sq.symmetric());
}

TEST_CASE("random polytopes agree with brute-force oracles") {
  std::mt19937_64 rng(11);
  for (int dim : {2, 3}) {
    for (int t = 0; t < 6; ++t) {
      const Polytope P = body::random(dim, 100 + t, dim == 2 ? 12 : 14);
      const auto bv = brute_vertices(P);
      CHECK(bv.size() == P.vertices().size());
      for (const auto& v : P.vertices()) {
        double best = 1e9;
        for (const auto& w : bv) best = std::min(best, (v - w).norm());
        CHECK(best < 1e-9);
      }
      for (int k = 0; k < 50; ++k) {
        const Vec u = random_dir(rng, dim);
        double sup = -1e9;
        for (const auto& w : bv) sup = std::max(sup, w.dot(u));
        CHECK(P.support_value(u) == doctest::Approx(sup).epsilon(1e-10));
        CHECK(P.radial_value(u) == doctest::Approx(ray_shoot(P, u)).epsilon(1e-10));
        // alpha attains the radial minimum
        const int i = P.alpha_index(u);
        CHECK(P.support(i) / u.dot(P.normal(i)) == doctest::Approx(P.radial_value(u)).epsilon(1e-12));
      }
      // support numbers reproduced on active facets
      for (int i = 0; i < P.size(); ++i) {
        if (P.active(i)) CHECK(std::abs(P.support_value(P.normal(i)) - P.support(i)) <= 1e-10);
        else CHECK(P.support_value(P.normal(i)) <= P.support(i) + 1e-10);
      }
    }
  }
}

TEST_CASE("wulff shape examples") {
  const Polytope sq = wulff_shape(2, {e1, e2, -e1, -e2}, {1, 1, 1, 1});
  CHECK(hausdorff_distance(sq, body::square()) < 1e-15);
  const Polytope five = wulff_shape(2, {e1, e2, -e1, -e2, Vec(1, 1, 0).normalized()}, {1, 1, 1, 1, std::sqrt(2.0)});
  CHECK(five.active_count() == 4);
  CHECK_FALSE(five.active(4));
  CHECK(five.facet_area(4) == 0.0);
  CHECK(hausdorff_distance(five, body::square()) < 1e-14);
  // [h_K] = K for K with the same normal set
  const Polytope K = body::random(2, 5, 10);
  std::vector<double> h;
  for (const auto& u : K.normals()) h.push_back(K.support_value(u));
  CHECK(hausdorff_distance(wulff_shape(2, K.normals(), h), K) < 1e-12);
  // h_[f] <= f
  for (int i = 0; i < K.size(); ++i) CHECK(K.support_value(K.normal(i)) <= K.support(i) + 1e-12);
  CHECK_THROWS_AS(wulff_shape(2, {e1, e2, Vec(1, 1, 0).normalized()}, {1, 1, 1}), GeometryError);
  CHECK_THROWS_AS(wulff_shape(3, {e1, e2, e3, -e1, -e2}, {1, 1, 1, 1, 1}), GeometryError);
}

TEST_CASE("convex hull body examples") {
  const Polytope cp = convex_hull_body(2, {e1, e2, -e1, -e2}, {1, 1, 1, 1});
  const Polytope cross = Polytope::from_points(2, {e1, e2, -e1, -e2});
  CHECK(hausdorff_distance(cp, cross) < 1e-15);
  CHECK(cp.volume() == doctest::Approx(2.0));
  // <rho_K> = K at the vertex directions of K
  const Polytope K = body::random(2, 9, 9);
  std::vector<Vec> dirs;
  std::vector<double> rho;
  for (const auto& v : K.vertices()) {
    dirs.push_back(v.normalized());
    rho.push_back(K.radial_value(v.normalized()));
  }
  CHECK(hausdorff_distance(convex_hull_body(2, dirs, rho), K) < 1e-12);
  // rho_<f> >= f
  std::mt19937_64 rng(3);
  std::vector<Vec> om;
  std::vector<double> f;
  for (int i = 0; i < 20; ++i) {
    om.push_back(random_dir(rng, 2));
    f.push_back(0.5 + std::uniform_real_distribution<double>(0, 1)(rng));
  }
  const Polytope H = convex_hull_body(2, om, f);
  for (std::size_t i = 0; i < om.size(); ++i) CHECK(H.radial_value(om[i]) >= f[i] * (1 - 1e-12));
}

TEST_CASE("polar examples and identities") {
  const Polytope cp = polar(body::square());
  CHECK(hausdorff_distance(cp, Polytope::from_points(2, {e1, e2, -e1, -e2})) < 1e-15);
  const Polytope b = polar(body::ball(2, 256, 2.0));
  for (const Vec& u : circle_directions(50, 0.3)) CHECK(std::abs(b.radial_value(u) - 0.5) < 1e-3);
  std::mt19937_64 rng(5);
  for (int dim : {2, 3}) {
    const Polytope P = body::random(dim, 77, dim == 2 ? 20 : 20);
    const Polytope Q = polar(P);
    CHECK(hausdorff_distance(polar(Q), P) <= (dim == 2 ? 1e-9 : 1e-6));
    for (int k = 0; k < 200; ++k) {
      const Vec u = random_dir(rng, dim);
      CHECK(Q.support_value(u) * P.radial_value(u) == doctest::Approx(1.0).epsilon(dim == 2 ? 1e-10 : 1e-8));
      CHECK(Q.radial_value(u) * P.support_value(u) == doctest::Approx(1.0).epsilon(dim == 2 ? 1e-10 : 1e-8));
    }
  }
}

TEST_CASE("wulff shape and convex hull are polar to each other") {
  std::mt19937_64 rng(21);
  for (int dim : {2, 3}) {
    for (int t = 0; t < 3; ++t) {
      std::vector<Vec> om;
      std::vector<double> f, inv;
      while (true) {
        om.clear();
        for (int i = 0; i < 32; ++i) om.push_back(random_dir(rng, dim));
        if (directions_span_sphere(dim, om)) break;
      }
      for (int i = 0; i < 32; ++i) {
        f.push_back(0.6 + std::uniform_real_distribution<double>(0, 1)(rng));
        inv.push_back(1.0 / f.back());
      }
      const double tol = dim == 2 ? 1e-9 : 1e-6;
      CHECK(hausdorff_distance(polar(wulff_shape(dim, om, f)), convex_hull_body(dim, om, inv)) <= tol);
      CHECK(hausdorff_distance(polar(convex_hull_body(dim, om, f)), wulff_shape(dim, om, inv)) <= tol);
    }
  }
}

TEST_CASE("radial cells") {
  const Polytope cube = body::cube();
  double total = 0.0;
  for (int i = 0; i < 6; ++i) {
    CHECK(cube.cell_measure(i) == doctest::Approx(4 * kPi / 6).epsilon(1e-12));
    CHECK(cube.facet_area(i) == doctest::Approx(4.0));
    total += cube.cell_measure(i);
  }
  CHECK(total == doctest::Approx(4 * kPi));
  CHECK(cube.volume() == doctest::Approx(8.0));
  // random 2D: dense ray assignment lands in the cell of the facet hit
  const Polytope P = body::random(2, 31, 15);
  double sum = 0.0;
  for (int i = 0; i < P.size(); ++i) sum += P.cell_measure(i);
  CHECK(sum == doctest::Approx(kTwoPi).epsilon(1e-12));
  for (int k = 0; k < 5000; ++k) {
    const double th = kTwoPi * (k + 0.5) / 5000;
    const Vec xi = unit2(th);
    int brute = -1;
    double best = 1e300;
    for (int i = 0; i < P.size(); ++i) {
      const double c = xi.dot(P.normal(i));
      if (c > 0 && P.support(i) / c < best) best = P.support(i) / c, brute = i;
    }
    const SphericalCell& c = P.cells()[brute];
    REQUIRE_FALSE(c.empty);
    double a = th;
    while (a < c.begin) a += kTwoPi;
    CHECK(a <= c.end + 1e-12);
  }
  // arc endpoints are vertex directions
  for (const auto& c : P.cells()) {
    if (c.empty) continue;
    bool b = false, e = false;
    for (const auto& v : P.vertices()) {
      b = b || std::abs(std::remainder(angle2(v) - c.begin, kTwoPi)) < 1e-14;
      e = e || std::abs(std::remainder(angle2(v) - c.end, kTwoPi)) < 1e-14;
    }
    CHECK((b && e));
  }
  // 3D random: interior samples of each cell are assigned to that facet
  const Polytope Q = body::random(3, 8, 16);
  double s3 = 0.0;
  for (int i = 0; i < Q.size(); ++i) {
    s3 += Q.cell_measure(i);
    const auto& f = Q.facet_vertices(i);
    if (f.empty()) continue;
    Vec cen = Vec::Zero();
    for (const auto& x : f) cen += x;
    cen /= double(f.size());
    for (const auto& x : f) CHECK(Q.alpha_index((0.5 * cen + 0.5 * x).normalized()) == i);
  }
  CHECK(s3 == doctest::Approx(4 * kPi).epsilon(1e-10));
}

TEST_CASE("scaling covariance") {
  const Polytope P = body::random(3, 4, 12);
  const Polytope S = P.scaled(2.5);
  std::mt19937_64 rng(1);
  for (int k = 0; k < 20; ++k) {
    const Vec u = random_dir(rng, 3);
    CHECK(S.radial_value(u) == doctest::Approx(2.5 * P.radial_value(u)).epsilon(1e-15));
    CHECK(S.support_value(u) == doctest::Approx(2.5 * P.support_value(u)).epsilon(1e-15));
  }
}

TEST_CASE("builtin bodies") {
  CHECK(builtin_body(2, "square").size() == 4);
  CHECK(builtin_body(3, "cube").size() == 6);
  CHECK(builtin_body(3, "simplex").active_count() == 4);
  CHECK(builtin_body(2, "ball:64").size() == 64);
  CHECK(builtin_body(2, "random(3,10)").size() == 10);
  CHECK_THROWS_AS(builtin_body(2, "cube"), GeometryError);
  const Polytope b = builtin_body(2, "ball");
  for (const Vec& u : circle_directions(40, 0.1)) CHECK(std::abs(b.radial_value(u) - 1.0) < 1e-3);
}
