#include "mogi/variation.hpp"

#include <doctest.h>

#include <chrono>
#include <cmath>
#include <random>

using namespace mogi;

namespace {

std::vector<Vec> square_dirs() { return {Vec(1, 0, 0), Vec(0, 1, 0), Vec(-1, 0, 0), Vec(0, -1, 0)}; }

std::vector<double> random_values(int n, unsigned seed, double lo, double hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = U(rng);
  return v;
}

}  // namespace

TEST_CASE("mo_add closed forms") {
  const auto dirs = circle_directions(9, 0.3);
  const auto f = random_values(9, 1, 0.5, 2.0);
  const auto g = random_values(9, 2, -1.0, 1.0);

  PerturbationFamily lg(builtin::log(), 2, dirs, f, g);
  PerturbationFamily sq(builtin::power(2), 2, dirs, f, g);
  PerturbationFamily rc(builtin::reciprocal(), 2, dirs, f, g);
  for (double eps : {0.1, 1e-2, -1e-3, 1e-6, -0.1}) {
    const auto a = mo_add(lg, eps);
    const auto b = mo_add(sq, eps);
    const auto c = mo_add(rc, eps);
    for (int i = 0; i < 9; ++i) {
      CHECK(a[i] == doctest::Approx(f[i] * std::exp(eps * g[i])).epsilon(1e-12));
      CHECK(b[i] == doctest::Approx(std::sqrt(f[i] * f[i] + eps * g[i])).epsilon(1e-12));
      CHECK(c[i] == doctest::Approx(1.0 / (1.0 / f[i] + eps * g[i])).epsilon(1e-12));
    }
  }
  const auto z = mo_add(sq, 0.0);
  for (int i = 0; i < 9; ++i) CHECK(z[i] == f[i]);
}

TEST_CASE("admissible range") {
  const auto dirs = circle_directions(4);
  PerturbationFamily sq(builtin::power(2), 2, dirs, {1, 1, 1, 1}, {1, -1, 0.5, 0});
  // t² on [1e-8, 1e8]: the binding gap is 1 - 1e-16 below, scaled by |g| = 1
  CHECK(sq.delta() == doctest::Approx(0.5 * (1.0 - 1e-16)));
  CHECK_THROWS_AS(mo_add(sq, 0.6), RangeError);
  CHECK_NOTHROW(mo_add(sq, -0.49));

  PerturbationFamily none(builtin::log(), 2, dirs, {1, 2, 3, 4}, {0, 0, 0, 0});
  CHECK(std::isinf(none.delta()));

  CHECK_THROWS_AS(PerturbationFamily(builtin::log(), 2, dirs, {1, -1, 1, 1}, {0, 0, 0, 0}), DomainError);
  CHECK_THROWS_AS(PerturbationFamily(builtin::log(), 2, dirs, {1, 1, 1}, {0, 0, 0, 0}), DomainError);
}

TEST_CASE("chain rule at small ε") {
  const auto dirs = fibonacci_directions(12);
  const auto f = random_values(12, 5, 0.7, 3.0);  // one-sided truncation ~ ε|g|/f³ for t³/3
  const auto g = random_values(12, 6, -1.0, 1.0);
  for (const auto& psi : {builtin::log(), builtin::power(2), builtin::power(0.5), builtin::reciprocal(),
                          builtin::neg_log(), builtin::power_over_p(-1.5), builtin::volume(3)}) {
    PerturbationFamily fam(psi, 3, dirs, f, g);
    CAPTURE(psi.name());
    CHECK(chain_rule_error(fam, 1e-7) <= 1e-6);
  }
}

TEST_CASE("uniform convergence of f_ε") {
  const auto dirs = circle_directions(7);
  const auto f = random_values(7, 8, 0.5, 2.0);
  const auto g = random_values(7, 9, -1.0, 1.0);
  PerturbationFamily fam(builtin::power(3), 2, dirs, f, g);
  double L = 0.0;
  for (int i = 0; i < 7; ++i) L = std::max(L, std::abs(g[i]) / (3.0 * f[i] * f[i]));
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    const auto fe = mo_add(fam, eps);
    for (int i = 0; i < 7; ++i) CHECK(std::abs(fe[i] - f[i]) <= 1.1 * L * eps);
  }
}

TEST_CASE("wulff variation: log-log shift") {
  // Ṽ_log([f e^ε]) = Ṽ_log([f]) + ε λ(S¹), so A = D = 2π exactly
  auto s = variation_scenario("default");
  auto rep = run_variation_scenario(s);
  CHECK(rep.A == doctest::Approx(2.0 * kPi).epsilon(1e-12));
  for (const auto& r : rep.rows) CHECK(r.D == doctest::Approx(2.0 * kPi).epsilon(1e-9));
  CHECK(rep.pass);

  PerturbationFamily flat(builtin::log(), 2, square_dirs(), {1, 1, 1, 1}, {0, 0, 0, 0});
  auto zero = verify_wulff_variation(s.theta, flat);
  CHECK(zero.A == 0.0);
  for (const auto& r : zero.rows) CHECK(r.D == 0.0);
}

TEST_CASE("wulff variation: area of the square") {
  // [1 + εg] on the square is a rectangle of area (2 + ε(g1+g3))(2 + ε(g2+g4))
  const auto lam = SphericalMeasure::uniform(2);
  Triple th(builtin::volume(2), builtin::power(1), lam);
  std::vector<double> g;
  for (const auto& u : square_dirs()) g.push_back(std::exp(-4.0 * (1.0 - u.x())));  // bump at e1
  PerturbationFamily fam(th.Psi, 2, square_dirs(), {1, 1, 1, 1}, g);
  const double exact = 2.0 * (g[0] + g[1] + g[2] + g[3]);
  auto rep = verify_wulff_variation(th, fam, {1e-2, 1e-3, 1e-4, 1e-5});
  CHECK(rep.A == doctest::Approx(exact).epsilon(1e-12));
  CHECK(std::abs(rep.rows[2].D - exact) <= 1e-5);
  CHECK(std::abs(rep.rows[3].D - exact) <= 1e-5);
  CHECK(rep.pass);
}

TEST_CASE("hull variation: log-log and constant g") {
  // ⟨e^ε⟩* on the square directions is e^{-ε}·square: D = -λ(S¹)
  const auto lam = SphericalMeasure::uniform(2);
  PerturbationFamily fam(builtin::log(), 2, square_dirs(), {1, 1, 1, 1}, {1, 1, 1, 1});
  auto rep = verify_hull_variation(theta0(lam), fam);
  CHECK(rep.A == doctest::Approx(-2.0 * kPi).epsilon(1e-12));
  for (const auto& r : rep.rows) CHECK(r.D == doctest::Approx(-2.0 * kPi).epsilon(1e-9));
  CHECK(rep.pass);

  const auto dirs = circle_directions(10, 0.2);
  const auto f = random_values(10, 11, 0.8, 1.2);
  const double c = 0.7;
  Triple th(builtin::reciprocal(), builtin::power(2), lam);
  PerturbationFamily cf(th.Psi, 2, dirs, f, std::vector<double>(10, c));
  auto rc = verify_hull_variation(th, cf);
  const auto total = polar_mo_measure(th, wulff_shape(2, dirs, [&] {
                                        std::vector<double> r;
                                        for (double x : f) r.push_back(1.0 / x);
                                        return r;
                                      }()));
  CHECK(rc.A == doctest::Approx(-c * total.total).epsilon(1e-12));
  CHECK(rc.pass);
}

TEST_CASE("entropy variation on a random polygon") {
  const auto lam = SphericalMeasure::uniform(2);
  const auto K = body::random(2, 21, 9);
  std::vector<Vec> dirs;
  std::vector<double> f;
  for (const auto& v : K.vertices()) {
    dirs.push_back(v.normalized());
    f.push_back(v.norm());
  }
  const auto g = random_values(static_cast<int>(dirs.size()), 22, -1.0, 1.0);
  Triple th(builtin::log(), builtin::power(1), lam);
  PerturbationFamily fam(th.Psi, 2, dirs, f, g);
  auto rep = verify_hull_variation(th, fam, default_eps_list(), true);
  CHECK(rep.kind == "entropy");
  CHECK(std::abs(rep.rows[2].error) <= 1e-5);
  CHECK(rep.pass);
}

TEST_CASE("variation preconditions") {
  const auto lam = SphericalMeasure::uniform(2);
  PerturbationFamily half(builtin::log(), 2, {Vec(1, 0, 0), Vec(0, 1, 0)}, {1, 1}, {1, 1});
  CHECK_THROWS_AS(verify_wulff_variation(theta0(lam), half), GeometryError);
  PerturbationFamily sq(builtin::power(2), 2, square_dirs(), {1, 1, 1, 1}, {1, 1, 1, 1});
  CHECK_THROWS_AS(verify_wulff_variation(theta0(lam), sq), DomainError);
  PerturbationFamily ok(builtin::log(), 2, square_dirs(), {1, 1, 1, 1}, {1, 1, 1, 1});
  CHECK_THROWS_AS(verify_wulff_variation(theta0(lam), ok, {1e-3, 1e-2}), DomainError);
  CHECK_THROWS_AS(variation_scenario("nope-2d"), DomainError);
}

TEST_CASE("shipped variation scenarios") {
  const auto names = variation_scenario_names();
  CHECK(names.size() == 12);
  for (const auto& n : names) {
    const auto t0 = std::chrono::steady_clock::now();
    auto rep = run_variation_scenario(variation_scenario(n));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CAPTURE(rep.to_json().dump(1));
    CAPTURE(secs);
    CHECK(rep.pass);
  }
}
