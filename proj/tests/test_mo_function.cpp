#include <doctest.h>

#include "mogi/mo_function.hpp"

using namespace mogi;

namespace {
const Vec e1(1, 0, 0);
const Vec diag3 = Vec(1, 2, 2) / 3.0;

std::vector<MOFunction> shipped() {
  return {builtin::power_over_p(0.5), builtin::power_over_p(2), builtin::power_over_p(-1.5),
          builtin::power(3),          builtin::power(-2),       builtin::log(),
          builtin::neg_log(),         builtin::volume(2),       builtin::volume(3),
          builtin::exp_neg(),         builtin::reciprocal(),
          builtin::anisotropic(2, {1.0, 2.0, 1.5, 1.0, 2.0, 1.5}, 2.0)};
}
}  // namespace

TEST_CASE("evaluation of builtins") {
  CHECK(builtin::volume(2).value(e1, 3.0) == doctest::Approx(4.5));
  CHECK(builtin::log().value(e1, 1.0) == 0.0);
  CHECK(builtin::reciprocal().value(e1, 0.25) == 4.0);
  CHECK(builtin::volume(3).derivative(diag3, 2.0) == doctest::Approx(4.0));
  CHECK(builtin::log().derivative(e1, 5.0) == doctest::Approx(0.2));
  CHECK(builtin::reciprocal().derivative(e1, 2.0) == doctest::Approx(-0.25));
}

TEST_CASE("domain errors") {
  const MOFunction f = builtin::log();
  CHECK_THROWS_AS(f.value(e1, 0.0), DomainError);
  CHECK_THROWS_AS(f.value(e1, -1.0), DomainError);
  CHECK_THROWS_AS(f.value(e1, 1e9), DomainError);
  CHECK_THROWS_AS(f.value(Vec(1.0 + 1e-9, 0, 0), 1.0), DomainError);
  CHECK_NOTHROW(f.value(Vec(1.0 + 1e-13, 0, 0), 1.0));
}

TEST_CASE("tilde transform") {
  const MOFunction lt = tilde_transform(builtin::log());
  for (double t : {0.01, 0.7, 3.0, 400.0}) CHECK(lt.value(e1, t) == doctest::Approx(-std::log(t)));
  const MOFunction sq = tilde_transform(builtin::power(2));
  CHECK(sq.value(e1, 2.0) == doctest::Approx(0.25));
  CHECK(sq.derivative(e1, 2.0) == doctest::Approx(-0.25));
  CHECK(sq.has(ClassTag::Cd));
  CHECK(sq.has(ClassTag::Gd));
  CHECK_FALSE(sq.has(ClassTag::CI));
  CHECK(sq.limits().at_zero == Limit::PosInf);
  CHECK(tilde_transform(tilde_transform(builtin::power(3))).value(e1, 1.7) ==
        doctest::Approx(4.913).epsilon(1e-14));
}

TEST_CASE("tilde involution is exact on all builtins") {
  const auto probes = default_probe_grid(2);
  for (const auto& f : shipped()) {
    const MOFunction g = tilde_transform(tilde_transform(f));
    CHECK(g.tags() == f.tags());
    for (const auto& p : probes) {
      const double a = f.value(p.xi, p.t), b = g.value(p.xi, p.t);
      CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
    }
    // Single transform agrees with the defining formula.
    const MOFunction h = tilde_transform(f);
    for (double t : {1e-3, 0.5, 2.0, 1e3}) {
      CHECK(h.value(e1, t) == doctest::Approx(f.value(e1, 1.0 / t)).epsilon(1e-14));
      CHECK(h.derivative(e1, t) == doctest::Approx(-f.derivative(e1, 1.0 / t) / (t * t)).epsilon(1e-14));
    }
  }
}

TEST_CASE("classify confirms documented tags") {
  for (const auto& f : shipped()) {
    for (int dim : {2, 3}) {
      if (dim == 3 && f.spec().contains("tabulated_weight")) continue;
      const ClassReport r = classify(f, default_probe_grid(dim));
      INFO(f.name(), " ", r.to_json().dump());
      CHECK(r.consistent());
      CHECK(r.max_derivative_error <= 1e-6);
    }
  }
}

TEST_CASE("classify examples") {
  const auto grid = default_probe_grid(2);
  const ClassReport rec = classify(builtin::reciprocal(), grid);
  CHECK(rec.observed(ClassTag::Gd));
  CHECK_FALSE(rec.observed(ClassTag::GI));
  const ClassReport sq = classify(builtin::power(2), grid);
  CHECK(sq.observed(ClassTag::CI));
  CHECK(sq.observed(ClassTag::GI));
  const ClassReport lg = classify(builtin::log(), grid);
  CHECK(lg.observed(ClassTag::CI));
  CHECK_FALSE(lg.observed(ClassTag::GI));
  CHECK(lg.consistent());
}

TEST_CASE("classify flags a mislabeled user function") {
  // declared decreasing and G_d but actually increasing
  MOFunction bad("bad", [](const Vec&, double t) { return t; }, [](const Vec&, double) { return 1.0; },
                 ClassTag::C | ClassTag::Cd | ClassTag::Gd, {Limit::PosInf, Limit::Zero}, true);
  const ClassReport r = classify(bad, default_probe_grid(2));
  CHECK_FALSE(r.consistent());
  bool cd_flag = false;
  for (const auto& t : r.tags) cd_flag = cd_flag || (t.tag == ClassTag::Cd && t.contradiction);
  CHECK(cd_flag);
  // wrong derivative
  MOFunction wrong("wrong", [](const Vec&, double t) { return t * t; },
                   [](const Vec&, double t) { return 2.1 * t; }, ClassTag::C | ClassTag::CI,
                   {Limit::Zero, Limit::PosInf}, true);
  const ClassReport w = classify(wrong, default_probe_grid(2));
  CHECK_FALSE(w.derivative_ok);
}

TEST_CASE("direction evenness of builtins") {
  for (const auto& f : shipped()) {
    if (!f.even_in_direction()) continue;
    for (const Vec& u : circle_directions(17, 0.2)) CHECK(f.value(u, 1.3) == f.value(-u, 1.3));
  }
  const MOFunction odd = builtin::anisotropic(2, {1.0, 2.0, 3.0}, 1.0);
  CHECK_FALSE(odd.even_in_direction());
  // linear interpolation in the angle
  const MOFunction w = builtin::anisotropic(2, {1.0, 3.0, 1.0, 3.0}, 1.0);
  CHECK(w.value(unit2(kPi / 4), 1.0) == doctest::Approx(2.0));
}

TEST_CASE("builtin lookup rejects unknown names and parameters") {
  CHECK(builtin_function("power", {{"p", 2.0}}).value(e1, 3.0) == doctest::Approx(9.0));
  CHECK_THROWS_AS(builtin_function("nope", nlohmann::json::object()), DomainError);
  CHECK_THROWS_AS(builtin_function("power", {{"q", 2.0}}), DomainError);
  CHECK_THROWS_AS(builtin_function("log", {{"p", 2.0}}), DomainError);
}
