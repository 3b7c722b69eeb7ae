#include "acceptance.hpp"

#include "mogi/solver.hpp"
#include "mogi/variation.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>

namespace mogi::acceptance {

namespace {

std::string sci(double x) {
  char b[32];
  std::snprintf(b, sizeof b, "%.2e", x);
  return b;
}

std::vector<SphericalMeasure> densities(int dim) {
  return {SphericalMeasure::uniform(dim),
          SphericalMeasure::builtin_density(dim, "cosine2", {{"a", 1.0}, {"b", 0.7}}),
          SphericalMeasure::builtin_density(dim, "vonmises", {{"kappa", 1.2}})};
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

SphericalMeasure uniform_atoms(int m) {
  std::vector<Atom> a;
  for (const auto& u : circle_directions(m)) a.push_back({u, 1.0});
  return SphericalMeasure::atomic(2, a);
}

SphericalMeasure normalized_atoms(const SignedSphericalMeasure& w, const Polytope& K) {
  std::vector<Atom> a;
  for (int i = 0; i < K.size(); ++i) {
    if (K.active(i)) a.push_back({K.normal(i), w.weights[i] / w.total});
  }
  return SphericalMeasure::atomic(K.dim(), a);
}

Polytope hexagon() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.8, 1.2);
  std::vector<double> h(6);
  for (auto& x : h) x = U(rng);
  return Polytope::from_halfspaces(2, circle_directions(6, 0.3), h);
}

// sup_i |μ_i/|μ| - w_i/W| over μ's atoms, w taken at the matching facet of the body the
// measure was computed on
double ratio_error(const SphericalMeasure& mu, const SignedSphericalMeasure& w) {
  double sup = 0.0;
  for (const auto& a : mu.atoms()) {
    double wi = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
      if (angular_distance(a.u, w.directions[j]) <= 1e-10) wi = w.weights[j];
    }
    sup = std::max(sup, std::abs(a.mass / mu.total_mass() - wi / w.total));
  }
  return sup;
}

// 1: polar duality
CriterionResult duality(Tier tier) {
  CriterionResult r{1, "duality suite", true, 0, 30, ""};
  const int n2 = tier == Tier::Full ? 200 : 40;
  const int n3 = tier == Tier::Full ? 20 : 4;
  double inv[2] = {0, 0}, prod[2] = {0, 0}, wulff[2] = {0, 0};
  for (int dim : {2, 3}) {
    const int count = dim == 2 ? n2 : n3;
    const auto dirs = dim == 2 ? circle_directions(1000, 0.123) : fibonacci_directions(1000);
    for (int k = 0; k < count; ++k) {
      std::mt19937_64 rng(1000 * dim + k);
      const int m = dim == 2 ? 8 + static_cast<int>(rng() % 57) : 12 + static_cast<int>(rng() % 29);
      const auto K = body::random(dim, 1000 * dim + k, m);
      const auto Ks = polar(K);
      inv[dim - 2] = std::max(inv[dim - 2], hausdorff_distance(polar(Ks), K));
      for (const auto& u : dirs) prod[dim - 2] = std::max(prod[dim - 2], std::abs(Ks.support_value(u) * K.radial_value(u) - 1.0));
      // [f]* = ⟨1/f⟩ on the body's own normals with random f
      std::uniform_real_distribution<double> U(0.5, 1.5);
      std::vector<Vec> om;
      std::vector<double> f, finv;
      for (int i = 0; i < K.size(); ++i) {
        om.push_back(K.normal(i));
        f.push_back(U(rng));
        finv.push_back(1.0 / f.back());
      }
      wulff[dim - 2] =
          std::max(wulff[dim - 2], hausdorff_distance(polar(wulff_shape(dim, om, f)), convex_hull_body(dim, om, finv)));
    }
  }
  r.pass = inv[0] <= 1e-9 && inv[1] <= 1e-6 && prod[0] <= 1e-10 && prod[1] <= 1e-8 && wulff[0] <= 1e-9 &&
           wulff[1] <= 1e-6;
  r.detail = std::to_string(n2) + "+" + std::to_string(n3) + " bodies; involution " + sci(inv[0]) + "/" + sci(inv[1]) +
             ", h*rho-1 " + sci(prod[0]) + "/" + sci(prod[1]) + ", [f]* vs <1/f> " + sci(wulff[0]) + "/" + sci(wulff[1]);
  return r;
}

// 2: Θ₀ measure equals the pullback of λ
CriterionResult collapse(Tier tier) {
  CriterionResult r{2, "Theta0 collapse", true, 0, 60, ""};
  const int count = tier == Tier::Full ? 50 : 8;
  double err[2] = {0, 0};
  for (int dim : {2, 3}) {
    const auto lams = densities(dim);
    for (int k = 0; k < count; ++k) {
      const auto K = body::random(dim, 500 + 10 * dim + k, dim == 2 ? 12 : 16);
      for (const auto& lam : lams) {
        const auto a = mo_measure(theta0(lam), K);
        const auto b = gauss_image_pullback(lam, K);
        for (std::size_t i = 0; i < a.size(); ++i) {
          if (b.weights[i] != 0.0) err[dim - 2] = std::max(err[dim - 2], rel(a.weights[i], b.weights[i]));
          else if (a.weights[i] != 0.0) err[dim - 2] = 1.0;
        }
      }
    }
  }
  r.pass = err[0] <= 1e-8 && err[1] <= 1e-4;
  r.detail = std::to_string(count) + " bodies per dim x 3 densities; max rel " + sci(err[0]) + " (2D) " + sci(err[1]) + " (3D)";
  return r;
}

// 3: C_{Θ̃} = -C̃_Θ
CriterionResult sign_relation(Tier tier) {
  CriterionResult r{3, "sign relation", true, 0, 30, ""};
  const int count = tier == Tier::Full ? 50 : 10;
  const auto lam = SphericalMeasure::uniform(2);
  const std::vector<std::string> names = {"log-log", "volume-power:2", "reciprocal-square", "log-power:0.5",
                                          "reciprocal-log"};
  double worst = 0.0;
  for (const auto& n : names) {
    const auto th = builtin_triple(n, lam);
    for (int k = 0; k < count; ++k) {
      const auto K = body::random(2, 900 + k, 6 + k % 20);
      const auto a = polar_mo_measure(th.tilde(), K);
      const auto b = mo_measure(th, K);
      const double mag = std::max(a.magnitude(), b.magnitude());
      for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a.weights[i] + b.weights[i]) / mag);
    }
  }
  r.pass = worst <= 1e-12;
  r.detail = "5 triples x " + std::to_string(count) + " bodies; max |sum|/magnitude " + sci(worst);
  return r;
}

// 4: (tⁿ/n, tᵖ/p, uniform) gives h^{1-p} dS
CriterionResult lp_surface(Tier tier) {
  CriterionResult r{4, "L_p surface area cross-check", true, 0, 60, ""};
  const int count = tier == Tier::Full ? 10 : 3;
  double err[2] = {0, 0};
  for (int dim : {2, 3}) {
    const auto lam = SphericalMeasure::uniform(dim);
    for (double p : {0.5, 1.0, 2.0, 3.0}) {
      const Triple th(builtin::volume(dim), builtin::power_over_p(p), lam);
      for (int k = 0; k < count; ++k) {
        const auto K = body::random(dim, 40 + 7 * k + dim, dim == 2 ? 10 : 14);
        const auto w = mo_measure(th, K);
        for (int i = 0; i < K.size(); ++i) {
          const double direct = std::pow(K.support(i), 1.0 - p) * K.facet_area(i);
          if (direct != 0.0) err[dim - 2] = std::max(err[dim - 2], rel(w.weights[i], direct));
        }
      }
    }
  }
  r.pass = err[0] <= 1e-8 && err[1] <= 1e-3;
  r.detail = "p in {0.5,1,2,3}; max rel " + sci(err[0]) + " (2D) " + sci(err[1]) + " (3D)";
  return r;
}

// 5: variational formulas
CriterionResult variation(Tier tier) {
  CriterionResult r{5, "variational formulas", true, 0, 300, ""};
  int passed = 0, total = 0;
  std::string failed;
  for (const auto& n : variation_scenario_names()) {
    if (tier == Tier::Quick && n.find("-3d") != std::string::npos) continue;
    const auto rep = run_variation_scenario(variation_scenario(n));
    ++total;
    if (rep.pass) ++passed;
    else failed += " " + n;
  }
  r.pass = passed == total;
  r.detail = std::to_string(passed) + "/" + std::to_string(total) + " scenarios pass" + (failed.empty() ? "" : "; failed:" + failed);
  return r;
}

// 6: 64 uniform atoms against the scaled regular 64-gon
CriterionResult symmetric(Tier) {
  CriterionResult r{6, "solver, symmetric oracle", true, 0, 60, ""};
  const auto lam = SphericalMeasure::uniform(2);
  const Triple th(builtin::reciprocal(), builtin::power(2), lam);
  const auto s = solve(ProblemSpec(th, uniform_atoms(64), SolveMode::GAUSS_IMAGE));
  // scan c -> Ṽ(c·P₆₄) - 2π, then bisect the sign change
  const auto P = body::ball(2, 64);
  auto f = [&](double c) { return dual_volume(th.G, lam, P.scaled(c)) - 2.0 * kPi; };
  double a = 0.1, b = 0.1;
  for (int k = 1; k <= 100; ++k) {
    b = 0.1 * (k + 1);
    if ((f(a) < 0) != (f(b) < 0)) break;
    a = b;
  }
  for (int k = 0; k < 100; ++k) {
    const double c = 0.5 * (a + b);
    ((f(c) < 0) == (f(a) < 0) ? a : b) = c;
  }
  const double haus = hausdorff_distance(s.K, P.scaled(0.5 * (a + b)));
  r.pass = s.status == SolveStatus::CONVERGED && s.residual_sup <= 1e-6 && haus <= 1e-4;
  r.detail = std::string(status_name(s.status)) + ", r_KKT " + sci(s.residual_sup) + ", Hausdorff to oracle " + sci(haus);
  return r;
}

// 7: recover K₀ from its own measure
CriterionResult inverse(Tier) {
  CriterionResult r{7, "solver, inverse recovery", true, 0, 120, ""};
  const auto lam = SphericalMeasure::uniform(2);
  const Triple th(builtin::reciprocal(), builtin::power(2), lam);
  std::string d;
  for (const auto& [name, K0] : {std::pair{"square", body::square()}, std::pair{"hexagon", hexagon()}}) {
    const auto mu = normalized_atoms(mo_measure(th, K0), K0);
    const auto s = solve(ProblemSpec(th, mu, SolveMode::GAUSS_IMAGE));
    const double res = residual(th, mu, s.K, ResidualKind::Tilde).sup;
    const double ratio = ratio_error(mu, mo_measure(th, s.K));
    r.pass = r.pass && s.status == SolveStatus::CONVERGED && res <= 1e-5 && ratio <= 1e-5;
    d += std::string(d.empty() ? "" : "; ") + name + " " + status_name(s.status) + " residual " + sci(res) + " ratio " +
         sci(ratio);
  }
  r.detail = d;
  return r;
}

// 8: even modes
CriterionResult even(Tier) {
  CriterionResult r{8, "even-mode solver", true, 0, 120, ""};
  const auto lam = SphericalMeasure::uniform(2);
  std::vector<Atom> atoms;
  const auto dirs = circle_directions(16, 0.1);
  for (int k = 0; k < 8; ++k) {
    const double w = 1.0 + 0.5 * std::sin(3.0 * k);
    atoms.push_back({dirs[k], w});
    atoms.push_back({-dirs[k], w});
  }
  const auto mu = SphericalMeasure::atomic(2, atoms);
  SolverOptions o;
  o.vanishes_on_great_subspheres = true;
  const std::vector<std::pair<SolveMode, Triple>> runs = {
      {SolveMode::EVEN_MIN, Triple(builtin::reciprocal(), builtin::power(2), lam)},
      {SolveMode::EVEN_MAX, Triple(builtin::reciprocal(), builtin::power(2), lam)},
      {SolveMode::ENTROPY_EVEN, Triple(builtin::log(), builtin::power(2), lam)},
  };
  std::string d;
  for (const auto& [mode, th] : runs) {
    const auto s = solve(ProblemSpec(th, mu, mode, o), o);
    double asym = 0.0;
    for (int i = 0; i < s.K.size(); ++i) {
      asym = std::max(asym, std::abs(s.K.support_value(s.K.normal(i)) - s.K.support_value(-s.K.normal(i))));
    }
    bool ok = s.status == SolveStatus::CONVERGED && s.residual_sup <= 1e-6 && asym <= 1e-10;
    d += std::string(d.empty() ? "" : "; ") + mode_name(mode) + " r_KKT " + sci(s.residual_sup) + " asym " + sci(asym);
    if (mode == SolveMode::ENTROPY_EVEN) {
      const double e = entropy(lam, polar(s.K));
      const auto lc = log_cosine_bound(lam);
      ok = ok && std::abs(e) <= 1e-8 && !lc.divergent && std::isfinite(lc.value);
      d += " E(Q) " + sci(e) + " log-cosine bound " + sci(lc.value);
    }
    r.pass = r.pass && ok;
  }
  r.detail = d;
  return r;
}

// 9: hypothesis guards
CriterionResult guards(Tier) {
  CriterionResult r{9, "hypothesis guards", true, 0, 0, ""};
  const auto lam = SphericalMeasure::uniform(2);
  const auto mu = uniform_atoms(8);
  SolverOptions o;
  o.vanishes_on_great_subspheres = true;
  const std::vector<std::tuple<MOFunction, MOFunction, SolveMode>> bad = {
      {builtin::power(2), builtin::power(2), SolveMode::GENERAL_MIN},
      {builtin::reciprocal(), builtin::power(2), SolveMode::GENERAL_MIN},
      {builtin::log(), builtin::reciprocal(), SolveMode::GENERAL_MIN},
      {builtin::power(2), builtin::power(2), SolveMode::GAUSS_IMAGE},
      {builtin::reciprocal(), builtin::reciprocal(), SolveMode::GAUSS_IMAGE},
      {builtin::power(2), builtin::power(2), SolveMode::EVEN_MAX},
  };
  int rejected = 0;
  for (const auto& [G, Psi, mode] : bad) {
    try {
      ProblemSpec(Triple(G, Psi, lam), mu, mode, o);
    } catch (const PreconditionError&) {
      ++rejected;
    }
  }
  const Triple th(builtin::reciprocal(), builtin::power(2), lam);
  const auto half = SphericalMeasure::atomic(2, {{Vec(1, 0, 0), 1.0}, {Vec(0, 1, 0), 1.0}});
  bool hemi = false;
  try {
    ProblemSpec(th, half, SolveMode::GAUSS_IMAGE);
  } catch (const PreconditionError&) {
    hemi = true;
  }
  const auto s = solve(ProblemSpec(th, uniform_atoms(64), SolveMode::GAUSS_IMAGE));
  const double res = residual(th, half, s.K, ResidualKind::Tilde).sup;
  r.pass = rejected == 6 && hemi && res > 0.1;
  r.detail = std::to_string(rejected) + "/6 rejected; hemisphere mu " + (hemi ? "rejected" : "accepted") +
             ", residual vs symmetric solution " + sci(res);
  return r;
}

// 10: Monge-Ampère residual
CriterionResult monge_ampere(Tier) {
  CriterionResult r{10, "Monge-Ampere residual", true, 0, 5, ""};
  const auto th = theta0(SphericalMeasure::uniform(2));
  const int N = 512;
  std::vector<double> one(N, 1.0), bumped(N);
  for (int k = 0; k < N; ++k) bumped[k] = 1.0 + 0.1 * std::cos(2.0 * kTwoPi * k / N);
  auto p = [](const Vec&) { return 1.0; };
  const auto a = monge_ampere_residual_2d(th, one, p, 1.0);
  const auto b = monge_ampere_residual_2d(th, bumped, p, 1.0);
  r.pass = a.max_abs <= 1e-10 && b.max_abs > 1e-3;
  r.detail = "h = 1: " + sci(a.max_abs) + "; h = 1 + 0.1cos2t: " + sci(b.max_abs);
  return r;
}

}  // namespace

CriterionResult run_criterion(int id, Tier tier) {
  static const std::vector<std::function<CriterionResult(Tier)>> all = {
      duality, collapse, sign_relation, lp_surface, variation, symmetric, inverse, even, guards, monge_ampere};
  if (id < 1 || id > static_cast<int>(all.size())) throw std::out_of_range("no criterion " + std::to_string(id));
  const auto t0 = std::chrono::steady_clock::now();
  CriterionResult r;
  try {
    r = all[id - 1](tier);
  } catch (const std::exception& e) {
    r.id = id;
    r.pass = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (tier == Tier::Full && r.budget > 0.0 && r.seconds > r.budget) {
    r.pass = false;
    r.detail += "; over the runtime budget";
  }
  return r;
}

std::vector<CriterionResult> run_all(Tier tier, std::ostream* progress) {
  std::vector<CriterionResult> out;
  for (int id = 1; id <= 10; ++id) {
    out.push_back(run_criterion(id, tier));
    if (progress) *progress << format(out.back()) << std::endl;
  }
  return out;
}

std::string format(const CriterionResult& r) {
  char head[96];
  if (r.budget > 0) {
    std::snprintf(head, sizeof head, "criterion %2d %s %8.2f s / %3.0f s  ", r.id, r.pass ? "PASS" : "FAIL", r.seconds,
                  r.budget);
  } else {
    std::snprintf(head, sizeof head, "criterion %2d %s %8.2f s         ", r.id, r.pass ? "PASS" : "FAIL", r.seconds);
  }
  return std::string(head) + r.title + ": " + r.detail;
}

}  // namespace mogi::acceptance
