#include "mogi/variation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace mogi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 3D cell integrals for finite differences use a fixed split so that the discrete
// functional is smooth in ε; adaptive refinement would add O(tol/ε) jitter.
constexpr int kFixedLevel = 3;

CellQuadrature quad_for(int dim) {
  CellQuadrature q;
  if (dim == 3) q.fixed_level = kFixedLevel;
  return q;
}

double dot_g(const std::vector<double>& g, const SignedSphericalMeasure& m) {
  std::vector<double> t(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) t[i] = g[i] * m.weights[i];
  return pairwise_sum(t);
}

std::vector<double> reciprocal(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) r[i] = 1.0 / v[i];
  return r;
}

}  // namespace

PerturbationFamily::PerturbationFamily(MOFunction psi, int dim, std::vector<Vec> omega, std::vector<double> f,
                                       std::vector<double> g)
    : psi_(std::move(psi)), dim_(dim), omega_(std::move(omega)), f_(std::move(f)), g_(std::move(g)) {
  check_dim(dim_);
  if (!psi_.monotone()) throw DomainError("perturbation family: Ψ = " + psi_.name() + " is not C_I or C_d");
  if (omega_.size() != f_.size() || omega_.size() != g_.size() || omega_.empty()) {
    throw DomainError("perturbation family: Ω, f and g must have the same nonzero length");
  }
  double d = kInf;
  for (std::size_t i = 0; i < omega_.size(); ++i) {
    require_unit(omega_[i], "perturbation family direction");
    if (!(f_[i] > 0.0) || !std::isfinite(f_[i])) throw DomainError("perturbation family: f must be positive");
    if (!std::isfinite(g_[i])) throw DomainError("perturbation family: g must be finite");
    if (g_[i] == 0.0) continue;
    const Vec& xi = omega_[i];
    const double s0 = psi_.value(xi, f_[i]);
    const double a = psi_.value(xi, psi_.t_min());
    const double b = psi_.value(xi, psi_.t_max());
    const double gap = std::min(std::abs(s0 - a), std::abs(b - s0));
    d = std::min(d, gap / std::abs(g_[i]));
  }
  delta_ = 0.5 * d;
}

double invert_psi(const MOFunction& psi, const Vec& xi, double target, double t0) {
  const double tol = 1e-13 * std::max(1.0, std::abs(target));
  const double sign = psi.increasing() ? 1.0 : -1.0;
  // phi is increasing in t after the sign flip.
  auto phi = [&](double t) { return sign * (psi.value(xi, t) - target); };
  double p0 = phi(t0);
  if (std::abs(p0) <= tol) return t0;
  double lo = t0, hi = t0, plo = p0, phi_hi = p0;
  if (p0 < 0.0) {
    while (phi_hi < 0.0) {
      if (hi >= psi.t_max()) throw RangeError("Ψ inverse: target above the range on the validity interval");
      lo = hi;
      plo = phi_hi;
      hi = std::min(2.0 * hi, psi.t_max());
      phi_hi = phi(hi);
    }
  } else {
    while (plo > 0.0) {
      if (lo <= psi.t_min()) throw RangeError("Ψ inverse: target below the range on the validity interval");
      hi = lo;
      phi_hi = plo;
      lo = std::max(0.5 * lo, psi.t_min());
      plo = phi(lo);
    }
  }
  if (plo == 0.0) return lo;
  if (phi_hi == 0.0) return hi;
  double t = std::abs(plo) < std::abs(phi_hi) ? lo : hi;
  double pt = t == lo ? plo : phi_hi;
  double width = hi - lo;
  for (int it = 0; it < 200; ++it) {
    const double d = sign * psi.derivative(xi, t);
    double next = (d > 0.0 && std::isfinite(d)) ? t - pt / d : std::numeric_limits<double>::quiet_NaN();
    // fall back to bisection when Newton leaves the bracket or stalls
    if (!(next > lo && next < hi) || hi - lo > 0.5 * width) next = 0.5 * (lo + hi);
    width = hi - lo;
    t = next;
    pt = phi(t);
    if (std::abs(pt) <= tol) {
      // one Newton polish: quadratic convergence takes t to roundoff, which difference
      // quotients of f_ε need
      const double dp = sign * psi.derivative(xi, t);
      const double polished = t - pt / dp;
      if (dp > 0.0 && std::isfinite(polished) && polished >= lo && polished <= hi &&
          std::abs(phi(polished)) <= std::abs(pt)) {
        return polished;
      }
      return t;
    }
    if (pt < 0.0) {
      lo = t;
    } else {
      hi = t;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * t) break;
  }
  return t;
}

std::vector<double> mo_add(const PerturbationFamily& fam, double eps) {
  if (!(std::abs(eps) <= fam.delta())) {
    throw RangeError("mo_add: |ε| = " + std::to_string(std::abs(eps)) + " exceeds δ = " +
                     std::to_string(fam.delta()));
  }
  std::vector<double> out = fam.f();
  if (eps == 0.0) return out;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (fam.g()[i] == 0.0) continue;
    const Vec& xi = fam.omega()[i];
    const double target = fam.psi().value(xi, fam.f()[i]) + eps * fam.g()[i];
    out[i] = invert_psi(fam.psi(), xi, target, fam.f()[i]);
  }
  return out;
}

double chain_rule_error(const PerturbationFamily& fam, double eps) {
  const auto fe = mo_add(fam, eps);
  double worst = 0.0;
  for (std::size_t i = 0; i < fe.size(); ++i) {
    if (fam.g()[i] == 0.0) continue;
    const double exact = fam.g()[i] / fam.psi().derivative(fam.omega()[i], fam.f()[i]);
    const double fd = (fe[i] - fam.f()[i]) / eps;
    worst = std::max(worst, std::abs(fd - exact) / std::max(std::abs(exact), 1e-300));
  }
  return worst;
}

nlohmann::json VariationReport::to_json() const {
  nlohmann::json table = nlohmann::json::array();
  for (const auto& r : rows) {
    table.push_back({{"eps", r.eps}, {"D", r.D}, {"A", A}, {"error", r.error}, {"floor", r.floor}});
  }
  return {{"description", description},
          {"kind", kind},
          {"dim", dim},
          {"A", A},
          {"static_floor", static_floor},
          {"lipschitz", lipschitz},
          {"tolerance", tolerance},
          {"rows", table},
          {"decreasing", decreasing},
          {"pass", pass},
          {"quadrature", quadrature}};
}

std::vector<double> default_eps_list() { return {1e-2, 1e-3, 1e-4, 1e-5}; }

namespace {

struct Functional {
  std::function<double(const std::vector<double>&)> value;  // functional at body data f_ε
  double A;
  double static_floor;
};

VariationReport finite_differences(const PerturbationFamily& fam, const Functional& F,
                                   const std::vector<double>& eps_list, const std::string& kind) {
  if (eps_list.empty()) throw DomainError("variation: empty ε list");
  for (std::size_t k = 0; k < eps_list.size(); ++k) {
    if (!(eps_list[k] > 0.0) || (k > 0 && !(eps_list[k] < eps_list[k - 1]))) {
      throw DomainError("variation: ε list must be positive and strictly decreasing");
    }
  }
  VariationReport rep;
  rep.kind = kind;
  rep.dim = fam.dim();
  rep.A = F.A;
  rep.static_floor = F.static_floor;
  rep.tolerance = std::max(1e-6, 1e-3 * std::abs(F.A));
  const double base = F.value(fam.f());
  // 2D cells are adaptive at relative 1e-13; 3D fixed rules carry roundoff from the
  // vertex computation and ~10^5 node sums, of the same order.
  const double noise = 1e-13 * std::max(1.0, std::abs(base));
  rep.quadrature = fam.dim() == 2 ? nlohmann::json{{"rule", "adaptive Gauss-Kronrod"}, {"rel_tol", 1e-13}}
                                  : nlohmann::json{{"rule", "fixed collapsed Gauss"}, {"level", kFixedLevel}};
  for (double eps : eps_list) {
    const auto fp = mo_add(fam, eps);
    const auto fm = mo_add(fam, -eps);
    for (std::size_t i = 0; i < fp.size(); ++i) {
      rep.lipschitz = std::max(rep.lipschitz, std::max(std::abs(fp[i] - fam.f()[i]), std::abs(fm[i] - fam.f()[i])) / eps);
    }
    VariationRow row;
    row.eps = eps;
    row.D = (F.value(fp) - F.value(fm)) / (2.0 * eps);
    row.error = std::abs(row.D - F.A);
    row.floor = F.static_floor + noise / eps;
    rep.rows.push_back(row);
  }
  rep.decreasing = true;
  for (std::size_t k = 1; k < rep.rows.size(); ++k) {
    if (rep.rows[k].error > rep.rows[k - 1].error + rep.rows[k].floor) rep.decreasing = false;
  }
  rep.pass = rep.decreasing && rep.rows.back().error <= rep.tolerance;
  return rep;
}

// Discretization allowance: in 2D the stated cell floor, in 3D the change of A under one
// more subdivision level.
template <class MeasureFn>
double static_floor(int dim, double A, MeasureFn&& measure_at_level) {
  if (dim == 2) return 1e-10 * std::max(1.0, std::abs(A));
  CellQuadrature finer;
  finer.fixed_level = kFixedLevel + 1;
  return std::abs(measure_at_level(finer) - A);
}

void require_spanning(const PerturbationFamily& fam) {
  if (!directions_span_sphere(fam.dim(), fam.omega())) {
    throw GeometryError("variation: Ω lies in a closed hemisphere");
  }
}

void require_same_psi(const Triple& theta, const PerturbationFamily& fam) {
  if (theta.Psi.name() != fam.psi().name() || theta.dim() != fam.dim()) {
    throw DomainError("variation: the family's Ψ (" + fam.psi().name() + ") must be Θ's Ψ (" + theta.Psi.name() +
                      ") in the same dimension");
  }
}

}  // namespace

VariationReport verify_wulff_variation(const Triple& theta, const PerturbationFamily& fam,
                                       const std::vector<double>& eps_list) {
  require_same_psi(theta, fam);
  require_spanning(fam);
  const int n = fam.dim();
  const auto q = quad_for(n);
  const Polytope P = wulff_shape(n, fam.omega(), fam.f());
  auto A_at = [&](const CellQuadrature& qq) { return dot_g(fam.g(), mo_measure(theta, P, qq)); };
  Functional F;
  F.A = A_at(q);
  F.static_floor = static_floor(n, F.A, A_at);
  F.value = [&](const std::vector<double>& fe) {
    return dual_volume(theta.G, theta.lambda, wulff_shape(n, fam.omega(), fe), q);
  };
  auto rep = finite_differences(fam, F, eps_list, "wulff");
  rep.description = "d/dε Ṽ_{" + theta.G.name() + ",λ}([f_ε]) vs ∫ g dC̃_Θ([f],·), Ψ = " + theta.Psi.name();
  return rep;
}

VariationReport verify_hull_variation(const Triple& theta, const PerturbationFamily& fam,
                                      const std::vector<double>& eps_list, bool entropy_mode) {
  require_same_psi(theta, fam);
  require_spanning(fam);
  const int n = fam.dim();
  const auto q = quad_for(n);
  // ⟨f⟩* = [1/f] with the normals of Ω in order; the functional itself goes through the
  // hull and its polar.
  const Polytope K = wulff_shape(n, fam.omega(), reciprocal(fam.f()));
  auto A_at = [&](const CellQuadrature& qq) {
    const auto m = entropy_mode ? j_measure(theta.Psi, theta.lambda, K, true, qq) : polar_mo_measure(theta, K, qq);
    return -dot_g(fam.g(), m);
  };
  Functional F;
  F.A = A_at(q);
  F.static_floor = static_floor(n, F.A, A_at);
  if (entropy_mode) {
    F.value = [&](const std::vector<double>& fe) {
      return entropy(theta.lambda, convex_hull_body(n, fam.omega(), fe), q);
    };
  } else {
    F.value = [&](const std::vector<double>& fe) {
      return dual_volume(theta.G, theta.lambda, polar(convex_hull_body(n, fam.omega(), fe)), q);
    };
  }
  auto rep = finite_differences(fam, F, eps_list, entropy_mode ? "entropy" : "hull");
  rep.description = entropy_mode
                        ? "d/dε E_λ(⟨f_ε⟩) vs -∫ g dJ_{Ψ,λ}(⟨f⟩*,·), Ψ = " + theta.Psi.name()
                        : "d/dε Ṽ_{" + theta.G.name() + ",λ}(⟨f_ε⟩*) vs -∫ g dC_Θ(⟨f⟩*,·), Ψ = " + theta.Psi.name();
  return rep;
}

namespace {

struct Data {
  std::vector<Vec> omega;
  std::vector<double> f, g;
};

Data scenario_data(int dim, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Data d;
  if (dim == 2) {
    d.omega = circle_directions(12, 0.1);
    for (auto& u : d.omega) u = unit2(angle2(u) + 0.15 * U(rng));
  } else {
    d.omega = fibonacci_directions(20);
    for (auto& u : d.omega) u = (u + 0.1 * Vec(U(rng), U(rng), U(rng))).normalized();
  }
  for (std::size_t i = 0; i < d.omega.size(); ++i) {
    d.f.push_back(1.0 + 0.25 * U(rng));
    d.g.push_back(U(rng));
  }
  return d;
}

const std::vector<std::string> kBases = {"theta0-wulff", "theta0-hull",      "volume-wulff",
                                         "volume-hull",  "reciprocal-wulff", "entropy"};

}  // namespace

std::vector<std::string> variation_scenario_names() {
  std::vector<std::string> out;
  for (const char* d : {"2d", "3d"}) {
    for (const auto& s : kBases) out.push_back(s + "-" + d);
  }
  return out;
}

VariationScenario variation_scenario(const std::string& name) {
  if (name == "default") {
    const auto lam = SphericalMeasure::uniform(2);
    std::vector<Vec> sq = {Vec(1, 0, 0), Vec(0, 1, 0), Vec(-1, 0, 0), Vec(0, -1, 0)};
    return {name, "wulff", theta0(lam), PerturbationFamily(builtin::log(), 2, sq, {1, 1, 1, 1}, {1, 1, 1, 1})};
  }
  const auto dash = name.rfind('-');
  if (dash == std::string::npos) throw DomainError("unknown variation scenario '" + name + "'");
  const std::string base = name.substr(0, dash), dstr = name.substr(dash + 1);
  if (dstr != "2d" && dstr != "3d") throw DomainError("unknown variation scenario '" + name + "'");
  const int dim = dstr == "2d" ? 2 : 3;
  const auto lam = SphericalMeasure::uniform(dim);
  const auto it = std::find(kBases.begin(), kBases.end(), base);
  if (it == kBases.end()) throw DomainError("unknown variation scenario '" + name + "'");
  const unsigned seed = static_cast<unsigned>(it - kBases.begin()) + 100u * dim;
  const Data d = scenario_data(dim, seed);
  auto make = [&](const std::string& kind, Triple th) {
    return VariationScenario{name, kind, th, PerturbationFamily(th.Psi, dim, d.omega, d.f, d.g)};
  };
  if (base == "theta0-wulff") return make("wulff", theta0(lam));
  if (base == "theta0-hull") return make("hull", theta0(lam));
  if (base == "volume-wulff") return make("wulff", Triple(builtin::volume(dim), builtin::power(2), lam));
  if (base == "volume-hull") return make("hull", Triple(builtin::volume(dim), builtin::power(2), lam));
  if (base == "reciprocal-wulff") return make("wulff", Triple(builtin::reciprocal(), builtin::power(2), lam));
  if (base == "entropy") return make("entropy", Triple(builtin::log(), builtin::power(1), lam));
  throw DomainError("unknown variation scenario '" + name + "'");
}

VariationReport run_variation_scenario(const VariationScenario& s, const std::vector<double>& eps_list) {
  VariationReport rep = s.kind == "wulff" ? verify_wulff_variation(s.theta, s.family, eps_list)
                                          : verify_hull_variation(s.theta, s.family, eps_list, s.kind == "entropy");
  rep.description = s.name + ": " + rep.description;
  return rep;
}

}  // namespace mogi
