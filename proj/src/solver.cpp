#include "mogi/solver.hpp"

#include "mogi/variation.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

namespace mogi {

const char* mode_name(SolveMode m) {
  switch (m) {
    case SolveMode::GENERAL_MIN: return "GENERAL_MIN";
    case SolveMode::GAUSS_IMAGE: return "GAUSS_IMAGE";
    case SolveMode::EVEN_MIN: return "EVEN_MIN";
    case SolveMode::EVEN_MAX: return "EVEN_MAX";
    case SolveMode::ENTROPY_EVEN: return "ENTROPY_EVEN";
  }
  return "?";
}

SolveMode parse_mode(const std::string& name) {
  std::string s;
  for (char c : name) s.push_back(c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  for (auto m : {SolveMode::GENERAL_MIN, SolveMode::GAUSS_IMAGE, SolveMode::EVEN_MIN, SolveMode::EVEN_MAX,
                 SolveMode::ENTROPY_EVEN}) {
    if (s == mode_name(m)) return m;
  }
  throw DomainError("unknown solver mode '" + name + "'");
}

const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::CONVERGED: return "CONVERGED";
    case SolveStatus::NON_CONVERGED: return "NON_CONVERGED";
    case SolveStatus::DIVERGED: return "DIVERGED";
  }
  return "?";
}

nlohmann::json SolverOptions::to_json() const {
  return {{"tol", tol},
          {"max_iter", max_iter},
          {"R_max", R_max},
          {"lift_every", lift_every},
          {"vanishes_on_great_subspheres", vanishes_on_great_subspheres},
          {"override_hypotheses", override_hypotheses},
          {"seed", seed},
          {"quad_level", quad_level}};
}

nlohmann::json HypothesisReport::to_json() const {
  nlohmann::json c = nlohmann::json::array();
  for (const auto& [what, ok] : checks) c.push_back({{"check", what}, {"passed", ok}});
  return {{"mode", mode},     {"checks", c},         {"passed", passed},
          {"overridden", overridden}, {"target", target}, {"uses_tilde", uses_tilde}};
}

namespace {

bool to_inf_at_zero(const MOFunction& f) { return f.limits().at_zero == Limit::PosInf; }
bool to_inf_at_inf(const MOFunction& f) { return f.limits().at_infinity == Limit::PosInf; }

const char* kMinDecreasing =
    "(Ψ ∈ C_d, Ψ → +∞ as t → 0+, G ∈ G_d) or (G ∈ C_d, G → +∞ as t → 0+, Ψ ∈ G_d)";
const char* kMinIncreasing =
    "(Ψ ∈ C_I, Ψ → +∞ as t → ∞, G ∈ G_d) or (G ∈ C_d, G → +∞ as t → 0+, Ψ ∈ G_I)";

bool min_decreasing_ok(const MOFunction& G, const MOFunction& Psi) {
  return (Psi.has(ClassTag::Cd) && to_inf_at_zero(Psi) && G.has(ClassTag::Gd)) ||
         (G.has(ClassTag::Cd) && to_inf_at_zero(G) && Psi.has(ClassTag::Gd));
}

bool min_increasing_ok(const MOFunction& G, const MOFunction& Psi) {
  return (Psi.has(ClassTag::CI) && to_inf_at_inf(Psi) && G.has(ClassTag::Gd)) ||
         (G.has(ClassTag::Cd) && to_inf_at_zero(G) && Psi.has(ClassTag::GI));
}

}  // namespace

HypothesisReport check_hypotheses(const Triple& theta, const SphericalMeasure& mu, SolveMode mode,
                                  const SolverOptions& opts) {
  if (!mu.is_atomic()) throw MeasureFormError("solver: μ must be atomic (its atoms are the target normals)");
  if (theta.lambda.is_atomic()) throw MeasureFormError("solver: λ must be a density measure");
  if (mu.dim() != theta.dim()) throw DomainError("solver: μ and λ live on spheres of different dimension");

  HypothesisReport r;
  r.mode = mode_name(mode);
  auto add = [&](std::string what, bool ok) { r.checks.emplace_back(std::move(what), ok); };
  const auto& G = theta.G;
  const auto& Psi = theta.Psi;

  switch (mode) {
    case SolveMode::GENERAL_MIN:
      add(kMinDecreasing, min_decreasing_ok(G, Psi));
      r.target = "C";
      break;
    case SolveMode::GAUSS_IMAGE:
      add(kMinIncreasing, min_increasing_ok(G, Psi));
      r.target = "C~";
      r.uses_tilde = true;
      break;
    case SolveMode::EVEN_MIN:
      if (Psi.increasing()) {
        add(kMinIncreasing, min_increasing_ok(G, Psi));
        r.target = "C~";
        r.uses_tilde = true;
      } else {
        add(kMinDecreasing, min_decreasing_ok(G, Psi));
        r.target = "C";
      }
      break;
    case SolveMode::EVEN_MAX:
      add("G ∈ G_d", G.has(ClassTag::Gd));
      r.target = Psi.increasing() ? "C" : "C~";
      r.uses_tilde = !Psi.increasing();
      add("μ vanishes on great subspheres (declared)", opts.vanishes_on_great_subspheres);
      break;
    case SolveMode::ENTROPY_EVEN: {
      r.target = Psi.increasing() ? "J" : "J~";
      r.uses_tilde = !Psi.increasing();
      add("μ vanishes on great subspheres (declared)", opts.vanishes_on_great_subspheres);
      const auto lc = log_cosine_bound(theta.lambda);
      add("inf_v ∫ log|v·ξ| dλ(ξ) is finite", !lc.divergent && std::isfinite(lc.value));
      break;
    }
  }

  const double tol = 1e-12 * mu.total_mass();
  if (mode == SolveMode::GENERAL_MIN || mode == SolveMode::GAUSS_IMAGE) {
    add("μ is not concentrated on a closed hemisphere", hemisphere_margin(mu).value > tol);
    add("λ is not concentrated on a closed hemisphere",
        theta.lambda.uniform_density() || hemisphere_margin(theta.lambda).value > 1e-12 * theta.lambda.total_mass());
  } else {
    const bool even_mu = is_even(mu, tol);
    add("μ is even", even_mu);
    add("λ is even", is_even(theta.lambda, 1e-12 * theta.lambda.total_mass()));
    add("Ψ is even in ξ", Psi.even_in_direction());
    if (mode != SolveMode::ENTROPY_EVEN) add("G is even in ξ", G.even_in_direction());
    add("μ is not concentrated on a great subsphere", even_mu && subsphere_margin_even(mu).value > tol);
  }
  r.passed = std::all_of(r.checks.begin(), r.checks.end(), [](const auto& c) { return c.second; });
  r.overridden = !r.passed && opts.override_hypotheses;
  return r;
}

ProblemSpec::ProblemSpec(Triple th, SphericalMeasure m, SolveMode md, const SolverOptions& opts)
    : theta(std::move(th)), mu(std::move(m)), mode(md), hypothesis_report(check_hypotheses(theta, mu, md, opts)) {
  if (!hypothesis_report.passed && !opts.override_hypotheses) {
    std::string msg = std::string(mode_name(mode)) + ": hypotheses not satisfied:";
    for (const auto& [what, ok] : hypothesis_report.checks) {
      if (!ok) msg += " [" + what + "]";
    }
    throw PreconditionError(msg);
  }
}

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct ScaleRoot {
  double c;
  double value;  // Ṽ_{G,λ}(cK)
};

// Ṽ_{G,λ}(cK) and its derivative in log c.
std::pair<double, double> scaled_value(const MOFunction& G, const SphericalMeasure& lam, const Polytope& K, double c,
                                       const CellQuadrature& q) {
  std::vector<double> v(K.size(), 0.0), d(K.size(), 0.0);
  for (int i = 0; i < K.size(); ++i) {
    if (!K.active(i)) continue;
    v[i] = cell_integral(K, i, lam, [&](const Vec& xi, double rho) { return G.value(xi, c * rho); }, q);
    d[i] = cell_integral(
        K, i, lam, [&](const Vec& xi, double rho) { return c * rho * G.derivative(xi, c * rho); }, q);
  }
  return {pairwise_sum(v), pairwise_sum(d)};
}

ScaleRoot find_scale(const MOFunction& G, const SphericalMeasure& lam, const Polytope& K, double target,
                     double scale, const CellQuadrature& q) {
  if (!G.monotone()) throw DomainError("normalize_to_constraint: G = " + G.name() + " is not strictly monotone");
  // e^τ K ⊆ Bⁿ at τ = a and ⊇ Bⁿ at τ = b
  double a = -std::log(K.circumradius());
  double b = -std::log(K.inradius());
  const bool inc = G.increasing();
  double tau = std::clamp(0.0, a, b);
  double val = 0.0;
  for (int it = 0; it < 100; ++it) {
    const auto [v, dv] = scaled_value(G, lam, K, std::exp(tau), q);
    val = v;
    const double f = v - target;
    if (std::abs(f) <= 1e-14 * scale) break;
    // f is increasing in τ when G is
    if ((f < 0.0) == inc) {
      a = tau;
    } else {
      b = tau;
    }
    double next = tau - f / dv;
    if (!(next > a && next < b) || !std::isfinite(next)) next = 0.5 * (a + b);
    if (std::abs(next - tau) <= 4.0 * kEps * std::max(1.0, std::abs(tau))) {
      tau = next;
      val = scaled_value(G, lam, K, std::exp(tau), q).first;
      break;
    }
    tau = next;
  }
  return {std::exp(tau), val};
}

double ball_value(const MOFunction& G, const SphericalMeasure& lam) {
  return dual_volume(G, lam, [](const Vec&) { return 1.0; });
}

CellQuadrature solver_quadrature(int dim, const SolverOptions& opts) {
  CellQuadrature q;
  q.fixed_level = opts.quad_level >= 0 ? opts.quad_level : (dim == 2 ? 2 : 3);
  return q;
}

}  // namespace

std::pair<double, Polytope> normalize_to_constraint(const MOFunction& G, const SphericalMeasure& lambda,
                                                    const Polytope& P, const CellQuadrature& q) {
  const Polytope K = polar(P);
  const double target = ball_value(G, lambda);
  const double scale = std::max(std::abs(target), lambda.total_mass());
  const auto root = find_scale(G, lambda, K, target, scale, q);
  return {root.c, K.scaled(root.c)};
}

namespace {

struct Internal {
  explicit Internal(Triple t) : th(std::move(t)) {}
  Triple th;  // internal (G, Ψ, λ): Ψ possibly Ψ̃, G = log t in entropy mode
  int dim = 2;
  std::vector<Vec> u;
  std::vector<double> mu;
  double mu_total = 0.0;
  std::vector<int> group;  // atom -> group
  std::vector<int> rep;    // group -> representative atom
  bool maximize = false;
  double target = 0.0;  // Ṽ_{G,λ}(Bⁿ)
  double scale = 1.0;   // for relative constraint errors
  CellQuadrature q;
};

struct State {
  std::vector<double> r;  // per atom, feasible
  Polytope K;
  std::vector<double> w;  // C_{Θint}(K, {u_i})
  Eigen::VectorXd z, grad, D;
  double phi = 0.0;  // Σ μ_i Ψ(u_i, r_i)
  double W = 0.0;
  double rkkt = 0.0;
  double constraint = 0.0;  // relative violation
};

State make_state(const Internal& P, std::vector<double> r) {
  const int m = static_cast<int>(r.size());
  std::vector<double> inv(m);
  for (int i = 0; i < m; ++i) inv[i] = 1.0 / r[i];
  const Polytope K0 = wulff_shape(P.dim, P.u, inv);
  const auto root = find_scale(P.th.G, P.th.lambda, K0, P.target, P.scale, P.q);
  State S{std::vector<double>(m), K0.scaled(root.c), {}, {}, {}, {}};
  for (int i = 0; i < m; ++i) S.r[i] = r[i] / root.c;
  S.constraint = std::abs(root.value - P.target) / P.scale;
  S.w = polar_mo_measure(P.th, S.K, P.q).weights;
  S.W = pairwise_sum(S.w);
  std::vector<double> terms(m);
  for (int i = 0; i < m; ++i) {
    terms[i] = P.mu[i] * P.th.Psi.value(P.u[i], S.r[i]);
    S.rkkt = std::max(S.rkkt, std::abs(P.mu[i] / P.mu_total - S.w[i] / S.W));
  }
  S.phi = pairwise_sum(terms);
  const int n = static_cast<int>(P.rep.size());
  Eigen::VectorXd M = Eigen::VectorXd::Zero(n), Wg = Eigen::VectorXd::Zero(n);
  S.z.resize(n);
  S.D.resize(n);
  for (int i = 0; i < m; ++i) {
    M[P.group[i]] += P.mu[i];
    Wg[P.group[i]] += S.w[i];
  }
  for (int g = 0; g < n; ++g) {
    const int i = P.rep[g];
    S.z[g] = P.th.Psi.value(P.u[i], S.r[i]);
    S.D[g] = S.r[i] * P.th.Psi.derivative(P.u[i], S.r[i]);
  }
  // gradient of Σμs along the constraint surface, with the scaling direction removed
  const double kappa = M.dot(S.D) / Wg.dot(S.D);
  S.grad = M - kappa * Wg;
  return S;
}

std::vector<double> radii_from_z(const Internal& P, const State& S, const Eigen::VectorXd& z) {
  std::vector<double> r(P.u.size());
  std::vector<double> rg(P.rep.size());
  for (std::size_t g = 0; g < P.rep.size(); ++g) {
    const int i = P.rep[g];
    rg[g] = invert_psi(P.th.Psi, P.u[i], z[static_cast<Eigen::Index>(g)], S.r[i]);
    if (!(rg[g] > 0.0) || !std::isfinite(rg[g])) throw RangeError("step leaves the range of Ψ");
  }
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = rg[P.group[i]];
  return r;
}

bool diverged(const State& S, double R_max) { return S.K.circumradius() > R_max || S.K.inradius() < 1.0 / R_max; }

}  // namespace

Solution solve(const ProblemSpec& spec, const SolverOptions& opts) {
  const auto& rep = spec.hypothesis_report;
  Internal P(Triple(spec.mode == SolveMode::ENTROPY_EVEN ? builtin::log() : spec.theta.G,
                    rep.uses_tilde ? tilde_transform(spec.theta.Psi) : spec.theta.Psi, spec.theta.lambda));
  P.dim = spec.theta.dim();
  P.maximize = spec.mode == SolveMode::EVEN_MAX || spec.mode == SolveMode::ENTROPY_EVEN;
  if (P.maximize != P.th.Psi.increasing()) {
    throw PreconditionError(std::string(mode_name(spec.mode)) + ": internal Ψ has the wrong monotonicity");
  }
  P.q = solver_quadrature(P.dim, opts);
  P.target = ball_value(P.th.G, P.th.lambda);
  P.scale = std::max(std::abs(P.target), P.th.lambda.total_mass());
  for (const auto& a : spec.mu.atoms()) {
    P.u.push_back(a.u);
    P.mu.push_back(a.mass);
  }
  P.mu_total = pairwise_sum(P.mu);
  const int m = static_cast<int>(P.u.size());
  const bool even = spec.mode != SolveMode::GENERAL_MIN && spec.mode != SolveMode::GAUSS_IMAGE;
  P.group.assign(m, -1);
  for (int i = 0; i < m; ++i) {
    if (P.group[i] >= 0) continue;
    P.group[i] = static_cast<int>(P.rep.size());
    if (even) {
      for (int j = i + 1; j < m; ++j) {
        if (P.group[j] < 0 && angular_distance(P.u[i], -P.u[j]) <= 1e-10) {
          P.group[j] = P.group[i];
          break;
        }
      }
    }
    P.rep.push_back(i);
  }

  const double tol = opts.tolerance(P.dim);
  const double sgn = P.maximize ? -1.0 : 1.0;
  Solution sol{.K = wulff_shape(P.dim, P.u, std::vector<double>(m, 1.0))};
  sol.hypotheses = rep;
  sol.target = rep.target;

  State S = make_state(P, std::vector<double>(m, 1.0));
  auto record = [&](const State& st) {
    sol.objective_trace.push_back(st.phi);
    sol.constraint_trace.push_back(st.constraint);
    sol.residual_trace.push_back(st.rkkt);
  };
  record(S);

  const int n = static_cast<int>(P.rep.size());
  auto initial_H = [&](const State& st) {
    Eigen::VectorXd g = sgn * st.grad;
    double big = 0.0;
    for (int k = 0; k < n; ++k) big = std::max(big, std::abs(st.D[k] * g[k]));
    const double gamma = big > 0.0 ? 0.05 / big : 1.0;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) H(k, k) = gamma * st.D[k] * st.D[k];
    return H;
  };
  Eigen::MatrixXd H = initial_H(S);
  bool fresh = true;
  const double noise_rel = 1e-14;

  sol.status = SolveStatus::NON_CONVERGED;
  int it = 0;
  for (; it < opts.max_iter; ++it) {
    if (S.rkkt <= tol) {
      sol.status = SolveStatus::CONVERGED;
      break;
    }
    if (diverged(S, opts.R_max)) {
      sol.status = SolveStatus::DIVERGED;
      sol.message = "iterate left the radius band [1/R_max, R_max]";
      break;
    }
    const double f = sgn * S.phi;
    const double noise = noise_rel * std::abs(S.phi) + 1e-300;

    if (opts.lift_every > 0 && it > 0 && it % opts.lift_every == 0) {
      std::vector<int> idle;
      for (int g = 0; g < n; ++g) {
        if (!S.K.active(P.rep[g])) idle.push_back(g);
      }
      if (!idle.empty()) {
        for (double factor : {1.01, 1.0}) {
          std::vector<double> r = S.r;
          for (int g : idle) {
            const double lifted = factor / S.K.support_value(P.u[P.rep[g]]);
            for (int i = 0; i < m; ++i) {
              if (P.group[i] == g) r[i] = lifted;
            }
          }
          try {
            State T = make_state(P, r);
            if (sgn * T.phi <= f + noise) {
              S = std::move(T);
              record(S);
              H = initial_H(S);
              fresh = true;
              break;
            }
          } catch (const std::exception&) {
          }
        }
        continue;
      }
    }

    Eigen::VectorXd g = sgn * S.grad;
    Eigen::VectorXd p = -H * g;
    double slope = g.dot(p);
    if (!(slope < 0.0)) {
      H = initial_H(S);
      fresh = true;
      p = -H * g;
      slope = g.dot(p);
    }
    bool accepted = false;
    State T;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      double t = 1.0;
      for (int half = 0; half < 40; ++half, t *= 0.5) {
        try {
          T = make_state(P, radii_from_z(P, S, S.z + t * p));
        } catch (const RangeError&) {
          continue;
        } catch (const GeometryError&) {
          continue;
        }
        const double fT = sgn * T.phi;
        if (fT <= f + 1e-4 * t * slope || (fT <= f + 10.0 * noise && T.rkkt < S.rkkt)) {
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        if (fresh) break;
        H = initial_H(S);
        fresh = true;
        p = -H * g;
        slope = g.dot(p);
      }
    }
    if (!accepted) {
      sol.message = "line search stalled";
      break;
    }
    const Eigen::VectorXd sk = T.z - S.z;
    const Eigen::VectorXd yk = sgn * (T.grad - S.grad);
    const double sy = sk.dot(yk);
    if (sy > 1e-12 * sk.norm() * yk.norm()) {
      if (fresh) H *= sy / yk.dot(H * yk);
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
      H = (I - rho * sk * yk.transpose()) * H * (I - rho * yk * sk.transpose()) + rho * sk * sk.transpose();
      fresh = false;
    }
    S = std::move(T);
    record(S);
  }
  if (sol.status != SolveStatus::CONVERGED && S.rkkt <= tol) sol.status = SolveStatus::CONVERGED;
  if (sol.status == SolveStatus::NON_CONVERGED && sol.message.empty()) sol.message = "iteration cap reached";

  sol.K = S.K;
  sol.radii = S.r;
  sol.iterations = it;
  sol.residual_sup = S.rkkt;
  const double sigma = rep.uses_tilde ? -1.0 : 1.0;
  sol.multiplier = P.mu_total / (sigma * S.W);
  sol.meta = {{"mode", mode_name(spec.mode)},
              {"theta", spec.theta.to_json()},
              {"internal_G", P.th.G.name()},
              {"internal_Psi", P.th.Psi.name()},
              {"options", opts.to_json()},
              {"tolerance", tol},
              {"constraint_error", S.constraint},
              {"quadrature_level", P.q.fixed_level}};
  return sol;
}

ResidualResult residual(const Triple& theta, const SphericalMeasure& mu, const Polytope& K, ResidualKind which) {
  if (!mu.is_atomic()) throw MeasureFormError("residual: μ must be atomic");
  const auto m = which == ResidualKind::Tilde ? mo_measure(theta, K) : polar_mo_measure(theta, K);
  if (m.total == 0.0) throw GeometryError("residual: the measure of K has zero total mass");
  ResidualResult r;
  r.multiplier = mu.total_mass() / m.total;
  for (const auto& a : mu.atoms()) {
    double w = 0.0;
    bool found = false;
    for (int j = 0; j < K.size(); ++j) {
      if (angular_distance(a.u, K.normal(j)) <= 1e-10) {
        w = m.weights[j];
        found = true;
        break;
      }
    }
    if (!found) ++r.unmatched;
    const double d = a.mass / mu.total_mass() - w / m.total;
    r.per_atom.push_back(d);
    r.sup = std::max(r.sup, std::abs(d));
  }
  return r;
}

Solution solve_j_problem(const MOFunction& Psi, const SphericalMeasure& lambda, const SphericalMeasure& mu, bool even,
                         const SolverOptions& opts) {
  // J̃_{Ψ,λ} = -C̃_{(-log t, Ψ, λ)}; for decreasing Ψ in the even case the entropy
  // formulation with Ψ̃ targets J̃ directly.
  SolveMode mode = SolveMode::GAUSS_IMAGE;
  Triple th(builtin::neg_log(), Psi, lambda);
  if (even) {
    if (Psi.increasing()) {
      mode = SolveMode::EVEN_MIN;
    } else {
      mode = SolveMode::ENTROPY_EVEN;
      th = Triple(builtin::log(), Psi, lambda);
    }
  } else if (!Psi.has(ClassTag::GI) && !opts.override_hypotheses) {
    throw PreconditionError("J problem: Ψ = " + Psi.name() + " must be in G_I");
  }
  ProblemSpec spec(th, mu, mode, opts);
  Solution sol = solve(spec, opts);
  sol.target = "J~";
  if (mode != SolveMode::ENTROPY_EVEN) sol.multiplier = -sol.multiplier;
  sol.meta["problem"] = "J";
  return sol;
}

}  // namespace mogi
