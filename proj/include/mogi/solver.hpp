#pragma once

#include "mogi/gauss_image.hpp"

#include <json.hpp>

#include <string>
#include <utility>
#include <vector>

namespace mogi {

/// GENERAL_MIN: minimize ∫Ψ dμ over Q with Ṽ_{G,λ}(Q*) = Ṽ_{G,λ}(Bⁿ); K = Q* matches C_Θ.
/// GAUSS_IMAGE: the same with Ψ replaced by Ψ̃; K matches C̃_Θ.
/// EVEN_MIN / EVEN_MAX: origin-symmetric versions (inf / sup). A Ψ of the opposite class
/// is converted with Ψ̃ and K then matches C̃_Θ.
/// ENTROPY_EVEN: sup with the constraint E_λ(Q) = 0 (G is log t); K matches J_{Ψ,λ}, or
/// J̃_{Ψ,λ} when Ψ is decreasing.
enum class SolveMode { GENERAL_MIN, GAUSS_IMAGE, EVEN_MIN, EVEN_MAX, ENTROPY_EVEN };

const char* mode_name(SolveMode m);
SolveMode parse_mode(const std::string& name);

/// A mode's hypotheses on (G, Ψ, λ, μ) do not hold.
class PreconditionError : public DomainError {
 public:
  using DomainError::DomainError;
};

struct SolverOptions {
  double tol = -1.0;  // r_KKT target; < 0: 1e-6 in 2D, 1e-4 in 3D
  int max_iter = 5000;
  double R_max = 1e3;  // DIVERGED when circumradius > R_max or inradius < 1/R_max
  int lift_every = 50;
  // The atomic stand-in for "μ vanishes on great subspheres"; required by EVEN_MAX and
  // ENTROPY_EVEN since no discrete criterion is derived.
  bool vanishes_on_great_subspheres = false;
  // Run even when the class hypotheses fail; the report records the failure.
  bool override_hypotheses = false;
  unsigned long long seed = 0;  // echoed only; the solver is deterministic
  int quad_level = -1;          // fixed cell rule level; < 0: 2 in 2D, 3 in 3D

  double tolerance(int dim) const { return tol > 0.0 ? tol : (dim == 2 ? 1e-6 : 1e-4); }
  nlohmann::json to_json() const;
};

struct HypothesisReport {
  std::string mode;
  std::vector<std::pair<std::string, bool>> checks;
  bool passed = false;
  bool overridden = false;
  std::string target;     // "C", "C~", "J" or "J~"
  bool uses_tilde = false;  // Ψ replaced by Ψ̃ internally

  nlohmann::json to_json() const;
};

/// Evaluates every precondition of the mode. Never throws on a failed hypothesis; the
/// failure is recorded. Throws MeasureFormError for a non-atomic μ or atomic λ.
HypothesisReport check_hypotheses(const Triple& theta, const SphericalMeasure& mu, SolveMode mode,
                                  const SolverOptions& opts = {});

struct ProblemSpec {
  Triple theta;
  SphericalMeasure mu;
  SolveMode mode;
  HypothesisReport hypothesis_report;

  /// Runs check_hypotheses; throws PreconditionError on failure unless overridden.
  ProblemSpec(Triple theta, SphericalMeasure mu, SolveMode mode, const SolverOptions& opts = {});
};

enum class SolveStatus { CONVERGED, NON_CONVERGED, DIVERGED };
const char* status_name(SolveStatus s);

struct Solution {
  Polytope K;
  double multiplier = 0.0;    // |μ| / T(K, S^{n-1}) for the target measure T
  double residual_sup = 0.0;  // r_KKT
  std::vector<double> objective_trace{};
  std::vector<double> constraint_trace{};  // relative constraint violation per accepted iterate
  std::vector<double> residual_trace{};
  SolveStatus status = SolveStatus::NON_CONVERGED;
  int iterations = 0;
  std::string target{};
  std::vector<double> radii{};  // r_i of Q = ⟨r⟩ at μ's atoms
  HypothesisReport hypotheses{};
  nlohmann::json meta = nlohmann::json::object();
  std::string message{};
};

/// Scale c₀ with Ṽ_{G,λ}(c₀P*) = Ṽ_{G,λ}(Bⁿ) to 1e-12 relative, and c₀P*. Safeguarded
/// Newton in log c on the bracket [1/max ρ_{P*}, 1/min ρ_{P*}].
std::pair<double, Polytope> normalize_to_constraint(const MOFunction& G, const SphericalMeasure& lambda,
                                                    const Polytope& P, const CellQuadrature& q = {});

Solution solve(const ProblemSpec& spec, const SolverOptions& opts = {});

enum class ResidualKind { Tilde, Polar };

struct ResidualResult {
  double sup = 0.0;
  double multiplier = 0.0;
  std::vector<double> per_atom;  // μ_i/|μ| - w_i/W
  int unmatched = 0;             // atoms with no facet normal within 1e-10
};

/// sup over μ's atoms of |μ_i/|μ| - w_i/W| with w = C̃_Θ(K, ·) or C_Θ(K, ·) and W its
/// total. Throws GeometryError when W = 0.
ResidualResult residual(const Triple& theta, const SphericalMeasure& mu, const Polytope& K, ResidualKind which);

/// μ/|μ| = J̃_{Ψ,λ}(K,·)/J̃_{Ψ,λ}(K,S^{n-1}) via G = -log t (GAUSS_IMAGE, or EVEN_MIN for
/// increasing Ψ), or ENTROPY_EVEN for decreasing Ψ when even.
Solution solve_j_problem(const MOFunction& Psi, const SphericalMeasure& lambda, const SphericalMeasure& mu,
                         bool even, const SolverOptions& opts = {});

}  // namespace mogi
