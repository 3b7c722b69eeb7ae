#pragma once

#include "mogi/gauss_image.hpp"

#include <json.hpp>

#include <stdexcept>
#include <string>
#include <vector>

namespace mogi {

/// Raised when |ε| exceeds a family's admissible half-width.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Data of f_ε(ξ) = ψ_ξ^{-1}(ψ_ξ(f(ξ)) + ε g(ξ)) on a finite direction set Ω.
class PerturbationFamily {
 public:
  /// Ψ must be strictly monotone in t. δ is half the largest |ε| for which every target
  /// stays inside Ψ's range on the validity interval (infinite when g ≡ 0).
  PerturbationFamily(MOFunction psi, int dim, std::vector<Vec> omega, std::vector<double> f,
                     std::vector<double> g);

  const MOFunction& psi() const { return psi_; }
  int dim() const { return dim_; }
  const std::vector<Vec>& omega() const { return omega_; }
  const std::vector<double>& f() const { return f_; }
  const std::vector<double>& g() const { return g_; }
  double delta() const { return delta_; }

 private:
  MOFunction psi_;
  int dim_;
  std::vector<Vec> omega_;
  std::vector<double> f_, g_;
  double delta_;
};

/// ψ_ξ^{-1}(target) by geometric bracket expansion from t0, then Newton safeguarded by
/// bisection, to |Ψ(ξ,t) - target| <= 1e-13 max(1, |target|) or a collapsed bracket.
double invert_psi(const MOFunction& psi, const Vec& xi, double target, double t0);

/// f_ε on Ω. ε = 0 returns f bit for bit. Throws RangeError for |ε| > δ.
std::vector<double> mo_add(const PerturbationFamily& fam, double eps);

/// max_i |(f_ε - f)/ε - g/Ψ_t(·, f)| / max(|g/Ψ_t|, 1e-300) over atoms with g != 0.
double chain_rule_error(const PerturbationFamily& fam, double eps);

struct VariationRow {
  double eps;
  double D;
  double error;
  double floor;  // quadrature noise allowance at this ε
};

struct VariationReport {
  std::string description;
  std::string kind;  // "wulff", "hull" or "entropy"
  int dim = 2;
  double A = 0.0;
  double static_floor = 0.0;
  double lipschitz = 0.0;  // max |f_ε - f|/|ε| over the ε list
  double tolerance = 0.0;  // max(1e-6, 1e-3 |A|)
  std::vector<VariationRow> rows;
  bool decreasing = false;
  bool pass = false;
  nlohmann::json quadrature;

  nlohmann::json to_json() const;
};

std::vector<double> default_eps_list();

/// Central differences of Ṽ_{G,λ}([f_ε]) against A = Σ g(u_i) C̃_Θ([f], {u_i}).
VariationReport verify_wulff_variation(const Triple& theta, const PerturbationFamily& fam,
                                       const std::vector<double>& eps_list = default_eps_list());

/// Central differences of Ṽ_{G,λ}(⟨f_ε⟩*) against -Σ g(u_i) C_Θ(⟨f⟩*, {u_i}). With
/// entropy = true the functional is E_λ(⟨f_ε⟩), the measure J_{Ψ,λ}(⟨f⟩*, ·) and G is
/// ignored.
VariationReport verify_hull_variation(const Triple& theta, const PerturbationFamily& fam,
                                      const std::vector<double>& eps_list = default_eps_list(),
                                      bool entropy = false);

/// Named scenarios shared by the tests, the CLI and the acceptance suite.
struct VariationScenario {
  std::string name;
  std::string kind;  // "wulff", "hull" or "entropy"
  Triple theta;
  PerturbationFamily family;
};

/// Twelve scenarios, six per dimension: Θ₀ (wulff, hull), (tⁿ/n, t²) (wulff, hull),
/// (1/t, t²) wulff and entropy with Ψ = t, all with λ uniform and seeded random data.
/// "default" (not in the list) is Θ₀ on the square with f = g = 1.
std::vector<std::string> variation_scenario_names();
VariationScenario variation_scenario(const std::string& name);
VariationReport run_variation_scenario(const VariationScenario& s,
                                       const std::vector<double>& eps_list = default_eps_list());

}  // namespace mogi
