#pragma once

#include "mogi/quadrature.hpp"

#include <json.hpp>

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace mogi {

struct Atom {
  Vec u;
  double mass;
};

/// Finite Borel measure on S^{n-1}: finitely many atoms, or a density with respect to
/// spherical Lebesgue measure.
class SphericalMeasure {
 public:
  enum class Form { Atomic, Density };
  using Density = std::function<double(const Vec&)>;

  /// Atoms are normalized to unit length (after checking |u| = 1 to 1e-12); atoms
  /// within 1e-10 angular distance are merged.
  static SphericalMeasure atomic(int dim, const std::vector<Atom>& atoms);
  static SphericalMeasure density(int dim, Density p, std::string name, nlohmann::json spec = nullptr,
                                  std::optional<QuadratureRule> rule = std::nullopt);

  /// Builtin densities: "uniform"; "cosine2" {axis, a, b}: a + b (axis·ξ)^2;
  /// "vonmises" {axis, kappa}: exp(kappa axis·ξ).
  static SphericalMeasure builtin_density(int dim, const std::string& name,
                                          const nlohmann::json& params = nlohmann::json::object());
  static SphericalMeasure uniform(int dim) { return builtin_density(dim, "uniform"); }

  Form form() const { return form_; }
  bool is_atomic() const { return form_ == Form::Atomic; }
  int dim() const { return dim_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  double density_at(const Vec& xi) const { return (*p_)(xi); }
  const Density& density_fn() const { return *p_; }
  bool uniform_density() const { return uniform_; }
  const QuadratureRule& rule() const { return rule_; }
  double total_mass() const { return total_; }
  const std::string& name() const { return name_; }
  const nlohmann::json& spec() const { return spec_; }

  /// ∫ f dm. Atomic: Σ m_i f(u_i) (pairwise). Density: adaptive quadrature to a
  /// tolerance relative to the total mass. Throws if f is not finite at a node.
  double integrate(const PointFn& f) const;
  /// Same with the stored fixed rule (density form); atomic forms ignore the rule.
  double integrate_rule(const PointFn& f) const;

  /// Image under the rotation R (u -> R u).
  SphericalMeasure rotated(const Eigen::Matrix3d& R) const;

 private:
  Form form_ = Form::Atomic;
  int dim_ = 2;
  std::vector<Atom> atoms_;
  std::shared_ptr<const Density> p_;
  bool uniform_ = false;
  QuadratureRule rule_;
  double total_ = 0.0;
  std::string name_;
  nlohmann::json spec_;
};

struct MarginResult {
  double value;
  Vec direction;
};

/// min over u of ∫ (u·ξ)_+ dm(ξ) and a minimizing u.
MarginResult hemisphere_margin(const SphericalMeasure& m);
/// min over v of ∫ |v·ξ| dm(ξ); requires an even measure.
MarginResult subsphere_margin_even(const SphericalMeasure& m);

bool is_even(const SphericalMeasure& m, double tol);

struct LogCosineBound {
  double value;      // -inf when divergent
  bool divergent;
  Vec direction;     // minimizing v
};

/// inf over v of ∫ log|v·ξ| dλ(ξ) for a density measure.
LogCosineBound log_cosine_bound(const SphericalMeasure& lambda);
/// The integral for a single v (improper near v·ξ = 0).
double log_cosine_integral(const SphericalMeasure& lambda, const Vec& v, bool* divergent = nullptr);

/// Typed error for operations that need an absolutely continuous measure.
class MeasureFormError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace mogi
