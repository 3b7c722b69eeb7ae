#pragma once

#include "mogi/mo_function.hpp"
#include "mogi/polytope.hpp"
#include "mogi/sphere_measure.hpp"

#include <json.hpp>

#include <functional>
#include <string>
#include <vector>

namespace mogi {

/// Raised when Ψ_t at a facet has the wrong sign for Ψ's declared class or (nearly)
/// vanishes. The message names the facet.
class ClassViolationError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Θ = (G, Ψ, λ). Ψ must be declared C_I or C_d; λ must be a nonzero density.
struct Triple {
  MOFunction G;
  MOFunction Psi;
  SphericalMeasure lambda;

  Triple(MOFunction g, MOFunction psi, SphericalMeasure lam);

  int dim() const { return lambda.dim(); }
  /// Θ̃ = (G, Ψ̃, λ).
  Triple tilde() const;
  nlohmann::json to_json() const;
};

/// Θ₀ = (log t, log t, λ).
Triple theta0(const SphericalMeasure& lambda);

/// Named triples for the CLI and tests: "log-log", "volume-power:<p>" (tⁿ/n, tᵖ/p),
/// "reciprocal-square" (1/t, t²), "log-power:<p>" (log t, tᵖ), "reciprocal-log"
/// (1/t, log t).
Triple builtin_triple(const std::string& name, const SphericalMeasure& lambda);
std::vector<std::string> builtin_triple_names();

/// Finite signed measure with one atom per facet normal (zero weights allowed).
struct SignedSphericalMeasure {
  int dim = 2;
  std::vector<Vec> directions;
  std::vector<double> weights;
  double total = 0.0;
  nlohmann::json meta = nlohmann::json::object();

  SignedSphericalMeasure() = default;
  SignedSphericalMeasure(int d, std::vector<Vec> dirs, std::vector<double> w,
                         nlohmann::json m = nlohmann::json::object());

  std::size_t size() const { return weights.size(); }
  double integrate(const std::function<double(const Vec&)>& g) const;
  /// max_i |w_i|
  double magnitude() const;
  nlohmann::json to_json() const;
};

/// Cell quadrature control. Adaptive by default; a fixed subdivision level makes cell
/// integrals smooth functions of the support numbers, which finite differences and the
/// solver rely on.
struct CellQuadrature {
  double rel_tol = -1.0;  // < 0: 1e-13 in 2D, 1e-9 in 3D
  // >= 0: no adaptivity. 2D: 2^level equal pieces per arc, 20-point Gauss-Legendre each.
  // 3D: uniform 4^level split of each fan triangle, order-6 collapsed Gauss.
  int fixed_level = -1;
};

/// ∫_{Δ_i} F(ξ, ρ_P(ξ)) dλ(ξ) over the radial cell of facet i, with ρ_P = h_i/(ξ·u_i) on
/// the cell. Zero for inactive facets. 2D adaptive Gauss-Kronrod on the arc; 3D adaptive
/// flat-triangle rules on the fan of the facet, pulled back by the radial map.
double cell_integral(const Polytope& P, int i, const SphericalMeasure& lambda,
                     const std::function<double(const Vec&, double)>& F, const CellQuadrature& q = {});

/// Ṽ_{G,λ}(P) = ∫ G(ξ, ρ_P(ξ)) dλ(ξ). Atomic λ is summed directly.
double dual_volume(const MOFunction& G, const SphericalMeasure& lambda, const Polytope& P,
                   const CellQuadrature& q = {});
/// Same functional for a raw positive function f in place of ρ_P.
double dual_volume(const MOFunction& G, const SphericalMeasure& lambda,
                   const std::function<double(const Vec&)>& f);

/// E_λ(P) = -∫ log h_P dλ, evaluated as the log dual volume of the polar body.
double entropy(const SphericalMeasure& lambda, const Polytope& P, const CellQuadrature& q = {});

/// C̃_Θ(P, ·): w_i = [h_i Ψ_t(u_i, h_i)]^{-1} ∫_{Δ_i} ρ G_t(ξ, ρ) dλ.
SignedSphericalMeasure mo_measure(const Triple& theta, const Polytope& P, const CellQuadrature& q = {});
/// C_Θ(P, ·): w_i = [(1/h_i) Ψ_t(u_i, 1/h_i)]^{-1} ∫_{Δ_i} ρ G_t(ξ, ρ) dλ.
SignedSphericalMeasure polar_mo_measure(const Triple& theta, const Polytope& P, const CellQuadrature& q = {});
/// S_Ψ(P, ·): w_i = area(F_i) / Ψ_t(u_i, h_i).
SignedSphericalMeasure mo_surface_area_measure(const MOFunction& Psi, const Polytope& P);
/// J̃_{Ψ,λ} (polar_variant = false) or J_{Ψ,λ} (true): the measures above with G = log t.
SignedSphericalMeasure j_measure(const MOFunction& Psi, const SphericalMeasure& lambda, const Polytope& P,
                                 bool polar_variant, const CellQuadrature& q = {});
/// λ*(P, ·): weight λ(Δ_i) at u_i. Requires a density λ.
SignedSphericalMeasure gauss_image_pullback(const SphericalMeasure& lambda, const Polytope& P,
                                            const CellQuadrature& q = {});

/// Density dC̃_Θ/dS(K, ·) at u for a smooth body given by h(u) and ∇h(u) ∈ R^n.
double smooth_density_wrt_surface(const Triple& theta, double h, const Vec& grad_h, const Vec& u);
/// 2D body given by support samples on a uniform angular grid (trigonometric interpolation).
double smooth_density_wrt_surface(const Triple& theta, const RadialSampleBody& body, const Vec& u);

struct MAResidual {
  std::vector<double> theta;
  std::vector<double> residual;
  double max_abs = 0.0;
  double l2 = 0.0;
};

/// Pointwise residual of p_μ = τ P(∇h) (h'' + h) p_λ(∇h/|∇h|) / Ψ_t(·, h) on the uniform
/// grid of the samples, with P(y) = |y|^{-1} G_t(y/|y|, |y|). Throws GeometryError
/// where h'' + h <= 0.
MAResidual monge_ampere_residual_2d(const Triple& theta, const std::vector<double>& h,
                                    const std::function<double(const Vec&)>& p_mu, double tau);

}  // namespace mogi
