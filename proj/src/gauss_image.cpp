#include "mogi/gauss_image.hpp"

#include "mogi/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <limits>
#include <regex>

namespace mogi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_density(const SphericalMeasure& lam, const char* what) {
  if (lam.is_atomic()) {
    throw MeasureFormError(std::string(what) +
                           ": λ must be absolutely continuous (a density measure), got an atomic measure");
  }
}

std::string facet_tag(const Polytope& P, int i) {
  const Vec& u = P.normal(i);
  return "facet " + std::to_string(i) + " (u = [" + std::to_string(u.x()) + ", " + std::to_string(u.y()) +
         ", " + std::to_string(u.z()) + "])";
}

// Denominators t·Ψ_t(u_i, t) per facet, checked against Ψ's class.
std::vector<double> denominators(const MOFunction& psi, const Polytope& P, bool polar) {
  const int m = P.size();
  std::vector<double> d(m, 0.0);
  double biggest = 0.0;
  for (int i = 0; i < m; ++i) {
    const double t = polar ? 1.0 / P.support(i) : P.support(i);
    const double dt = psi.derivative(P.normal(i), t);
    if (!std::isfinite(dt)) throw ClassViolationError("Ψ_t is not finite at " + facet_tag(P, i));
    if ((psi.increasing() && dt <= 0.0) || (!psi.increasing() && dt >= 0.0)) {
      throw ClassViolationError("Ψ_t has the wrong sign for " + std::string(psi.increasing() ? "C_I" : "C_d") +
                                " at " + facet_tag(P, i));
    }
    biggest = std::max(biggest, std::abs(dt));
    d[i] = t * dt;
  }
  for (int i = 0; i < m; ++i) {
    const double t = polar ? 1.0 / P.support(i) : P.support(i);
    if (std::abs(d[i] / t) < 1e-12 * biggest) {
      throw ClassViolationError("Ψ_t nearly vanishes at " + facet_tag(P, i));
    }
  }
  return d;
}

SignedSphericalMeasure weighted(const Polytope& P, const std::vector<double>& num, const std::vector<double>& den,
                                nlohmann::json meta) {
  std::vector<double> w(P.size(), 0.0);
  for (int i = 0; i < P.size(); ++i) {
    if (P.active(i)) w[i] = num[i] / den[i];
  }
  return SignedSphericalMeasure(P.dim(), P.normals(), std::move(w), std::move(meta));
}

std::vector<double> gt_cell_integrals(const MOFunction& G, const SphericalMeasure& lam, const Polytope& P,
                                      const CellQuadrature& q) {
  std::vector<double> out(P.size(), 0.0);
  for (int i = 0; i < P.size(); ++i) {
    out[i] = cell_integral(P, i, lam, [&](const Vec& xi, double rho) { return rho * G.derivative(xi, rho); }, q);
  }
  return out;
}

nlohmann::json quad_meta(const Polytope& P, const CellQuadrature& q) {
  if (P.dim() == 2) {
    if (q.fixed_level >= 0) return {{"quadrature", "fixed 20-point Gauss-Legendre per arc piece"}, {"level", q.fixed_level}};
    return {{"quadrature", "adaptive Gauss-Kronrod per arc"}, {"rel_tol", q.rel_tol < 0 ? 1e-13 : q.rel_tol}};
  }
  if (q.fixed_level >= 0) return {{"quadrature", "fixed collapsed Gauss per fan triangle"}, {"level", q.fixed_level}};
  return {{"quadrature", "adaptive collapsed Gauss per fan triangle"}, {"rel_tol", q.rel_tol < 0 ? 1e-9 : q.rel_tol}};
}

double fixed_triangle(const PointFn& g, const Vec& a, const Vec& b, const Vec& c, int level, const TriangleRule& rule) {
  if (level == 0) return triangle_rule_sum(g, a, b, c, rule);
  const Vec ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
  return (fixed_triangle(g, a, ab, ca, level - 1, rule) + fixed_triangle(g, ab, b, bc, level - 1, rule)) +
         (fixed_triangle(g, ca, bc, c, level - 1, rule) + fixed_triangle(g, ab, bc, ca, level - 1, rule));
}

}  // namespace

Triple::Triple(MOFunction g, MOFunction psi, SphericalMeasure lam)
    : G(std::move(g)), Psi(std::move(psi)), lambda(std::move(lam)) {
  if (!Psi.monotone()) {
    throw DomainError("triple: Ψ = " + Psi.name() + " must be declared C_I or C_d");
  }
  if (!(lambda.total_mass() > 0.0) || !std::isfinite(lambda.total_mass())) {
    throw DomainError("triple: λ must be a nonzero finite measure");
  }
}

Triple Triple::tilde() const { return Triple(G, tilde_transform(Psi), lambda); }

nlohmann::json Triple::to_json() const {
  return {{"G", G.spec().is_null() ? nlohmann::json(G.name()) : G.spec()},
          {"Psi", Psi.spec().is_null() ? nlohmann::json(Psi.name()) : Psi.spec()},
          {"lambda", lambda.spec().is_null() ? nlohmann::json(lambda.name()) : lambda.spec()}};
}

Triple theta0(const SphericalMeasure& lambda) { return Triple(builtin::log(), builtin::log(), lambda); }

std::vector<std::string> builtin_triple_names() {
  return {"log-log", "volume-power:<p>", "reciprocal-square", "log-power:<p>", "reciprocal-log"};
}

Triple builtin_triple(const std::string& name, const SphericalMeasure& lambda) {
  static const std::regex with_p(R"(([a-z\-]+):([-+0-9.eE]+))");
  std::smatch m;
  std::string base = name;
  double p = 0.0;
  bool has_p = false;
  if (std::regex_match(name, m, with_p)) {
    base = m[1];
    p = std::stod(m[2]);
    has_p = true;
  }
  auto need_p = [&](bool want) {
    if (want != has_p) throw DomainError("builtin triple '" + name + "': parameter mismatch");
  };
  if (base == "log-log") {
    need_p(false);
    return theta0(lambda);
  }
  if (base == "volume-power") {
    need_p(true);
    return Triple(builtin::volume(lambda.dim()), builtin::power_over_p(p), lambda);
  }
  if (base == "reciprocal-square") {
    need_p(false);
    return Triple(builtin::reciprocal(), builtin::power(2), lambda);
  }
  if (base == "log-power") {
    need_p(true);
    return Triple(builtin::log(), builtin::power(p), lambda);
  }
  if (base == "reciprocal-log") {
    need_p(false);
    return Triple(builtin::reciprocal(), builtin::log(), lambda);
  }
  throw DomainError("unknown builtin triple '" + name + "'");
}

SignedSphericalMeasure::SignedSphericalMeasure(int d, std::vector<Vec> dirs, std::vector<double> w,
                                               nlohmann::json m)
    : dim(d), directions(std::move(dirs)), weights(std::move(w)), meta(std::move(m)) {
  if (directions.size() != weights.size()) throw DomainError("signed measure: size mismatch");
  total = pairwise_sum(weights);
}

double SignedSphericalMeasure::integrate(const std::function<double(const Vec&)>& g) const {
  std::vector<double> t(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) t[i] = weights[i] == 0.0 ? 0.0 : weights[i] * g(directions[i]);
  return pairwise_sum(t);
}

double SignedSphericalMeasure::magnitude() const {
  double m = 0.0;
  for (double w : weights) m = std::max(m, std::abs(w));
  return m;
}

nlohmann::json SignedSphericalMeasure::to_json() const {
  nlohmann::json atoms = nlohmann::json::array();
  for (std::size_t i = 0; i < weights.size(); ++i) {
    nlohmann::json u = nlohmann::json::array();
    for (int k = 0; k < dim; ++k) u.push_back(directions[i][k]);
    atoms.push_back({{"u", u}, {"w", weights[i]}});
  }
  return {{"dim", dim}, {"atoms", atoms}, {"total", total}, {"meta", meta}};
}

double cell_integral(const Polytope& P, int i, const SphericalMeasure& lambda,
                     const std::function<double(const Vec&, double)>& F, const CellQuadrature& q) {
  double rel_tol = q.rel_tol;
  if (!P.active(i)) return 0.0;
  require_density(lambda, "cell_integral");
  const Vec& u = P.normal(i);
  const double h = P.support(i);
  const auto& p = lambda.density_fn();
  const bool flat = lambda.uniform_density();
  const double c0 = flat ? p(u) : 0.0;
  auto integrand = [&](const Vec& xi) {
    const double w = flat ? c0 : p(xi);
    return w == 0.0 ? 0.0 : F(xi, h / xi.dot(u)) * w;
  };
  if (P.dim() == 2) {
    if (rel_tol < 0) rel_tol = 1e-13;
    const auto& c = P.cells()[i];
    auto g = [&](double th) { return integrand(unit2(th)); };
    if (q.fixed_level >= 0) {
      const int pieces = 1 << q.fixed_level;
      const double w = (c.end - c.begin) / pieces;
      std::vector<double> parts(pieces);
      for (int k = 0; k < pieces; ++k) {
        const double a = c.begin + k * w;
        parts[k] = boost::math::quadrature::gauss<double, 20>::integrate(g, a, k + 1 == pieces ? c.end : a + w);
      }
      return pairwise_sum(parts);
    }
    const double coarse = integrate_interval(g, c.begin, c.end, kInf);
    return integrate_interval(g, c.begin, c.end, std::max(rel_tol * std::abs(coarse), 1e-300));
  }
  if (rel_tol < 0) rel_tol = 1e-9;
  const auto& corners = P.cells()[i].corners;
  Vec cen = Vec::Zero();
  for (const auto& x : P.facet_vertices(i)) cen += x;
  cen.normalize();
  const std::size_t k = corners.size();
  std::vector<double> coarse(k), parts(k);
  const TriangleRule& rule = collapsed_gauss_rule(4);
  for (std::size_t j = 0; j < k; ++j) {
    const Vec& a = corners[j];
    const Vec& b = corners[(j + 1) % k];
    Vec n = (a - cen).cross(b - cen);
    const double nn = n.norm();
    if (nn == 0.0) continue;
    const double d = std::abs(cen.dot(n / nn));
    PointFn g = [&](const Vec& x) {
      const double r = x.norm();
      return integrand(x / r) * d / (r * r * r);
    };
    coarse[j] = triangle_rule_sum(g, cen, a, b, rule);
  }
  if (q.fixed_level >= 0) {
    const TriangleRule& fine = collapsed_gauss_rule(6);
    for (std::size_t j = 0; j < k; ++j) {
      const Vec& a = corners[j];
      const Vec& b = corners[(j + 1) % k];
      Vec n = (a - cen).cross(b - cen);
      const double nn = n.norm();
      if (nn == 0.0) continue;
      const double d = std::abs(cen.dot(n / nn));
      PointFn g = [&](const Vec& x) {
        const double r = x.norm();
        return integrand(x / r) * d / (r * r * r);
      };
      parts[j] = fixed_triangle(g, cen, a, b, q.fixed_level, fine);
    }
    return pairwise_sum(parts);
  }
  double scale = 0.0;
  for (double c : coarse) scale += std::abs(c);
  for (std::size_t j = 0; j < k; ++j) {
    const double tol = std::max(rel_tol * scale / static_cast<double>(k), 1e-300);
    parts[j] = integrate_spherical_triangle(integrand, cen, corners[j], corners[(j + 1) % k], tol, 10);
  }
  return pairwise_sum(parts);
}

double dual_volume(const MOFunction& G, const SphericalMeasure& lambda, const Polytope& P,
                   const CellQuadrature& q) {
  if (lambda.dim() != P.dim()) throw DomainError("dual_volume: dimension mismatch");
  if (lambda.is_atomic()) {
    return lambda.integrate([&](const Vec& xi) { return G.value(xi, P.radial_value(xi)); });
  }
  std::vector<double> parts(P.size(), 0.0);
  for (int i = 0; i < P.size(); ++i) {
    parts[i] = cell_integral(P, i, lambda, [&](const Vec& xi, double rho) { return G.value(xi, rho); }, q);
  }
  return pairwise_sum(parts);
}

double dual_volume(const MOFunction& G, const SphericalMeasure& lambda,
                   const std::function<double(const Vec&)>& f) {
  return lambda.integrate([&](const Vec& xi) {
    const double v = f(xi);
    if (!(v > 0.0)) throw DomainError("dual_volume: f must be positive");
    return G.value(xi, v);
  });
}

double entropy(const SphericalMeasure& lambda, const Polytope& P, const CellQuadrature& q) {
  return dual_volume(builtin::log(), lambda, polar(P), q);
}

SignedSphericalMeasure mo_measure(const Triple& theta, const Polytope& P, const CellQuadrature& q) {
  require_density(theta.lambda, "mo_measure");
  const auto den = denominators(theta.Psi, P, false);
  auto meta = quad_meta(P, q);
  meta["kind"] = "tilde";
  meta["theta"] = theta.to_json();
  return weighted(P, gt_cell_integrals(theta.G, theta.lambda, P, q), den, meta);
}

SignedSphericalMeasure polar_mo_measure(const Triple& theta, const Polytope& P, const CellQuadrature& q) {
  require_density(theta.lambda, "polar_mo_measure");
  const auto den = denominators(theta.Psi, P, true);
  auto meta = quad_meta(P, q);
  meta["kind"] = "polar";
  meta["theta"] = theta.to_json();
  return weighted(P, gt_cell_integrals(theta.G, theta.lambda, P, q), den, meta);
}

SignedSphericalMeasure mo_surface_area_measure(const MOFunction& Psi, const Polytope& P) {
  if (!Psi.monotone()) throw DomainError("mo_surface_area_measure: Ψ must be C_I or C_d");
  const auto den = denominators(Psi, P, false);
  std::vector<double> num(P.size()), d(P.size());
  for (int i = 0; i < P.size(); ++i) {
    num[i] = P.facet_area(i);
    d[i] = den[i] / P.support(i);
  }
  nlohmann::json meta = {{"kind", "surface"}, {"Psi", Psi.spec().is_null() ? nlohmann::json(Psi.name()) : Psi.spec()}};
  return weighted(P, num, d, meta);
}

SignedSphericalMeasure gauss_image_pullback(const SphericalMeasure& lambda, const Polytope& P,
                                            const CellQuadrature& q) {
  require_density(lambda, "gauss_image_pullback");
  std::vector<double> w(P.size(), 0.0);
  const double c = lambda.uniform_density() ? lambda.density_at(P.normal(0)) : 0.0;
  for (int i = 0; i < P.size(); ++i) {
    if (!P.active(i)) continue;
    if (lambda.uniform_density()) {
      w[i] = c * P.cell_measure(i);  // exact arc length / spherical polygon area
    } else {
      w[i] = cell_integral(P, i, lambda, [](const Vec&, double) { return 1.0; }, q);
    }
  }
  nlohmann::json meta = quad_meta(P, q);
  meta["kind"] = "pullback";
  meta["lambda"] = lambda.spec().is_null() ? nlohmann::json(lambda.name()) : lambda.spec();
  return SignedSphericalMeasure(P.dim(), P.normals(), std::move(w), meta);
}

SignedSphericalMeasure j_measure(const MOFunction& Psi, const SphericalMeasure& lambda, const Polytope& P,
                                 bool polar_variant, const CellQuadrature& q) {
  require_density(lambda, "j_measure");
  // G = log t: ρ G_t = 1, so the numerators are λ(Δ_i).
  const auto pull = gauss_image_pullback(lambda, P, q);
  const auto den = denominators(Psi, P, polar_variant);
  nlohmann::json meta = quad_meta(P, q);
  meta["kind"] = polar_variant ? "j" : "jtilde";
  meta["Psi"] = Psi.spec().is_null() ? nlohmann::json(Psi.name()) : Psi.spec();
  return weighted(P, pull.weights, den, meta);
}

double smooth_density_wrt_surface(const Triple& theta, double h, const Vec& grad_h, const Vec& u) {
  const int n = theta.dim();
  const double g = grad_h.norm();
  if (!(g > 0.0)) throw DomainError("smooth_density_wrt_surface: vanishing gradient");
  const Vec dir = grad_h / g;
  const double p = theta.lambda.is_atomic() ? 1.0 : theta.lambda.density_at(dir);
  return p * std::pow(g, 1 - n) * theta.G.derivative(dir, g) / theta.Psi.derivative(u, h);
}

double smooth_density_wrt_surface(const Triple& theta, const RadialSampleBody& body, const Vec& u) {
  if (body.dim != 2 || body.h.empty()) {
    throw DomainError("smooth_density_wrt_surface: needs a 2D body with support samples");
  }
  const double th = angle2(u);
  const TrigValue tv = trig_interpolate(body.h, th);
  const Vec grad = tv.value * unit2(th) + tv.d1 * unit2(th + kPi / 2);
  return smooth_density_wrt_surface(theta, tv.value, grad, unit2(th));
}

MAResidual monge_ampere_residual_2d(const Triple& theta, const std::vector<double>& h,
                                    const std::function<double(const Vec&)>& p_mu, double tau) {
  if (theta.dim() != 2) throw DomainError("monge_ampere_residual_2d: 2D triples only");
  const std::size_t N = h.size();
  if (N < 8) throw DomainError("monge_ampere_residual_2d: too few samples");
  const auto d1 = spectral_derivative(h, 1);
  const auto d2 = spectral_derivative(h, 2);
  MAResidual out;
  double sq = 0.0;
  for (std::size_t k = 0; k < N; ++k) {
    const double th = kTwoPi * static_cast<double>(k) / static_cast<double>(N);
    const Vec u = unit2(th);
    const double curv = d2[k] + h[k];
    if (!(curv > 0.0)) {
      throw GeometryError("monge_ampere_residual_2d: h'' + h <= 0 at theta = " + std::to_string(th));
    }
    const Vec y = h[k] * u + d1[k] * unit2(th + kPi / 2);
    const double ny = y.norm();
    const Vec ybar = y / ny;
    const double P = theta.G.derivative(ybar, ny) / ny;
    const double pl = theta.lambda.density_at(ybar);
    const double r = p_mu(u) - tau * P * curv * pl / theta.Psi.derivative(u, h[k]);
    out.theta.push_back(th);
    out.residual.push_back(r);
    out.max_abs = std::max(out.max_abs, std::abs(r));
    sq += r * r;
  }
  out.l2 = std::sqrt(sq * kTwoPi / static_cast<double>(N));
  return out;
}

}  // namespace mogi
