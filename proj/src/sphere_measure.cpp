#include "mogi/sphere_measure.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <limits>
#include <sstream>

namespace mogi {

namespace {

std::string fmt_vec(const Vec& v) {
  std::ostringstream os;
  os.precision(17);
  os << "[" << v.x() << ", " << v.y() << ", " << v.z() << "]";
  return os.str();
}

PointFn checked(const PointFn& f) {
  return [&f](const Vec& x) {
    const double v = f(x);
    if (!std::isfinite(v)) {
      throw DomainError("integrand is not finite at node " + fmt_vec(x));
    }
    return v;
  };
}

Vec read_axis(const nlohmann::json& params, int dim) {
  Vec a = dim == 2 ? Vec(1, 0, 0) : Vec(0, 0, 1);
  if (params.contains("axis")) {
    const auto& ax = params.at("axis");
    if (!ax.is_array() || (ax.size() != 2 && ax.size() != 3)) {
      throw DomainError("density axis must be an array of 2 or 3 numbers");
    }
    a = Vec(ax[0].get<double>(), ax[1].get<double>(), ax.size() == 3 ? ax[2].get<double>() : 0.0);
    if (dim == 2 && a.z() != 0.0) throw DomainError("2D density axis must have zero third component");
    if (a.norm() == 0.0) throw DomainError("density axis must be nonzero");
    a.normalize();
  }
  return a;
}

}  // namespace

SphericalMeasure SphericalMeasure::atomic(int dim, const std::vector<Atom>& atoms) {
  check_dim(dim);
  if (atoms.empty()) throw DomainError("atomic measure needs at least one atom");
  SphericalMeasure m;
  m.form_ = Form::Atomic;
  m.dim_ = dim;
  for (const auto& a : atoms) {
    require_unit(a.u, "atom");
    if (dim == 2 && a.u.z() != 0.0) throw DomainError("2D atom with nonzero third component");
    if (!(a.mass > 0.0) || !std::isfinite(a.mass)) {
      throw DomainError("atom masses must be positive and finite, got " + std::to_string(a.mass));
    }
    const Vec u = a.u.normalized();
    bool merged = false;
    for (auto& b : m.atoms_) {
      if (angular_distance(b.u, u) <= 1e-10) {
        b.mass += a.mass;
        merged = true;
        break;
      }
    }
    if (!merged) m.atoms_.push_back({u, a.mass});
  }
  std::vector<double> masses;
  for (const auto& a : m.atoms_) masses.push_back(a.mass);
  m.total_ = pairwise_sum(masses);
  m.name_ = "atoms(" + std::to_string(m.atoms_.size()) + ")";
  m.p_ = std::make_shared<const Density>([](const Vec&) { return 0.0; });
  return m;
}

SphericalMeasure SphericalMeasure::density(int dim, Density p, std::string name, nlohmann::json spec,
                                           std::optional<QuadratureRule> rule) {
  check_dim(dim);
  SphericalMeasure m;
  m.form_ = Form::Density;
  m.dim_ = dim;
  m.p_ = std::make_shared<const Density>(std::move(p));
  m.name_ = std::move(name);
  m.spec_ = std::move(spec);
  m.rule_ = rule ? *rule : default_quadrature_rule(dim);
  if (m.rule_.dim != dim) throw DomainError("quadrature rule dimension mismatch");
  const Density& pp = *m.p_;
  for (const auto& x : m.rule_.nodes) {
    const double v = pp(x);
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw DomainError("density must be finite and nonnegative; bad value at " + fmt_vec(x));
    }
  }
  const double rough = m.rule_.apply(pp);
  if (!(rough > 0.0)) throw DomainError("density measure has zero total mass");
  m.total_ = integrate_sphere(pp, dim, (dim == 2 ? 1e-14 : 1e-11) * rough);
  return m;
}

SphericalMeasure SphericalMeasure::builtin_density(int dim, const std::string& name,
                                                   const nlohmann::json& params) {
  check_dim(dim);
  auto allow = [&](std::initializer_list<const char*> keys) {
    for (auto it = params.begin(); it != params.end(); ++it) {
      bool ok = false;
      for (const char* k : keys) ok = ok || it.key() == k;
      if (!ok) throw DomainError("density '" + name + "': unknown parameter '" + it.key() + "'");
    }
  };
  nlohmann::json spec = {{"builtin", name}, {"params", params}};
  if (name == "uniform") {
    allow({});
    SphericalMeasure m = density(dim, [](const Vec&) { return 1.0; }, "uniform", spec);
    m.uniform_ = true;
    m.total_ = sphere_area(dim);
    return m;
  }
  if (name == "cosine2") {
    allow({"axis", "a", "b"});
    const Vec axis = read_axis(params, dim);
    const double a = params.value("a", 1.0);
    const double b = params.value("b", 0.0);
    if (a < 0.0 || a + b < 0.0) throw DomainError("cosine2 density would be negative");
    return density(
        dim,
        [axis, a, b](const Vec& x) {
          const double c = axis.dot(x);
          return a + b * c * c;
        },
        "cosine2", spec);
  }
  if (name == "vonmises") {
    allow({"axis", "kappa"});
    const Vec axis = read_axis(params, dim);
    const double kappa = params.value("kappa", 1.0);
    return density(dim, [axis, kappa](const Vec& x) { return std::exp(kappa * axis.dot(x)); },
                   "vonmises", spec);
  }
  throw DomainError("unknown builtin density '" + name + "'");
}

double SphericalMeasure::integrate(const PointFn& f) const {
  const PointFn g = checked(f);
  if (form_ == Form::Atomic) {
    std::vector<double> terms;
    terms.reserve(atoms_.size());
    for (const auto& a : atoms_) terms.push_back(a.mass * g(a.u));
    return pairwise_sum(terms);
  }
  const Density& p = *p_;
  const PointFn fp = [&](const Vec& x) { return g(x) * p(x); };
  const double scale = rule_.apply([&](const Vec& x) { return std::abs(fp(x)); });
  const double tol = std::max(scale, 1e-300) * (dim_ == 2 ? 1e-13 : 1e-9);
  return integrate_sphere(fp, dim_, tol);
}

double SphericalMeasure::integrate_rule(const PointFn& f) const {
  if (form_ == Form::Atomic) return integrate(f);
  const PointFn g = checked(f);
  const Density& p = *p_;
  return rule_.apply([&](const Vec& x) { return g(x) * p(x); });
}

SphericalMeasure SphericalMeasure::rotated(const Eigen::Matrix3d& R) const {
  if (dim_ == 2 && (std::abs(R(2, 2) - 1.0) > 1e-12 || R.col(2).head<2>().norm() > 1e-12)) {
    throw DomainError("2D rotation must fix the third axis");
  }
  if (form_ == Form::Atomic) {
    std::vector<Atom> out;
    for (const auto& a : atoms_) {
      Vec u = R * a.u;
      u.normalize();
      if (dim_ == 2) u.z() = 0.0;
      out.push_back({u, a.mass});
    }
    return atomic(dim_, out);
  }
  auto p = p_;
  const Eigen::Matrix3d Rt = R.transpose();
  SphericalMeasure m = density(
      dim_, [p, Rt](const Vec& x) { return (*p)(Rt * x); }, name_ + "(rotated)", nullptr, rule_);
  m.uniform_ = uniform_;
  return m;
}

namespace {

using DirFn = std::function<double(const Vec&)>;

// Mass of the density on the circle {x : x·axis = s} of S^2 (dφ measure).
double slice_mass(const PointFn& p, const Eigen::Matrix3d& fr, double s, double tol) {
  const double r = std::sqrt(std::max(0.0, 1.0 - s * s));
  auto h = [&](double ph) {
    return p(r * std::cos(ph) * fr.col(0) + r * std::sin(ph) * fr.col(1) + s * fr.col(2));
  };
  double acc = 0.0;
  for (int k = 0; k < 4; ++k) acc += integrate_interval(h, k * kPi / 2, (k + 1) * kPi / 2, tol / 4);
  return acc;
}

// Pattern search on the sphere from `start`.
MarginResult refine_on_sphere(const DirFn& F, int dim, Vec start, double step, double min_step) {
  Vec best = start.normalized();
  double fb = F(best);
  while (step > min_step) {
    bool moved = false;
    std::vector<Vec> tangents;
    if (dim == 2) {
      tangents.push_back(Vec(-best.y(), best.x(), 0.0));
    } else {
      const Eigen::Matrix3d fr = frame_from_axis(best);
      tangents.push_back(fr.col(0));
      tangents.push_back(fr.col(1));
      tangents.push_back((fr.col(0) + fr.col(1)).normalized());
      tangents.push_back((fr.col(0) - fr.col(1)).normalized());
    }
    for (const Vec& t : tangents) {
      for (double sgn : {1.0, -1.0}) {
        const Vec c = (std::cos(step) * best + std::sin(step) * sgn * t).normalized();
        const double fc = F(c);
        if (fc < fb) {
          fb = fc;
          best = c;
          moved = true;
        }
      }
    }
    if (!moved) step *= 0.5;
  }
  return {fb, best};
}

// Exact minimization over the circle of θ -> Σ m_i φ(cos(θ - θ_i)) with φ(x) = x_+ or |x|.
// Between kinks the function is a c cos θ + s sin θ, so the minimum is at a kink or at
// a critical point of one such piece.
MarginResult circle_atomic_min(const std::vector<Atom>& atoms, bool absolute) {
  auto F = [&](double th) {
    const Vec u = unit2(th);
    std::vector<double> t;
    for (const auto& a : atoms) {
      const double d = u.dot(a.u);
      t.push_back(a.mass * (absolute ? std::abs(d) : std::max(d, 0.0)));
    }
    return pairwise_sum(t);
  };
  std::vector<double> kinks;
  for (const auto& a : atoms) {
    const double th = angle2(a.u);
    for (double k : {th + kPi / 2, th + 3 * kPi / 2}) kinks.push_back(std::fmod(k, kTwoPi));
  }
  std::sort(kinks.begin(), kinks.end());
  std::vector<double> cand = kinks;
  for (std::size_t k = 0; k < kinks.size(); ++k) {
    const double a = kinks[k];
    const double b = k + 1 < kinks.size() ? kinks[k + 1] : kinks[0] + kTwoPi;
    const double mid = 0.5 * (a + b);
    const Vec um = unit2(mid);
    double c = 0.0, s = 0.0;
    for (const auto& at : atoms) {
      const double d = um.dot(at.u);
      double w = 0.0;
      if (absolute) w = d >= 0 ? at.mass : -at.mass;
      else w = d > 0 ? at.mass : 0.0;
      c += w * at.u.x();
      s += w * at.u.y();
    }
    // minimum of c cos θ + s sin θ is at θ = atan2(-s, -c)
    double th = std::atan2(-s, -c);
    while (th < a) th += kTwoPi;
    while (th >= a + kTwoPi) th -= kTwoPi;
    if (th > a && th < b) cand.push_back(std::fmod(th, kTwoPi));
  }
  MarginResult best{std::numeric_limits<double>::infinity(), Vec(1, 0, 0)};
  std::sort(cand.begin(), cand.end());
  for (double th : cand) {
    const double v = F(th);
    if (v < best.value) best = {v, unit2(th)};
  }
  return best;
}

MarginResult sphere_min(const SphericalMeasure& m, bool absolute) {
  const int dim = m.dim();
  auto phi = [absolute](double d) { return absolute ? std::abs(d) : std::max(d, 0.0); };
  if (m.is_atomic() && dim == 2) return circle_atomic_min(m.atoms(), absolute);

  DirFn coarse;
  if (m.is_atomic()) {
    coarse = [&](const Vec& u) {
      return m.integrate([&](const Vec& x) { return phi(u.dot(x)); });
    };
  } else {
    coarse = [&](const Vec& u) { return m.integrate_rule([&](const Vec& x) { return phi(u.dot(x)); }); };
  }
  std::vector<Vec> grid = dim == 2 ? circle_directions(4096) : fibonacci_directions(8192);
  if (m.is_atomic() && m.atoms().size() <= 300) {
    // Vertices of the great-circle arrangement, where minima of piecewise linear
    // integrands typically sit.
    const auto& at = m.atoms();
    for (std::size_t i = 0; i < at.size(); ++i) {
      for (std::size_t j = i + 1; j < at.size(); ++j) {
        const Vec c = at[i].u.cross(at[j].u);
        if (c.norm() > 1e-12) {
          grid.push_back(c.normalized());
          grid.push_back(-c.normalized());
        }
      }
    }
  }
  MarginResult best{std::numeric_limits<double>::infinity(), grid.front()};
  for (const Vec& u : grid) {
    const double v = coarse(u);
    if (v < best.value) best = {v, u};
  }
  const double step0 = dim == 2 ? kTwoPi / 4096 : 0.05;
  MarginResult r = refine_on_sphere(coarse, dim, best.direction, step0, 1e-10);
  if (r.value > best.value) r = best;
  if (!m.is_atomic()) {
    // Accurate value at the located direction; in 2D refine once more with exact kinks.
    auto accurate = [&](const Vec& u) {
      if (dim == 2) {
        const double th = angle2(u);
        const auto& p = m.density_fn();
        return integrate_sphere([&](const Vec& x) { return phi(u.dot(x)) * p(x); }, 2,
                                1e-13 * m.total_mass(), {th + kPi / 2, th + 3 * kPi / 2});
      }
      // zonal coordinates about u put the kink at s = 0
      const Eigen::Matrix3d fr = frame_from_axis(u);
      const double tol = 1e-13 * m.total_mass();
      auto g = [&](double s) { return phi(s) * slice_mass(m.density_fn(), fr, s, tol); };
      return integrate_interval(g, -1.0, 0.0, tol) + integrate_interval(g, 0.0, 1.0, tol);
    };
    if (dim == 2) {
      r = refine_on_sphere(accurate, 2, r.direction, kTwoPi / 4096, 1e-9);
    } else {
      r.value = accurate(r.direction);
    }
  }
  return r;
}

}  // namespace

MarginResult hemisphere_margin(const SphericalMeasure& m) { return sphere_min(m, false); }

MarginResult subsphere_margin_even(const SphericalMeasure& m) {
  if (!is_even(m, 1e-12 * std::max(1.0, m.total_mass()))) {
    throw DomainError("subsphere_margin_even: measure is not even");
  }
  return sphere_min(m, true);
}

bool is_even(const SphericalMeasure& m, double tol) {
  if (m.is_atomic()) {
    for (const auto& a : m.atoms()) {
      bool ok = false;
      for (const auto& b : m.atoms()) {
        if (angular_distance(a.u, -b.u) <= 1e-10 && std::abs(a.mass - b.mass) <= tol) {
          ok = true;
          break;
        }
      }
      if (!ok) return false;
    }
    return true;
  }
  const auto nodes = m.dim() == 2 ? circle_directions(1024, 0.01) : fibonacci_directions(4000);
  for (const auto& x : nodes) {
    if (std::abs(m.density_at(x) - m.density_at(-x)) > tol) return false;
  }
  return true;
}

namespace {

// ∫_0^b f with logarithmic endpoint singularities handled by tanh-sinh. f receives the
// abscissa and its signed distance to the nearest endpoint.
double log_endpoint_integral(const std::function<double(double, double)>& f, double b, bool* bad) {
  boost::math::quadrature::tanh_sinh<double> ts(12);
  double err = 0.0, l1 = 0.0;
  double v = 0.0;
  try {
    v = ts.integrate(f, 0.0, b, 1e-13, &err, &l1);
  } catch (const std::exception&) {
    v = std::numeric_limits<double>::quiet_NaN();
  }
  *bad = !std::isfinite(v) || err > 1e-7 * std::max(1.0, l1);
  return v;
}

}  // namespace

double log_cosine_integral(const SphericalMeasure& lambda, const Vec& v, bool* divergent) {
  if (lambda.is_atomic()) {
    throw MeasureFormError("log_cosine_bound requires an absolutely continuous (density) measure");
  }
  const auto& p = lambda.density_fn();
  const double tol = 1e-13 * std::max(lambda.total_mass(), 1e-300);
  bool bad = false;
  double val = 0.0;
  if (lambda.dim() == 2) {
    const double phi = angle2(v);
    // fold the four quarter arcs onto t in (0, π/2), singular at t = π/2
    auto g = [&](double t, double tc) {
      const double c = t > kPi / 4 ? std::sin(tc) : std::cos(t);
      const double q = p(unit2(phi + t)) + p(unit2(phi - t)) + p(unit2(phi + kPi + t)) + p(unit2(phi + kPi - t));
      return std::log(c) * q;
    };
    val = log_endpoint_integral(g, kPi / 2, &bad);
  } else {
    const Eigen::Matrix3d fr = frame_from_axis(v.normalized());
    auto g = [&](double s, double) {
      return std::log(s) * (slice_mass(p, fr, s, tol) + slice_mass(p, fr, -s, tol));
    };
    val = log_endpoint_integral(g, 1.0, &bad);
  }
  if (divergent) *divergent = bad;
  return bad ? -std::numeric_limits<double>::infinity() : val;
}

LogCosineBound log_cosine_bound(const SphericalMeasure& lambda) {
  if (lambda.is_atomic()) {
    throw MeasureFormError("log_cosine_bound requires an absolutely continuous (density) measure");
  }
  const int dim = lambda.dim();
  std::vector<Vec> grid;
  if (dim == 2) {
    for (int k = 0; k < 256; ++k) grid.push_back(unit2(kPi * k / 256));
  } else {
    for (const Vec& u : fibonacci_directions(256)) {
      if (u.z() >= 0) grid.push_back(u);
    }
  }
  LogCosineBound best{std::numeric_limits<double>::infinity(), false, grid.front()};
  for (const Vec& v : grid) {
    bool div = false;
    const double val = log_cosine_integral(lambda, v, &div);
    if (div) return {-std::numeric_limits<double>::infinity(), true, v};
    if (val < best.value) best = {val, false, v};
  }
  auto F = [&](const Vec& v) { return log_cosine_integral(lambda, v); };
  MarginResult r = refine_on_sphere(F, dim, best.direction, dim == 2 ? kPi / 256 : 0.1, 1e-5);
  if (r.value < best.value) {
    best.value = r.value;
    best.direction = r.direction;
  }
  if (!std::isfinite(best.value)) best.divergent = true;
  return best;
}

}  // namespace mogi
