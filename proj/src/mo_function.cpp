#include "mogi/mo_function.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace mogi {

const char* tag_name(ClassTag tag) {
  switch (tag) {
    case ClassTag::C: return "C";
    case ClassTag::CI: return "C_I";
    case ClassTag::Cd: return "C_d";
    case ClassTag::GI: return "G_I";
    case ClassTag::Gd: return "G_d";
  }
  return "?";
}

const char* limit_name(Limit l) {
  switch (l) {
    case Limit::Zero: return "zero";
    case Limit::PosInf: return "+inf";
    case Limit::NegInf: return "-inf";
    case Limit::Finite: return "finite";
    case Limit::Unknown: return "unknown";
  }
  return "?";
}

MOFunction::MOFunction(std::string name, Eval value, Eval derivative, unsigned tags,
                       LimitFlags limits, bool even_in_direction, nlohmann::json spec,
                       double t_min, double t_max)
    : name_(std::move(name)),
      value_(std::make_shared<const Eval>(std::move(value))),
      derivative_(std::make_shared<const Eval>(std::move(derivative))),
      tags_(tags),
      limits_(limits),
      even_(even_in_direction),
      spec_(std::move(spec)),
      t_min_(t_min),
      t_max_(t_max) {
  if (!(t_min_ > 0.0) || !(t_max_ > t_min_)) throw DomainError(name_ + ": bad validity interval");
}

void MOFunction::check_args(const Vec& xi, double t) const {
  if (!(t > 0.0)) {
    throw DomainError(name_ + ": t must be positive, got " + std::to_string(t));
  }
  if (t < t_min_ || t > t_max_) {
    std::ostringstream os;
    os << name_ << ": t = " << t << " outside validity interval [" << t_min_ << ", " << t_max_
       << "]";
    throw DomainError(os.str());
  }
  require_unit(xi, name_.c_str());
}

double MOFunction::value(const Vec& xi, double t) const {
  check_args(xi, t);
  return (*value_)(xi, t);
}

double MOFunction::derivative(const Vec& xi, double t) const {
  check_args(xi, t);
  return (*derivative_)(xi, t);
}

MOFunction tilde_transform(const MOFunction& f) {
  if (f.tilde_origin_) return *f.tilde_origin_;
  auto fv = f.value_;
  auto fd = f.derivative_;
  unsigned tags = f.tags_ & unsigned(ClassTag::C);
  if (f.has(ClassTag::CI)) tags |= unsigned(ClassTag::Cd);
  if (f.has(ClassTag::Cd)) tags |= unsigned(ClassTag::CI);
  if (f.has(ClassTag::GI)) tags |= unsigned(ClassTag::Gd);
  if (f.has(ClassTag::Gd)) tags |= unsigned(ClassTag::GI);
  LimitFlags lim{f.limits_.at_infinity, f.limits_.at_zero};
  nlohmann::json spec = f.spec_.is_null() ? nlohmann::json(nullptr) : nlohmann::json{{"tilde", f.spec_}};
  MOFunction g(
      "tilde(" + f.name_ + ")", [fv](const Vec& xi, double t) { return (*fv)(xi, 1.0 / t); },
      [fd](const Vec& xi, double t) { return -(*fd)(xi, 1.0 / t) / (t * t); }, tags, lim, f.even_,
      std::move(spec), 1.0 / f.t_max_, 1.0 / f.t_min_);
  g.tilde_origin_ = std::make_shared<const MOFunction>(f);
  return g;
}

namespace builtin {

namespace {

unsigned power_tags(double p) {
  if (p > 0) return ClassTag::C | ClassTag::CI | ClassTag::GI;
  return ClassTag::C | ClassTag::Cd | ClassTag::Gd;
}

LimitFlags power_limits(double p) {
  if (p > 0) return {Limit::Zero, Limit::PosInf};
  return {Limit::PosInf, Limit::Zero};
}

void require_nonzero(double p, const char* what) {
  if (p == 0.0 || !std::isfinite(p)) throw DomainError(std::string(what) + ": p must be finite and nonzero");
}

}  // namespace

MOFunction power_over_p(double p) {
  require_nonzero(p, "power_over_p");
  const double c = 1.0 / std::abs(p);
  std::ostringstream name;
  name << "t^" << p << "/|" << p << "|";
  return MOFunction(
      name.str(), [p, c](const Vec&, double t) { return c * std::pow(t, p); },
      [p, c](const Vec&, double t) { return c * p * std::pow(t, p - 1.0); }, power_tags(p),
      power_limits(p), true, {{"builtin", "power_over_p"}, {"params", {{"p", p}}}});
}

MOFunction power(double p) {
  require_nonzero(p, "power");
  std::ostringstream name;
  name << "t^" << p;
  return MOFunction(
      name.str(), [p](const Vec&, double t) { return std::pow(t, p); },
      [p](const Vec&, double t) { return p * std::pow(t, p - 1.0); }, power_tags(p),
      power_limits(p), true, {{"builtin", "power"}, {"params", {{"p", p}}}});
}

MOFunction log() {
  return MOFunction(
      "log t", [](const Vec&, double t) { return std::log(t); },
      [](const Vec&, double t) { return 1.0 / t; }, ClassTag::C | ClassTag::CI,
      {Limit::NegInf, Limit::PosInf}, true, {{"builtin", "log"}, {"params", nlohmann::json::object()}});
}

MOFunction neg_log() {
  return MOFunction(
      "-log t", [](const Vec&, double t) { return -std::log(t); },
      [](const Vec&, double t) { return -1.0 / t; }, ClassTag::C | ClassTag::Cd,
      {Limit::PosInf, Limit::NegInf}, true,
      {{"builtin", "neg_log"}, {"params", nlohmann::json::object()}});
}

MOFunction volume(int n) {
  check_dim(n);
  MOFunction f = power_over_p(static_cast<double>(n));
  const double p = n;
  return MOFunction(
      n == 2 ? "t^2/2" : "t^3/3", [p](const Vec&, double t) { return std::pow(t, p) / p; },
      [p](const Vec&, double t) { return std::pow(t, p - 1.0); }, f.tags(), f.limits(), true,
      {{"builtin", "volume"}, {"params", {{"n", n}}}});
}

MOFunction exp_neg() {
  return MOFunction(
      "exp(-t)", [](const Vec&, double t) { return std::exp(-t); },
      [](const Vec&, double t) { return -std::exp(-t); }, ClassTag::C | ClassTag::Cd,
      {Limit::Finite, Limit::Zero}, true, {{"builtin", "exp_neg"}, {"params", nlohmann::json::object()}});
}

MOFunction reciprocal() {
  return MOFunction(
      "1/t", [](const Vec&, double t) { return 1.0 / t; },
      [](const Vec&, double t) { return -1.0 / (t * t); }, ClassTag::C | ClassTag::Cd | ClassTag::Gd,
      {Limit::PosInf, Limit::Zero}, true,
      {{"builtin", "reciprocal"}, {"params", nlohmann::json::object()}});
}

MOFunction anisotropic(int dim, std::vector<double> weights, double p, std::vector<Vec> directions) {
  check_dim(dim);
  require_nonzero(p, "anisotropic");
  if (weights.empty()) throw DomainError("anisotropic: empty weight table");
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw DomainError("anisotropic: weights must be positive");
  }
  bool even = true;
  std::function<double(const Vec&)> weight;
  nlohmann::json table;
  if (dim == 2) {
    const std::size_t n = weights.size();
    if (n % 2 != 0) {
      even = false;
    } else {
      for (std::size_t k = 0; k < n / 2; ++k) even = even && weights[k] == weights[k + n / 2];
    }
    auto w = std::make_shared<const std::vector<double>>(weights);
    weight = [w, even](const Vec& x) {
      // An even table is read on one half circle so that w(-ξ) = w(ξ) holds exactly.
      const Vec xi = (even && (x.y() < 0 || (x.y() == 0 && x.x() < 0))) ? Vec(-x) : x;
      const std::size_t n = w->size();
      const double s = angle2(xi) / kTwoPi * static_cast<double>(n);
      std::size_t k = static_cast<std::size_t>(std::floor(s));
      const double frac = s - static_cast<double>(k);
      k %= n;
      return (1.0 - frac) * (*w)[k] + frac * (*w)[(k + 1) % n];
    };
    table = weights;
  } else {
    if (directions.size() != weights.size()) {
      throw DomainError("anisotropic: 3D table needs one direction per weight");
    }
    for (auto& d : directions) d.normalize();
    for (std::size_t i = 0; i < directions.size() && even; ++i) {
      bool found = false;
      for (std::size_t j = 0; j < directions.size(); ++j) {
        if (angular_distance(directions[i], -directions[j]) <= 1e-10 && weights[i] == weights[j]) {
          found = true;
          break;
        }
      }
      even = found;
    }
    auto d = std::make_shared<const std::vector<Vec>>(directions);
    auto w = std::make_shared<const std::vector<double>>(weights);
    weight = [d, w, even](const Vec& x) {
      const bool flip = even && (x.z() < 0 || (x.z() == 0 && (x.y() < 0 || (x.y() == 0 && x.x() < 0))));
      const Vec xi = flip ? Vec(-x) : x;
      std::size_t best = 0;
      double bd = -2.0;
      for (std::size_t i = 0; i < d->size(); ++i) {
        const double c = (*d)[i].dot(xi);
        if (c > bd) {
          bd = c;
          best = i;
        }
      }
      return (*w)[best];
    };
    for (std::size_t i = 0; i < weights.size(); ++i) {
      table.push_back({directions[i].x(), directions[i].y(), directions[i].z(), weights[i]});
    }
  }
  std::ostringstream name;
  name << "w(xi) t^" << p;
  return MOFunction(
      name.str(), [weight, p](const Vec& xi, double t) { return weight(xi) * std::pow(t, p); },
      [weight, p](const Vec& xi, double t) { return weight(xi) * p * std::pow(t, p - 1.0); },
      power_tags(p), power_limits(p), even,
      {{"tabulated_weight", table}, {"power", p}, {"dim", dim}});
}

}  // namespace builtin

MOFunction builtin_function(const std::string& name, const nlohmann::json& params) {
  const nlohmann::json& pr = params.is_null() ? nlohmann::json::object() : params;
  auto allow = [&](std::initializer_list<const char*> keys) {
    for (auto it = pr.begin(); it != pr.end(); ++it) {
      bool ok = false;
      for (const char* k : keys) ok = ok || it.key() == k;
      if (!ok) throw DomainError("function '" + name + "': unknown parameter '" + it.key() + "'");
    }
  };
  auto need = [&](const char* key) -> double {
    if (!pr.contains(key) || !pr.at(key).is_number()) {
      throw DomainError("function '" + name + "': missing numeric parameter '" + key + "'");
    }
    return pr.at(key).get<double>();
  };
  if (name == "power_over_p") {
    allow({"p"});
    return builtin::power_over_p(need("p"));
  }
  if (name == "power") {
    allow({"p"});
    return builtin::power(need("p"));
  }
  if (name == "volume") {
    allow({"n"});
    return builtin::volume(static_cast<int>(need("n")));
  }
  allow({});
  if (name == "log") return builtin::log();
  if (name == "neg_log") return builtin::neg_log();
  if (name == "exp_neg") return builtin::exp_neg();
  if (name == "reciprocal") return builtin::reciprocal();
  throw DomainError("unknown builtin function '" + name + "'");
}

bool ClassReport::consistent() const {
  if (!derivative_ok || !evenness_ok) return false;
  for (const auto& t : tags) {
    if (t.contradiction) return false;
  }
  return true;
}

bool ClassReport::observed(ClassTag tag) const {
  for (const auto& t : tags) {
    if (t.tag == tag) return t.observed;
  }
  return false;
}

nlohmann::json ClassReport::to_json() const {
  nlohmann::json j;
  j["function"] = function;
  j["probes"] = probes;
  j["consistent"] = consistent();
  j["max_derivative_error"] = max_derivative_error;
  j["derivative_ok"] = derivative_ok;
  j["evenness_ok"] = evenness_ok;
  for (const auto& t : tags) {
    j["tags"][tag_name(t.tag)] = {{"declared", t.declared},
                                  {"observed", t.observed},
                                  {"contradiction", t.contradiction},
                                  {"detail", t.detail}};
  }
  j["issues"] = issues;
  return j;
}

std::vector<ProbePoint> default_probe_grid(int dim) {
  check_dim(dim);
  const std::vector<Vec> dirs = dim == 2 ? circle_directions(12, 0.1) : fibonacci_directions(20);
  std::vector<ProbePoint> out;
  for (const auto& d : dirs) {
    for (int k = 0; k <= 40; ++k) out.push_back({d, std::pow(10.0, -4.0 + 0.2 * k)});
  }
  return out;
}

double finite_difference_t(const MOFunction& f, const Vec& xi, double t) {
  double h = 1e-3 * t;
  const double room = std::min(t - f.t_min(), f.t_max() - t);
  h = std::min(h, 0.5 * room);
  auto d = [&](double step) {
    return (f.value_raw(xi, t + step) - f.value_raw(xi, t - step)) / (2.0 * step);
  };
  return (4.0 * d(0.5 * h) - d(h)) / 3.0;
}

namespace {

// Sampled approach toward a declared limit along increasing (or decreasing) t.
// `seq` is ordered from the interior toward the extreme end.
bool trend_matches(Limit lim, const std::vector<double>& seq) {
  if (seq.size() < 3) return true;
  const double a = seq[seq.size() - 3];
  const double b = seq[seq.size() - 2];
  const double c = seq.back();
  switch (lim) {
    case Limit::Zero: return std::abs(c) <= std::abs(b) && std::abs(b) <= std::abs(a);
    case Limit::PosInf: return c > b && b > a;
    case Limit::NegInf: return c < b && b < a;
    case Limit::Finite: return std::abs(c - b) <= std::abs(b - a) * (1.0 + 1e-12) + 1e-300;
    case Limit::Unknown: return true;
  }
  return true;
}

bool underflowed(double v, double d) { return std::abs(v) < 1e-300 && std::abs(d) < 1e-300; }

}  // namespace

ClassReport classify(const MOFunction& f, const std::vector<ProbePoint>& probes) {
  ClassReport rep;
  rep.function = f.name();
  rep.probes = probes.size();
  if (probes.empty()) {
    rep.issues.push_back("empty probe grid");
    rep.derivative_ok = false;
    return rep;
  }
  bool finite = true, pos_deriv = true, neg_deriv = true, positive = true;
  std::string finite_detail, pos_detail, neg_detail, positive_detail;
  std::map<std::pair<double, std::pair<double, double>>, std::vector<std::pair<double, double>>>
      by_dir;
  for (const auto& pr : probes) {
    double v = 0.0, d = 0.0;
    try {
      v = f.value(pr.xi, pr.t);
      d = f.derivative(pr.xi, pr.t);
    } catch (const std::exception& e) {
      rep.issues.push_back(std::string("probe rejected: ") + e.what());
      finite = false;
      continue;
    }
    std::ostringstream at;
    at << "(xi=[" << pr.xi.x() << "," << pr.xi.y() << "," << pr.xi.z() << "], t=" << pr.t << ")";
    if (!std::isfinite(v) || !std::isfinite(d)) {
      if (finite) finite_detail = "non-finite value at " + at.str();
      finite = false;
      continue;
    }
    if (!(d > 0.0) && pos_deriv) {
      pos_deriv = false;
      pos_detail = "f_t <= 0 at " + at.str();
    }
    if (!(d < 0.0) && !underflowed(v, d) && neg_deriv) {
      neg_deriv = false;
      neg_detail = "f_t >= 0 at " + at.str();
    }
    if (!(v > 0.0) && positive) {
      positive = false;
      positive_detail = "f <= 0 at " + at.str();
    }
    const double fd = finite_difference_t(f, pr.xi, pr.t);
    const double err = std::abs(d - fd) / std::max(1.0, std::abs(d));
    rep.max_derivative_error = std::max(rep.max_derivative_error, err);
    if (f.even_in_direction()) {
      const double w = f.value_raw(-pr.xi, pr.t);
      if (w != v) {
        if (rep.evenness_ok) rep.issues.push_back("declared even but f(-xi) != f(xi) at " + at.str());
        rep.evenness_ok = false;
      }
    }
    by_dir[{pr.xi.x(), {pr.xi.y(), pr.xi.z()}}].push_back({pr.t, v});
  }
  rep.derivative_ok = rep.max_derivative_error <= 1e-6;
  if (!rep.derivative_ok) {
    std::ostringstream os;
    os << "derivative disagrees with finite differences (max relative error "
       << rep.max_derivative_error << ")";
    rep.issues.push_back(os.str());
  }
  // Sampled limit trends per direction.
  bool zero_lim0 = true, inf_lim0 = true, zero_liminf = true, inf_liminf = true;
  bool decl0 = true, declinf = true;
  for (auto& [key, seq] : by_dir) {
    std::sort(seq.begin(), seq.end());
    std::vector<double> up, down;
    for (const auto& s : seq) up.push_back(s.second);
    down.assign(up.rbegin(), up.rend());
    zero_lim0 = zero_lim0 && trend_matches(Limit::Zero, down);
    inf_lim0 = inf_lim0 && trend_matches(Limit::PosInf, down);
    zero_liminf = zero_liminf && trend_matches(Limit::Zero, up);
    inf_liminf = inf_liminf && trend_matches(Limit::PosInf, up);
    decl0 = decl0 && trend_matches(f.limits().at_zero, down);
    declinf = declinf && trend_matches(f.limits().at_infinity, up);
  }
  if (!decl0) {
    rep.issues.push_back(std::string("sampled trend as t -> 0+ does not match declared limit ") +
                         limit_name(f.limits().at_zero));
  }
  if (!declinf) {
    rep.issues.push_back(std::string("sampled trend as t -> inf does not match declared limit ") +
                         limit_name(f.limits().at_infinity));
  }
  auto add = [&](ClassTag tag, bool obs, std::string detail) {
    TagCheck c;
    c.tag = tag;
    c.declared = f.has(tag);
    c.observed = obs;
    c.contradiction = c.declared && !obs;
    c.detail = std::move(detail);
    if (c.contradiction) rep.issues.push_back(std::string("declared ") + tag_name(tag) + " contradicted: " + c.detail);
    rep.tags.push_back(std::move(c));
  };
  const bool cont = finite && rep.derivative_ok;
  add(ClassTag::C, cont, cont ? "finite with consistent derivative" : finite_detail);
  add(ClassTag::CI, cont && pos_deriv, pos_deriv ? "f_t > 0 on all probes" : pos_detail);
  add(ClassTag::Cd, cont && neg_deriv, neg_deriv ? "f_t < 0 on all probes" : neg_detail);
  const bool gi = cont && pos_deriv && positive && zero_lim0 && inf_liminf;
  const bool gd = cont && neg_deriv && positive && inf_lim0 && zero_liminf;
  auto gdetail = [&](bool deriv, const std::string& dd, bool l0, bool linf, const char* want) {
    if (!deriv) return dd;
    if (!positive) return positive_detail;
    if (!l0 || !linf) return std::string("sampled limits do not trend to ") + want;
    return std::string("positive, monotone, limits ") + want;
  };
  add(ClassTag::GI, gi, gdetail(pos_deriv, pos_detail, zero_lim0, inf_liminf, "0 / +inf"));
  add(ClassTag::Gd, gd, gdetail(neg_deriv, neg_detail, inf_lim0, zero_liminf, "+inf / 0"));
  return rep;
}

}  // namespace mogi
