#include "mogi/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <regex>
#include <sstream>

namespace mogi::io {

namespace {

std::string num(double x) {
  if (!std::isfinite(x)) return "null";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

bool inline_array(const json& j) {
  if (!j.is_array() || j.size() > 4) return false;
  for (const auto& e : j) {
    if (!e.is_number()) return false;
  }
  return true;
}

void write(std::ostringstream& os, const json& j, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(indent * depth), ' ');
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case json::value_t::number_float:
      os << num(j.get<double>());
      return;
    case json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      if (inline_array(j) || indent == 0) {
        os << '[';
        for (std::size_t k = 0; k < j.size(); ++k) {
          if (k) os << (indent > 0 ? ", " : ",");
          write(os, j[k], indent, depth + 1);
        }
        os << ']';
        return;
      }
      os << '[' << nl;
      for (std::size_t k = 0; k < j.size(); ++k) {
        os << pad;
        write(os, j[k], indent, depth + 1);
        os << (k + 1 < j.size() ? "," : "") << nl;
      }
      os << close << ']';
      return;
    }
    case json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << '{' << nl;
      std::size_t k = 0;
      for (auto it = j.begin(); it != j.end(); ++it, ++k) {
        os << pad << json(it.key()).dump() << (indent > 0 ? ": " : ":");
        write(os, it.value(), indent, depth + 1);
        os << (k + 1 < j.size() ? "," : "") << nl;
      }
      os << close << '}';
      return;
    }
    default:
      os << j.dump();
  }
}

[[noreturn]] void fail(const std::string& what) { throw ParseError(what); }

const json& need(const json& j, const char* key, const char* ctx) {
  if (!j.is_object() || !j.contains(key)) fail(std::string(ctx) + ": missing key '" + key + "'");
  return j.at(key);
}

double to_double(const json& j, const char* ctx) {
  if (!j.is_number()) fail(std::string(ctx) + ": expected a number");
  return j.get<double>();
}

std::vector<double> doubles(const json& j, const char* ctx) {
  if (!j.is_array()) fail(std::string(ctx) + ": expected an array of numbers");
  std::vector<double> v;
  for (const auto& e : j) v.push_back(to_double(e, ctx));
  return v;
}

Vec vec(const json& j, int dim, const char* ctx) {
  const auto v = doubles(j, ctx);
  if (static_cast<int>(v.size()) != dim) {
    fail(std::string(ctx) + ": expected " + std::to_string(dim) + " components, got " + std::to_string(v.size()));
  }
  return Vec(v[0], v[1], dim == 3 ? v[2] : 0.0);
}

json vec_json(const Vec& u, int dim) {
  json a = json::array();
  for (int k = 0; k < dim; ++k) a.push_back(u[k]);
  return a;
}

int dim_of(const json& j, int fallback) {
  if (j.is_object() && j.contains("dim")) {
    const int d = need(j, "dim", "dim").get<int>();
    if (d != 2 && d != 3) fail("dim must be 2 or 3");
    return d;
  }
  return fallback;
}

}  // namespace

std::string dump(const json& j, int indent) {
  std::ostringstream os;
  write(os, j, indent, 0);
  if (indent > 0) os << '\n';
  return os.str();
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("invalid JSON: ") + e.what());
  }
}

json load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    fail(path + ": invalid JSON: " + e.what());
  }
}

void save_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

void save_file(const std::string& path, const json& j) { save_text(path, dump(j)); }

json resolve(const json& j) {
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s.size() > 5 && s.compare(s.size() - 5, 5, ".json") == 0) return load_file(s);
  }
  return j;
}

MOFunction function_from_json(const json& in) {
  const json j = resolve(in);
  try {
    if (j.is_string()) {
      static const std::regex with_p(R"(([a-z_]+):([-+0-9.eE]+))");
      const auto& s = j.get_ref<const std::string&>();
      std::smatch m;
      if (std::regex_match(s, m, with_p)) {
        const std::string base = m[1];
        const double p = std::stod(m[2]);
        return builtin_function(base, base == "volume" ? json{{"n", p}} : json{{"p", p}});
      }
      return builtin_function(s, json::object());
    }
    if (j.is_object() && j.contains("tilde")) return tilde_transform(function_from_json(j.at("tilde")));
    if (j.is_object() && j.contains("builtin")) {
      return builtin_function(need(j, "builtin", "function").get<std::string>(),
                              j.contains("params") ? j.at("params") : json::object());
    }
    if (j.is_object() && j.contains("tabulated_weight")) {
      const int dim = dim_of(j, 2);
      const double p = to_double(need(j, "power", "function"), "function.power");
      const auto& t = j.at("tabulated_weight");
      if (dim == 2) return builtin::anisotropic(2, doubles(t, "function.tabulated_weight"), p);
      std::vector<double> w;
      std::vector<Vec> d;
      for (const auto& row : t) {
        const auto r = doubles(row, "function.tabulated_weight");
        if (r.size() != 4) fail("function.tabulated_weight: 3D rows are [x, y, z, w]");
        d.emplace_back(r[0], r[1], r[2]);
        w.push_back(r[3]);
      }
      return builtin::anisotropic(3, w, p, d);
    }
  } catch (const json::exception& e) {
    fail(std::string("function: ") + e.what());
  }
  fail("function: unrecognized spec " + j.dump());
}

json function_to_json(const MOFunction& f) {
  if (f.spec().is_null()) throw DomainError("function '" + f.name() + "' has no serializable spec");
  return f.spec();
}

SphericalMeasure measure_from_json(const json& in, int dim) {
  const json j = resolve(in);
  dim = dim_of(j, dim);
  try {
    if (j.is_string()) return SphericalMeasure::builtin_density(dim, j.get<std::string>());
    if (j.is_object() && j.contains("builtin")) {
      return SphericalMeasure::builtin_density(dim, j.at("builtin").get<std::string>(),
                                               j.contains("params") ? j.at("params") : json::object());
    }
    if (j.is_object() && j.contains("atoms")) {
      std::vector<Atom> atoms;
      for (const auto& a : j.at("atoms")) {
        const Vec u = vec(need(a, "u", "measure atom"), dim, "measure atom u");
        const json& m = a.contains("mass") ? a.at("mass") : need(a, "w", "measure atom");
        atoms.push_back({u, to_double(m, "measure atom mass")});
      }
      return SphericalMeasure::atomic(dim, atoms);
    }
  } catch (const json::exception& e) {
    fail(std::string("measure: ") + e.what());
  }
  fail("measure: unrecognized spec " + j.dump());
}

json measure_to_json(const SphericalMeasure& m) {
  if (m.is_atomic()) {
    json atoms = json::array();
    for (const auto& a : m.atoms()) atoms.push_back({{"u", vec_json(a.u, m.dim())}, {"mass", a.mass}});
    return {{"dim", m.dim()}, {"atoms", atoms}};
  }
  if (m.spec().is_null()) throw DomainError("density '" + m.name() + "' has no serializable spec");
  json j = m.spec();
  j["dim"] = m.dim();
  return j;
}

SignedSphericalMeasure signed_measure_from_json(const json& in) {
  const json j = resolve(in);
  const int dim = dim_of(j, 2);
  std::vector<Vec> dirs;
  std::vector<double> w;
  try {
    for (const auto& a : need(j, "atoms", "measure")) {
      dirs.push_back(vec(need(a, "u", "measure atom"), dim, "measure atom u"));
      w.push_back(to_double(need(a, "w", "measure atom"), "measure atom w"));
    }
  } catch (const json::exception& e) {
    fail(std::string("measure: ") + e.what());
  }
  SignedSphericalMeasure m(dim, dirs, w, j.contains("meta") ? j.at("meta") : json::object());
  // keep the stored total so a re-export is bit-identical
  if (j.contains("total")) m.total = to_double(j.at("total"), "measure total");
  return m;
}

json signed_measure_to_json(const SignedSphericalMeasure& m) { return m.to_json(); }

Polytope body_from_json(const json& in, int dim) {
  const json j = resolve(in);
  dim = dim_of(j, dim);
  try {
    if (j.is_string()) return builtin_body(dim, j.get<std::string>());
    if (j.is_object() && j.contains("builtin")) return builtin_body(dim, j.at("builtin").get<std::string>());
    if (j.is_object() && j.contains("normals")) {
      std::vector<Vec> n;
      for (const auto& u : j.at("normals")) n.push_back(vec(u, dim, "body normal"));
      return Polytope::from_halfspaces(dim, n, doubles(need(j, "support", "body"), "body support"));
    }
    if (j.is_object() && j.contains("points")) {
      std::vector<Vec> pts;
      for (const auto& x : j.at("points")) pts.push_back(vec(x, dim, "body point"));
      return Polytope::from_points(dim, pts);
    }
  } catch (const json::exception& e) {
    fail(std::string("body: ") + e.what());
  }
  fail("body: unrecognized spec " + j.dump());
}

json body_to_json(const Polytope& P) {
  json n = json::array();
  json h = json::array();
  for (int i = 0; i < P.size(); ++i) {
    n.push_back(vec_json(P.normal(i), P.dim()));
    h.push_back(P.support(i));
  }
  return {{"dim", P.dim()}, {"normals", n}, {"support", h}};
}

Triple triple_from_json(const json& in, int dim, const json& lambda) {
  const json j = resolve(in);
  dim = dim_of(j, dim);
  if (j.is_string()) return builtin_triple(j.get<std::string>(), measure_from_json(lambda, dim));
  if (!j.is_object()) fail("theta: expected a builtin name or an object");
  const json& lam = j.contains("lambda") ? j.at("lambda") : lambda;
  return Triple(function_from_json(need(j, "G", "theta")), function_from_json(need(j, "Psi", "theta")),
                measure_from_json(lam, dim));
}

json triple_to_json(const Triple& t) {
  json j = {{"G", function_to_json(t.G)}, {"Psi", function_to_json(t.Psi)}, {"lambda", measure_to_json(t.lambda)}};
  j["dim"] = t.dim();
  return j;
}

SolverOptions options_from_json(const json& j) {
  SolverOptions o;
  if (j.is_null()) return o;
  if (!j.is_object()) fail("options: expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& k = it.key();
    const auto& v = it.value();
    try {
      if (k == "tol") o.tol = v.get<double>();
      else if (k == "max_iter") o.max_iter = v.get<int>();
      else if (k == "R_max") o.R_max = v.get<double>();
      else if (k == "lift_every") o.lift_every = v.get<int>();
      else if (k == "vanishes_on_great_subspheres") o.vanishes_on_great_subspheres = v.get<bool>();
      else if (k == "override_hypotheses") o.override_hypotheses = v.get<bool>();
      else if (k == "seed") o.seed = v.get<unsigned long long>();
      else if (k == "quad_level") o.quad_level = v.get<int>();
      else fail("options: unknown key '" + k + "'");
    } catch (const json::exception& e) {
      fail("options." + k + ": " + e.what());
    }
  }
  return o;
}

Problem problem_from_json(const json& in) {
  const json j = resolve(in);
  const int dim = dim_of(j, 2);
  const SolverOptions o = options_from_json(j.contains("options") ? j.at("options") : json());
  Triple th = triple_from_json(need(j, "theta", "problem"), dim, j.contains("lambda") ? j.at("lambda") : "uniform");
  SphericalMeasure mu = measure_from_json(need(j, "mu", "problem"), dim);
  const SolveMode mode = parse_mode(need(j, "mode", "problem").get<std::string>());
  return {ProblemSpec(std::move(th), std::move(mu), mode, o), o};
}

json problem_to_json(const ProblemSpec& spec, const SolverOptions& opts) {
  return {{"dim", spec.theta.dim()},
          {"theta", triple_to_json(spec.theta)},
          {"mu", measure_to_json(spec.mu)},
          {"mode", mode_name(spec.mode)},
          {"options", opts.to_json()}};
}

json solution_to_json(const Solution& s) {
  return {{"status", status_name(s.status)},
          {"iterations", s.iterations},
          {"multiplier", s.multiplier},
          {"residual_sup", s.residual_sup},
          {"target", s.target},
          {"body", body_to_json(s.K)},
          {"radii", s.radii},
          {"traces", {{"objective", s.objective_trace}, {"constraint", s.constraint_trace}, {"residual", s.residual_trace}}},
          {"hypotheses", s.hypotheses.to_json()},
          {"meta", s.meta},
          {"message", s.message}};
}

Solution solution_from_json(const json& in) {
  const json j = resolve(in);
  try {
    Solution s{.K = body_from_json(need(j, "body", "solution"))};
    const std::string st = need(j, "status", "solution").get<std::string>();
    bool known = false;
    for (auto c : {SolveStatus::CONVERGED, SolveStatus::NON_CONVERGED, SolveStatus::DIVERGED}) {
      if (st == status_name(c)) {
        s.status = c;
        known = true;
      }
    }
    if (!known) fail("solution: unknown status '" + st + "'");
    s.iterations = need(j, "iterations", "solution").get<int>();
    s.multiplier = to_double(need(j, "multiplier", "solution"), "solution multiplier");
    s.residual_sup = to_double(need(j, "residual_sup", "solution"), "solution residual_sup");
    s.target = need(j, "target", "solution").get<std::string>();
    s.radii = doubles(need(j, "radii", "solution"), "solution radii");
    const auto& t = need(j, "traces", "solution");
    s.objective_trace = doubles(need(t, "objective", "traces"), "traces");
    s.constraint_trace = doubles(need(t, "constraint", "traces"), "traces");
    s.residual_trace = doubles(need(t, "residual", "traces"), "traces");
    const auto& h = need(j, "hypotheses", "solution");
    s.hypotheses.mode = h.at("mode").get<std::string>();
    for (const auto& c : h.at("checks")) s.hypotheses.checks.emplace_back(c.at("check").get<std::string>(), c.at("passed").get<bool>());
    s.hypotheses.passed = h.at("passed").get<bool>();
    s.hypotheses.overridden = h.at("overridden").get<bool>();
    s.hypotheses.target = h.at("target").get<std::string>();
    s.hypotheses.uses_tilde = h.at("uses_tilde").get<bool>();
    s.meta = j.contains("meta") ? j.at("meta") : json::object();
    s.message = j.contains("message") ? j.at("message").get<std::string>() : "";
    return s;
  } catch (const json::exception& e) {
    fail(std::string("solution: ") + e.what());
  }
}

namespace {

std::string axes(int dim, const char* prefix) {
  std::string s = std::string(prefix) + "x," + prefix + "y";
  if (dim == 3) s += std::string(",") + prefix + "z";
  return s;
}

std::string row(const Vec& u, int dim) {
  std::string s = num(u.x()) + "," + num(u.y());
  if (dim == 3) s += "," + num(u.z());
  return s;
}

}  // namespace

std::string measure_csv(const SignedSphericalMeasure& m) {
  std::ostringstream os;
  os << "# meta: " << m.meta.dump() << "\n# total: " << num(m.total) << "\n";
  os << axes(m.dim, "u_") << ",w\n";
  for (std::size_t i = 0; i < m.size(); ++i) os << row(m.directions[i], m.dim) << "," << num(m.weights[i]) << "\n";
  return os.str();
}

std::string body_facets_csv(const Polytope& P) {
  std::ostringstream os;
  os << axes(P.dim(), "u_") << ",h,active,area\n";
  for (int i = 0; i < P.size(); ++i) {
    os << row(P.normal(i), P.dim()) << "," << num(P.support(i)) << "," << (P.active(i) ? 1 : 0) << ","
       << num(P.facet_area(i)) << "\n";
  }
  return os.str();
}

std::string body_vertices_csv(const Polytope& P) {
  std::ostringstream os;
  if (P.dim() == 2) {
    // boundary in counterclockwise order, closed
    os << "x,y\n";
    std::vector<Vec> v = P.vertices();
    std::sort(v.begin(), v.end(), [](const Vec& a, const Vec& b) { return angle2(a) < angle2(b); });
    if (!v.empty()) v.push_back(v.front());
    for (const auto& x : v) os << row(x, 2) << "\n";
    return os.str();
  }
  os << "facet,x,y,z\n";
  for (int i = 0; i < P.size(); ++i) {
    for (const auto& x : P.facet_vertices(i)) os << i << "," << row(x, 3) << "\n";
  }
  return os.str();
}

std::string traces_csv(const Solution& s) {
  std::ostringstream os;
  os << "# status: " << status_name(s.status) << "\n";
  os << "step,objective,constraint,residual\n";
  for (std::size_t k = 0; k < s.objective_trace.size(); ++k) {
    os << k << "," << num(s.objective_trace[k]) << "," << num(s.constraint_trace[k]) << "," << num(s.residual_trace[k])
       << "\n";
  }
  return os.str();
}

std::string variation_csv(const VariationReport& r) {
  std::ostringstream os;
  os << "# " << r.description << "\n# A: " << num(r.A) << "\n# pass: " << (r.pass ? "true" : "false") << "\n";
  os << "eps,D,error,floor\n";
  for (const auto& x : r.rows) os << num(x.eps) << "," << num(x.D) << "," << num(x.error) << "," << num(x.floor) << "\n";
  return os.str();
}

}  // namespace mogi::io
