#include "acceptance.hpp"
#include "mogi/io.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

using namespace mogi;
using nlohmann::json;

namespace {

// exit codes
enum Exit {
  kOk = 0,
  kCheckFailed = 1,  // a verification, residual bound or self test did not pass
  kUsage = 2,        // bad flags or unreadable input
  kPrecondition = 3,
  kGeometry = 4,
  kNonConverged = 5,
  kDiverged = 6,
  kInternal = 7,
};

struct Common {
  int dim = 2;
  std::string theta = "log-log";
  std::string body = "square";
  std::string lambda = "uniform";
  std::string mu;
  std::string out;
  bool csv = false;
};

json arg(const std::string& s) {
  // inline JSON objects/arrays, otherwise a name or a path
  if (!s.empty() && (s.front() == '{' || s.front() == '[')) return io::parse(s);
  return json(s);
}

SphericalMeasure lambda_of(const Common& c) { return io::measure_from_json(arg(c.lambda), c.dim); }
Triple theta_of(const Common& c) { return io::triple_from_json(arg(c.theta), c.dim, arg(c.lambda)); }
Polytope body_of(const Common& c) { return io::body_from_json(arg(c.body), c.dim); }

void emit(const Common& c, const json& j, const std::string& csv = "") {
  const std::string text = c.csv && !csv.empty() ? csv : io::dump(j);
  if (c.out.empty()) {
    std::cout << text;
  } else {
    io::save_text(c.out, text);
  }
}

void add_common(CLI::App* cmd, Common& c, bool theta, bool body, bool mu) {
  cmd->add_option("--dim", c.dim, "Ambient dimension (2 or 3)")->check(CLI::IsMember({2, 3}));
  cmd->add_option("--lambda", c.lambda, "λ: uniform, builtin JSON or file");
  if (theta) cmd->add_option("--theta", c.theta, "Θ: builtin triple name, JSON or file");
  if (body) cmd->add_option("--body", c.body, "Body: builtin name, JSON or file");
  if (mu) cmd->add_option("--mu", c.mu, "Atomic μ: JSON or file");
  cmd->add_option("--out", c.out, "Output file (default stdout)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Musielak-Orlicz-Gauss image measures, variational checks and solver"};
  app.require_subcommand(0, 1);
  bool selftest = false;
  app.add_flag("--selftest", selftest, "Run the quick tier of the acceptance suite");

  Common c;
  int code = kOk;

  // classify-function
  auto* cls = app.add_subcommand("classify-function", "Probe a function's declared classes");
  std::string fn = "log";
  cls->add_option("--fn", fn, "Function: builtin name, JSON or file")->required();
  add_common(cls, c, false, false, false);
  cls->callback([&] {
    const auto rep = classify(io::function_from_json(arg(fn)), default_probe_grid(c.dim));
    emit(c, rep.to_json());
    code = rep.consistent() ? kOk : kCheckFailed;
  });

  // dual-volume
  auto* dv = app.add_subcommand("dual-volume", "General dual volume of a body");
  add_common(dv, c, true, true, false);
  dv->callback([&] {
    const auto th = theta_of(c);
    const auto K = body_of(c);
    emit(c, {{"dual_volume", dual_volume(th.G, th.lambda, K)}, {"theta", io::triple_to_json(th)}, {"body", io::body_to_json(K)}});
  });

  // entropy
  auto* en = app.add_subcommand("entropy", "Entropy of a body");
  add_common(en, c, false, true, false);
  en->callback([&] {
    const auto lam = lambda_of(c);
    const auto K = body_of(c);
    emit(c, {{"entropy", entropy(lam, K)}, {"lambda", io::measure_to_json(lam)}, {"body", io::body_to_json(K)}});
  });

  // measure
  auto* ms = app.add_subcommand("measure", "Measures of a polytope");
  std::string kind = "tilde";
  ms->add_option("--kind", kind, "tilde | polar | surface | jtilde | j | pullback")
      ->check(CLI::IsMember({"tilde", "polar", "surface", "jtilde", "j", "pullback"}));
  ms->add_flag("--csv", c.csv, "Write CSV instead of JSON");
  add_common(ms, c, true, true, false);
  ms->callback([&] {
    const auto K = body_of(c);
    SignedSphericalMeasure m;
    if (kind == "pullback") {
      m = gauss_image_pullback(lambda_of(c), K);
    } else {
      const auto th = theta_of(c);
      if (kind == "tilde") m = mo_measure(th, K);
      else if (kind == "polar") m = polar_mo_measure(th, K);
      else if (kind == "surface") m = mo_surface_area_measure(th.Psi, K);
      else m = j_measure(th.Psi, th.lambda, K, kind == "j");
      m.meta["theta"] = io::triple_to_json(th);
    }
    m.meta["kind"] = kind;
    emit(c, io::signed_measure_to_json(m), io::measure_csv(m));
  });

  // pullback
  auto* pb = app.add_subcommand("pullback", "Reverse radial Gauss image pullback of λ");
  pb->add_flag("--csv", c.csv, "Write CSV instead of JSON");
  add_common(pb, c, false, true, false);
  pb->callback([&] {
    auto m = gauss_image_pullback(lambda_of(c), body_of(c));
    m.meta["kind"] = "pullback";
    emit(c, io::signed_measure_to_json(m), io::measure_csv(m));
  });

  // verify-variation
  auto* vv = app.add_subcommand("verify-variation", "Finite-difference check of a variational formula");
  std::string scenario = "default";
  std::vector<double> eps;
  vv->add_option("--scenario", scenario, "Scenario name (see --list)");
  vv->add_option("--eps", eps, "Decreasing positive step list");
  bool list = false;
  vv->add_flag("--list", list, "List scenario names");
  vv->add_flag("--csv", c.csv, "Write CSV instead of JSON");
  vv->add_option("--out", c.out, "Output file (default stdout)");
  vv->callback([&] {
    if (list) {
      for (const auto& n : variation_scenario_names()) std::cout << n << "\n";
      std::cout << "default\n";
      return;
    }
    const auto rep = run_variation_scenario(variation_scenario(scenario), eps.empty() ? default_eps_list() : eps);
    emit(c, rep.to_json(), io::variation_csv(rep));
    code = rep.pass ? kOk : kCheckFailed;
  });

  // ma-residual
  auto* ma = app.add_subcommand("ma-residual", "2D Monge-Ampère residual on a uniform grid");
  int samples = 512;
  double amp = 0.0, freq = 2.0, tau = 1.0, pmu = 1.0, bound = -1.0;
  std::string hfile;
  ma->add_option("--samples", samples, "Grid size");
  ma->add_option("--amplitude", amp, "h = 1 + a cos(k t)");
  ma->add_option("--freq", freq, "k in h = 1 + a cos(k t)");
  ma->add_option("--support", hfile, "Support samples: JSON {\"h\": [...]} or file (overrides the formula)");
  ma->add_option("--tau", tau, "Constant τ");
  ma->add_option("--pmu", pmu, "Constant density of μ");
  ma->add_option("--max", bound, "Fail (exit 1) when the max residual exceeds this bound");
  add_common(ma, c, true, false, false);
  ma->callback([&] {
    std::vector<double> h;
    if (!hfile.empty()) {
      h = io::resolve(arg(hfile)).at("h").get<std::vector<double>>();
    } else {
      for (int k = 0; k < samples; ++k) h.push_back(1.0 + amp * std::cos(freq * kTwoPi * k / samples));
    }
    c.dim = 2;
    const auto r = monge_ampere_residual_2d(theta_of(c), h, [&](const Vec&) { return pmu; }, tau);
    emit(c, {{"max_abs", r.max_abs}, {"l2", r.l2}, {"theta", r.theta}, {"residual", r.residual}, {"tau", tau}});
    code = bound >= 0.0 && r.max_abs > bound ? kCheckFailed : kOk;
  });

  // solve
  auto* sv = app.add_subcommand("solve", "Solve a Gauss image problem for an atomic μ");
  std::string problem, mode = "GAUSS_IMAGE";
  SolverOptions opts;
  bool even_flag = false;
  sv->add_option("--problem", problem, "Problem JSON or file (theta, mu, mode, options)");
  sv->add_option("--mode", mode, "GENERAL_MIN | GAUSS_IMAGE | EVEN_MIN | EVEN_MAX | ENTROPY_EVEN");
  sv->add_option("--tol", opts.tol, "r_KKT tolerance");
  sv->add_option("--max-iter", opts.max_iter, "Iteration cap");
  sv->add_option("--r-max", opts.R_max, "Radius band for the divergence guard");
  sv->add_option("--seed", opts.seed, "Echoed into the output");
  sv->add_flag("--vanishes-on-subspheres", even_flag, "Declare that μ vanishes on great subspheres");
  sv->add_flag("--override-hypotheses", opts.override_hypotheses, "Run even when hypotheses fail");
  add_common(sv, c, true, false, true);
  sv->callback([&] {
    opts.vanishes_on_great_subspheres = opts.vanishes_on_great_subspheres || even_flag;
    std::optional<ProblemSpec> spec;
    if (!problem.empty()) {
      auto p = io::problem_from_json(arg(problem));
      // flags given on the command line win over the file
      if (sv->count("--tol")) p.options.tol = opts.tol;
      if (sv->count("--max-iter")) p.options.max_iter = opts.max_iter;
      if (sv->count("--r-max")) p.options.R_max = opts.R_max;
      if (sv->count("--seed")) p.options.seed = opts.seed;
      if (even_flag) p.options.vanishes_on_great_subspheres = true;
      if (opts.override_hypotheses) p.options.override_hypotheses = true;
      opts = p.options;
      spec.emplace(ProblemSpec(p.spec.theta, p.spec.mu, p.spec.mode, opts));
    } else {
      if (c.mu.empty()) throw CLI::ValidationError("solve", "--mu or --problem is required");
      spec.emplace(theta_of(c), io::measure_from_json(arg(c.mu), c.dim), parse_mode(mode), opts);
    }
    const auto s = solve(*spec, opts);
    json j = io::solution_to_json(s);
    j["problem"] = io::problem_to_json(*spec, opts);
    if (c.out.empty()) {
      std::cout << io::dump(j);
    } else {
      io::save_file(c.out, j);
    }
    std::cerr << status_name(s.status) << " iterations " << s.iterations << " residual " << s.residual_sup
              << " multiplier " << s.multiplier << "\n";
    code = s.status == SolveStatus::CONVERGED ? kOk : s.status == SolveStatus::DIVERGED ? kDiverged : kNonConverged;
  });

  // residual
  auto* rs = app.add_subcommand("residual", "Target-equation residual of a body against μ");
  std::string which = "tilde", solution;
  double rbound = -1.0;
  rs->add_option("--which", which, "tilde | polar")->check(CLI::IsMember({"tilde", "polar"}));
  rs->add_option("--solution", solution, "Take the body from a solution file");
  rs->add_option("--max", rbound, "Fail (exit 1) when the residual exceeds this bound");
  add_common(rs, c, true, true, true);
  rs->callback([&] {
    if (c.mu.empty()) throw CLI::ValidationError("residual", "--mu is required");
    const auto K = solution.empty() ? body_of(c) : io::solution_from_json(arg(solution)).K;
    c.dim = K.dim();
    const auto r = residual(theta_of(c), io::measure_from_json(arg(c.mu), c.dim), K,
                            which == "tilde" ? ResidualKind::Tilde : ResidualKind::Polar);
    emit(c, {{"residual", r.sup}, {"multiplier", r.multiplier}, {"per_atom", r.per_atom}, {"unmatched", r.unmatched}});
    code = rbound >= 0.0 && r.sup > rbound ? kCheckFailed : kOk;
  });

  // export
  auto* ex = app.add_subcommand("export", "Convert solution or measure files (JSON or CSV tables)");
  std::string in, table = "auto";
  ex->add_option("--in", in, "Solution, measure, body or variation report file")->required();
  ex->add_option("--table", table, "auto | json | measure | facets | vertices | traces | variation")
      ->check(CLI::IsMember({"auto", "json", "measure", "facets", "vertices", "traces", "variation"}));
  ex->add_option("--out", c.out, "Output file (default stdout)");
  ex->callback([&] {
    const json j = io::load_file(in);
    const bool is_solution = j.contains("status") && j.contains("body");
    const bool is_measure = j.contains("atoms") && j.contains("total");
    const bool is_body = j.contains("normals");
    std::string text;
    if (table == "json") {
      if (is_solution) {
        json out = io::solution_to_json(io::solution_from_json(j));
        if (j.contains("problem")) out["problem"] = j.at("problem");  // echoed input, kept verbatim
        text = io::dump(out);
      } else if (is_measure) text = io::dump(io::signed_measure_to_json(io::signed_measure_from_json(j)));
      else if (is_body) text = io::dump(io::body_to_json(io::body_from_json(j)));
      else text = io::dump(j);
    } else if (table == "measure" || (table == "auto" && is_measure)) {
      text = io::measure_csv(io::signed_measure_from_json(j));
    } else if (table == "traces" || (table == "auto" && is_solution)) {
      text = io::traces_csv(io::solution_from_json(j));
    } else if (table == "facets" || table == "vertices" || (table == "auto" && is_body)) {
      const auto K = io::body_from_json(is_solution ? j.at("body") : j);
      text = table == "vertices" ? io::body_vertices_csv(K) : io::body_facets_csv(K);
    } else if (table == "variation" || (table == "auto" && j.contains("rows"))) {
      std::string csv = "# " + j.value("description", std::string()) + "\neps,D,error,floor\n";
      for (const auto& r : j.at("rows")) {
        csv += io::dump(r.at("eps"), 0) + "," + io::dump(r.at("D"), 0) + "," + io::dump(r.at("error"), 0) + "," +
               io::dump(r.at("floor"), 0) + "\n";
      }
      text = csv;
    } else {
      throw io::ParseError("export: cannot tell what '" + in + "' holds; pass --table");
    }
    if (c.out.empty()) {
      std::cout << text;
    } else {
      io::save_text(c.out, text);
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  } catch (const io::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const PreconditionError& e) {
    std::cerr << "precondition error: " << e.what() << "\n";
    return kPrecondition;
  } catch (const MeasureFormError& e) {
    std::cerr << "measure form error: " << e.what() << "\n";
    return kPrecondition;
  } catch (const RangeError& e) {
    std::cerr << "range error: " << e.what() << "\n";
    return kPrecondition;
  } catch (const GeometryError& e) {
    std::cerr << "geometry error: " << e.what() << "\n";
    return kGeometry;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kPrecondition;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInternal;
  }

  if (selftest) {
    const auto results = acceptance::run_all(acceptance::Tier::Quick, &std::cout);
    for (const auto& r : results) {
      if (!r.pass) code = kCheckFailed;
    }
    std::cout << (code == kOk ? "selftest: pass" : "selftest: FAIL") << std::endl;
  } else if (app.get_subcommands().empty()) {
    std::cout << app.help();
    return kUsage;
  }
  return code;
}
