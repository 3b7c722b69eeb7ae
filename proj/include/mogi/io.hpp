#pragma once

#include "mogi/solver.hpp"
#include "mogi/variation.hpp"

#include <json.hpp>

#include <string>

namespace mogi::io {

using nlohmann::json;

/// Input file is malformed (bad JSON, missing keys, wrong shapes).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// JSON text with every floating-point number written with 17 significant digits, so
/// that dump(parse(dump(x))) == dump(x). Object keys are sorted.
std::string dump(const json& j, int indent = 2);
json parse(const std::string& text);
json load_file(const std::string& path);
void save_text(const std::string& path, const std::string& text);
void save_file(const std::string& path, const json& j);

/// A value that is either inline JSON or a path: strings ending in ".json" are read.
json resolve(const json& j);

/// Function specs: a builtin name ("log", "power:2", "volume:3"), {"builtin", "params"},
/// {"tilde": spec} or a tabulated anisotropic weight {"tabulated_weight", "power", "dim"}.
MOFunction function_from_json(const json& j);
json function_to_json(const MOFunction& f);

/// Measures: "uniform" or {"builtin", "params"} densities, or {"dim", "atoms": [{"u", "mass"}]}.
/// Atoms may carry "w" in place of "mass" (measure output files). `dim` is used when
/// the JSON does not state one.
SphericalMeasure measure_from_json(const json& j, int dim = 2);
json measure_to_json(const SphericalMeasure& m);

SignedSphericalMeasure signed_measure_from_json(const json& j);
json signed_measure_to_json(const SignedSphericalMeasure& m);

/// Bodies: a builtin name ("square", "ball:64", "random(3,12)"), {"dim", "builtin"},
/// {"dim", "normals", "support"} or {"dim", "points"}.
Polytope body_from_json(const json& j, int dim = 2);
json body_to_json(const Polytope& P);

/// Triples: a builtin name ("log-log", "reciprocal-square", ...) with λ given separately,
/// or {"G", "Psi", "lambda"}.
Triple triple_from_json(const json& j, int dim = 2, const json& lambda = "uniform");
json triple_to_json(const Triple& t);

SolverOptions options_from_json(const json& j);

/// {"dim", "theta", "mu", "mode", "options"}.
struct Problem {
  ProblemSpec spec;
  SolverOptions options;
};
Problem problem_from_json(const json& j);
json problem_to_json(const ProblemSpec& spec, const SolverOptions& opts);

json solution_to_json(const Solution& s);
Solution solution_from_json(const json& j);

/// CSV tables for plotting. Header comment lines start with '#'.
std::string measure_csv(const SignedSphericalMeasure& m);
std::string body_facets_csv(const Polytope& P);
std::string body_vertices_csv(const Polytope& P);
std::string traces_csv(const Solution& s);
std::string variation_csv(const VariationReport& r);

}  // namespace mogi::io
