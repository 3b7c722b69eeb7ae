#pragma once

#include "mogi/geometry.hpp"

#include <json.hpp>

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace mogi {

enum class ClassTag : unsigned { C = 1u, CI = 2u, Cd = 4u, GI = 8u, Gd = 16u };

inline unsigned operator|(ClassTag a, ClassTag b) { return unsigned(a) | unsigned(b); }
inline unsigned operator|(unsigned a, ClassTag b) { return a | unsigned(b); }

const char* tag_name(ClassTag tag);
inline constexpr ClassTag kAllTags[] = {ClassTag::C, ClassTag::CI, ClassTag::Cd, ClassTag::GI,
                                        ClassTag::Gd};

/// Declared behaviour of t -> 0+ and t -> infinity.
enum class Limit { Zero, PosInf, NegInf, Finite, Unknown };
const char* limit_name(Limit l);

struct LimitFlags {
  Limit at_zero = Limit::Unknown;
  Limit at_infinity = Limit::Unknown;
};

/// A Musielak-Orlicz function G(ξ, t) on S^{n-1} x (0, ∞) together with its t-derivative.
/// Immutable; copies share the underlying evaluators.
class MOFunction {
 public:
  using Eval = std::function<double(const Vec&, double)>;

  MOFunction(std::string name, Eval value, Eval derivative, unsigned tags, LimitFlags limits,
             bool even_in_direction, nlohmann::json spec = nullptr, double t_min = 1e-8,
             double t_max = 1e8);

  /// Checked evaluation: throws DomainError for t outside the validity interval or
  /// non-unit ξ.
  double value(const Vec& xi, double t) const;
  double derivative(const Vec& xi, double t) const;
  double operator()(const Vec& xi, double t) const { return value(xi, t); }

  /// Unchecked evaluation for callers that already validated their inputs.
  double value_raw(const Vec& xi, double t) const { return (*value_)(xi, t); }
  double derivative_raw(const Vec& xi, double t) const { return (*derivative_)(xi, t); }

  const std::string& name() const { return name_; }
  unsigned tags() const { return tags_; }
  bool has(ClassTag tag) const { return (tags_ & unsigned(tag)) != 0; }
  const LimitFlags& limits() const { return limits_; }
  bool even_in_direction() const { return even_; }
  double t_min() const { return t_min_; }
  double t_max() const { return t_max_; }
  /// Serializable description ({"builtin": ..., "params": ...} or similar); null for
  /// user-defined functions.
  const nlohmann::json& spec() const { return spec_; }

  /// Strictly monotone in t by declaration (C_I or C_d).
  bool monotone() const { return has(ClassTag::CI) || has(ClassTag::Cd); }
  bool increasing() const { return has(ClassTag::CI); }

  void check_args(const Vec& xi, double t) const;

 private:
  friend MOFunction tilde_transform(const MOFunction& f);

  std::string name_;
  std::shared_ptr<const Eval> value_;
  std::shared_ptr<const Eval> derivative_;
  unsigned tags_;
  LimitFlags limits_;
  bool even_;
  nlohmann::json spec_;
  double t_min_, t_max_;
  // Set on functions produced by tilde_transform so a second transform restores the input.
  std::shared_ptr<const MOFunction> tilde_origin_;
};

/// g(ξ, t) = f(ξ, 1/t), g_t = -t^{-2} f_t(ξ, 1/t); increasing/decreasing tags and the
/// two limits are swapped. tilde_transform(tilde_transform(f)) returns f itself.
MOFunction tilde_transform(const MOFunction& f);

namespace builtin {
/// t^p / |p| (positive for every p != 0).
MOFunction power_over_p(double p);
/// Raw t^p.
MOFunction power(double p);
MOFunction log();
MOFunction neg_log();
/// t^n / n.
MOFunction volume(int n);
MOFunction exp_neg();
/// 1/t.
MOFunction reciprocal();
/// w(ξ) t^p with w tabulated: in 2D `weights` are values at angles 2πk/N and are
/// interpolated linearly in the angle; in 3D `directions` carry the weights and the
/// nearest one is used.
MOFunction anisotropic(int dim, std::vector<double> weights, double p,
                       std::vector<Vec> directions = {});
}  // namespace builtin

/// Looks up a builtin by name ("power_over_p", "power", "log", "neg_log", "volume",
/// "exp_neg", "reciprocal") with a params object.
MOFunction builtin_function(const std::string& name, const nlohmann::json& params);

struct TagCheck {
  ClassTag tag;
  bool declared = false;
  bool observed = false;
  bool contradiction = false;  // declared but not observed
  std::string detail;
};

struct ClassReport {
  std::string function;
  std::vector<TagCheck> tags;
  double max_derivative_error = 0.0;  // |f_t - FD| / max(1, |f_t|)
  bool derivative_ok = true;
  bool evenness_ok = true;
  std::size_t probes = 0;
  std::vector<std::string> issues;

  bool consistent() const;
  bool observed(ClassTag tag) const;
  nlohmann::json to_json() const;
};

struct ProbePoint {
  Vec xi;
  double t;
};

/// Default probe grid: a few directions times 41 log-spaced t in [1e-4, 1e4].
std::vector<ProbePoint> default_probe_grid(int dim);

/// Numerical class check. Never throws on contradictions; they are listed in the report.
ClassReport classify(const MOFunction& f, const std::vector<ProbePoint>& probes);

/// Derivative check used by classify: Richardson-extrapolated central difference.
double finite_difference_t(const MOFunction& f, const Vec& xi, double t);

}  // namespace mogi
