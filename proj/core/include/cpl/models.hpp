#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace cpl {

// Index type for observation positions. Positions are 1-based, matching the
// usual changepoint notation; kNever stands for "no change" / "never stopped".
using Index = std::int64_t;
inline constexpr Index kNever = std::numeric_limits<Index>::max();

// Sentinel for "no previous observation" when evaluating Markov transitions.
inline constexpr double kNoPrev = std::numeric_limits<double>::quiet_NaN();

class Distribution;
using DistPtr = std::shared_ptr<const Distribution>;

struct Gaussian { double mean = 0.0, sd = 1.0; };
struct Poisson { double rate = 1.0; };
struct Bernoulli { double p = 0.5; };
struct Uniform { double lo = 0.0, hi = 1.0; };
struct Exponential { double rate = 1.0; };
struct Cauchy { double loc = 0.0, scale = 1.0; };

// Named densities on [0, 1] with closed-form inverse cdfs.
enum class NamedDensity {
  quartic_decay,  // 4(1-x)^3
  step_mixture,   // 0.8 U[0,0.2] + 0.2 U[0.2,1]
};
struct Named { NamedDensity which = NamedDensity::quartic_decay; };

struct Mixture {
  std::vector<double> weights;
  std::vector<DistPtr> components;
};

// Two-state chain on {0,1}: p01 = P(1 | 0), p11 = P(1 | 1); init_p1 = P(X_1 = 1).
struct Markov2 { double p01 = 0.5, p11 = 0.5, init_p1 = 0.5; };

struct Contaminated {
  DistPtr base;
  double eps = 0.0;
  DistPtr contaminant;
};

// Least favourable densities of Huber's eps-contamination neighbourhoods of
// N(mu0, sd^2) and N(mu1, sd^2), with mu1 > mu0. role 0 gives q0, role 1 gives q1.
struct HuberLfd {
  double mu0 = 0.0, mu1 = 1.0, sd = 1.0, eps = 0.0;
  int role = 0;
  double c_lo = 1.0, c_hi = 1.0;  // c' and c''
};

struct HuberConstants {
  double c_lo;  // c'
  double c_hi;  // c''
};
HuberConstants huber_constants(double mu0, double mu1, double sd, double eps);

class Distribution {
 public:
  using Variant = std::variant<Gaussian, Poisson, Bernoulli, Uniform, Exponential, Cauchy, Named,
                               Mixture, Markov2, Contaminated, HuberLfd>;

  Distribution() : v_(Gaussian{}) {}
  Distribution(Variant v);  // validates invariants, throws std::invalid_argument

  static Distribution gaussian(double mean, double sd = 1.0) { return Distribution(Gaussian{mean, sd}); }
  static Distribution poisson(double rate) { return Distribution(Poisson{rate}); }
  static Distribution bernoulli(double p) { return Distribution(Bernoulli{p}); }
  static Distribution uniform(double lo, double hi) { return Distribution(Uniform{lo, hi}); }
  static Distribution exponential(double rate) { return Distribution(Exponential{rate}); }
  static Distribution cauchy(double loc, double scale) { return Distribution(Cauchy{loc, scale}); }
  static Distribution named(NamedDensity which) { return Distribution(Named{which}); }
  static Distribution mixture(std::vector<double> weights, std::vector<Distribution> comps);
  static Distribution markov2(double p01, double p11, double init_p1 = 0.5) {
    return Distribution(Markov2{p01, p11, init_p1});
  }
  static Distribution contaminated(const Distribution& base, double eps, const Distribution& contaminant);
  static Distribution huber_lfd(double mu0, double mu1, double sd, double eps, int role);

  const Variant& variant() const { return v_; }
  template <class T> const T* as() const { return std::get_if<T>(&v_); }

  bool is_discrete() const;
  bool is_markov() const { return std::holds_alternative<Markov2>(v_); }
  std::string kind_name() const;

  // Throws std::domain_error when x is outside the support. Returns -inf for
  // interior points of zero density. prev is only used by markov2.
  double log_density(double x, double prev = kNoPrev) const;
  double cdf(double x) const;
  double quantile(double u) const;
  double mean() const;

  // Draw from two uniforms: u drives the value by inverse cdf, v selects mixture
  // branches. Deterministic in (u, v, prev).
  double draw(double u, double v, double prev = kNoPrev) const;

  nlohmann::json to_json() const;
  static Distribution from_json(const nlohmann::json& j);

 private:
  Variant v_;
};

// One-parameter families used by the composite-class algorithms.
enum class FamilyKind { gaussian_location, gaussian_scale, poisson, exponential, bernoulli };

struct ParametricFamily {
  FamilyKind kind = FamilyKind::gaussian_location;
  double fixed = 1.0;  // sd for gaussian_location, mean for gaussian_scale; unused otherwise
  Distribution make(double theta) const;
  bool continuous() const { return kind != FamilyKind::poisson && kind != FamilyKind::bernoulli; }
};

enum class CouplingFamily { location, scale, inverse_cdf, poisson_thinning };

struct CouplingRule {
  CouplingFamily family = CouplingFamily::location;
  double base_param = 0.0;  // theta''
  ParametricFamily param_family;  // needed by inverse_cdf
};

// Maps x ~ F_{theta''} to a draw from F_theta. poisson_thinning is handled by poisson_thin.
double couple(const CouplingRule& rule, double x, double theta);
int poisson_thin(int count, const std::vector<double>& uniforms, double ratio);

struct ObservationPath {
  std::vector<double> values;  // values[n-1] is X_n
  Index change_index = kNever;
  std::uint64_t seed = 0;
};

// X_n for n < change_index from pre, otherwise from post. markov2 streams keep the
// previous state across the change. Deterministic in seed.
ObservationPath sample_path(const Distribution& pre, const Distribution& post, Index change_index,
                            Index horizon, std::uint64_t seed);

// The single draw sample_path would produce at position n given the previous value.
double draw_at(const Distribution& d, std::uint64_t key, Index n, double prev);

}  // namespace cpl
