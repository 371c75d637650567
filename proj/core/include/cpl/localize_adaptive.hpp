#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "cpl/confidence_set.hpp"
#include "cpl/confseq.hpp"
#include "cpl/detectors.hpp"
#include "cpl/profile.hpp"
#include "cpl/survival.hpp"

namespace cpl {

// Accepts when 1 + #{sims < m_obs} <= ceil((1 - c)(B + 1)). Infinite sentinels order naturally.
bool rank_quantile_accept(double m_obs, std::span<const double> sims, double c);

// Test-statistic recipes computed on a stream of length tau (log scale).
struct KnownLRRecipe {
  Distribution pre, post;
};
struct ProfilePostRecipe {
  ProfileModel model;
  double theta0 = 0.0;
};
struct DoubleProfileRecipe {
  ProfileModel model;
};
using StatRecipe = std::variant<KnownLRRecipe, ProfilePostRecipe, DoubleProfileRecipe>;

// log M_t for every t = 1..data.size() (index t-1).
std::vector<double> recipe_log_stats(const StatRecipe& recipe, std::span<const double> data);
double recipe_log_stat(const StatRecipe& recipe, std::span<const double> data, Index t);

// M_{t,L} from a simulated run: -inf if it stopped before t or never stopped with
// L infinite; +inf if censored at a finite L; otherwise M_t on the stopped prefix.
double truncated_statistic(const StopOutcome& outcome, Index t, bool L_finite, const StatRecipe& recipe,
                           std::span<const double> sim_prefix);

struct AdaptiveConfig {
  double alpha = 0.05;
  double beta = 0.025;
  double gamma = 0.025;
  int N = 100;
  int B = 100;
  Index L = kNever;                 // kNever means L = infinity
  Index horizon = 1000000;          // safety horizon used when L is infinite
  SurvivalKind survival_kind = SurvivalKind::asymptotic;
  int nb_r = 2;
  bool pfa = false;                 // use r_t = 1 (detectors that control PFA)
  double theta0_star = 0.0;         // LFD parameter used to calibrate the composite-pre method
  double poisson_c = 1.0;

  bool L_finite() const { return L != kNever; }
  Index cap() const { return L_finite() ? L : horizon; }
  void validate() const;
};

struct AdaptiveDiagnostics {
  std::vector<Index> empty_param_set;  // t rejected because S or S' was empty
  std::vector<Index> censored_bounds;  // t whose bound hit the safety horizon
};

// Known pre- and post-change models (Markov chains allowed).
ConfidenceSetT adaptive_set_known(std::span<const double> data, Index tau, const AdaptiveConfig& cfg,
                                  const Distribution& pre, const Distribution& post, const DetectorSpec& spec,
                                  std::uint64_t seed);
// Same with an explicit statistic recipe (used by the PFA variants and tests).
ConfidenceSetT adaptive_set_known(std::span<const double> data, Index tau, const AdaptiveConfig& cfg,
                                  const Distribution& pre, const Distribution& post, const DetectorSpec& spec,
                                  const StatRecipe& recipe, std::uint64_t seed);

// Known theta0, parametric post-change family restricted to theta1_space.
ConfidenceSetT adaptive_set_comp_post(std::span<const double> data, Index tau, const AdaptiveConfig& cfg,
                                      const ProfileModel& model, double theta0, const Interval& theta1_space,
                                      const DetectorSpec& spec, std::uint64_t seed,
                                      AdaptiveDiagnostics* diag = nullptr, SurvivalCurve* curve_out = nullptr);

// Parametric pre- and post-change families; calibrated at cfg.theta0_star.
ConfidenceSetT adaptive_set_comp(std::span<const double> data, Index tau, const AdaptiveConfig& cfg,
                                 const ProfileModel& model, const Interval& theta0_space,
                                 const Interval& theta1_space, const DetectorSpec& spec, std::uint64_t seed,
                                 AdaptiveDiagnostics* diag = nullptr, SurvivalCurve* curve_out = nullptr);

enum class SupVariant { V, U };

// Sup-bounds over the parameter box. For V the pre range must be the singleton {theta0}.
double sup_bound_gaussian(Index t, const MonotoneBracket& bracket, bool L_finite, const CoupledNoise& noise,
                          double sd, ParamRange pre, ParamRange post, SupVariant variant);
double sup_bound_poisson(Index t, const MonotoneBracket& bracket, bool L_finite, const CoupledNoise& noise,
                         ParamRange pre, ParamRange post, SupVariant variant);

// Candidate parameters of the Poisson bound on positions [a, b] inside range.
std::vector<double> poisson_candidates(const CoupledNoise& noise, Index a, Index b, ParamRange range);

// Grid version of the two composite methods: accept t when some grid pair admits M_t.
struct GridSpec {
  int pre_points = 1;   // ignored when theta0 is known
  int post_points = 50;
  std::vector<double> fixed_pre, fixed_post;  // when non-empty, used verbatim for every t
};
std::vector<double> equispaced(ParamRange r, int points);

ConfidenceSetT grid_threshold(std::span<const double> data, Index tau, const AdaptiveConfig& cfg,
                              const ProfileModel& model, std::optional<double> theta0_known,
                              const Interval& theta0_space, const Interval& theta1_space, const GridSpec& grid,
                              const DetectorSpec& spec, std::uint64_t seed);

}  // namespace cpl
