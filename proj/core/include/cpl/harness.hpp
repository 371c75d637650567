#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cpl/confidence_set.hpp"
#include "cpl/confseq.hpp"
#include "cpl/detectors.hpp"
#include "cpl/models.hpp"
#include "cpl/survival.hpp"

namespace cpl {

// Raised for invalid or unsupported experiment configurations (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string setting = "I";
  Index T = 100;
  std::optional<double> A;                 // detector threshold; per-setting default
  std::vector<std::string> methods;        // empty: the setting's defaults
  double alpha = 0.05;                     // adaptive and Wu level
  std::optional<double> alpha_universal;   // per-setting default
  double beta = 0.025;
  double gamma = 0.025;
  double eta = 0.05;
  int runs = 200;
  int N = 100;
  int B = 100;
  Index L = kNever;
  Index horizon = 1000000;
  std::uint64_t seed = 1;
  std::string out;
  int threads = 0;                         // 0: CPL_THREADS or hardware concurrency
  SurvivalKind survival = SurvivalKind::asymptotic;

  // setting parameters
  std::optional<double> theta0_hi;         // sup Theta0 (III, C_pfa, poisson_III)
  std::optional<double> theta1_lo;         // inf Theta1 (II, III, B_pfa, C_pfa, poisson_II/III)
  double eps = 0.01;                       // VI
  std::string post_density = "quartic_decay";  // IV: quartic_decay or step_mixture
  std::string family = "gaussian";         // A_pfa: gaussian or poisson
  double wu_mu = 0.25;
  double wu_d = 8.59;
  bool param_sets = false;                 // II and poisson_II: also build theta1 sets

  void validate() const;  // throws ConfigError
  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);  // throws ConfigError
};

struct MethodOutput {
  ConfidenceSetT set;
  std::optional<ParamConfidenceSet> param;
};

// Localizes on data[0..tau) with randomness derived from seed.
using LocalizeFn = std::function<MethodOutput(std::span<const double> data, Index tau, std::uint64_t seed)>;

struct MethodPlan {
  std::string name;
  LocalizeFn run;
};

struct SettingPlan {
  std::string id;
  Distribution pre, post;      // data-generating models
  DetectorSpec detector;
  std::vector<MethodPlan> methods;
  std::optional<double> theta1_true;
};

std::vector<std::string> known_settings();
SettingPlan plan_setting(const ExperimentConfig& cfg);  // throws ConfigError

struct MethodRecord {
  std::string method;
  Index t_hat = 0;
  std::size_t size = 0;
  bool covered = false;
  std::size_t flagged = 0;
  bool has_param = false;
  double param_lo = 0.0, param_hi = 0.0;
  bool param_covered = false;
};

struct RunRecord {
  int run = 0;
  Index tau = 0;
  bool censored = false;
  bool false_alarm = false;
  std::vector<MethodRecord> methods;
};

struct SummaryRow {
  std::string method;
  int runs = 0;
  int censored = 0;
  int conditional_runs = 0;
  bool conditional_defined = false;
  double conditional_coverage = 0.0, conditional_coverage_se = 0.0;
  double marginal_coverage = 0.0, marginal_coverage_se = 0.0;
  double mean_conditional_size = 0.0;
  double mean_abs_deviation = 0.0;
  double mean_delay = 0.0;
  double param_coverage = 0.0, param_coverage_se = 0.0;
  double mean_param_lo = 0.0, mean_param_hi = 0.0;
  bool has_param = false;
  nlohmann::json to_json() const;
};

// One stream: sample, detect and localize with every method of the plan.
RunRecord run_once(const SettingPlan& plan, const ExperimentConfig& cfg, int run);

struct ExperimentResult {
  std::vector<RunRecord> records;
  std::vector<SummaryRow> summary;
};

// Runs are distributed over threads; records are ordered by run index so the output
// does not depend on the thread count.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Conditional statistics over runs with tau >= T; marginal ones over every uncensored run.
SummaryRow aggregate(const std::vector<RunRecord>& records, const std::string& method, Index T);

std::string records_csv(const std::vector<RunRecord>& records);
nlohmann::json summary_json(const ExperimentConfig& cfg, const std::vector<SummaryRow>& rows);
// Writes records.csv and summary.json into cfg.out (created if needed).
void write_outputs(const ExperimentConfig& cfg, const ExperimentResult& r);

struct DualityRow {
  Index t = 0;
  double rejection = 0.0;
  double budget = 0.0;
  double se = 0.0;
  bool pass = false;
};

// Empirical rejection rate of the universal test for H_{0,t} (change at t) against the
// budget alpha * P(tau >= t), with a 3 SE margin. Requires a setting with a universal method.
std::vector<DualityRow> duality_check(const ExperimentConfig& cfg, const std::vector<Index>& t_grid, int reps,
                                      int survival_runs = 2000);

int thread_count(int requested);

}  // namespace cpl
