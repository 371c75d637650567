#pragma once

#include <concepts>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cpl/models.hpp"
#include "cpl/numerics.hpp"

namespace cpl {

enum class DetectorFamily {
  cusum_lr,
  weighted_cusum,
  wcs_ripr,
  sr,
  lr_pfa,
  mixture_lr_pfa,
  mixture_lr_ripr_pfa,
  e_hist,
  e_subgaussian,
  huber_cusum,
  markov_cusum,
  wu_reflected,
};

std::string to_string(DetectorFamily f);
DetectorFamily detector_family_from_string(const std::string& s);

struct DetectorSpec {
  DetectorFamily family = DetectorFamily::cusum_lr;
  double threshold = 1000.0;            // A; for wu_reflected this is the drift threshold d
  Distribution pre;                     // f0, the boundary density f_{theta0*}, or the e_hist null
  std::vector<Distribution> atoms;      // post-change densities
  std::vector<double> masses;           // weights of the atoms
  int bins = 10;                        // e_hist
  double clip_lo = 0.0;                 // huber c'
  double clip_hi = kInf;                // huber c''
  double subgaussian_boundary = 0.5;    // e_subgaussian
  // Drop start rows of weighted families once they are dominated by every
  // future row. Stopping times are unaffected; see DetectorState::statistic.
  bool prune = true;

  void validate() const;  // throws std::invalid_argument
  double log_threshold() const;
  nlohmann::json to_json() const;
  static DetectorSpec from_json(const nlohmann::json& j);
};

// Weights w_i = e^{-(i-1)/2} - e^{-i/2} for i < m and w_m = e^{-(m-1)/2}.
std::vector<double> truncated_geometric_weights(int m);

DetectorSpec make_cusum(const Distribution& pre, const Distribution& post, double A);
DetectorSpec make_weighted(DetectorFamily family, const Distribution& pre, const ParametricFamily& fam,
                           double start, double step, int n_atoms, double A);
DetectorSpec make_huber_cusum(double mu0, double mu1, double sd, double c_lo, double c_hi, double A);
DetectorSpec make_e_hist(const Distribution& pre, int bins, double A);
DetectorSpec make_e_subgaussian(double boundary, double A);
DetectorSpec make_wu(double d);

struct DetectorState {
  Index n = 0;
  bool stopped = false;
  double prev = kNoPrev;
  double stat = 0.0;                 // log scale scalar; raw T_n for wu_reflected
  std::vector<double> atom_stat;     // per-atom log values (sr and pfa mixtures)
  std::vector<double> rows;          // weighted families: per-start rows of per-atom log products
  std::vector<double> hist_logprod;  // e_hist: log product per start row
  std::vector<int> hist_counts;      // e_hist: bins counts per start row
  double running_sum = 0.0;          // e_subgaussian

  // Detector statistic in log scale (raw scale for wu_reflected). With pruning
  // enabled the weighted families report the exact value whenever it is positive.
  double statistic(const DetectorSpec& spec) const;
};

DetectorState init_state(const DetectorSpec& spec);
// Advances the state by one observation; throws std::logic_error after a stop.
void detector_step(const DetectorSpec& spec, DetectorState& state, double x);

struct StopOutcome {
  bool stopped = false;
  Index time = 0;  // tau when stopped, else the cap
};

template <class ValueAt>
  requires std::invocable<ValueAt&, Index>
StopOutcome run_to_stop(const DetectorSpec& spec, ValueAt&& value_at, Index cap) {
  DetectorState st = init_state(spec);
  for (Index n = 1; n <= cap; ++n) {
    detector_step(spec, st, value_at(n));
    if (st.stopped) return {true, n};
  }
  return {false, cap};
}

StopOutcome run_to_stop(const DetectorSpec& spec, const std::vector<double>& data, Index cap = kNever);

// Shared randomness for one simulated stream. value(n, theta) is X_n under
// parameter theta; the underlying draws never depend on theta.
class CoupledNoise {
 public:
  static CoupledNoise gaussian(std::uint64_t key, double sd = 1.0);
  static CoupledNoise poisson(std::uint64_t key, double lambda);

  bool is_poisson() const { return poisson_; }
  double lambda() const { return lambda_; }
  double value(Index n, double theta) const;
  double eps(Index n) const;                 // gaussian: standard normal draw at n
  int count(Index n) const;                  // poisson: Pois(lambda) count at n
  double thin_uniform(Index n, int k) const; // poisson: k-th uniform attached to n

 private:
  void extend(Index n) const;
  std::uint64_t key_ = 0;
  bool poisson_ = false;
  double sd_ = 1.0;
  double lambda_ = 1.0;
  mutable std::vector<double> eps_;
  mutable std::vector<int> counts_;
  mutable std::vector<std::vector<double>> uniforms_;
};

struct ParamRange {
  double lo = 0.0, hi = 0.0;
};

struct MonotoneBracket {
  Index t1 = kNever;
  Index t2 = kNever;
  bool t1_stopped = false;
  bool t2_stopped = false;
};

// +1 when the statistic is nondecreasing in every observation, -1 when
// nonincreasing, 0 when no monotonicity is known.
int monotone_direction(const DetectorSpec& spec);

// Stopping times of the coupled path X_n = value(n, n < t ? theta_pre : theta_post)
// at the fastest and slowest corners of pre x post.
MonotoneBracket stop_time_bounds(const DetectorSpec& spec, const CoupledNoise& noise, Index t, ParamRange pre,
                                 ParamRange post, Index cap);

}  // namespace cpl
