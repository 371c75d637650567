#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cpl/detectors.hpp"
#include "cpl/models.hpp"

namespace cpl {

enum class SurvivalKind { asymptotic, plain, negative_binomial };

std::string to_string(SurvivalKind k);
SurvivalKind survival_kind_from_string(const std::string& s);

// Estimates r_t of P(tau >= t) under no change, for t = 1..tau_cap.
struct SurvivalCurve {
  std::vector<double> r;      // r[t-1]
  SurvivalKind kind = SurvivalKind::asymptotic;
  int N = 0;                  // runs used (all kinds)
  std::vector<int> N_t;       // negative binomial only
  std::uint64_t seed = 0;

  // r_t; t beyond the stored range reuses the last value.
  double at(Index t) const;
  std::string to_csv() const;
};

// The unit curve r_t = 1 used by PFA-controlled detectors.
SurvivalCurve unit_curve(Index tau);

// Stopping time of one no-change stream, truncated at cap (a truncated run reports cap).
Index simulate_null_stop(const Distribution& pre, const DetectorSpec& spec, Index cap, std::uint64_t key);

// Curve from already simulated truncated stopping times (asymptotic or plain).
SurvivalCurve survival_from_times(const std::vector<Index>& times, Index tau_cap, SurvivalKind kind);

// Negative binomial curve from an ordered sequence of truncated stopping times.
// Throws std::runtime_error when fewer than r runs survive to tau_cap.
SurvivalCurve negative_binomial_from_times(const std::vector<Index>& times, Index tau_cap, int r);

SurvivalCurve estimate_survival(const Distribution& pre, const DetectorSpec& spec, Index tau_cap, int N,
                                SurvivalKind kind, std::uint64_t seed, int nb_r = 2, int max_runs = 1000000);

}  // namespace cpl
