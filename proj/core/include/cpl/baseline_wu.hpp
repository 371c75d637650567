#pragma once

#include <span>
#include <vector>

#include "cpl/confidence_set.hpp"
#include "cpl/confseq.hpp"
#include "cpl/models.hpp"

namespace cpl {

// Reflected CUSUM T_n = max(0, T_{n-1} + x_n) run until T_n >= d or the data end.
struct ReflectedPath {
  std::vector<double> T;             // T[0] = 0, ..., T[tau_prime]
  Index tau_prime = 0;
  bool stopped = false;
  Index nu_hat = 0;                  // last k < tau_prime with T_k = 0
  std::vector<Index> zero_indices;   // all k < tau_prime with T_k = 0, ascending
};

ReflectedPath reflected_cusum(std::span<const double> data, double d);

// Wu's approximate drift constants for the symmetric Gaussian case.
double wu_s(double alpha, double theta1);
double wu_c(double alpha, double theta1);

// Members index the last pre-change point nu, so the changepoint T is covered when T-1 is a member.
// When fewer than ceil(|s|) zeros precede nu_hat the left end clamps to 0 and the set is flagged.
ConfidenceSetT wu_set(const ReflectedPath& path, double alpha, double theta1);

// Bias-corrected interval for the post-change drift. Returns an empty interval when
// d * theta_hat <= 13/16, where the variance correction is undefined.
Interval wu_theta1_ci(const ReflectedPath& path, double d, double alpha_prime);

}  // namespace cpl
