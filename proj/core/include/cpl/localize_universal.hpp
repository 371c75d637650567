#pragma once

#include <span>
#include <variant>
#include <vector>

#include "cpl/confidence_set.hpp"
#include "cpl/eprocesses.hpp"
#include "cpl/profile.hpp"
#include "cpl/survival.hpp"

namespace cpl {

struct ChangepointEstimate {
  Index t_hat = 1;
  std::vector<double> criterion;  // log criterion for start t at index t-1
};

// Point-estimate criteria: argmax over t of a forward scan evaluated at tau.
struct EProcessCriterion {
  EProcessSpec fwd;  // e.g. the likelihood ratio f1/f0 or a detector-native e-process
};
struct ProfileCriterion {
  ProfileModel model;
  double theta0 = 0.0;
  ParamRange theta1{-kInf, kInf};  // MLE constraint
};
struct DoubleProfileCriterion {
  ProfileModel model;
  ParamRange theta0{-kInf, kInf};
  ParamRange theta1{-kInf, kInf};
};
using PointCriterion = std::variant<EProcessCriterion, ProfileCriterion, DoubleProfileCriterion>;

ChangepointEstimate point_estimate(const PointCriterion& criterion, std::span<const double> data, Index tau);

// log M_t of the universal method; -inf for t > tau.
double test_statistic(Index t, const ChangepointEstimate& est, const EProcessSpec& fwd, const EProcessSpec& bwd,
                      std::span<const double> data, Index tau);

enum class UniversalMode { known_pre, lfd_pre, pfa };

// {t <= tau : log M_t < log 2 - log(alpha r_t)}. In pfa mode the curve is ignored (r_t = 1).
// In lfd mode the curve must come from simulations under the declared F0*.
ConfidenceSetT universal_set(std::span<const double> data, Index tau, double alpha, const SurvivalCurve& curve,
                             UniversalMode mode, const PointCriterion& criterion, const EProcessSpec& fwd,
                             const EProcessSpec& bwd);

}  // namespace cpl
