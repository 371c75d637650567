#pragma once

#include <span>
#include <vector>

#include "cpl/detectors.hpp"
#include "cpl/models.hpp"

namespace cpl {

// Profile log-likelihoods of "change at i" for i = 1..n (returned at index i-1),
// up to an additive constant shared by every i. Gaussian families use the
// supplied known sd; constrained MLEs are clamped to the given ranges.
struct ProfileModel {
  FamilyKind kind = FamilyKind::gaussian_location;  // gaussian_location or poisson
  double sd = 1.0;
};

std::vector<double> profile_loglik_known_pre(const ProfileModel& m, std::span<const double> x, double theta0,
                                             const ParamRange* post_constraint = nullptr);
std::vector<double> profile_loglik_double(const ProfileModel& m, std::span<const double> x,
                                          const ParamRange* pre_constraint = nullptr,
                                          const ParamRange* post_constraint = nullptr);

}  // namespace cpl
