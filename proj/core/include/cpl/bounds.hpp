#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include <nlohmann/json.hpp>

#include "cpl/detectors.hpp"
#include "cpl/models.hpp"

namespace cpl {

// E_{d0} (f1/f0)^s; closed form for equal-sd Gaussians, quadrature or summation otherwise.
// Throws std::domain_error when the expectation is not finite.
double rho_eval(const Distribution& d0, const Distribution& d1, double s);

struct RhoMinimum {
  double s = 0.5;
  double rho = 1.0;
};
RhoMinimum minimize_rho(const std::function<double(double)>& rho);

struct HardnessProfile {
  std::function<double(double)> rho0;  // E_{F0} (f1/f0)^s
  std::function<double(double)> rho1;  // E_{F1} (f0/f1)^s
  double s0 = 0.5, s1 = 0.5;
  double rho0_min = 1.0, rho1_min = 1.0;
};
HardnessProfile hardness_profile(const Distribution& f0, const Distribution& f1);

enum class BoundMode {
  plain,                   // last term is the delay
  sensitive,               // last term min{delay, Psi}
  composite,               // LFD form of the pre-change term, delay last term
  composite_well_behaved,  // LFD form with the Psi refinement
};
std::string to_string(BoundMode m);
BoundMode bound_mode_from_string(const std::string& s);

struct LengthBound {
  double term_pre = 0.0;
  double term_mid = 1.0;
  double term_post = 0.0;
  double total = 0.0;
  double delta = 0.0;
  double psi = 0.0;  // the refinement candidate; +inf when rho1 is degenerate
  BoundMode mode = BoundMode::plain;
  nlohmann::json to_json() const;
};

// delay is E(|tau - T| | tau >= T). Throws std::domain_error when rho0_min == 1.
LengthBound length_bound(const HardnessProfile& h, double alpha, double p_T, Index T, double delay, BoundMode mode);

// Monte Carlo conditional delay E(tau - T | tau >= T) over runs streams with change at T.
struct DelayEstimate {
  double mean = 0.0;
  int conditional_runs = 0;
  int runs = 0;
};
DelayEstimate estimate_delay(const Distribution& pre, const Distribution& post, Index T, const DetectorSpec& spec,
                             int runs, std::uint64_t seed, Index cap = 1000000);

}  // namespace cpl
