#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cpl/confidence_set.hpp"
#include "cpl/detectors.hpp"
#include "cpl/survival.hpp"

namespace cpl {

struct Interval {
  double lo = -kInf, hi = kInf;
  bool empty = false;

  static Interval all() { return {}; }
  static Interval none() { return {0.0, 0.0, true}; }
  bool contains(double x) const { return !empty && lo <= x && x <= hi; }
  double length() const { return empty ? 0.0 : hi - lo; }
  Interval intersect(const Interval& o) const;
  ParamRange range() const { return {lo, hi}; }
  nlohmann::json to_json() const;
};

// s_n(beta) = sqrt(loglog(2n) + 0.72 log(10.4 / beta)).
double gaussian_cs_radius(Index n, double beta, double sd = 1.0);

Interval gaussian_cs(std::span<const double> window, double coverage, double sd = 1.0,
                     const Interval& space = Interval::all());
Interval gaussian_ci(std::span<const double> window, double coverage, double sd = 1.0,
                     const Interval& space = Interval::all());
Interval poisson_cs(std::span<const double> window, double coverage, double c = 1.0,
                    const Interval& space = Interval::all());

// Boundary function of the Poisson mixture confidence sequence; the set is {theta : h <= 0}.
double poisson_cs_boundary(double n, double sum, double beta, double c, double theta);

enum class ParamTarget { theta0, theta1 };

struct ParamConfidenceSet {
  std::vector<Interval> parts;  // disjoint and sorted
  ParamTarget target = ParamTarget::theta1;
  double alpha = 0.0, eta = 0.0;
  bool flagged_empty = false;

  bool contains(double x) const;
  double total_length() const;
  Interval hull() const;
  nlohmann::json to_json() const;
};

// Merges overlapping or touching intervals into a disjoint sorted union.
std::vector<Interval> normalize_union(std::vector<Interval> parts);

enum class IntervalKind { gaussian_cs, gaussian_ci, poisson_cs };

struct IntervalConstructor {
  IntervalKind kind = IntervalKind::gaussian_cs;
  double sd = 1.0;
  double c = 1.0;
  Interval space = Interval::all();
  Interval operator()(std::span<const double> window, double coverage) const;
};

// theta1: union over t in C of CS(X_t..X_tau; 1 - eta r_t); theta0: union of CI(X_1..X_{t-1}; 1 - eta r_t).
ParamConfidenceSet param_set_union(const ConfidenceSetT& set_t, std::span<const double> data,
                                   const SurvivalCurve& curve, double eta, ParamTarget target,
                                   const IntervalConstructor& ctor);

}  // namespace cpl
