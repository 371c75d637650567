#pragma once

#include <functional>
#include <limits>
#include <span>
#include <utility>

namespace cpl {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(sum(exp(v))) with the usual max shift; returns -inf for an empty span.
double log_sum_exp(std::span<const double> v);
// log(exp(a) + exp(b)).
double log_add_exp(double a, double b);

double normal_cdf(double x);
double normal_quantile(double p);

struct MinimizeResult {
  double x;
  double fx;
};

// Golden-section search on [lo, hi] until the bracket is shorter than tol.
MinimizeResult golden_section(const std::function<double(double)>& f, double lo, double hi,
                              double tol = 1e-8);

// Root of f on [lo, hi]; requires a sign change. Throws std::runtime_error otherwise.
double find_root(const std::function<double(double)>& f, double lo, double hi,
                 double xtol = 1e-14, int max_iter = 400);

// Integral of f over [lo, hi]; either bound may be infinite.
double integrate(const std::function<double(double)>& f, double lo, double hi,
                 double rel_tol = 1e-12);

// log of I(a, b) = integral over the real line of exp(-a e^x + b x) = Gamma(b) a^{-b}.
// The integral diverges for b <= 0 or a <= 0, where +inf is returned.
double log_I(double a, double b);

}  // namespace cpl
