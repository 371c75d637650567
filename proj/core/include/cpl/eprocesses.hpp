#pragma once

#include <span>
#include <vector>

#include "cpl/models.hpp"
#include "cpl/numerics.hpp"

namespace cpl {

enum class Direction { forward, backward };

enum class EFamily {
  likelihood_ratio,        // prod f_num / f_den
  discrete_mixture,        // sum_k w_k prod f_k / f_den
  numeraire_bounded_mean,  // prod (1 + lambda*(X - mu)) on [0,1]
  histogram_plugin,        // prod phat(X) / p0(X) with a predictable histogram
  subgaussian_plugin,      // forward: lambda_i = max{b, mean}; backward: mu_i = min{0, mean} - b
  subgaussian_running,     // nu_i = min{0, mean(X_1..X_{i-1})} - b, history from the stream start
  huber_lfd,               // prod min{max{f_num / f_den, lo}, hi}
};

struct EProcessSpec {
  Direction direction = Direction::forward;
  EFamily family = EFamily::likelihood_ratio;
  Distribution num, den;
  std::vector<Distribution> atoms;
  std::vector<double> masses;
  double mu = 0.25;
  double lambda_star = 0.0;
  int bins = 10;
  Distribution hist_null = Distribution::uniform(0.0, 1.0);
  // Use the literal window j = i-1..t-1 for the backward histogram. This window
  // contains the scored point and is not predictable; kept for comparison only.
  bool literal_window = false;
  double boundary = 0.5;
  double clip_lo = 0.0, clip_hi = kInf;
};

struct NumeraireSolution {
  double lambda_star;
  double residual;
};

NumeraireSolution numeraire_lambda_star(double mu);

EProcessSpec make_lr(Direction d, const Distribution& num, const Distribution& den);
EProcessSpec make_mixture(Direction d, std::vector<Distribution> atoms, std::vector<double> masses,
                          const Distribution& den);
EProcessSpec make_numeraire(Direction d, double mu);
EProcessSpec make_histogram(Direction d, int bins, const Distribution& null = Distribution::uniform(0.0, 1.0));
EProcessSpec make_subgaussian(Direction d, double boundary);
EProcessSpec make_subgaussian_running(double boundary);
EProcessSpec make_huber(Direction d, const Distribution& num, const Distribution& den, double lo, double hi);

// log R_n^{(t)}: product over i = t..n. data[i-1] holds X_i. Requires n >= t.
double forward_eval(const EProcessSpec& spec, std::span<const double> data, Index t, Index n);
// log S_n^{(t)}: product over i = n..t-1 processed from t-1 down to n. Requires n < t.
double backward_eval(const EProcessSpec& spec, std::span<const double> data, Index t, Index n);

}  // namespace cpl
