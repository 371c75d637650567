#include <cmath>

#include "cpl/eprocesses.hpp"
#include "cpl/rng.hpp"
#include "doctest.h"
#include "oracle_values.hpp"

using namespace cpl;

TEST_CASE("numeraire root") {
  const NumeraireSolution a = numeraire_lambda_star(0.25);
  CHECK(a.lambda_star == doctest::Approx(oracle::numeraire_025).epsilon(1e-10));
  CHECK(std::abs(a.residual) <= 1e-10);
  const double l = a.lambda_star;
  CHECK(std::exp(l) * (1 - l * 0.25) == doctest::Approx(1 + l * 0.75).epsilon(1e-10));
  const NumeraireSolution b = numeraire_lambda_star(0.45);
  CHECK(b.lambda_star == doctest::Approx(oracle::numeraire_045).epsilon(1e-9));
  CHECK(a.lambda_star > b.lambda_star);
  CHECK_THROWS(numeraire_lambda_star(1.2));
}

TEST_CASE("likelihood ratio e-processes") {
  const Distribution n0 = Distribution::gaussian(0, 1), n1 = Distribution::gaussian(1, 1);
  const std::vector<double> half(10, 0.5);
  const EProcessSpec fwd = make_lr(Direction::forward, n1, n0);
  for (Index n = 3; n <= 10; ++n) CHECK(forward_eval(fwd, half, 3, n) == doctest::Approx(0.0));
  const std::vector<double> x{0.2, 1.7, -0.4};
  CHECK(forward_eval(fwd, x, 2, 2) == doctest::Approx(1.7 - 0.5));
  const EProcessSpec same = make_lr(Direction::backward, n0, n0);
  CHECK(backward_eval(same, x, 4, 1) == doctest::Approx(0.0));
  CHECK_THROWS_AS(forward_eval(fwd, x, 3, 2), std::domain_error);
  CHECK_THROWS_AS(backward_eval(same, x, 2, 2), std::domain_error);
}

TEST_CASE("numeraire at the boundary mean is identically one") {
  const EProcessSpec s = make_numeraire(Direction::forward, 0.25);
  const std::vector<double> x(12, 0.25);
  CHECK(forward_eval(s, x, 1, 12) == doctest::Approx(0.0));
}

TEST_CASE("histogram plug-in without history matches the null") {
  const EProcessSpec b = make_histogram(Direction::backward, 10);
  const std::vector<double> x{0.13, 0.55, 0.91, 0.42};
  CHECK(backward_eval(b, x, 4, 3) == doctest::Approx(0.0));
  const EProcessSpec f = make_histogram(Direction::forward, 10);
  CHECK(forward_eval(f, x, 2, 2) == doctest::Approx(0.0));
  // second forward step in the same bin doubles the predictive mass: (1+1)/(10+1) / 0.1
  const std::vector<double> y{0.51, 0.52};
  CHECK(forward_eval(f, y, 1, 2) == doctest::Approx(std::log(2.0 / 11.0 / 0.1)));
}

TEST_CASE("huber e-process clips backward factors") {
  const Distribution n0 = Distribution::gaussian(0, 1), n1 = Distribution::gaussian(1, 1);
  const EProcessSpec s = make_huber(Direction::backward, n1, n0, 0.5, 2.0);
  const std::vector<double> x{0.5 + std::log(5.0), 0.0};
  CHECK(backward_eval(s, x, 2, 1) == doctest::Approx(std::log(2.0)));
}

namespace {
// Monte Carlo mean of exp(log process) over independent null streams.
template <class Draw, class Eval>
std::pair<double, double> mc_mean(int reps, Draw draw, Eval eval) {
  double s = 0.0, s2 = 0.0;
  for (int r = 0; r < reps; ++r) {
    const double v = std::exp(eval(draw(r)));
    s += v;
    s2 += v * v;
  }
  const double m = s / reps;
  return {m, std::sqrt(std::max(s2 / reps - m * m, 0.0) / reps)};
}
}  // namespace

TEST_CASE("e-processes have expectation at most one under their nulls") {
  const int reps = 20000, len = 12;
  SUBCASE("numeraire under U[0, 0.5]") {
    const EProcessSpec s = make_numeraire(Direction::forward, 0.25);
    auto [m, se] = mc_mean(
        reps,
        [&](int r) {
          std::vector<double> x(len);
          for (int i = 0; i < len; ++i) x[i] = 0.5 * counter_uniform(21, r, i);
          return x;
        },
        [&](const std::vector<double>& x) { return forward_eval(s, x, 1, len); });
    CHECK(m <= 1.0 + 3.0 * se);
  }
  SUBCASE("histogram under the uniform null") {
    const EProcessSpec s = make_histogram(Direction::backward, 10);
    auto [m, se] = mc_mean(
        reps,
        [&](int r) {
          std::vector<double> x(len);
          for (int i = 0; i < len; ++i) x[i] = counter_uniform(22, r, i);
          return x;
        },
        [&](const std::vector<double>& x) { return backward_eval(s, x, len + 1, 1); });
    CHECK(std::abs(m - 1.0) <= 3.0 * se);
  }
  SUBCASE("sub-gaussian plug-in under N(0,1)") {
    const EProcessSpec s = make_subgaussian(Direction::forward, 0.5);
    const Distribution n0 = Distribution::gaussian(0, 1);
    auto [m, se] = mc_mean(
        reps,
        [&](int r) {
          std::vector<double> x(len);
          for (int i = 0; i < len; ++i) x[i] = n0.quantile(counter_uniform(23, r, i));
          return x;
        },
        [&](const std::vector<double>& x) { return forward_eval(s, x, 1, len); });
    CHECK(m <= 1.0 + 3.0 * se);
  }
}
