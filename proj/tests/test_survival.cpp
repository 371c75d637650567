#include <cmath>

#include "cpl/survival.hpp"
#include "doctest.h"

using namespace cpl;

TEST_CASE("asymptotic survival formula") {
  const SurvivalCurve all = survival_from_times({9, 9, 9, 9, 9}, 5, SurvivalKind::asymptotic);
  CHECK(all.at(5) == doctest::Approx(1.0));
  const SurvivalCurve none = survival_from_times({1, 1, 2, 2, 3}, 5, SurvivalKind::asymptotic);
  CHECK(none.at(5) == doctest::Approx(1.0 / 6.0));
  CHECK(none.at(2) == doctest::Approx(4.0 / 6.0));
  const SurvivalCurve plain = survival_from_times({1, 1, 2, 2, 3}, 5, SurvivalKind::plain);
  CHECK(plain.at(5) == 0.0);
  CHECK(plain.at(3) == doctest::Approx(0.2));
  CHECK(plain.at(100) == plain.at(5));
}

TEST_CASE("negative binomial survival formula") {
  // the third simulation is the second survivor at t = 5
  const SurvivalCurve c = negative_binomial_from_times({2, 7, 6}, 5, 2);
  CHECK(c.N_t[4] == 3);
  CHECK(c.at(5) == doctest::Approx(0.5));
  CHECK(c.at(1) == doctest::Approx(1.0));
  CHECK_THROWS_AS(negative_binomial_from_times({2, 7}, 5, 2), std::runtime_error);
}

TEST_CASE("unit curve and names") {
  CHECK(unit_curve(10).at(7) == 1.0);
  CHECK(survival_kind_from_string(to_string(SurvivalKind::negative_binomial)) == SurvivalKind::negative_binomial);
  CHECK_THROWS(survival_kind_from_string("geometric"));
  const SurvivalCurve c = survival_from_times({3, 3}, 2, SurvivalKind::plain);
  CHECK(c.to_csv() == "t,r_t\n1,1\n2,1\n");
}

TEST_CASE("simulated survival matches a geometric stopping time") {
  // Bernoulli cusum with A below p1/p0 stops at the first 1, so P(tau >= t) = (1 - p0)^(t-1)
  const Distribution pre = Distribution::bernoulli(0.1), post = Distribution::bernoulli(0.9);
  const DetectorSpec spec = make_cusum(pre, post, 5.0);
  const SurvivalCurve c = estimate_survival(pre, spec, 12, 20000, SurvivalKind::plain, 3);
  for (Index t : {1, 5, 12}) {
    const double truth = std::pow(0.9, static_cast<double>(t - 1));
    CHECK(std::abs(c.at(t) - truth) <= 4.0 * std::sqrt(truth * (1 - truth) / 20000.0) + 1e-12);
  }
}
