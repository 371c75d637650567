#include <cmath>

#include "cpl/confseq.hpp"
#include "cpl/numerics.hpp"
#include "doctest.h"
#include "oracle_values.hpp"

using namespace cpl;

TEST_CASE("gaussian confidence sequence radius") {
  CHECK(gaussian_cs_radius(100, 0.05) == doctest::Approx(oracle::cs_radius_100_005).epsilon(1e-12));
  const std::vector<double> w(100, 1.2);
  const Interval i = gaussian_cs(w, 0.95);
  CHECK(i.lo == doctest::Approx(1.2 - oracle::cs_radius_100_005));
  CHECK(i.hi == doctest::Approx(1.2 + oracle::cs_radius_100_005));
  const double floor = std::sqrt(std::log(std::log(200.0)) + 0.72 * std::log(10.4)) / 10.0;
  CHECK(gaussian_cs_radius(100, 1.0 - 1e-12) == doctest::Approx(floor).epsilon(1e-9));
  CHECK(gaussian_cs(w, 0.95, 1.0, Interval{1.1, kInf}).lo == 1.1);
  CHECK(gaussian_cs(w, 0.95, 1.0, Interval{2.0, kInf}).empty);
  CHECK_THROWS_AS(gaussian_cs(std::vector<double>{}, 0.95), std::domain_error);
}

TEST_CASE("gaussian confidence interval") {
  const std::vector<double> w{0.1, 0.1, 0.1, 0.1};
  const Interval i = gaussian_ci(w, 0.95);
  CHECK(i.lo == doctest::Approx(0.1 - oracle::ci_z_0025 / 2.0));
  CHECK(i.hi == doctest::Approx(0.1 + oracle::ci_z_0025 / 2.0));
  const Interval j = gaussian_ci(w, 1.0 - 2.0 * normal_cdf(-1.0));
  CHECK(j.hi - j.lo == doctest::Approx(1.0));
}

TEST_CASE("log I matches quadrature") {
  const double a[] = {0.5, 1, 2, 5};
  const double ref[4][4] = {
      {oracle::logI_0p5_0p5, oracle::logI_0p5_1, oracle::logI_0p5_2, oracle::logI_0p5_5},
      {oracle::logI_1_0p5, oracle::logI_1_1, oracle::logI_1_2, oracle::logI_1_5},
      {oracle::logI_2_0p5, oracle::logI_2_1, oracle::logI_2_2, oracle::logI_2_5},
      {oracle::logI_5_0p5, oracle::logI_5_1, oracle::logI_5_2, oracle::logI_5_5},
  };
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(std::abs(log_I(a[i], a[j]) - ref[i][j]) <= 1e-8);
  CHECK(std::exp(log_I(2, 3)) == doctest::Approx(0.25));
  CHECK(log_I(1, 0) == kInf);
}

TEST_CASE("poisson confidence sequence") {
  const std::vector<double> w{2, 1, 3, 2, 2, 4, 1, 2, 0, 3};
  const Interval i = poisson_cs(w, 0.95);
  REQUIRE_FALSE(i.empty);
  CHECK(i.contains(2.0));
  // endpoints are roots of the boundary function
  if (i.lo > 0) CHECK(std::abs(poisson_cs_boundary(10, 20, 0.05, 1.0, i.lo)) < 1e-8);
  CHECK(std::abs(poisson_cs_boundary(10, 20, 0.05, 1.0, i.hi)) < 1e-8);
  // smaller beta widens the set toward the whole space
  const Interval wide = poisson_cs(w, 1.0 - 1e-12);
  CHECK(wide.lo <= i.lo);
  CHECK(wide.hi >= i.hi);
  CHECK(poisson_cs(w, 0.95, 1.0, Interval{2.5, kInf}).lo == 2.5);
}

TEST_CASE("unions of intervals") {
  const std::vector<Interval> u = normalize_union({{1.0, 1.5}, {0.9, 1.4}, Interval::none(), {3.0, 4.0}});
  REQUIRE(u.size() == 2);
  CHECK(u[0].lo == 0.9);
  CHECK(u[0].hi == 1.5);
  CHECK(u[1].lo == 3.0);
}

TEST_CASE("parameter set union over the changepoint set") {
  ConfidenceSetT c;
  c.members = {3, 4};
  c.tau = 6;
  const std::vector<double> data{0, 0, 1.2, 1.3, 1.1, 1.4};
  const ParamConfidenceSet p =
      param_set_union(c, data, unit_curve(6), 0.05, ParamTarget::theta1, {IntervalKind::gaussian_cs, 1.0});
  const Interval a = gaussian_cs(std::span<const double>(data).subspan(2), 0.95);
  const Interval b = gaussian_cs(std::span<const double>(data).subspan(3), 0.95);
  REQUIRE(p.parts.size() == 1);
  CHECK(p.parts[0].lo == doctest::Approx(std::min(a.lo, b.lo)));
  CHECK(p.parts[0].hi == doctest::Approx(std::max(a.hi, b.hi)));

  c.members = {4};
  const ParamConfidenceSet single =
      param_set_union(c, data, unit_curve(6), 0.05, ParamTarget::theta1, {IntervalKind::gaussian_cs, 1.0});
  CHECK(single.hull().lo == doctest::Approx(b.lo));
  CHECK(single.hull().hi == doctest::Approx(b.hi));

  c.members.clear();
  CHECK(param_set_union(c, data, unit_curve(6), 0.05, ParamTarget::theta1, {}).flagged_empty);
}
