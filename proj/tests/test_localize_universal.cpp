#include <cmath>

#include "cpl/localize_universal.hpp"
#include "doctest.h"
#include "oracle_values.hpp"

using namespace cpl;

namespace {
const Distribution N0 = Distribution::gaussian(0, 1);
const Distribution N1 = Distribution::gaussian(1, 1);
const std::vector<double> kData{-0.1, 0.05, 2.0, 1.8};
const EProcessSpec kFwd = make_lr(Direction::forward, N0, N1);
const EProcessSpec kBwd = make_lr(Direction::backward, N1, N0);
const PointCriterion kCrit = EProcessCriterion{make_lr(Direction::forward, N1, N0)};
}  // namespace

TEST_CASE("point estimate on the worked stream") {
  const ChangepointEstimate e = point_estimate(kCrit, kData, 4);
  CHECK(e.t_hat == static_cast<Index>(oracle::that_example));
  CHECK(e.criterion[0] == doctest::Approx(1.75));
  CHECK(e.criterion[1] == doctest::Approx(2.35));
  CHECK(e.criterion[2] == doctest::Approx(2.80));
  CHECK(e.criterion[3] == doctest::Approx(1.30));
}

TEST_CASE("point estimate edge cases") {
  CHECK(point_estimate(kCrit, std::vector<double>{5, 5, 5}, 3).t_hat == 1);
  CHECK(point_estimate(kCrit, std::vector<double>{0.5, 0.5, 0.5}, 3).t_hat == 1);  // ties go to the smaller start
  const PointCriterion prof = ProfileCriterion{{FamilyKind::gaussian_location, 1.0}, 0.0, {0.75, kInf}};
  CHECK(point_estimate(prof, kData, 4).t_hat == 3);
}

TEST_CASE("test statistic cases") {
  const ChangepointEstimate e = point_estimate(kCrit, kData, 4);
  CHECK(test_statistic(3, e, kFwd, kBwd, kData, 4) == 0.0);
  CHECK(test_statistic(5, e, kFwd, kBwd, kData, 4) == kNegInf);
  CHECK(test_statistic(2, e, kFwd, kBwd, kData, 4) == doctest::Approx(oracle::logM_t2_example));
  // t after t_hat uses the backward process over X_{t_hat}..X_{t-1}
  CHECK(test_statistic(4, e, kFwd, kBwd, kData, 4) == doctest::Approx(2.0 - 0.5));
}

TEST_CASE("universal set with unit survival") {
  const ConfidenceSetT s = universal_set(kData, 4, 0.05, unit_curve(4), UniversalMode::pfa, kCrit, kFwd, kBwd);
  CHECK(s.members == std::vector<Index>{1, 2, 3, 4});
  CHECK(s.thresholds[0] == doctest::Approx(std::log(40.0)));
  CHECK(s.t_hat == 3);
  CHECK(s.contains(s.t_hat));
}

TEST_CASE("large alpha r_t excludes everything but zero-statistic points") {
  SurvivalCurve c = unit_curve(4);
  // alpha r_t = 2.4 gives a negative log threshold, so M_t = 1 at t_hat is excluded too
  const ConfidenceSetT s = universal_set(kData, 4, 0.8, [&] {
    SurvivalCurve cc;
    cc.r = {3.0, 3.0, 3.0, 3.0};
    return cc;
  }(), UniversalMode::known_pre, kCrit, kFwd, kBwd);
  CHECK(s.members.empty());
  CHECK_THROWS(universal_set(kData, 4, 1.5, c, UniversalMode::pfa, kCrit, kFwd, kBwd));
}
