#include <cmath>

#include "cpl/bounds.hpp"
#include "doctest.h"
#include "oracle_values.hpp"

using namespace cpl;

namespace {
const Distribution N0 = Distribution::gaussian(0, 1);
const Distribution N1 = Distribution::gaussian(1, 1);
}  // namespace

TEST_CASE("rho evaluation") {
  CHECK(rho_eval(N0, N1, 0.5) == doctest::Approx(oracle::rho_gauss_half).epsilon(1e-12));
  CHECK(rho_eval(N0, N1, 0.0) == doctest::Approx(1.0));
  CHECK(rho_eval(N0, N1, 1.0) == doctest::Approx(1.0));
  CHECK(rho_eval(Distribution::poisson(1), Distribution::poisson(2), 0.3) ==
        doctest::Approx(oracle::rho_pois_03).epsilon(1e-10));
  // unequal variances go through quadrature
  const Distribution g1 = Distribution::gaussian(0.5, 2.0);
  CHECK(rho_eval(N0, g1, oracle::rho_unequal_smin) == doctest::Approx(oracle::rho_unequal_min).epsilon(1e-8));
}

TEST_CASE("rho minimisation") {
  const HardnessProfile h = hardness_profile(N0, N1);
  CHECK(h.s0 == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(h.s1 == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(h.rho0_min < 1.0);
  const Distribution g1 = Distribution::gaussian(0.5, 2.0);
  const RhoMinimum m = minimize_rho([&](double s) { return rho_eval(N0, g1, s); });
  CHECK(m.s == doctest::Approx(oracle::rho_unequal_smin).epsilon(1e-6));
  CHECK(m.rho == doctest::Approx(oracle::rho_unequal_min).epsilon(1e-9));
}

TEST_CASE("length bound terms") {
  const HardnessProfile h = hardness_profile(N0, N1);
  const LengthBound b = length_bound(h, 0.05, 0.9, 100, 12.0, BoundMode::plain);
  CHECK(b.term_pre == doctest::Approx(oracle::term_pre_setting1).epsilon(1e-6));
  CHECK(b.term_mid == 1.0);
  CHECK(b.term_post == 12.0);
  CHECK(b.total == doctest::Approx(b.term_pre + 13.0));
  CHECK(length_bound(h, 0.05, 0.9, 1, 3.0, BoundMode::plain).term_pre == 0.0);
  const LengthBound s = length_bound(h, 0.05, 0.9, 100, 1e6, BoundMode::sensitive);
  CHECK(s.term_post == doctest::Approx(s.psi));
  // the composite geometric factor adds exactly the k = 0 term
  const LengthBound c = length_bound(h, 0.05, 0.9, 100, 12.0, BoundMode::composite);
  CHECK(c.term_pre - b.term_pre == doctest::Approx(std::pow(40.0, h.s0) * std::pow(0.9, -(h.s0 + 1.0))));
  const HardnessProfile same = hardness_profile(N0, N0);
  CHECK_THROWS_AS(length_bound(same, 0.05, 0.9, 100, 1.0, BoundMode::plain), std::domain_error);
  CHECK(bound_mode_from_string(to_string(BoundMode::composite_well_behaved)) == BoundMode::composite_well_behaved);
}
