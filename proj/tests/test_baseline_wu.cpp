#include <cmath>

#include "cpl/baseline_wu.hpp"
#include "cpl/rng.hpp"
#include "doctest.h"
#include "oracle_values.hpp"

using namespace cpl;

TEST_CASE("wu constants") {
  CHECK(wu_s(0.05, 0.25) == doctest::Approx(oracle::wu_s_005_025).epsilon(1e-12));
  CHECK(wu_c(0.05, 0.25) == doctest::Approx(oracle::wu_c_005_025).epsilon(1e-12));
  CHECK(wu_c(0.05, 0.3) == doctest::Approx(oracle::wu_c_005_03).epsilon(1e-12));
}

TEST_CASE("reflected path examples") {
  const ReflectedPath a = reflected_cusum(std::vector<double>{10, -3, 2}, 8.59);
  CHECK(a.stopped);
  CHECK(a.tau_prime == 1);
  CHECK(a.nu_hat == 0);
  const ReflectedPath b = reflected_cusum(std::vector<double>{1, -2, 1, -2, 1}, 8.59);
  CHECK_FALSE(b.stopped);
  CHECK(b.tau_prime == 5);
  CHECK(b.zero_indices == std::vector<Index>{0, 2, 4});
}

TEST_CASE("zero set matches brute force") {
  for (std::uint64_t r = 0; r < 100; ++r) {
    std::vector<double> x(60);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = 2.0 * counter_uniform(r, i, 0) - 1.1;
    const ReflectedPath p = reflected_cusum(x, 4.0);
    // recompute T by direct max recursion
    std::vector<Index> zeros{0};
    double T = 0.0;
    Index stop = static_cast<Index>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      T = std::max(0.0, T + x[i]);
      if (T >= 4.0) {
        stop = static_cast<Index>(i) + 1;
        break;
      }
      if (T == 0.0 && static_cast<Index>(i) + 1 < stop) zeros.push_back(static_cast<Index>(i) + 1);
    }
    while (!zeros.empty() && zeros.back() >= stop) zeros.pop_back();
    CHECK(p.tau_prime == stop);
    CHECK(p.zero_indices == zeros);
    CHECK(p.nu_hat == zeros.back());
  }
}

TEST_CASE("wu set structure") {
  // 12 excursions to zero, then a climb above c and d
  std::vector<double> x;
  for (int k = 0; k < 12; ++k) {
    x.push_back(0.5);
    x.push_back(-1.0);
  }
  for (int k = 0; k < 12; ++k) x.push_back(1.0);
  const ReflectedPath p = reflected_cusum(x, 8.59);
  REQUIRE(p.stopped);
  const ConfidenceSetT s = wu_set(p, 0.05, 0.25);
  CHECK(s.index_shift);
  CHECK(s.t_hat == p.nu_hat);
  CHECK(s.flagged.empty());
  // left end is the ceil|s| = 9th zero before nu_hat
  const std::size_t z = p.zero_indices.size();
  CHECK(s.members.front() == p.zero_indices[z - 10]);
  for (Index m : s.members)
    if (m >= p.nu_hat) CHECK(p.T[static_cast<std::size_t>(m)] <= wu_c(0.05, 0.25));
  // too few zeros clamps to index 0 and flags the set
  const ReflectedPath q = reflected_cusum(std::vector<double>(10, 1.0), 8.59);
  const ConfidenceSetT sq = wu_set(q, 0.05, 0.25);
  CHECK(sq.members.front() == 0);
  CHECK_FALSE(sq.flagged.empty());
}

TEST_CASE("wu drift interval") {
  ReflectedPath p;
  p.T.assign(21, 0.0);
  p.T[20] = 12.0;
  p.tau_prime = 20;
  p.nu_hat = 0;
  const Interval ci = wu_theta1_ci(p, 10.0, 0.05);
  CHECK(ci.lo == doctest::Approx(oracle::wu_ci_lo).epsilon(1e-10));
  CHECK(ci.hi == doctest::Approx(oracle::wu_ci_hi).epsilon(1e-10));
  CHECK((ci.lo + ci.hi) / 2.0 < 0.6);  // the bias correction is subtracted
  p.T[20] = 0.5;
  CHECK(wu_theta1_ci(p, 10.0, 0.05).empty);
}
