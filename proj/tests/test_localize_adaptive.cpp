#include <algorithm>
#include <cmath>

#include "cpl/localize_adaptive.hpp"
#include "cpl/rng.hpp"
#include "doctest.h"

using namespace cpl;

namespace {
const Distribution N0 = Distribution::gaussian(0, 1);
const Distribution N1 = Distribution::gaussian(1, 1);
const ProfileModel kGauss{FamilyKind::gaussian_location, 1.0};

// brute force log M_t = max_j l_j - l_t for known densities
std::vector<double> brute_known(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> l(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += i < j ? N0.log_density(x[i]) : N1.log_density(x[i]);
    l[j] = s;
  }
  const double mx = *std::max_element(l.begin(), l.end());
  for (double& v : l) v = mx - v;
  return l;
}
}  // namespace

TEST_CASE("rank acceptance rule") {
  CHECK_FALSE(rank_quantile_accept(5.0, std::vector<double>{1, 2, 3}, 0.25));
  CHECK(rank_quantile_accept(2.0, std::vector<double>{2, 2, 2}, 0.25));
  CHECK(rank_quantile_accept(1e9, std::vector<double>{1, 2, 3}, 0.001));  // k = B + 1
  CHECK(rank_quantile_accept(3.0, std::vector<double>{kInf}, 0.05));
  CHECK_FALSE(rank_quantile_accept(kInf, std::vector<double>{1.0}, 0.6));
}

TEST_CASE("recipes against brute force") {
  const ObservationPath p = sample_path(N0, N1, 15, 30, 4);
  const std::vector<double> fast = recipe_log_stats(KnownLRRecipe{N0, N1}, p.values);
  const std::vector<double> slow = brute_known(p.values);
  for (std::size_t i = 0; i < fast.size(); ++i) CHECK(fast[i] == doctest::Approx(slow[i]).epsilon(1e-10));
  const std::vector<double> prof = recipe_log_stats(ProfilePostRecipe{kGauss, 0.0}, p.values);
  CHECK(*std::min_element(prof.begin(), prof.end()) == doctest::Approx(0.0));
  CHECK(recipe_log_stat(KnownLRRecipe{N0, N1}, p.values, 40) == kNegInf);
}

TEST_CASE("truncated statistic cases") {
  const std::vector<double> path{0.1, 0.3, 1.2, 2.0, 1.1};
  const StatRecipe r = KnownLRRecipe{N0, N1};
  CHECK(truncated_statistic({true, 3}, 4, false, r, path) == kNegInf);
  CHECK(truncated_statistic({false, 200}, 4, true, r, path) == kInf);
  CHECK(truncated_statistic({false, 200}, 4, false, r, path) == kNegInf);
  const std::vector<double> pre4(path.begin(), path.begin() + 4);
  CHECK(truncated_statistic({true, 4}, 4, false, r, path) == doctest::Approx(recipe_log_stat(r, pre4, 4)));
}

TEST_CASE("adaptive config validation") {
  AdaptiveConfig c;
  CHECK_NOTHROW(c.validate());
  c.alpha = 0.96;
  CHECK_THROWS(c.validate());
  c = {};
  c.B = 0;
  CHECK_THROWS(c.validate());
}

TEST_CASE("algorithm 1 on a clear change") {
  const DetectorSpec spec = make_cusum(N0, N1, 1000);
  const ObservationPath p = sample_path(N0, N1, 50, 400, 11);
  const StopOutcome o = run_to_stop(spec, p.values);
  REQUIRE(o.stopped);
  AdaptiveConfig cfg;
  cfg.N = 50;
  cfg.B = 50;
  const ConfidenceSetT s = adaptive_set_known(p.values, o.time, cfg, N0, N1, spec, 5);
  CHECK(s.contains(s.t_hat));
  CHECK(s.members.size() < static_cast<std::size_t>(o.time));
  for (Index m : s.members) CHECK((m >= 1 && m <= o.time));
  CHECK(std::is_sorted(s.members.begin(), s.members.end()));
  // reproducible from the seed
  CHECK(adaptive_set_known(p.values, o.time, cfg, N0, N1, spec, 5).members == s.members);
}

TEST_CASE("algorithm 3 with singleton classes matches the known-parameter rule") {
  const DetectorSpec spec = make_cusum(N0, N1, 1000);
  const ObservationPath p = sample_path(N0, N1, 40, 400, 12);
  const StopOutcome o = run_to_stop(spec, p.values);
  REQUIRE(o.stopped);
  AdaptiveConfig cfg;
  cfg.N = 40;
  cfg.B = 40;
  cfg.theta0_star = 0.0;
  const ConfidenceSetT s = adaptive_set_comp(p.values, o.time, cfg, kGauss, Interval{0.0, 0.0}, Interval{1.0, 1.0},
                                             spec, 6);
  // S and S' are either the singleton or empty, so every accepted t passed the singleton rule
  const ConfidenceSetT g = grid_threshold(p.values, o.time, cfg, kGauss, std::nullopt, Interval{0.0, 0.0},
                                          Interval{1.0, 1.0}, GridSpec{1, 1, {0.0}, {1.0}}, spec, 6);
  CHECK(s.members == g.members);
}

TEST_CASE("grid refinement is monotone") {
  const ParametricFamily fam{FamilyKind::gaussian_location, 1.0};
  const DetectorSpec spec = make_weighted(DetectorFamily::weighted_cusum, N0, fam, 0.75, 0.2, 10, 1000);
  const ObservationPath p = sample_path(N0, N1, 40, 400, 13);
  const StopOutcome o = run_to_stop(spec, p.values);
  REQUIRE(o.stopped);
  AdaptiveConfig cfg;
  cfg.N = 30;
  cfg.B = 30;
  const std::vector<double> fine = equispaced({0.75, 2.75}, 49);
  std::vector<double> coarse;
  for (std::size_t i = 0; i < fine.size(); i += 12) coarse.push_back(fine[i]);
  REQUIRE(coarse.size() == 5);
  const Interval th1{0.75, kInf};
  const ConfidenceSetT a = grid_threshold(p.values, o.time, cfg, kGauss, 0.0, Interval{0, 0}, th1,
                                          GridSpec{1, 0, {}, coarse}, spec, 9);
  const ConfidenceSetT b = grid_threshold(p.values, o.time, cfg, kGauss, 0.0, Interval{0, 0}, th1,
                                          GridSpec{1, 0, {}, fine}, spec, 9);
  CHECK(std::includes(b.members.begin(), b.members.end(), a.members.begin(), a.members.end()));
}

TEST_CASE("algorithm 2 rejects t with an empty post-change set") {
  const ParametricFamily fam{FamilyKind::gaussian_location, 1.0};
  const DetectorSpec spec = make_weighted(DetectorFamily::weighted_cusum, N0, fam, 0.75, 0.2, 10, 1000);
  const ObservationPath p = sample_path(N0, N1, 60, 400, 14);
  const StopOutcome o = run_to_stop(spec, p.values);
  REQUIRE(o.stopped);
  AdaptiveConfig cfg;
  cfg.N = 40;
  cfg.B = 40;
  AdaptiveDiagnostics diag;
  const ConfidenceSetT s = adaptive_set_comp_post(p.values, o.time, cfg, kGauss, 0.0, Interval{0.75, kInf}, spec, 15,
                                                  &diag);
  for (Index t : diag.empty_param_set) CHECK_FALSE(s.contains(t));
  CHECK(s.members.size() < static_cast<std::size_t>(o.time) / 2);
}

TEST_CASE("equispaced grids") {
  CHECK(equispaced({1.0, 2.0}, 3) == std::vector<double>{1.0, 1.5, 2.0});
  CHECK(equispaced({1.0, 2.0}, 1).size() == 1);
}
