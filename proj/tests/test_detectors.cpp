#include <cmath>
#include <numeric>

#include "cpl/detectors.hpp"
#include "cpl/numerics.hpp"
#include "cpl/rng.hpp"
#include "doctest.h"
#include "stat_helpers.hpp"

using namespace cpl;

namespace {
const Distribution N0 = Distribution::gaussian(0, 1);
const Distribution N1 = Distribution::gaussian(1, 1);
}  // namespace

TEST_CASE("cusum step with a unit likelihood ratio leaves the statistic unchanged") {
  const DetectorSpec spec = make_cusum(N0, N1, 1000);
  DetectorState st = init_state(spec);
  detector_step(spec, st, 1.5);
  CHECK(st.statistic(spec) == doctest::Approx(1.0));
  detector_step(spec, st, 0.5);
  CHECK(st.statistic(spec) == doctest::Approx(1.0));
  CHECK_FALSE(st.stopped);
}

TEST_CASE("cusum with constant ratio e stops at the seventh step") {
  const DetectorSpec spec = make_cusum(N0, N1, 1000);
  const StopOutcome out = run_to_stop(spec, std::vector<double>(20, 1.5));
  CHECK(out.stopped);
  CHECK(out.time == 7);
}

TEST_CASE("a unit ratio stream is censored at the cap") {
  const DetectorSpec spec = make_cusum(N0, N1, 1000);
  const StopOutcome out = run_to_stop(spec, [](Index) { return 0.5; }, 50);
  CHECK_FALSE(out.stopped);
  CHECK(out.time == 50);
}

TEST_CASE("reflected cusum detector") {
  const DetectorSpec spec = make_wu(8.59);
  DetectorState st = init_state(spec);
  detector_step(spec, st, 10.0);
  CHECK(st.stat == doctest::Approx(10.0));
  CHECK(st.stopped);
  CHECK_THROWS_AS(detector_step(spec, st, 1.0), std::logic_error);
  DetectorState s2 = init_state(spec);
  detector_step(spec, s2, -3.0);
  CHECK(s2.stat == 0.0);
}

TEST_CASE("huber cusum clips the raw ratio") {
  const DetectorSpec spec = make_huber_cusum(0, 1, 1, 0.5, 2.0, 1000);
  DetectorState st = init_state(spec);
  detector_step(spec, st, 0.5 + std::log(5.0));  // raw ratio 5
  CHECK(st.statistic(spec) == doctest::Approx(std::log(2.0)));
  DetectorState lo = init_state(spec);
  detector_step(spec, lo, 0.5 + std::log(0.1));  // raw ratio 0.1 clipped to 0.5
  CHECK(lo.statistic(spec) == doctest::Approx(std::log(0.5)));
}

TEST_CASE("truncated geometric weights") {
  const std::vector<double> w = truncated_geometric_weights(10);
  CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(1.0));
  CHECK(w[0] == doctest::Approx(1.0 - std::exp(-0.5)));
  CHECK(w[9] == doctest::Approx(std::exp(-4.5)));
}

TEST_CASE("pruning leaves weighted stopping times unchanged") {
  const ParametricFamily fam{FamilyKind::gaussian_location, 1.0};
  for (DetectorFamily f : {DetectorFamily::weighted_cusum, DetectorFamily::wcs_ripr}) {
    DetectorSpec pruned = make_weighted(f, N0, fam, 0.75, 0.2, 10, 1000);
    DetectorSpec full = pruned;
    full.prune = false;
    for (std::uint64_t s = 0; s < 30; ++s) {
      const ObservationPath p = sample_path(N0, N1, 60, 400, s);
      const StopOutcome a = run_to_stop(pruned, p.values), b = run_to_stop(full, p.values);
      CHECK(a.stopped == b.stopped);
      CHECK(a.time == b.time);
    }
  }
}

TEST_CASE("pruned statistic is exact when positive") {
  const ParametricFamily fam{FamilyKind::gaussian_location, 1.0};
  DetectorSpec pruned = make_weighted(DetectorFamily::weighted_cusum, N0, fam, 0.75, 0.2, 10, 1e12);
  DetectorSpec full = pruned;
  full.prune = false;
  const ObservationPath p = sample_path(N0, N1, 40, 60, 5);
  DetectorState a = init_state(pruned), b = init_state(full);
  for (double x : p.values) {
    detector_step(pruned, a, x);
    detector_step(full, b, x);
    if (b.statistic(full) > 0.0) CHECK(a.statistic(pruned) == doctest::Approx(b.statistic(full)));
  }
}

TEST_CASE("detector spec json round trip") {
  const DetectorSpec a = make_weighted(DetectorFamily::mixture_lr_pfa, N0, {FamilyKind::gaussian_location, 1.0},
                                       0.75, 0.2, 4, 500);
  const DetectorSpec b = DetectorSpec::from_json(a.to_json());
  CHECK(b.to_json() == a.to_json());
  CHECK(detector_family_from_string(to_string(DetectorFamily::e_hist)) == DetectorFamily::e_hist);
  CHECK_THROWS(detector_family_from_string("nope"));
}

TEST_CASE("coupled gaussian noise is standard normal and shared across parameters") {
  const CoupledNoise noise = CoupledNoise::gaussian(derive_seed(3, "ks"), 2.0);
  std::vector<double> e;
  for (Index n = 1; n <= 10000; ++n) {
    CHECK(noise.value(n, 1.0) - noise.value(n, 0.0) == doctest::Approx(1.0));
    e.push_back((noise.value(n, 0.5) - 0.5) / 2.0);
  }
  CHECK(testing_stats::ks_pvalue(e, [](double x) { return normal_cdf(x); }) > 0.001);
}

TEST_CASE("thinned poisson values are monotone in the rate") {
  const CoupledNoise noise = CoupledNoise::poisson(derive_seed(4, "pois"), 5.0);
  for (Index n = 1; n <= 200; ++n) {
    double last = -1.0;
    for (double th : {0.5, 1.0, 2.0, 3.5, 5.0}) {
      const double v = noise.value(n, th);
      CHECK(v >= last);
      last = v;
    }
    CHECK(noise.value(n, 5.0) == noise.count(n));
  }
  CHECK_THROWS_AS(noise.value(1, 6.0), std::invalid_argument);
}

TEST_CASE("monotone brackets contain every interior stopping time") {
  const ParametricFamily fam{FamilyKind::gaussian_location, 1.0};
  const DetectorSpec spec = make_weighted(DetectorFamily::weighted_cusum, N0, fam, 0.75, 0.2, 10, 1000);
  Rng rng(17);
  int violations = 0;
  for (std::uint64_t j = 0; j < 10; ++j) {
    const CoupledNoise noise = CoupledNoise::gaussian(derive_seed(9, "bracket", {j}));
    const Index t = 20 + static_cast<Index>(j) * 5;
    const ParamRange pre{0.0, 0.0}, post{0.75, 2.5};
    const MonotoneBracket br = stop_time_bounds(spec, noise, t, pre, post, 5000);
    for (int k = 0; k < 50; ++k) {
      const double th = post.lo + (post.hi - post.lo) * rng.uniform();
      const StopOutcome o = run_to_stop(spec, [&](Index n) { return noise.value(n, n < t ? 0.0 : th); }, 5000);
      violations += (o.time < br.t1 || o.time > br.t2) ? 1 : 0;
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("singleton bracket collapses") {
  const DetectorSpec spec = make_cusum(N0, N1, 1000);
  const CoupledNoise noise = CoupledNoise::gaussian(1);
  const MonotoneBracket br = stop_time_bounds(spec, noise, 10, {0, 0}, {1, 1}, 10000);
  CHECK(br.t1 == br.t2);
  CHECK_THROWS(stop_time_bounds(make_e_subgaussian(0.5, 100), noise, 10, {0, 0}, {1, 1}, 100));
}
