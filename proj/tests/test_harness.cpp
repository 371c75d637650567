#include <cmath>

#include "cpl/harness.hpp"
#include "cpl/rng.hpp"
#include "doctest.h"

using namespace cpl;

namespace {
RunRecord rec(int run, Index tau, bool covered, std::size_t size, Index t_hat, Index T = 100) {
  RunRecord r;
  r.run = run;
  r.tau = tau;
  r.false_alarm = tau < T;
  r.methods.push_back({"m", t_hat, size, covered});
  return r;
}
}  // namespace

TEST_CASE("aggregate arithmetic") {
  std::vector<RunRecord> all{rec(0, 110, true, 10, 100), rec(1, 120, true, 12, 101)};
  CHECK(aggregate(all, "m", 100).conditional_coverage == 1.0);
  std::vector<RunRecord> half{rec(0, 110, true, 10, 100), rec(1, 120, false, 12, 101), rec(2, 105, true, 8, 99),
                              rec(3, 130, false, 20, 90)};
  const SummaryRow s = aggregate(half, "m", 100);
  CHECK(s.conditional_runs == 4);
  CHECK(s.conditional_coverage == doctest::Approx(0.5));
  CHECK(s.conditional_coverage_se == doctest::Approx(0.25));
  CHECK(s.mean_conditional_size == doctest::Approx(12.5));
  CHECK(s.mean_abs_deviation == doctest::Approx((0 + 1 + 1 + 10) / 4.0));
  CHECK(s.mean_delay == doctest::Approx((10 + 20 + 5 + 30) / 4.0));
}

TEST_CASE("aggregate matches an independent recomputation") {
  std::vector<RunRecord> rs;
  for (int i = 0; i < 20; ++i) {
    const Index tau = 60 + static_cast<Index>(counter_uniform(3, i, 0) * 80);
    RunRecord r = rec(i, tau, counter_uniform(3, i, 1) < 0.8, 5 + i, 95 + i % 7);
    r.censored = i == 7;
    rs.push_back(r);
  }
  int cond = 0, cov = 0, marg = 0, mcov = 0;
  double size = 0, delay = 0;
  for (const RunRecord& r : rs) {
    if (r.censored) continue;
    ++marg;
    mcov += r.methods[0].covered;
    if (r.tau < 100) continue;
    ++cond;
    cov += r.methods[0].covered;
    size += static_cast<double>(r.methods[0].size);
    delay += static_cast<double>(r.tau - 100);
  }
  const SummaryRow s = aggregate(rs, "m", 100);
  CHECK(s.censored == 1);
  CHECK(s.conditional_runs == cond);
  CHECK(s.conditional_coverage == doctest::Approx(static_cast<double>(cov) / cond));
  CHECK(s.marginal_coverage == doctest::Approx(static_cast<double>(mcov) / marg));
  CHECK(s.mean_conditional_size == doctest::Approx(size / cond));
  CHECK(s.mean_delay == doctest::Approx(delay / cond));
}

TEST_CASE("config parsing") {
  const ExperimentConfig c = ExperimentConfig::from_json(nlohmann::json::parse(R"({"setting":"II","L":"inf","runs":3})"));
  CHECK(c.setting == "II");
  CHECK(c.L == kNever);
  CHECK(c.runs == 3);
  const ExperimentConfig d = ExperimentConfig::from_json(c.to_json());
  CHECK(d.to_json() == c.to_json());
  CHECK_THROWS_AS(ExperimentConfig::from_json(nlohmann::json::parse(R"({"setting":"I","bogus":1})")), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(nlohmann::json::parse(R"({"setting":"nope"})")), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(nlohmann::json::parse(R"({"alpha":2})")), ConfigError);
}

TEST_CASE("every known setting plans") {
  for (const std::string& s : known_settings()) {
    ExperimentConfig c;
    c.setting = s;
    const SettingPlan p = plan_setting(c);
    CHECK(p.id == s);
    CHECK_FALSE(p.methods.empty());
  }
}

TEST_CASE("experiments are reproducible and thread-count independent") {
  ExperimentConfig c;
  c.setting = "I";
  c.runs = 6;
  c.N = 30;
  c.B = 30;
  c.seed = 7;
  c.threads = 1;
  const std::string a = records_csv(run_experiment(c).records);
  c.threads = 3;
  const std::string b = records_csv(run_experiment(c).records);
  CHECK(a == b);
  c.runs = 1;
  CHECK(records_csv(run_experiment(c).records) == records_csv(run_experiment(c).records));
}

TEST_CASE("duality budget at t = 1 is alpha") {
  ExperimentConfig c;
  c.setting = "I";
  const std::vector<DualityRow> rows = duality_check(c, {1}, 50, 200);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].budget == doctest::Approx(c.alpha_universal.value_or(0.05)));
}

TEST_CASE("thread count resolution") {
  CHECK(thread_count(3) == 3);
  CHECK(thread_count(0) >= 1);
}
