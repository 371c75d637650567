#include "cpl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "cpl/localize_universal.hpp"
#include "cpl/rng.hpp"

namespace cpl {

void ExperimentConfig::validate() const {
  const auto known = known_settings();
  if (std::find(known.begin(), known.end(), setting) == known.end())
    throw ConfigError("setting: unknown value '" + setting + "'");
  if (T < 1) throw ConfigError("T: must be >= 1");
  if (A && !(*A > 0.0)) throw ConfigError("A: must be positive");
  auto level = [](double v, const char* name) {
    if (!(v > 0.0 && v < 1.0)) throw ConfigError(std::string(name) + ": must lie in (0,1)");
  };
  level(alpha, "alpha");
  if (alpha_universal) level(*alpha_universal, "alpha_universal");
  level(beta, "beta");
  level(gamma, "gamma");
  level(eta, "eta");
  if (runs < 1) throw ConfigError("runs: must be >= 1");
  if (N < 1) throw ConfigError("N: must be >= 1");
  if (B < 1) throw ConfigError("B: must be >= 1");
  if (L < 1) throw ConfigError("L: must be >= 1");
  if (horizon < T) throw ConfigError("horizon: must be >= T");
  if (!(eps >= 0.0 && eps < 1.0)) throw ConfigError("eps: must lie in [0,1)");
  if (!(wu_mu > 0.0)) throw ConfigError("wu_mu: must be positive");
  if (!(wu_d > 0.0)) throw ConfigError("wu_d: must be positive");
  for (const auto& m : methods)
    if (m != "universal" && m != "adaptive" && m != "wu") throw ConfigError("methods: unknown method '" + m + "'");
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j = {{"setting", setting},   {"T", T},           {"methods", methods},
                      {"alpha", alpha},       {"beta", beta},     {"gamma", gamma},
                      {"eta", eta},           {"runs", runs},     {"N", N},
                      {"B", B},               {"horizon", horizon}, {"seed", seed},
                      {"survival", to_string(survival)},         {"eps", eps},
                      {"post_density", post_density},             {"family", family},
                      {"wu_mu", wu_mu},       {"wu_d", wu_d},     {"param_sets", param_sets}};
  j["L"] = L == kNever ? nlohmann::json("inf") : nlohmann::json(L);
  if (A) j["A"] = *A;
  if (alpha_universal) j["alpha_universal"] = *alpha_universal;
  if (theta0_hi) j["theta0_hi"] = *theta0_hi;
  if (theta1_lo) j["theta1_lo"] = *theta1_lo;
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  static const std::vector<std::string> keys = {
      "setting", "T",    "A",        "methods", "alpha",     "alpha_universal", "beta",         "gamma",
      "eta",     "runs", "N",        "B",       "L",         "horizon",         "seed",         "out",
      "threads", "survival", "theta0_hi", "theta1_lo", "eps", "post_density",   "family",       "wu_mu",
      "wu_d",    "param_sets"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(keys.begin(), keys.end(), it.key()) == keys.end())
      throw ConfigError("config: unknown field '" + it.key() + "'");
  ExperimentConfig c;
  auto get = [&](const char* key, auto& dst) {
    if (!j.contains(key)) return;
    try {
      j.at(key).get_to(dst);
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(std::string(key) + ": wrong type");
    }
  };
  auto get_opt = [&](const char* key, std::optional<double>& dst) {
    if (!j.contains(key) || j.at(key).is_null()) return;
    if (!j.at(key).is_number()) throw ConfigError(std::string(key) + ": expected a number");
    dst = j.at(key).get<double>();
  };
  if (!j.contains("setting")) throw ConfigError("setting: missing required field");
  get("setting", c.setting);
  get("T", c.T);
  get_opt("A", c.A);
  get("methods", c.methods);
  get("alpha", c.alpha);
  get_opt("alpha_universal", c.alpha_universal);
  get("beta", c.beta);
  get("gamma", c.gamma);
  get("eta", c.eta);
  get("runs", c.runs);
  get("N", c.N);
  get("B", c.B);
  if (j.contains("L")) {
    const auto& l = j.at("L");
    if (l.is_string() && (l.get<std::string>() == "inf" || l.get<std::string>() == "infinity")) c.L = kNever;
    else if (l.is_number_integer()) c.L = l.get<Index>();
    else if (!l.is_null()) throw ConfigError("L: expected an integer or \"inf\"");
  }
  get("horizon", c.horizon);
  get("seed", c.seed);
  get("out", c.out);
  get("threads", c.threads);
  if (j.contains("survival")) {
    try {
      c.survival = survival_kind_from_string(j.at("survival").get<std::string>());
    } catch (const std::exception& e) {
      throw ConfigError(std::string("survival: ") + e.what());
    }
  }
  get_opt("theta0_hi", c.theta0_hi);
  get_opt("theta1_lo", c.theta1_lo);
  get("eps", c.eps);
  get("post_density", c.post_density);
  get("family", c.family);
  get("wu_mu", c.wu_mu);
  get("wu_d", c.wu_d);
  get("param_sets", c.param_sets);
  c.validate();
  return c;
}

int thread_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CPL_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

RunRecord run_once(const SettingPlan& plan, const ExperimentConfig& cfg, int run) {
  const std::uint64_t key = derive_seed(cfg.seed, "run", {static_cast<std::uint64_t>(run)});
  std::vector<double> data;
  DetectorState st = init_state(plan.detector);
  double prev = kNoPrev;
  RunRecord rec;
  rec.run = run;
  for (Index n = 1; n <= cfg.horizon; ++n) {
    prev = draw_at(n < cfg.T ? plan.pre : plan.post, key, n, prev);
    data.push_back(prev);
    detector_step(plan.detector, st, prev);
    if (st.stopped) break;
  }
  if (!st.stopped) {
    rec.censored = true;
    rec.tau = cfg.horizon;
    return rec;
  }
  rec.tau = st.n;
  rec.false_alarm = rec.tau < cfg.T;
  const std::uint64_t loc_seed = derive_seed(cfg.seed, "localize", {static_cast<std::uint64_t>(run)});
  for (const MethodPlan& m : plan.methods) {
    const MethodOutput o = m.run(data, rec.tau, loc_seed);
    MethodRecord mr;
    mr.method = m.name;
    mr.t_hat = o.set.index_shift ? o.set.t_hat + 1 : o.set.t_hat;
    mr.size = o.set.size();
    mr.covered = o.set.contains(o.set.index_shift ? cfg.T - 1 : cfg.T);
    mr.flagged = o.set.flagged.size();
    if (o.param) {
      mr.has_param = true;
      const Interval h = o.param->hull();
      mr.param_lo = h.empty ? std::nan("") : h.lo;
      mr.param_hi = h.empty ? std::nan("") : h.hi;
      mr.param_covered = plan.theta1_true && o.param->contains(*plan.theta1_true);
    }
    rec.methods.push_back(mr);
  }
  return rec;
}

SummaryRow aggregate(const std::vector<RunRecord>& records, const std::string& method, Index T) {
  if (records.empty()) throw std::invalid_argument("aggregate: no records");
  SummaryRow s;
  s.method = method;
  s.runs = static_cast<int>(records.size());
  int marg = 0, marg_cov = 0, cond_cov = 0, param_n = 0, param_cov = 0;
  double size = 0.0, dev = 0.0, delay = 0.0, plo = 0.0, phi = 0.0;
  for (const RunRecord& r : records) {
    if (r.censored) {
      ++s.censored;
      continue;
    }
    const MethodRecord* m = nullptr;
    for (const MethodRecord& x : r.methods)
      if (x.method == method) m = &x;
    if (!m) continue;
    ++marg;
    marg_cov += m->covered ? 1 : 0;
    if (r.false_alarm) continue;
    ++s.conditional_runs;
    cond_cov += m->covered ? 1 : 0;
    size += static_cast<double>(m->size);
    dev += std::abs(static_cast<double>(m->t_hat - T));
    delay += static_cast<double>(r.tau - T);
    if (m->has_param) {
      s.has_param = true;
      ++param_n;
      param_cov += m->param_covered ? 1 : 0;
      if (std::isfinite(m->param_lo)) plo += m->param_lo;
      if (std::isfinite(m->param_hi)) phi += m->param_hi;
    }
  }
  auto se = [](double p, int n) { return n > 0 ? std::sqrt(p * (1.0 - p) / n) : 0.0; };
  if (marg > 0) {
    s.marginal_coverage = static_cast<double>(marg_cov) / marg;
    s.marginal_coverage_se = se(s.marginal_coverage, marg);
  }
  s.conditional_defined = s.conditional_runs > 0;
  if (s.conditional_defined) {
    const double n = s.conditional_runs;
    s.conditional_coverage = cond_cov / n;
    s.conditional_coverage_se = se(s.conditional_coverage, s.conditional_runs);
    s.mean_conditional_size = size / n;
    s.mean_abs_deviation = dev / n;
    s.mean_delay = delay / n;
  }
  if (param_n > 0) {
    s.param_coverage = static_cast<double>(param_cov) / param_n;
    s.param_coverage_se = se(s.param_coverage, param_n);
    s.mean_param_lo = plo / param_n;
    s.mean_param_hi = phi / param_n;
  }
  return s;
}

nlohmann::json SummaryRow::to_json() const {
  nlohmann::json j = {{"method", method},
                      {"runs", runs},
                      {"censored", censored},
                      {"conditional_runs", conditional_runs},
                      {"marginal_coverage", marginal_coverage},
                      {"marginal_coverage_se", marginal_coverage_se}};
  if (conditional_defined) {
    j["conditional_coverage"] = conditional_coverage;
    j["conditional_coverage_se"] = conditional_coverage_se;
    j["mean_conditional_size"] = mean_conditional_size;
    j["mean_abs_deviation"] = mean_abs_deviation;
    j["mean_delay"] = mean_delay;
  } else {
    j["conditional_coverage"] = nullptr;
  }
  if (has_param) {
    j["param_coverage"] = param_coverage;
    j["param_coverage_se"] = param_coverage_se;
    j["mean_param_lo"] = mean_param_lo;
    j["mean_param_hi"] = mean_param_hi;
  }
  return j;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const SettingPlan plan = plan_setting(cfg);
  ExperimentResult res;
  res.records.resize(static_cast<std::size_t>(cfg.runs));
  const int threads = std::min(thread_count(cfg.threads), cfg.runs);
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (int i = next++; i < cfg.runs; i = next++) {
      try {
        res.records[static_cast<std::size_t>(i)] = run_once(plan, cfg, i);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = cfg.runs;
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  for (const MethodPlan& m : plan.methods) res.summary.push_back(aggregate(res.records, m.name, cfg.T));
  return res;
}

std::string records_csv(const std::vector<RunRecord>& records) {
  std::ostringstream os;
  os << std::setprecision(10);
  os << "run,method,tau,censored,false_alarm,t_hat,size,covered,flagged,param_lo,param_hi,param_covered\n";
  for (const RunRecord& r : records) {
    if (r.methods.empty()) {
      os << r.run << ",," << r.tau << ',' << r.censored << ',' << r.false_alarm << ",,,,,,,\n";
      continue;
    }
    for (const MethodRecord& m : r.methods) {
      os << r.run << ',' << m.method << ',' << r.tau << ',' << r.censored << ',' << r.false_alarm << ',' << m.t_hat
         << ',' << m.size << ',' << m.covered << ',' << m.flagged << ',';
      if (m.has_param) os << m.param_lo << ',' << m.param_hi << ',' << m.param_covered;
      else os << ",,";
      os << '\n';
    }
  }
  return os.str();
}

nlohmann::json summary_json(const ExperimentConfig& cfg, const std::vector<SummaryRow>& rows) {
  nlohmann::json j;
  j["config"] = cfg.to_json();
  j["methods"] = nlohmann::json::array();
  for (const SummaryRow& r : rows) j["methods"].push_back(r.to_json());
  return j;
}

void write_outputs(const ExperimentConfig& cfg, const ExperimentResult& r) {
  if (cfg.out.empty()) throw ConfigError("out: no output directory given");
  std::filesystem::create_directories(cfg.out);
  const std::filesystem::path dir(cfg.out);
  std::ofstream csv(dir / "records.csv");
  csv << records_csv(r.records);
  std::ofstream js(dir / "summary.json");
  js << summary_json(cfg, r.summary).dump(2) << '\n';
  if (!csv || !js) throw std::runtime_error("failed to write outputs to " + cfg.out);
}

std::vector<DualityRow> duality_check(const ExperimentConfig& cfg, const std::vector<Index>& t_grid, int reps,
                                      int survival_runs) {
  const SettingPlan plan = plan_setting(cfg);
  const auto it = std::find_if(plan.methods.begin(), plan.methods.end(),
                               [](const MethodPlan& m) { return m.name == "universal"; });
  if (it == plan.methods.end()) throw ConfigError("duality check needs a setting with the universal method");
  if (reps < 1) throw ConfigError("reps: must be >= 1");
  Index tmax = 1;
  for (Index t : t_grid) tmax = std::max(tmax, t);
  const SurvivalCurve p = estimate_survival(plan.pre, plan.detector, tmax, survival_runs, SurvivalKind::plain,
                                            derive_seed(cfg.seed, "duality-survival"));
  std::vector<DualityRow> rows;
  for (Index t : t_grid) {
    int reject = 0;
    double a = cfg.alpha_universal.value_or(cfg.alpha);
    for (int r = 0; r < reps; ++r) {
      const std::uint64_t key = derive_seed(cfg.seed, "duality", {static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(r)});
      std::vector<double> data;
      DetectorState st = init_state(plan.detector);
      double prev = kNoPrev;
      for (Index n = 1; n <= cfg.horizon && !st.stopped; ++n) {
        prev = draw_at(n < t ? plan.pre : plan.post, key, n, prev);
        data.push_back(prev);
        detector_step(plan.detector, st, prev);
      }
      if (!st.stopped || st.n < t) continue;
      const MethodOutput o = it->run(data, st.n, derive_seed(key, "localize"));
      reject += o.set.contains(t) ? 0 : 1;
      a = o.set.alpha;
    }
    DualityRow row;
    row.t = t;
    row.rejection = static_cast<double>(reject) / reps;
    row.budget = a * p.at(t);
    row.se = std::sqrt(std::max(row.budget * (1.0 - row.budget), 1e-12) / reps);
    row.pass = row.rejection <= row.budget + 3.0 * row.se;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace cpl
