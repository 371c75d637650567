#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cpl/bounds.hpp"
#include "cpl/harness.hpp"
#include "cpl/localize_adaptive.hpp"
#include "cpl/localize_universal.hpp"
#include "cpl/rng.hpp"

using namespace cpl;
using nlohmann::json;

namespace {

json parse_json_arg(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(what + ": malformed JSON (" + e.what() + ")");
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: malformed JSON in '" + path + "' (" + e.what() + ")");
  }
}

Distribution parse_distribution(const std::string& text, const std::string& what) {
  try {
    return Distribution::from_json(parse_json_arg(text, what));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

// One observation per line; a non-numeric first line is treated as a header.
std::vector<double> read_stream(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("data: cannot open '" + path + "'");
  std::vector<double> out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const std::string cell = line.substr(b, line.find_first_of(",\r") - b);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
    } catch (const std::exception&) {
      if (!first) throw ConfigError("data: non-numeric value '" + cell + "' in '" + path + "'");
    }
    first = false;
  }
  return out;
}

void emit(const json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream f(out);
  if (!f) throw std::runtime_error("cannot write '" + out + "'");
  f << j.dump(2) << '\n';
}

struct DetectorArgs {
  std::string family = "cusum_lr";
  std::string config;
  std::string pre = R"({"kind":"gaussian","mean":0,"sd":1})";
  std::string post = R"({"kind":"gaussian","mean":1,"sd":1})";
  double threshold = 1000.0;

  void attach(CLI::App* app) {
    app->add_option("--detector", family, "Detector family (cusum, sr, lr_pfa, ...)");
    app->add_option("--detector-config", config, "Detector spec JSON file (overrides --detector)");
    app->add_option("--pre", pre, "Pre-change distribution as JSON");
    app->add_option("--post", post, "Post-change distribution as JSON");
    app->add_option("--threshold,-A", threshold, "Detector threshold A (d for wu_reflected)");
  }

  DetectorSpec spec() const {
    try {
      if (!config.empty()) return DetectorSpec::from_json(read_json_file(config));
      json j = {{"family", family}, {"threshold", threshold}};
      j["pre"] = parse_json_arg(pre, "pre");
      j["post"] = parse_json_arg(post, "post");
      return DetectorSpec::from_json(j);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(std::string("detector: ") + e.what());
    }
  }
};

json set_json(const ConfidenceSetT& s) { return s.to_json(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cploc: changepoint localization after detection"};
  app.require_subcommand(1);
  std::uint64_t seed = 1;
  std::string out;
  app.add_option("--seed", seed, "Master seed; all randomness derives from it")->capture_default_str();

  // simulate
  auto* sim = app.add_subcommand("simulate", "Sample one stream with a change at T");
  std::string sim_pre = R"({"kind":"gaussian","mean":0,"sd":1})", sim_post = R"({"kind":"gaussian","mean":1,"sd":1})";
  Index sim_T = 100, sim_n = 200;
  sim->add_option("--pre", sim_pre, "Pre-change distribution JSON");
  sim->add_option("--post", sim_post, "Post-change distribution JSON");
  sim->add_option("--T", sim_T, "Changepoint")->capture_default_str();
  sim->add_option("--n", sim_n, "Stream length")->capture_default_str();
  sim->add_option("--out", out, "Output CSV (stdout when absent)");

  // detect
  auto* det = app.add_subcommand("detect", "Run a detector over a stream");
  std::string data_path;
  DetectorArgs det_args;
  det->add_option("--data", data_path, "Stream CSV")->required();
  det_args.attach(det);
  det->add_option("--out", out, "Output JSON");

  // localize
  auto* loc = app.add_subcommand("localize", "Detect, then build a confidence set for the changepoint");
  DetectorArgs loc_args;
  double loc_alpha = 0.05;
  std::string loc_method = "universal";
  int loc_N = 100, loc_B = 100;
  loc->add_option("--data", data_path, "Stream CSV")->required();
  loc_args.attach(loc);
  loc->add_option("--alpha", loc_alpha, "Level")->capture_default_str();
  loc->add_option("--method", loc_method, "universal or adaptive")->check(CLI::IsMember({"universal", "adaptive"}));
  loc->add_option("--N", loc_N, "Survival simulations")->capture_default_str();
  loc->add_option("--B", loc_B, "Adaptive simulations")->capture_default_str();
  loc->add_option("--out", out, "Output JSON");

  // experiment
  auto* exp = app.add_subcommand("experiment", "Run a simulation experiment from a JSON config");
  std::string cfg_path;
  std::optional<int> runs, threads;
  std::optional<std::uint64_t> exp_seed;
  exp->add_option("--config", cfg_path, "Experiment config JSON")->required();
  exp->add_option("--runs", runs, "Override the number of runs");
  exp->add_option("--threads", threads, "Worker threads (default CPL_THREADS or all cores)");
  exp->add_option("--seed", exp_seed, "Override the master seed");
  exp->add_option("--out", out, "Output directory")->required();

  // bounds
  auto* bnd = app.add_subcommand("bounds", "Evaluate the theoretical size bound");
  std::string b_pre = R"({"kind":"gaussian","mean":0,"sd":1})", b_post = R"({"kind":"gaussian","mean":1,"sd":1})";
  double b_alpha = 0.05, b_pT = 1.0, b_A = 1000.0;
  Index b_T = 100;
  std::optional<double> b_delay;
  std::string b_mode = "plain";
  int b_runs = 500;
  bnd->add_option("--pre", b_pre, "Pre-change distribution JSON");
  bnd->add_option("--post", b_post, "Post-change distribution JSON");
  bnd->add_option("--alpha", b_alpha)->capture_default_str();
  bnd->add_option("--pT", b_pT, "P(tau >= T) under no change")->capture_default_str();
  bnd->add_option("--T", b_T)->capture_default_str();
  bnd->add_option("--delay", b_delay, "Conditional delay; simulated with a CUSUM when absent");
  bnd->add_option("--threshold,-A", b_A, "CUSUM threshold used to simulate the delay")->capture_default_str();
  bnd->add_option("--runs", b_runs, "Delay simulations")->capture_default_str();
  bnd->add_option("--mode", b_mode, "plain, sensitive, composite, composite_well_behaved")->capture_default_str();
  bnd->add_option("--out", out, "Output JSON");

  // compare-wu
  auto* cw = app.add_subcommand("compare-wu", "Compare the adaptive set with the Wu baseline");
  ExperimentConfig wu_cfg;
  wu_cfg.setting = "wu_compare";
  cw->add_option("--T", wu_cfg.T)->capture_default_str();
  cw->add_option("--runs", wu_cfg.runs)->capture_default_str();
  cw->add_option("--mu", wu_cfg.wu_mu, "Drift: N(-mu,1) to N(mu,1)")->capture_default_str();
  cw->add_option("--d", wu_cfg.wu_d, "Reflected CUSUM threshold")->capture_default_str();
  cw->add_option("--alpha", wu_cfg.alpha)->capture_default_str();
  cw->add_option("--out", out, "Output directory (summary printed when absent)");

  // duality
  auto* dua = app.add_subcommand("duality", "Check per-t rejection rates against the duality budget");
  std::vector<Index> t_grid{1, 10, 50, 100};
  int reps = 500;
  dua->add_option("--config", cfg_path, "Experiment config JSON")->required();
  dua->add_option("--t", t_grid, "Changepoints to test")->delimiter(',');
  dua->add_option("--reps", reps)->capture_default_str();
  dua->add_option("--out", out, "Output JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*sim) {
      const ObservationPath p =
          sample_path(parse_distribution(sim_pre, "pre"), parse_distribution(sim_post, "post"), sim_T, sim_n, seed);
      std::ostringstream os;
      os.precision(17);
      os << "x\n";
      for (double v : p.values) os << v << '\n';
      if (out.empty()) std::cout << os.str();
      else std::ofstream(out) << os.str();
    } else if (*det) {
      const std::vector<double> data = read_stream(data_path);
      const DetectorSpec spec = det_args.spec();
      const StopOutcome o = run_to_stop(spec, data, static_cast<Index>(data.size()));
      json j = {{"n", data.size()}, {"detector", spec.to_json()}};
      if (o.stopped) j["tau"] = o.time;
      else j["tau"] = nullptr, j["message"] = "no alarm";
      emit(j, out);
    } else if (*loc) {
      const std::vector<double> data = read_stream(data_path);
      const DetectorSpec spec = loc_args.spec();
      const StopOutcome o = run_to_stop(spec, data, static_cast<Index>(data.size()));
      if (!o.stopped) {
        emit(json{{"tau", nullptr}, {"message", "no alarm"}}, out);
        return 0;
      }
      const Distribution f0 = parse_distribution(loc_args.pre, "pre"), f1 = parse_distribution(loc_args.post, "post");
      ConfidenceSetT set;
      if (loc_method == "universal") {
        const SurvivalCurve curve =
            estimate_survival(f0, spec, o.time, loc_N, SurvivalKind::asymptotic, derive_seed(seed, "survival"));
        set = universal_set(data, o.time, loc_alpha, curve, UniversalMode::known_pre,
                            EProcessCriterion{make_lr(Direction::forward, f1, f0)}, make_lr(Direction::forward, f0, f1),
                            make_lr(Direction::backward, f1, f0));
      } else {
        AdaptiveConfig a;
        a.alpha = loc_alpha;
        a.N = loc_N;
        a.B = loc_B;
        set = adaptive_set_known(data, o.time, a, f0, f1, spec, seed);
      }
      emit(set_json(set), out);
    } else if (*exp) {
      ExperimentConfig cfg = ExperimentConfig::from_json(read_json_file(cfg_path));
      if (runs) cfg.runs = *runs;
      if (threads) cfg.threads = *threads;
      if (exp_seed) cfg.seed = *exp_seed;
      cfg.out = out;
      cfg.validate();
      const ExperimentResult r = run_experiment(cfg);
      write_outputs(cfg, r);
      std::cout << summary_json(cfg, r.summary)["methods"].dump(2) << '\n';
    } else if (*bnd) {
      const Distribution f0 = parse_distribution(b_pre, "pre"), f1 = parse_distribution(b_post, "post");
      BoundMode mode;
      try {
        mode = bound_mode_from_string(b_mode);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("mode: ") + e.what());
      }
      double delay;
      if (b_delay) delay = *b_delay;
      else delay = estimate_delay(f0, f1, b_T, make_cusum(f0, f1, b_A), b_runs, seed).mean;
      const HardnessProfile h = hardness_profile(f0, f1);
      json j = length_bound(h, b_alpha, b_pT, b_T, delay, mode).to_json();
      j["inputs"] = {{"alpha", b_alpha}, {"p_T", b_pT}, {"T", b_T}, {"s0", h.s0}, {"rho0", h.rho0_min},
                     {"s1", h.s1},       {"rho1", h.rho1_min}};
      emit(j, out);
    } else if (*cw) {
      wu_cfg.seed = seed;
      wu_cfg.out = out;
      wu_cfg.validate();
      const ExperimentResult r = run_experiment(wu_cfg);
      if (!out.empty()) write_outputs(wu_cfg, r);
      std::cout << summary_json(wu_cfg, r.summary)["methods"].dump(2) << '\n';
    } else if (*dua) {
      ExperimentConfig cfg = ExperimentConfig::from_json(read_json_file(cfg_path));
      json rows = json::array();
      for (const DualityRow& r : duality_check(cfg, t_grid, reps))
        rows.push_back({{"t", r.t}, {"rejection", r.rejection}, {"budget", r.budget}, {"se", r.se}, {"pass", r.pass}});
      emit(rows, out);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
