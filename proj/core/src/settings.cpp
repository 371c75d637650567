#include <algorithm>
#include <cmath>

#include "cpl/baseline_wu.hpp"
#include "cpl/harness.hpp"
#include "cpl/localize_adaptive.hpp"
#include "cpl/localize_universal.hpp"
#include "cpl/rng.hpp"

namespace cpl {
namespace {

constexpr int kAtoms = 10;
constexpr double kAtomStep = 0.2;

std::vector<Distribution> gaussian_atoms(double start, double step) {
  std::vector<Distribution> a;
  for (int k = 0; k < kAtoms; ++k) a.push_back(Distribution::gaussian(start + step * k, 1.0));
  return a;
}

SurvivalCurve curve_for(const ExperimentConfig& cfg, const Distribution& f0, const DetectorSpec& spec, Index tau,
                        std::uint64_t seed) {
  return estimate_survival(f0, spec, tau, cfg.N, cfg.survival, derive_seed(seed, "survival"));
}

AdaptiveConfig adaptive_config(const ExperimentConfig& cfg, bool pfa, double theta0_star = 0.0) {
  AdaptiveConfig a;
  a.alpha = cfg.alpha;
  a.beta = cfg.beta;
  a.gamma = cfg.gamma;
  a.N = cfg.N;
  a.B = cfg.B;
  a.L = cfg.L;
  a.horizon = cfg.horizon;
  a.survival_kind = cfg.survival;
  a.pfa = pfa;
  a.theta0_star = theta0_star;
  return a;
}

struct Context {
  const ExperimentConfig& cfg;
  SettingPlan plan;
  std::vector<std::string> supported;
  std::vector<std::string> defaults;
  double alpha_u = 0.05;
};

// Universal method with an explicit calibration model (F0 or F0*) and mode.
LocalizeFn universal_method(const ExperimentConfig& cfg, double alpha, UniversalMode mode, Distribution calib,
                            DetectorSpec spec, PointCriterion crit, EProcessSpec fwd, EProcessSpec bwd) {
  return [=](std::span<const double> data, Index tau, std::uint64_t seed) {
    const SurvivalCurve curve = mode == UniversalMode::pfa ? unit_curve(tau) : curve_for(cfg, calib, spec, tau, seed);
    return MethodOutput{universal_set(data, tau, alpha, curve, mode, crit, fwd, bwd), std::nullopt};
  };
}

LocalizeFn adaptive_known_method(const ExperimentConfig& cfg, Distribution pre, Distribution post, DetectorSpec spec,
                                 bool pfa) {
  return [=](std::span<const double> data, Index tau, std::uint64_t seed) {
    return MethodOutput{adaptive_set_known(data, tau, adaptive_config(cfg, pfa), pre, post, spec, seed),
                        std::nullopt};
  };
}

void known_pair(Context& c, const Distribution& f0, const Distribution& f1, const DetectorSpec& spec, bool pfa) {
  const ExperimentConfig& cfg = c.cfg;
  c.plan.pre = f0;
  c.plan.post = f1;
  c.plan.detector = spec;
  c.supported = {"universal", "adaptive"};
  for (const std::string& m : cfg.methods.empty() ? c.defaults : cfg.methods) {
    if (m == "universal")
      c.plan.methods.push_back(
          {m, universal_method(cfg, c.alpha_u, pfa ? UniversalMode::pfa : UniversalMode::known_pre, f0, spec,
                               EProcessCriterion{make_lr(Direction::forward, f1, f0)},
                               make_lr(Direction::forward, f0, f1), make_lr(Direction::backward, f1, f0))});
    else if (m == "adaptive")
      c.plan.methods.push_back({m, adaptive_known_method(cfg, f0, f1, spec, pfa)});
  }
}

void composite_post(Context& c, const ProfileModel& model, double theta0, double theta1_lo, double theta_true,
                    DetectorFamily fam, bool pfa) {
  const ExperimentConfig& cfg = c.cfg;
  const ParametricFamily pf{model.kind, model.sd};
  const Distribution f0 = pf.make(theta0);
  c.plan.pre = f0;
  c.plan.post = pf.make(theta_true);
  c.plan.theta1_true = theta_true;
  c.plan.detector = make_weighted(fam, f0, pf, theta1_lo, kAtomStep, kAtoms, cfg.A.value_or(1000.0));
  const DetectorSpec spec = c.plan.detector;
  const Interval theta1_space{theta1_lo, kInf, false};
  c.supported = {"universal", "adaptive"};
  for (const std::string& m : cfg.methods.empty() ? c.defaults : cfg.methods) {
    if (m == "universal") {
      c.plan.methods.push_back(
          {m, universal_method(cfg, c.alpha_u, pfa ? UniversalMode::pfa : UniversalMode::known_pre, f0, spec,
                               ProfileCriterion{model, theta0, {theta1_lo, kInf}},
                               make_lr(Direction::forward, f0, pf.make(theta1_lo)),
                               make_mixture(Direction::backward, spec.atoms, spec.masses, f0))});
    } else if (m == "adaptive") {
      c.plan.methods.push_back({m, [=](std::span<const double> data, Index tau, std::uint64_t seed) {
                                  const AdaptiveConfig a = adaptive_config(cfg, pfa);
                                  SurvivalCurve curve;
                                  MethodOutput out{adaptive_set_comp_post(data, tau, a, model, theta0, theta1_space,
                                                                          spec, seed, nullptr, &curve),
                                                   std::nullopt};
                                  if (cfg.param_sets) {
                                    IntervalConstructor k;
                                    k.kind = model.kind == FamilyKind::poisson ? IntervalKind::poisson_cs
                                                                               : IntervalKind::gaussian_cs;
                                    k.sd = model.sd;
                                    k.space = theta1_space;
                                    out.param = param_set_union(out.set, data.first(static_cast<std::size_t>(tau)),
                                                                curve, cfg.eta, ParamTarget::theta1, k);
                                  }
                                  return out;
                                }});
    }
  }
}

void composite_both(Context& c, const ProfileModel& model, double theta0_hi, double theta1_lo, double pre_true,
                    double post_true, bool pfa) {
  const ExperimentConfig& cfg = c.cfg;
  const bool pois = model.kind == FamilyKind::poisson;
  const ParametricFamily pf{model.kind, model.sd};
  const Distribution f0_star = pf.make(theta0_hi);
  c.plan.pre = pf.make(pre_true);
  c.plan.post = pf.make(post_true);
  c.plan.theta1_true = post_true;
  c.plan.detector = make_weighted(pfa ? DetectorFamily::mixture_lr_ripr_pfa : DetectorFamily::wcs_ripr, f0_star, pf,
                                  theta1_lo, kAtomStep, kAtoms, cfg.A.value_or(1000.0));
  const DetectorSpec spec = c.plan.detector;
  const Interval theta0_space{pois ? 0.0 : -kInf, theta0_hi, false};
  const Interval theta1_space{theta1_lo, kInf, false};
  c.supported = {"universal", "adaptive"};
  for (const std::string& m : cfg.methods.empty() ? c.defaults : cfg.methods) {
    if (m == "universal") {
      if (pois) throw ConfigError("universal method is not configured for " + c.plan.id);
      c.plan.methods.push_back(
          {m, universal_method(cfg, c.alpha_u, pfa ? UniversalMode::pfa : UniversalMode::lfd_pre, f0_star, spec,
                               DoubleProfileCriterion{model, {-kInf, theta0_hi}, {theta1_lo, kInf}},
                               make_mixture(Direction::forward, gaussian_atoms(theta0_hi, -kAtomStep),
                                            truncated_geometric_weights(kAtoms), pf.make(theta1_lo)),
                               make_mixture(Direction::backward, spec.atoms, spec.masses, f0_star))});
    } else if (m == "adaptive") {
      c.plan.methods.push_back({m, [=](std::span<const double> data, Index tau, std::uint64_t seed) {
                                  const AdaptiveConfig a = adaptive_config(cfg, pfa, theta0_hi);
                                  return MethodOutput{adaptive_set_comp(data, tau, a, model, theta0_space,
                                                                        theta1_space, spec, seed),
                                                      std::nullopt};
                                }});
    }
  }
}

void check_methods(const Context& c) {
  for (const std::string& m : c.cfg.methods)
    if (std::find(c.supported.begin(), c.supported.end(), m) == c.supported.end())
      throw ConfigError("method '" + m + "' is not available for setting " + c.plan.id);
}

}  // namespace

std::vector<std::string> known_settings() {
  return {"I",      "II",        "III",        "IV",         "V",          "VI",         "A_pfa",
          "B_pfa",  "C_pfa",     "markov",     "poisson_I",  "poisson_II", "poisson_III", "wu_compare",
          "ratio_sweep"};
}

SettingPlan plan_setting(const ExperimentConfig& cfg) {
  cfg.validate();
  Context c{cfg, {}, {}, {}, 0.05};
  c.plan.id = cfg.setting;
  const std::string& s = cfg.setting;
  const double A = cfg.A.value_or(1000.0);
  const ProfileModel gauss{FamilyKind::gaussian_location, 1.0};
  const ProfileModel pois{FamilyKind::poisson, 1.0};
  auto ua = [&](double dflt) { c.alpha_u = cfg.alpha_universal.value_or(dflt); };

  if (s == "I" || s == "ratio_sweep") {
    ua(0.05);
    c.defaults = s == "I" ? std::vector<std::string>{"universal", "adaptive"} : std::vector<std::string>{"universal"};
    const Distribution f0 = Distribution::gaussian(0.0, 1.0), f1 = Distribution::gaussian(1.0, 1.0);
    known_pair(c, f0, f1, make_cusum(f0, f1, A), false);
  } else if (s == "A_pfa") {
    ua(0.05);
    c.defaults = {"universal", "adaptive"};
    Distribution f0 = Distribution::gaussian(0.0, 1.0), f1 = Distribution::gaussian(1.0, 1.0);
    if (cfg.family == "poisson") {
      f0 = Distribution::poisson(1.0);
      f1 = Distribution::poisson(2.0);
    } else if (cfg.family != "gaussian") {
      throw ConfigError("family must be gaussian or poisson");
    }
    DetectorSpec spec = make_cusum(f0, f1, A);
    spec.family = DetectorFamily::lr_pfa;
    known_pair(c, f0, f1, spec, true);
  } else if (s == "II" || s == "B_pfa") {
    ua(0.075);
    c.defaults = s == "II" ? std::vector<std::string>{"universal", "adaptive"} : std::vector<std::string>{"universal"};
    composite_post(c, gauss, 0.0, cfg.theta1_lo.value_or(0.75), 1.0,
                   s == "II" ? DetectorFamily::weighted_cusum : DetectorFamily::mixture_lr_pfa, s == "B_pfa");
    if (s == "B_pfa") c.supported = {"universal"};
  } else if (s == "III" || s == "C_pfa") {
    ua(0.1);
    c.defaults = s == "III" ? std::vector<std::string>{"universal", "adaptive"} : std::vector<std::string>{"universal"};
    composite_both(c, gauss, cfg.theta0_hi.value_or(0.25), cfg.theta1_lo.value_or(0.75), 0.0, 1.0, s == "C_pfa");
    if (s == "C_pfa") c.supported = {"universal"};
  } else if (s == "poisson_I") {
    c.defaults = {"adaptive"};
    const Distribution f0 = Distribution::poisson(1.0), f1 = Distribution::poisson(2.0);
    known_pair(c, f0, f1, make_cusum(f0, f1, A), false);
    c.supported = {"adaptive"};
  } else if (s == "poisson_II") {
    c.defaults = {"adaptive"};
    composite_post(c, pois, 1.0, cfg.theta1_lo.value_or(1.9), 2.0, DetectorFamily::weighted_cusum, false);
    c.supported = {"adaptive"};
  } else if (s == "poisson_III") {
    c.defaults = {"adaptive"};
    composite_both(c, pois, cfg.theta0_hi.value_or(0.9), cfg.theta1_lo.value_or(1.9), 1.0, 2.0, false);
    c.supported = {"adaptive"};
  } else if (s == "IV") {
    ua(0.05);
    c.defaults = {"universal"};
    c.supported = {"universal"};
    const Distribution f0 = Distribution::uniform(0.0, 1.0);
    NamedDensity nd;
    if (cfg.post_density == "quartic_decay") nd = NamedDensity::quartic_decay;
    else if (cfg.post_density == "step_mixture") nd = NamedDensity::step_mixture;
    else throw ConfigError("post_density must be quartic_decay or step_mixture");
    c.plan.pre = f0;
    c.plan.post = Distribution::named(nd);
    c.plan.detector = make_e_hist(f0, 10, A);
    for (const std::string& m : cfg.methods.empty() ? c.defaults : cfg.methods)
      if (m == "universal")
        c.plan.methods.push_back({m, universal_method(cfg, c.alpha_u, UniversalMode::known_pre, f0, c.plan.detector,
                                                      EProcessCriterion{make_histogram(Direction::forward, 10)},
                                                      make_numeraire(Direction::forward, 0.25),
                                                      make_histogram(Direction::backward, 10))});
  } else if (s == "V") {
    ua(0.05);
    c.defaults = {"universal"};
    c.supported = {"universal"};
    const double b = 0.5;
    c.plan.pre = Distribution::gaussian(1.0, 1.0);
    c.plan.post = Distribution::uniform(-1.2, 0.8);
    c.plan.detector = make_e_subgaussian(b, A);
    for (const std::string& m : cfg.methods.empty() ? c.defaults : cfg.methods)
      if (m == "universal")
        c.plan.methods.push_back({m, universal_method(cfg, c.alpha_u, UniversalMode::lfd_pre,
                                                      Distribution::gaussian(b, 1.0), c.plan.detector,
                                                      EProcessCriterion{make_subgaussian_running(b)},
                                                      make_subgaussian(Direction::forward, b),
                                                      make_subgaussian(Direction::backward, b))});
  } else if (s == "VI") {
    ua(0.05);
    c.defaults = {"universal"};
    c.supported = {"universal"};
    const double eps = cfg.eps;
    const Distribution cauchy = Distribution::cauchy(-1.0, 10.0);
    const Distribution n0 = Distribution::gaussian(0.0, 1.0), n1 = Distribution::gaussian(1.0, 1.0);
    c.plan.pre = Distribution::contaminated(n0, eps, cauchy);
    c.plan.post = Distribution::contaminated(n1, eps, cauchy);
    const HuberConstants hc = huber_constants(0.0, 1.0, 1.0, eps);
    c.plan.detector = make_huber_cusum(0.0, 1.0, 1.0, hc.c_lo, hc.c_hi, A);
    for (const std::string& m : cfg.methods.empty() ? c.defaults : cfg.methods)
      if (m == "universal")
        c.plan.methods.push_back(
            {m, universal_method(cfg, c.alpha_u, UniversalMode::lfd_pre, Distribution::huber_lfd(0.0, 1.0, 1.0, eps, 0),
                                 c.plan.detector, EProcessCriterion{make_huber(Direction::forward, n1, n0, hc.c_lo, hc.c_hi)},
                                 make_huber(Direction::forward, n0, n1, 1.0 / hc.c_hi,
                                            hc.c_lo > 0.0 ? 1.0 / hc.c_lo : kInf),
                                 make_huber(Direction::backward, n1, n0, hc.c_lo, hc.c_hi))});
  } else if (s == "markov") {
    c.defaults = {"adaptive"};
    const Distribution f0 = Distribution::markov2(0.75, 0.5, 0.5), f1 = Distribution::markov2(0.25, 0.5, 0.5);
    known_pair(c, f0, f1, make_cusum(f0, f1, A), false);
    c.supported = {"adaptive"};
  } else if (s == "wu_compare") {
    c.defaults = {"adaptive", "wu"};
    c.supported = {"adaptive", "wu"};
    const double mu = cfg.wu_mu;
    const Distribution f0 = Distribution::gaussian(-mu, 1.0), f1 = Distribution::gaussian(mu, 1.0);
    c.plan.pre = f0;
    c.plan.post = f1;
    c.plan.detector = make_wu(cfg.wu_d);
    const DetectorSpec spec = c.plan.detector;
    for (const std::string& m : cfg.methods.empty() ? c.defaults : cfg.methods) {
      if (m == "adaptive") {
        c.plan.methods.push_back({m, adaptive_known_method(cfg, f0, f1, spec, false)});
      } else if (m == "wu") {
        const double alpha = cfg.alpha, d = cfg.wu_d;
        c.plan.methods.push_back({m, [=](std::span<const double> data, Index tau, std::uint64_t) {
                                    const ReflectedPath p =
                                        reflected_cusum(data.first(static_cast<std::size_t>(tau)), d);
                                    return MethodOutput{wu_set(p, alpha, mu), std::nullopt};
                                  }});
      }
    }
  } else {
    throw ConfigError("unknown setting '" + s + "'");
  }
  check_methods(c);
  if (cfg.param_sets && !c.plan.theta1_true) throw ConfigError("param_sets requires a composite post-change setting");
  if (c.plan.methods.empty()) throw ConfigError("no methods selected for setting " + s);
  return std::move(c.plan);
}

}  // namespace cpl
