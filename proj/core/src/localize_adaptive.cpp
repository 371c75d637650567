#include "cpl/localize_adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cpl/rng.hpp"

namespace cpl {
namespace {

template <class... Ts> struct Overloaded : Ts... { using Ts::operator()...; };
template <class... Ts> Overloaded(Ts...) -> Overloaded<Ts...>;

Index first_zero(const std::vector<double>& logm) {
  for (std::size_t i = 0; i < logm.size(); ++i)
    if (logm[i] <= 0.0) return static_cast<Index>(i) + 1;
  return 1;
}

SurvivalCurve calibration_curve(const AdaptiveConfig& cfg, const Distribution& pre, const DetectorSpec& spec,
                                Index tau, std::uint64_t seed) {
  if (cfg.pfa) return unit_curve(tau);
  return estimate_survival(pre, spec, tau, cfg.N, cfg.survival_kind, derive_seed(seed, "survival"), cfg.nb_r);
}

std::uint64_t sim_key(std::uint64_t seed, int j) {
  return derive_seed(seed, "adaptive", {static_cast<std::uint64_t>(j)});
}

// One simulated stream for the known-pair method; iid regimes cache their draws so every
// t reuses the same underlying randomness.
class SimStream {
 public:
  SimStream(std::uint64_t key, const Distribution& pre, const Distribution& post)
      : key_(key), pre_(pre), post_(post), iid_(!pre.is_markov() && !post.is_markov()) {}

  template <class Fn>
  void walk(Index t, Fn&& fn) {
    // fn(n, x) returns false to stop the walk
    double prev = kNoPrev;
    for (Index n = 1;; ++n) {
      double x;
      if (iid_) x = n < t ? cached(pre_vals_, pre_, n) : cached(post_vals_, post_, n);
      else x = draw_at(n < t ? pre_ : post_, key_, n, prev);
      prev = x;
      if (!fn(n, x)) return;
    }
  }

 private:
  double cached(std::vector<double>& cache, const Distribution& d, Index n) {
    while (static_cast<Index>(cache.size()) < n)
      cache.push_back(draw_at(d, key_, static_cast<Index>(cache.size()) + 1, kNoPrev));
    return cache[static_cast<std::size_t>(n - 1)];
  }
  std::uint64_t key_;
  const Distribution& pre_;
  const Distribution& post_;
  bool iid_;
  std::vector<double> pre_vals_, post_vals_;
};

IntervalConstructor post_ctor(const ProfileModel& m, const Interval& space, double c) {
  IntervalConstructor k;
  k.kind = m.kind == FamilyKind::poisson ? IntervalKind::poisson_cs : IntervalKind::gaussian_cs;
  k.sd = m.sd;
  k.c = c;
  k.space = space;
  return k;
}

IntervalConstructor pre_ctor(const ProfileModel& m, const Interval& space, double c) {
  IntervalConstructor k;
  k.kind = m.kind == FamilyKind::poisson ? IntervalKind::poisson_cs : IntervalKind::gaussian_ci;
  k.sd = m.sd;
  k.c = c;
  k.space = space;
  return k;
}

ParametricFamily family_of(const ProfileModel& m) {
  if (m.kind != FamilyKind::gaussian_location && m.kind != FamilyKind::poisson)
    throw std::invalid_argument("adaptive: only gaussian_location and poisson families are supported");
  return ParametricFamily{m.kind, m.sd};
}

}  // namespace

bool rank_quantile_accept(double m_obs, std::span<const double> sims, double c) {
  if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("rank_quantile_accept: c must lie in (0,1)");
  const double B = static_cast<double>(sims.size());
  const double k = std::ceil((1.0 - c) * (B + 1.0) - 1e-9);
  std::size_t below = 0;
  for (double s : sims) below += s < m_obs ? 1 : 0;
  return static_cast<double>(below + 1) <= k;
}

std::vector<double> recipe_log_stats(const StatRecipe& recipe, std::span<const double> data) {
  const std::size_t n = data.size();
  return std::visit(
      Overloaded{
          [&](const KnownLRRecipe& r) {
            // log M_t = C_{t-1} - min_{0<=k<n} C_k with C the cumulative log likelihood ratio
            std::vector<double> c(n + 1, 0.0);
            double prev = kNoPrev;
            for (std::size_t i = 0; i < n; ++i) {
              c[i + 1] = c[i] + r.post.log_density(data[i], prev) - r.pre.log_density(data[i], prev);
              prev = data[i];
            }
            double mn = kInf;
            for (std::size_t k = 0; k < n; ++k) mn = std::min(mn, c[k]);
            std::vector<double> out(n);
            for (std::size_t t = 1; t <= n; ++t) out[t - 1] = c[t - 1] - mn;
            return out;
          },
          [&](const ProfilePostRecipe& r) {
            std::vector<double> l = profile_loglik_known_pre(r.model, data, r.theta0);
            const double mx = *std::max_element(l.begin(), l.end());
            for (double& v : l) v = mx - v;
            return l;
          },
          [&](const DoubleProfileRecipe& r) {
            std::vector<double> l = profile_loglik_double(r.model, data);
            const double mx = *std::max_element(l.begin(), l.end());
            for (double& v : l) v = mx - v;
            return l;
          },
      },
      recipe);
}

double recipe_log_stat(const StatRecipe& recipe, std::span<const double> data, Index t) {
  if (t < 1) throw std::invalid_argument("recipe_log_stat: t must be >= 1");
  if (t > static_cast<Index>(data.size())) return kNegInf;
  return recipe_log_stats(recipe, data)[static_cast<std::size_t>(t - 1)];
}

double truncated_statistic(const StopOutcome& outcome, Index t, bool L_finite, const StatRecipe& recipe,
                           std::span<const double> sim_prefix) {
  if (!outcome.stopped) return L_finite ? kInf : kNegInf;
  if (outcome.time < t) return kNegInf;
  return recipe_log_stat(recipe, sim_prefix.first(static_cast<std::size_t>(outcome.time)), t);
}

void AdaptiveConfig::validate() const {
  for (double v : {alpha, beta, gamma})
    if (!(v > 0.0 && v < 1.0)) throw std::invalid_argument("adaptive: levels must lie in (0,1)");
  if (alpha + beta + gamma >= 1.0) throw std::invalid_argument("adaptive: alpha + beta + gamma must be < 1");
  if (B < 1 || N < 1) throw std::invalid_argument("adaptive: B and N must be >= 1");
  if (L < 1) throw std::invalid_argument("adaptive: L must be >= 1");
}

ConfidenceSetT adaptive_set_known(std::span<const double> data, Index tau, const AdaptiveConfig& cfg,
                                  const Distribution& pre, const Distribution& post, const DetectorSpec& spec,
                                  std::uint64_t seed) {
  return adaptive_set_known(data, tau, cfg, pre, post, spec, KnownLRRecipe{pre, post}, seed);
}

ConfidenceSetT adaptive_set_known(std::span<const double> data, Index tau, const AdaptiveConfig& cfg,
                                  const Distribution& pre, const Distribution& post, const DetectorSpec& spec,
                                  const StatRecipe& recipe, std::uint64_t seed) {
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw std::invalid_argument("adaptive: alpha must lie in (0,1)");
  if (tau < 1 || tau > static_cast<Index>(data.size())) throw std::invalid_argument("adaptive: bad tau");
  const SurvivalCurve curve = calibration_curve(cfg, pre, spec, tau, seed);
  const std::vector<double> obs = recipe_log_stats(recipe, data.first(static_cast<std::size_t>(tau)));

  ConfidenceSetT out;
  out.tau = tau;
  out.alpha = cfg.alpha;
  out.method = cfg.pfa ? "adaptive_known_pfa" : "adaptive_known";
  out.t_hat = first_zero(obs);

  std::vector<SimStream> streams;
  std::vector<Index> pre_stop(static_cast<std::size_t>(cfg.B));
  streams.reserve(static_cast<std::size_t>(cfg.B));
  for (int j = 0; j < cfg.B; ++j) {
    streams.emplace_back(sim_key(seed, j), pre, post);
    // a stream whose no-change prefix already alarms before t gives -inf for that t
    DetectorState st = init_state(spec);
    Index stop = kNever;
    streams.back().walk(kNever, [&](Index n, double x) {
      if (n > tau) return false;
      detector_step(spec, st, x);
      if (st.stopped) {
        stop = n;
        return false;
      }
      return true;
    });
    pre_stop[static_cast<std::size_t>(j)] = stop;
  }

  const Index cap = cfg.cap();
  std::vector<double> sims(static_cast<std::size_t>(cfg.B));
  std::vector<double> path;
  for (Index t = 1; t <= tau; ++t) {
    for (int j = 0; j < cfg.B; ++j) {
      if (pre_stop[static_cast<std::size_t>(j)] < t) {
        sims[static_cast<std::size_t>(j)] = kNegInf;
        continue;
      }
      path.clear();
      DetectorState st = init_state(spec);
      StopOutcome outcome{false, cap};
      streams[static_cast<std::size_t>(j)].walk(t, [&](Index n, double x) {
        if (n > cap) return false;
        path.push_back(x);
        detector_step(spec, st, x);
        if (st.stopped) {
          outcome = {true, n};
          return false;
        }
        return true;
      });
      sims[static_cast<std::size_t>(j)] = truncated_statistic(outcome, t, cfg.L_finite(), recipe, path);
    }
    if (rank_quantile_accept(obs[static_cast<std::size_t>(t - 1)], sims, cfg.alpha * curve.at(t)))
      out.members.push_back(t);
  }
  return out;
}

ConfidenceSetT adaptive_set_comp_post(std::span<const double> data, Index tau, const AdaptiveConfig& cfg,
                                      const ProfileModel& model, double theta0, const Interval& theta1_space,
                                      const DetectorSpec& spec, std::uint64_t seed, AdaptiveDiagnostics* diag,
                                      SurvivalCurve* curve_out) {
  cfg.validate();
  if (tau < 1 || tau > static_cast<Index>(data.size())) throw std::invalid_argument("adaptive: bad tau");
  const ParametricFamily fam = family_of(model);
  const bool gauss = model.kind == FamilyKind::gaussian_location;
  const SurvivalCurve curve = calibration_curve(cfg, fam.make(theta0), spec, tau, seed);
  if (curve_out) *curve_out = curve;
  const std::vector<double> obs =
      recipe_log_stats(ProfilePostRecipe{model, theta0}, data.first(static_cast<std::size_t>(tau)));
  const IntervalConstructor cs = post_ctor(model, theta1_space, cfg.poisson_c);

  ConfidenceSetT out;
  out.tau = tau;
  out.alpha = cfg.alpha;
  out.method = "adaptive_comp_post";
  out.t_hat = first_zero(obs);

  const Index cap = cfg.cap();
  std::vector<CoupledNoise> noises;
  std::vector<Index> pre_stop(static_cast<std::size_t>(cfg.B), kNever);
  if (gauss) {
    for (int j = 0; j < cfg.B; ++j) {
      noises.push_back(CoupledNoise::gaussian(sim_key(seed, j), model.sd));
      const StopOutcome o =
          run_to_stop(spec, [&](Index n) { return noises.back().value(n, theta0); }, tau);
      if (o.stopped) pre_stop[static_cast<std::size_t>(j)] = o.time;
    }
  }

  std::vector<double> sims(static_cast<std::size_t>(cfg.B));
  for (Index t = 1; t <= tau; ++t) {
    const double r = curve.at(t);
    const Interval sp =
        cs(data.subspan(static_cast<std::size_t>(t - 1), static_cast<std::size_t>(tau - t + 1)), 1.0 - cfg.beta * r);
    if (sp.empty) {
      // no admissible post-change parameter: the supremum is over an empty set
      out.flagged.push_back(t);
      if (diag) diag->empty_param_set.push_back(t);
      continue;
    }
    const ParamRange pre{theta0, theta0};
    for (int j = 0; j < cfg.B; ++j) {
      double v;
      if (gauss) {
        if (pre_stop[static_cast<std::size_t>(j)] < t) {
          v = kNegInf;
        } else {
          const CoupledNoise& nz = noises[static_cast<std::size_t>(j)];
          const MonotoneBracket br = stop_time_bounds(spec, nz, t, pre, sp.range(), cap);
          v = sup_bound_gaussian(t, br, cfg.L_finite(), nz, model.sd, pre, sp.range(), SupVariant::V);
        }
      } else {
        const CoupledNoise nz = CoupledNoise::poisson(sim_key(seed, j), std::max(theta0, sp.hi));
        const MonotoneBracket br = stop_time_bounds(spec, nz, t, pre, sp.range(), cap);
        v = sup_bound_poisson(t, br, cfg.L_finite(), nz, pre, sp.range(), SupVariant::V);
      }
      if (v == kInf && diag && !cfg.L_finite()) diag->censored_bounds.push_back(t);
      sims[static_cast<std::size_t>(j)] = v;
    }
    if (rank_quantile_accept(obs[static_cast<std::size_t>(t - 1)], sims, cfg.alpha * r)) out.members.push_back(t);
  }
  return out;
}

ConfidenceSetT adaptive_set_comp(std::span<const double> data, Index tau, const AdaptiveConfig& cfg,
                                 const ProfileModel& model, const Interval& theta0_space,
                                 const Interval& theta1_space, const DetectorSpec& spec, std::uint64_t seed,
                                 AdaptiveDiagnostics* diag, SurvivalCurve* curve_out) {
  cfg.validate();
  if (tau < 1 || tau > static_cast<Index>(data.size())) throw std::invalid_argument("adaptive: bad tau");
  const ParametricFamily fam = family_of(model);
  const bool gauss = model.kind == FamilyKind::gaussian_location;
  const SurvivalCurve curve = calibration_curve(cfg, fam.make(cfg.theta0_star), spec, tau, seed);
  if (curve_out) *curve_out = curve;
  const std::vector<double> obs =
      recipe_log_stats(DoubleProfileRecipe{model}, data.first(static_cast<std::size_t>(tau)));
  const IntervalConstructor cs = post_ctor(model, theta1_space, cfg.poisson_c);
  const IntervalConstructor ci = pre_ctor(model, theta0_space, cfg.poisson_c);

  ConfidenceSetT out;
  out.tau = tau;
  out.alpha = cfg.alpha;
  out.method = "adaptive_comp";
  out.t_hat = first_zero(obs);

  const Index cap = cfg.cap();
  std::vector<CoupledNoise> noises;
  if (gauss)
    for (int j = 0; j < cfg.B; ++j) noises.push_back(CoupledNoise::gaussian(sim_key(seed, j), model.sd));

  std::vector<double> sims(static_cast<std::size_t>(cfg.B));
  for (Index t = 1; t <= tau; ++t) {
    const double r = curve.at(t);
    const Interval s0 = t >= 2 ? ci(data.first(static_cast<std::size_t>(t - 1)), 1.0 - cfg.gamma * r) : theta0_space;
    const Interval s1 =
        cs(data.subspan(static_cast<std::size_t>(t - 1), static_cast<std::size_t>(tau - t + 1)), 1.0 - cfg.beta * r);
    if (s0.empty || s1.empty) {
      out.flagged.push_back(t);
      if (diag) diag->empty_param_set.push_back(t);
      continue;
    }
    for (int j = 0; j < cfg.B; ++j) {
      double u;
      if (gauss) {
        const CoupledNoise& nz = noises[static_cast<std::size_t>(j)];
        const MonotoneBracket br = stop_time_bounds(spec, nz, t, s0.range(), s1.range(), cap);
        u = sup_bound_gaussian(t, br, cfg.L_finite(), nz, model.sd, s0.range(), s1.range(), SupVariant::U);
      } else {
        const double lam = std::max(t >= 2 ? s0.hi : 0.0, s1.hi);
        const CoupledNoise nz = CoupledNoise::poisson(sim_key(seed, j), lam);
        ParamRange pre = s0.range();
        if (t == 1) pre = {s1.lo, s1.lo};  // no pre-change positions, any value represents S
        const MonotoneBracket br = stop_time_bounds(spec, nz, t, pre, s1.range(), cap);
        u = sup_bound_poisson(t, br, cfg.L_finite(), nz, pre, s1.range(), SupVariant::U);
      }
      if (u == kInf && diag && !cfg.L_finite()) diag->censored_bounds.push_back(t);
      sims[static_cast<std::size_t>(j)] = u;
    }
    if (rank_quantile_accept(obs[static_cast<std::size_t>(t - 1)], sims, cfg.alpha * r)) out.members.push_back(t);
  }
  return out;
}

std::vector<double> equispaced(ParamRange r, int points) {
  if (points < 1) throw std::invalid_argument("equispaced: points must be >= 1");
  if (!std::isfinite(r.lo) || !std::isfinite(r.hi)) throw std::invalid_argument("equispaced: range must be finite");
  if (points == 1 || r.lo == r.hi) return {r.lo};
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) g[k] = r.lo + (r.hi - r.lo) * k / (points - 1);
  return g;
}

ConfidenceSetT grid_threshold(std::span<const double> data, Index tau, const AdaptiveConfig& cfg,
                              const ProfileModel& model, std::optional<double> theta0_known,
                              const Interval& theta0_space, const Interval& theta1_space, const GridSpec& grid,
                              const DetectorSpec& spec, std::uint64_t seed) {
  cfg.validate();
  if (tau < 1 || tau > static_cast<Index>(data.size())) throw std::invalid_argument("grid: bad tau");
  const ParametricFamily fam = family_of(model);
  const bool gauss = model.kind == FamilyKind::gaussian_location;
  const double calib = theta0_known ? *theta0_known : cfg.theta0_star;
  const SurvivalCurve curve = calibration_curve(cfg, fam.make(calib), spec, tau, seed);
  const StatRecipe recipe = theta0_known ? StatRecipe{ProfilePostRecipe{model, *theta0_known}}
                                         : StatRecipe{DoubleProfileRecipe{model}};
  const std::vector<double> obs = recipe_log_stats(recipe, data.first(static_cast<std::size_t>(tau)));
  const IntervalConstructor cs = post_ctor(model, theta1_space, cfg.poisson_c);
  const IntervalConstructor ci = pre_ctor(model, theta0_space, cfg.poisson_c);

  ConfidenceSetT out;
  out.tau = tau;
  out.alpha = cfg.alpha;
  out.method = "grid";
  out.t_hat = first_zero(obs);

  auto restrict = [](const std::vector<double>& g, const Interval& s) {
    std::vector<double> o;
    for (double v : g)
      if (s.contains(v)) o.push_back(v);
    return o;
  };

  const Index cap = cfg.cap();
  std::vector<double> sims(static_cast<std::size_t>(cfg.B));
  std::vector<double> path;
  for (Index t = 1; t <= tau; ++t) {
    const double r = curve.at(t);
    const Interval s1 =
        cs(data.subspan(static_cast<std::size_t>(t - 1), static_cast<std::size_t>(tau - t + 1)), 1.0 - cfg.beta * r);
    Interval s0 = theta0_known ? Interval{*theta0_known, *theta0_known}
                               : (t >= 2 ? ci(data.first(static_cast<std::size_t>(t - 1)), 1.0 - cfg.gamma * r)
                                         : theta0_space);
    std::vector<double> g1 = grid.fixed_post.empty() ? (s1.empty ? std::vector<double>{}
                                                                 : equispaced(s1.range(), grid.post_points))
                                                     : restrict(grid.fixed_post, s1);
    std::vector<double> g0;
    if (theta0_known) g0 = {*theta0_known};
    else if (t == 1) g0 = {s1.empty ? 0.0 : s1.lo};  // no pre-change positions
    else g0 = grid.fixed_pre.empty() ? (s0.empty ? std::vector<double>{} : equispaced(s0.range(), grid.pre_points))
                                     : restrict(grid.fixed_pre, s0);
    if (g0.empty() || g1.empty()) {
      out.flagged.push_back(t);
      continue;
    }
    double lam = 0.0;
    for (double v : g0) lam = std::max(lam, v);
    for (double v : g1) lam = std::max(lam, v);
    bool accepted = false;
    for (double th0 : g0) {
      for (double th1 : g1) {
        for (int j = 0; j < cfg.B; ++j) {
          const CoupledNoise nz =
              gauss ? CoupledNoise::gaussian(sim_key(seed, j), model.sd) : CoupledNoise::poisson(sim_key(seed, j), lam);
          path.clear();
          const StopOutcome o = run_to_stop(
              spec,
              [&](Index n) {
                const double x = nz.value(n, n < t ? th0 : th1);
                path.push_back(x);
                return x;
              },
              cap);
          sims[static_cast<std::size_t>(j)] = truncated_statistic(o, t, cfg.L_finite(), recipe, path);
        }
        if (rank_quantile_accept(obs[static_cast<std::size_t>(t - 1)], sims, cfg.alpha * r)) {
          accepted = true;
          break;
        }
      }
      if (accepted) break;
    }
    if (accepted) out.members.push_back(t);
  }
  return out;
}

}  // namespace cpl
