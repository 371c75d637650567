#include "cpl/survival.hpp"

#include <sstream>
#include <stdexcept>

#include "cpl/rng.hpp"

namespace cpl {

std::string to_string(SurvivalKind k) {
  switch (k) {
    case SurvivalKind::asymptotic: return "asymptotic";
    case SurvivalKind::plain: return "plain";
    case SurvivalKind::negative_binomial: return "negative_binomial";
  }
  return "unknown";
}

SurvivalKind survival_kind_from_string(const std::string& s) {
  if (s == "asymptotic") return SurvivalKind::asymptotic;
  if (s == "plain") return SurvivalKind::plain;
  if (s == "negative_binomial" || s == "nb") return SurvivalKind::negative_binomial;
  throw std::invalid_argument("unknown survival estimator: " + s);
}

double SurvivalCurve::at(Index t) const {
  if (r.empty()) return 1.0;
  if (t < 1) return 1.0;
  const auto i = static_cast<std::size_t>(t - 1);
  return i < r.size() ? r[i] : r.back();
}

std::string SurvivalCurve::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "t,r_t\n";
  for (std::size_t i = 0; i < r.size(); ++i) os << (i + 1) << ',' << r[i] << '\n';
  return os.str();
}

SurvivalCurve unit_curve(Index tau) {
  SurvivalCurve c;
  c.r.assign(static_cast<std::size_t>(std::max<Index>(tau, 1)), 1.0);
  c.kind = SurvivalKind::plain;
  return c;
}

Index simulate_null_stop(const Distribution& pre, const DetectorSpec& spec, Index cap, std::uint64_t key) {
  double prev = kNoPrev;
  const StopOutcome out = run_to_stop(
      spec,
      [&](Index n) {
        prev = draw_at(pre, key, n, prev);
        return prev;
      },
      cap);
  return out.time;
}

SurvivalCurve survival_from_times(const std::vector<Index>& times, Index tau_cap, SurvivalKind kind) {
  if (kind == SurvivalKind::negative_binomial)
    throw std::invalid_argument("survival_from_times: use negative_binomial_from_times");
  if (times.empty()) throw std::invalid_argument("survival_from_times: need at least one run");
  const auto cap = static_cast<std::size_t>(tau_cap);
  // surv[t] = #{j : tau_j >= t}
  std::vector<long> hist(cap + 2, 0);
  for (Index tj : times) hist[static_cast<std::size_t>(std::min<Index>(tj, tau_cap))] += 1;
  SurvivalCurve c;
  c.kind = kind;
  c.N = static_cast<int>(times.size());
  c.r.resize(cap);
  long surv = 0;
  for (std::size_t t = cap; t >= 1; --t) {
    surv += hist[t];
    c.r[t - 1] = kind == SurvivalKind::plain ? static_cast<double>(surv) / c.N
                                             : (1.0 + static_cast<double>(surv)) / (c.N + 1.0);
  }
  return c;
}

SurvivalCurve negative_binomial_from_times(const std::vector<Index>& times, Index tau_cap, int r) {
  if (r < 2) throw std::invalid_argument("negative_binomial: r must be >= 2");
  SurvivalCurve c;
  c.kind = SurvivalKind::negative_binomial;
  c.N = static_cast<int>(times.size());
  c.r.resize(static_cast<std::size_t>(tau_cap));
  c.N_t.resize(static_cast<std::size_t>(tau_cap));
  for (Index t = 1; t <= tau_cap; ++t) {
    int seen = 0;
    int nt = 0;
    for (std::size_t j = 0; j < times.size(); ++j) {
      if (times[j] >= t && ++seen == r) {
        nt = static_cast<int>(j + 1);
        break;
      }
    }
    if (nt == 0) throw std::runtime_error("negative_binomial: not enough surviving runs");
    c.N_t[static_cast<std::size_t>(t - 1)] = nt;
    c.r[static_cast<std::size_t>(t - 1)] = (r - 1.0) / (nt - 1.0);
  }
  return c;
}

SurvivalCurve estimate_survival(const Distribution& pre, const DetectorSpec& spec, Index tau_cap, int N,
                                SurvivalKind kind, std::uint64_t seed, int nb_r, int max_runs) {
  if (tau_cap < 1) throw std::invalid_argument("estimate_survival: tau_cap must be >= 1");
  std::vector<Index> times;
  if (kind == SurvivalKind::negative_binomial) {
    if (nb_r < 2) throw std::invalid_argument("estimate_survival: negative binomial needs r >= 2");
    int full = 0;
    while (full < nb_r) {
      if (static_cast<int>(times.size()) >= max_runs)
        throw std::runtime_error("estimate_survival: negative binomial exceeded max_runs");
      const Index tj = simulate_null_stop(pre, spec, tau_cap,
                                          derive_seed(seed, "survival", {static_cast<std::uint64_t>(times.size())}));
      times.push_back(tj);
      full += tj >= tau_cap ? 1 : 0;
    }
    SurvivalCurve c = negative_binomial_from_times(times, tau_cap, nb_r);
    c.seed = seed;
    return c;
  }
  if (N < 1) throw std::invalid_argument("estimate_survival: N must be >= 1");
  times.reserve(static_cast<std::size_t>(N));
  for (int j = 0; j < N; ++j)
    times.push_back(simulate_null_stop(pre, spec, tau_cap, derive_seed(seed, "survival", {static_cast<std::uint64_t>(j)})));
  SurvivalCurve c = survival_from_times(times, tau_cap, kind);
  c.seed = seed;
  return c;
}

}  // namespace cpl
