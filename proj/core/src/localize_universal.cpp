#include "cpl/localize_universal.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cpl {
namespace {

template <class... Ts> struct Overloaded : Ts... { using Ts::operator()...; };
template <class... Ts> Overloaded(Ts...) -> Overloaded<Ts...>;

bool has_static_factor(const EProcessSpec& s) {
  return s.family == EFamily::likelihood_ratio || s.family == EFamily::numeraire_bounded_mean ||
         s.family == EFamily::huber_lfd;
}

// Per-observation log factors for families without plug-in history; prefix[i] = sum_{k<=i}.
std::vector<double> static_prefix(const EProcessSpec& s, std::span<const double> data, Index upto) {
  std::vector<double> prefix(static_cast<std::size_t>(upto) + 1, 0.0);
  for (Index i = 1; i <= upto; ++i) prefix[i] = prefix[i - 1] + forward_eval(s, data, i, i);
  return prefix;
}

Index argmax_first(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return static_cast<Index>(best) + 1;
}

}  // namespace

ChangepointEstimate point_estimate(const PointCriterion& criterion, std::span<const double> data, Index tau) {
  if (tau < 1) throw std::invalid_argument("point_estimate: tau must be >= 1");
  if (tau > static_cast<Index>(data.size())) throw std::invalid_argument("point_estimate: tau beyond the data");
  const auto prefix = data.first(static_cast<std::size_t>(tau));
  ChangepointEstimate est;
  est.criterion = std::visit(
      Overloaded{
          [&](const EProcessCriterion& c) {
            std::vector<double> crit(static_cast<std::size_t>(tau));
            if (has_static_factor(c.fwd) || c.fwd.family == EFamily::subgaussian_running) {
              // suffix sums: factors do not depend on the start index
              std::vector<double> f(static_cast<std::size_t>(tau));
              for (Index i = 1; i <= tau; ++i) f[i - 1] = forward_eval(c.fwd, prefix, i, i);
              double acc = 0.0;
              for (Index t = tau; t >= 1; --t) {
                acc += f[t - 1];
                crit[t - 1] = acc;
              }
            } else {
              for (Index t = 1; t <= tau; ++t) crit[t - 1] = forward_eval(c.fwd, prefix, t, tau);
            }
            return crit;
          },
          [&](const ProfileCriterion& c) { return profile_loglik_known_pre(c.model, prefix, c.theta0, &c.theta1); },
          [&](const DoubleProfileCriterion& c) {
            return profile_loglik_double(c.model, prefix, &c.theta0, &c.theta1);
          },
      },
      criterion);
  est.t_hat = argmax_first(est.criterion);
  return est;
}

double test_statistic(Index t, const ChangepointEstimate& est, const EProcessSpec& fwd, const EProcessSpec& bwd,
                      std::span<const double> data, Index tau) {
  if (t < 1) throw std::invalid_argument("test_statistic: t must be >= 1");
  if (tau == kNever || t > tau) return kNegInf;
  if (t == est.t_hat) return 0.0;
  if (t < est.t_hat) return forward_eval(fwd, data, t, est.t_hat - 1);
  return backward_eval(bwd, data, t, est.t_hat);
}

ConfidenceSetT universal_set(std::span<const double> data, Index tau, double alpha, const SurvivalCurve& curve,
                             UniversalMode mode, const PointCriterion& criterion, const EProcessSpec& fwd,
                             const EProcessSpec& bwd) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("universal_set: alpha must lie in (0,1)");
  ConfidenceSetT out;
  out.tau = tau;
  out.alpha = alpha;
  out.method = mode == UniversalMode::pfa ? "universal_pfa" : (mode == UniversalMode::lfd_pre ? "universal_lfd" : "universal");
  const ChangepointEstimate est = point_estimate(criterion, data, tau);
  out.t_hat = est.t_hat;
  const Index th = est.t_hat;

  // prefix sums make M_t O(1) when both processes have history-free factors
  const bool fast = has_static_factor(fwd) && has_static_factor(bwd);
  std::vector<double> pf, pb;
  if (fast) {
    pf = static_prefix(fwd, data, tau);
    pb = static_prefix(bwd, data, tau);
  }
  out.thresholds.resize(static_cast<std::size_t>(tau));
  for (Index t = 1; t <= tau; ++t) {
    const double r = mode == UniversalMode::pfa ? 1.0 : curve.at(t);
    if (!(r > 0.0))
      throw std::runtime_error("universal_set: r_t = 0; use the asymptotic or negative binomial estimator");
    const double thr = std::numbers::ln2 - std::log(alpha * r);
    out.thresholds[t - 1] = thr;
    double m;
    if (t == th) m = 0.0;
    else if (fast) m = t < th ? pf[th - 1] - pf[t - 1] : pb[t - 1] - pb[th - 1];
    else m = test_statistic(t, est, fwd, bwd, data, tau);
    if (m < thr) out.members.push_back(t);
  }
  return out;
}

}  // namespace cpl
