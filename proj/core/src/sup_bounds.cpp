#include <algorithm>
#include <cmath>
#include <vector>

#include "cpl/localize_adaptive.hpp"

namespace cpl {
namespace {

// Quadratic A d^2 + B d + C in the post-minus-pre shift d.
struct Quad {
  double a = 0.0, b = 0.0, c = 0.0;
  Quad operator+(const Quad& o) const { return {a + o.a, b + o.b, c + o.c}; }
};

double quad_min(const Quad& q, double lo, double hi) {
  auto at = [&](double d) {
    if (std::isinf(d)) {
      if (q.a > 1e-9) return kInf;
      if (q.b == 0.0) return q.c;
      return (q.b > 0.0) == (d > 0.0) ? kInf : kNegInf;
    }
    return q.a * d * d + q.b * d + q.c;
  };
  if (q.a > 1e-9) {
    const double v = std::clamp(-q.b / (2.0 * q.a), lo, hi);
    return at(v);
  }
  return std::min(at(lo), at(hi));
}

// Prefix sums of z = sd * eps on positions 1..len.
struct NoisePrefix {
  std::vector<double> s1, s2;
  NoisePrefix(const CoupledNoise& noise, double sd, Index len) : s1(len + 1, 0.0), s2(len + 1, 0.0) {
    for (Index k = 1; k <= len; ++k) {
      const double z = sd * noise.eps(k);
      s1[k] = s1[k - 1] + z;
      s2[k] = s2[k - 1] + z * z;
    }
  }
  double sum1(Index a, Index b) const { return a > b ? 0.0 : s1[b] - s1[a - 1]; }
  double sum2(Index a, Index b) const { return a > b ? 0.0 : s2[b] - s2[a - 1]; }
};

// Sum of squared residuals on [a, b] where observation k carries the shift d when k >= t.
// With known_mean the residuals are taken about the pre-change mean; otherwise about the
// segment mean.
Quad segment(const NoisePrefix& p, Index a, Index b, Index t, bool known_mean) {
  if (a > b) return {};
  const double n = static_cast<double>(b - a + 1);
  const Index from = std::max(a, t);
  const double m = from > b ? 0.0 : static_cast<double>(b - from + 1);
  const double s1 = p.sum1(a, b);
  const double s1p = p.sum1(from, b);
  const double s2 = p.sum2(a, b);
  if (known_mean) return {m, 2.0 * s1p, s2};
  return {m - m * m / n, 2.0 * s1p - 2.0 * s1 * m / n, s2 - s1 * s1 / n};
}

// Shared sentinel logic; returns true and sets out when the bracket decides the bound.
bool sentinel(Index t, const MonotoneBracket& br, bool L_finite, double& out) {
  if (!br.t2_stopped) {
    // a censored slow corner: +inf unless the fast corner also never stops with L infinite
    out = (!br.t1_stopped && !L_finite) ? kNegInf : kInf;
    return true;
  }
  if (br.t2 < t) {
    out = kNegInf;
    return true;
  }
  return false;
}

}  // namespace

double sup_bound_gaussian(Index t, const MonotoneBracket& br, bool L_finite, const CoupledNoise& noise, double sd,
                          ParamRange pre, ParamRange post, SupVariant variant) {
  double out;
  if (sentinel(t, br, L_finite, out)) return out;
  const Index lo_tp = std::max(t, br.t1);
  const Index hi_tp = br.t2;
  const bool known = variant == SupVariant::V;
  const double dlo = known ? post.lo - pre.lo : post.lo - pre.hi;
  const double dhi = known ? post.hi - pre.lo : post.hi - pre.lo;
  const NoisePrefix p(noise, sd, hi_tp);
  const double scale = 2.0 * sd * sd;

  double best = kNegInf;
  for (Index tp = lo_tp; tp <= hi_tp; ++tp) {
    // at i = t the shift is absorbed by the post-change segment, so the quadratic is constant
    const double den = (segment(p, 1, t - 1, t, known) + segment(p, t, tp, t, false)).c;
    double gmin = kInf;
    for (Index i = 1; i <= tp; ++i)
      gmin = std::min(gmin, quad_min(segment(p, 1, i - 1, t, known) + segment(p, i, tp, t, false), dlo, dhi));
    best = std::max(best, (den - gmin) / scale);
  }
  return best;
}

std::vector<double> poisson_candidates(const CoupledNoise& noise, Index a, Index b, ParamRange range) {
  std::vector<double> c;
  for (Index n = a; n <= b; ++n) {
    const int cnt = noise.count(n);
    for (int k = 0; k < cnt; ++k) {
      const double v = noise.lambda() * noise.thin_uniform(n, k);
      if (v >= range.lo && v <= range.hi) c.push_back(v);
    }
  }
  if (std::isfinite(range.lo)) c.push_back(range.lo);
  if (std::isfinite(range.hi)) c.push_back(range.hi);
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  return c;
}

double sup_bound_poisson(Index t, const MonotoneBracket& br, bool L_finite, const CoupledNoise& noise,
                         ParamRange pre, ParamRange post, SupVariant variant) {
  double out;
  if (sentinel(t, br, L_finite, out)) return out;
  const Index lo_tp = std::max(t, br.t1);
  const Index hi_tp = br.t2;
  const bool known = variant == SupVariant::V;

  // thinned counts are step functions of theta, so candidate values cover every distinct path
  const std::vector<double> c1 = poisson_candidates(noise, t, hi_tp, post);
  std::vector<double> c0;
  if (known || t == 1) c0 = {pre.lo};
  else c0 = poisson_candidates(noise, 1, t - 1, pre);

  // Poisson sums are integers, so s*log(s) and log(n) come from tables
  std::vector<double> xlogx, logn(static_cast<std::size_t>(hi_tp) + 1, 0.0);
  for (Index n = 1; n <= hi_tp; ++n) logn[static_cast<std::size_t>(n)] = std::log(static_cast<double>(n));
  auto slogs = [&](double sum) {
    const auto k = static_cast<std::size_t>(std::llround(sum));
    while (xlogx.size() <= k) {
      const double v = static_cast<double>(xlogx.size());
      xlogx.push_back(v > 0.0 ? v * std::log(v) : 0.0);
    }
    return xlogx[k];
  };
  // segment log-likelihood at the MLE, split-free terms dropped
  auto fitted = [&](double sum, Index n) {
    return sum > 0.0 ? slogs(sum) - sum * logn[static_cast<std::size_t>(n)] - sum : 0.0;
  };
  const double th_known = pre.lo;
  const double log_known = th_known > 0.0 ? std::log(th_known) : kNegInf;
  auto known_pre = [&](double sum, Index n) {
    if (n == 0) return 0.0;
    if (th_known <= 0.0) return sum > 0.0 ? kNegInf : 0.0;
    return sum * log_known - static_cast<double>(n) * th_known;
  };

  std::vector<double> cum(static_cast<std::size_t>(hi_tp) + 1, 0.0);
  double best = kNegInf;
  for (double th0 : c0) {
    for (double th1 : c1) {
      for (Index n = 1; n <= hi_tp; ++n)
        cum[static_cast<std::size_t>(n)] = cum[static_cast<std::size_t>(n - 1)] + noise.value(n, n < t ? th0 : th1);
      for (Index tp = lo_tp; tp <= hi_tp; ++tp) {
        const double total = cum[static_cast<std::size_t>(tp)];
        auto ell = [&](Index i) {
          const double head = cum[static_cast<std::size_t>(i - 1)];
          return (known ? known_pre(head, i - 1) : fitted(head, i - 1)) + fitted(total - head, tp - i + 1);
        };
        double mx = kNegInf;
        for (Index i = 1; i <= tp; ++i) mx = std::max(mx, ell(i));
        best = std::max(best, mx - ell(t));
      }
    }
  }
  return best;
}

}  // namespace cpl
