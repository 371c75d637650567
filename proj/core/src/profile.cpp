#include "cpl/profile.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cpl {
namespace {

struct Prefix {
  std::vector<double> s1, s2;  // s1[k] = sum_{i<=k} x_i, s2 likewise for squares; s*[0] = 0
  explicit Prefix(std::span<const double> x) : s1(x.size() + 1, 0.0), s2(x.size() + 1, 0.0) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      s1[i + 1] = s1[i] + x[i];
      s2[i + 1] = s2[i] + x[i] * x[i];
    }
  }
  double sum(std::size_t a, std::size_t b) const { return s1[b] - s1[a - 1]; }   // 1-based inclusive
  double sumsq(std::size_t a, std::size_t b) const { return s2[b] - s2[a - 1]; }
};

double clamp_range(double v, const ParamRange* r) { return r ? std::clamp(v, r->lo, r->hi) : v; }

// Segment log-likelihood at parameter theta over x_a..x_b (1-based, inclusive), without
// terms that do not depend on the split point.
double seg_loglik(const ProfileModel& m, const Prefix& p, std::size_t a, std::size_t b, double theta) {
  if (b < a) return 0.0;
  const double n = static_cast<double>(b - a + 1);
  const double s = p.sum(a, b);
  if (m.kind == FamilyKind::gaussian_location) {
    const double ss = p.sumsq(a, b) - 2.0 * theta * s + n * theta * theta;
    return -0.5 * ss / (m.sd * m.sd);
  }
  if (m.kind == FamilyKind::poisson) {
    if (theta <= 0.0) return s > 0 ? kNegInf : 0.0;
    return s * std::log(theta) - n * theta;
  }
  throw std::invalid_argument("profile: unsupported family");
}

double seg_mle(const Prefix& p, std::size_t a, std::size_t b) { return p.sum(a, b) / static_cast<double>(b - a + 1); }

}  // namespace

std::vector<double> profile_loglik_known_pre(const ProfileModel& m, std::span<const double> x, double theta0,
                                             const ParamRange* post_constraint) {
  const std::size_t n = x.size();
  Prefix p(x);
  std::vector<double> out(n);
  for (std::size_t i = 1; i <= n; ++i) {
    const double th1 = clamp_range(seg_mle(p, i, n), post_constraint);
    out[i - 1] = seg_loglik(m, p, 1, i - 1, theta0) + seg_loglik(m, p, i, n, th1);
  }
  return out;
}

std::vector<double> profile_loglik_double(const ProfileModel& m, std::span<const double> x,
                                          const ParamRange* pre_constraint, const ParamRange* post_constraint) {
  const std::size_t n = x.size();
  Prefix p(x);
  std::vector<double> out(n);
  for (std::size_t i = 1; i <= n; ++i) {
    double pre = 0.0;
    if (i > 1) pre = seg_loglik(m, p, 1, i - 1, clamp_range(seg_mle(p, 1, i - 1), pre_constraint));
    const double th1 = clamp_range(seg_mle(p, i, n), post_constraint);
    out[i - 1] = pre + seg_loglik(m, p, i, n, th1);
  }
  return out;
}

}  // namespace cpl
