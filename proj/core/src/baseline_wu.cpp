#include "cpl/baseline_wu.hpp"

#include <cmath>
#include <stdexcept>

#include "cpl/numerics.hpp"

namespace cpl {

ReflectedPath reflected_cusum(std::span<const double> data, double d) {
  if (!(d > 0.0)) throw std::invalid_argument("reflected_cusum: d must be positive");
  ReflectedPath p;
  p.T.push_back(0.0);
  p.zero_indices.push_back(0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double v = std::max(0.0, p.T.back() + data[i]);
    p.T.push_back(v);
    const Index n = static_cast<Index>(i) + 1;
    if (v >= d) {
      p.stopped = true;
      p.tau_prime = n;
      break;
    }
    p.tau_prime = n;
    if (v == 0.0) p.zero_indices.push_back(n);
  }
  // the final index is never a zero strictly before tau_prime
  if (!p.zero_indices.empty() && p.zero_indices.back() >= p.tau_prime && p.tau_prime > 0) p.zero_indices.pop_back();
  p.nu_hat = p.zero_indices.empty() ? 0 : p.zero_indices.back();
  return p;
}

double wu_s(double alpha, double theta1) { return std::log(alpha) * (1.0 / (std::sqrt(2.0) * theta1) + 0.088); }

double wu_c(double alpha, double theta1) {
  return -std::log(1.0 - std::sqrt(1.0 - alpha)) / (2.0 * theta1) - 0.583;
}

ConfidenceSetT wu_set(const ReflectedPath& path, double alpha, double theta1) {
  if (!(theta1 > 0.0)) throw std::invalid_argument("wu_set: theta1 must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("wu_set: alpha must lie in (0,1)");
  const double c = wu_c(alpha, theta1);
  const auto back = static_cast<std::size_t>(std::ceil(std::abs(wu_s(alpha, theta1))));

  ConfidenceSetT out;
  out.tau = path.tau_prime;
  out.alpha = alpha;
  out.method = "wu";
  out.t_hat = path.nu_hat;
  out.index_shift = true;

  Index left = 0;
  const std::size_t z = path.zero_indices.size();
  if (z >= back + 1) {
    left = path.zero_indices[z - 1 - back];
  } else {
    out.flagged.push_back(0);
  }
  for (Index k = left; k < path.nu_hat; ++k) out.members.push_back(k);
  for (Index k = path.nu_hat; k <= path.tau_prime; ++k)
    if (path.T[static_cast<std::size_t>(k)] <= c) out.members.push_back(k);
  return out;
}

Interval wu_theta1_ci(const ReflectedPath& path, double d, double alpha_prime) {
  const Index len = path.tau_prime - path.nu_hat;
  if (len <= 0) throw std::invalid_argument("wu_theta1_ci: tau_prime must exceed nu_hat");
  const double n = static_cast<double>(len);
  const double th = path.T[static_cast<std::size_t>(path.tau_prime)] / n;
  if (d * th <= 13.0 / 16.0) return Interval::none();
  const double bias = 4.0 / (5.0 * std::sqrt(d * th * n));
  const double half = normal_quantile(1.0 - alpha_prime / 2.0) * std::sqrt(1.0 - 13.0 / (16.0 * d * th)) / std::sqrt(n);
  return {th - bias - half, th - bias + half, false};
}

}  // namespace cpl
