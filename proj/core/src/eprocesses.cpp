#include "cpl/eprocesses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cpl/numerics.hpp"

namespace cpl {
namespace {

double prev_of(std::span<const double> data, Index i) {
  return i > 1 ? data[static_cast<std::size_t>(i - 2)] : kNoPrev;
}

double x_at(std::span<const double> data, Index i) { return data[static_cast<std::size_t>(i - 1)]; }

int bin_of(double x, int bins) { return std::clamp(static_cast<int>(std::floor(x * bins)), 0, bins - 1); }

double bin_mass(const Distribution& null, int b, int bins) {
  return null.cdf(static_cast<double>(b + 1) / bins) - null.cdf(static_cast<double>(b) / bins);
}

// Families whose factor does not depend on a plug-in history.
double static_factor(const EProcessSpec& s, std::span<const double> data, Index i) {
  const double x = x_at(data, i);
  const double prev = prev_of(data, i);
  switch (s.family) {
    case EFamily::likelihood_ratio: return s.num.log_density(x, prev) - s.den.log_density(x, prev);
    case EFamily::numeraire_bounded_mean: return std::log1p(s.lambda_star * (x - s.mu));
    case EFamily::huber_lfd:
      return std::clamp(s.num.log_density(x, prev) - s.den.log_density(x, prev), std::log(s.clip_lo),
                        std::log(s.clip_hi));
    default: throw std::logic_error("static_factor: family needs history");
  }
}

double mixture_eval(const EProcessSpec& s, std::span<const double> data, Index a, Index b) {
  std::vector<double> acc(s.atoms.size(), 0.0);
  for (Index i = a; i <= b; ++i) {
    const double x = x_at(data, i);
    const double prev = prev_of(data, i);
    const double l0 = s.den.log_density(x, prev);
    for (std::size_t k = 0; k < s.atoms.size(); ++k) acc[k] += s.atoms[k].log_density(x, prev) - l0;
  }
  for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += std::log(s.masses[k]);
  return log_sum_exp(acc);
}

}  // namespace

NumeraireSolution numeraire_lambda_star(double mu) {
  if (!(mu > 0.0 && mu < 1.0)) throw std::invalid_argument("numeraire_lambda_star: mu must lie in (0,1)");
  auto g = [mu](double l) { return std::exp(l) * (1.0 - l * mu) - (1.0 + l * (1.0 - mu)); };
  if (mu == 0.5) return {0.0, 0.0};
  double lo, hi;
  if (mu < 0.5) {
    lo = 1e-6;
    hi = 1.0 / mu - 1e-12;
  } else {
    lo = -1.0 / (1.0 - mu) + 1e-12;
    hi = -1e-6;
  }
  if ((g(lo) > 0) == (g(hi) > 0)) throw std::runtime_error("numeraire_lambda_star: no sign change");
  const double root = find_root(g, lo, hi, 1e-16, 1000);
  return {root, g(root)};
}

EProcessSpec make_lr(Direction d, const Distribution& num, const Distribution& den) {
  EProcessSpec s;
  s.direction = d;
  s.family = EFamily::likelihood_ratio;
  s.num = num;
  s.den = den;
  return s;
}

EProcessSpec make_mixture(Direction d, std::vector<Distribution> atoms, std::vector<double> masses,
                          const Distribution& den) {
  if (atoms.size() != masses.size() || atoms.empty()) throw std::invalid_argument("make_mixture: size mismatch");
  double tot = 0.0;
  for (double w : masses) tot += w;
  if (std::abs(tot - 1.0) > 1e-12) throw std::invalid_argument("make_mixture: masses must sum to 1");
  EProcessSpec s;
  s.direction = d;
  s.family = EFamily::discrete_mixture;
  s.atoms = std::move(atoms);
  s.masses = std::move(masses);
  s.den = den;
  return s;
}

EProcessSpec make_numeraire(Direction d, double mu) {
  EProcessSpec s;
  s.direction = d;
  s.family = EFamily::numeraire_bounded_mean;
  s.mu = mu;
  s.lambda_star = numeraire_lambda_star(mu).lambda_star;
  return s;
}

EProcessSpec make_histogram(Direction d, int bins, const Distribution& null) {
  if (bins < 2) throw std::invalid_argument("make_histogram: bins must be >= 2");
  EProcessSpec s;
  s.direction = d;
  s.family = EFamily::histogram_plugin;
  s.bins = bins;
  s.hist_null = null;
  return s;
}

EProcessSpec make_subgaussian(Direction d, double boundary) {
  EProcessSpec s;
  s.direction = d;
  s.family = EFamily::subgaussian_plugin;
  s.boundary = boundary;
  return s;
}

EProcessSpec make_subgaussian_running(double boundary) {
  EProcessSpec s;
  s.direction = Direction::forward;
  s.family = EFamily::subgaussian_running;
  s.boundary = boundary;
  return s;
}

EProcessSpec make_huber(Direction d, const Distribution& num, const Distribution& den, double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("make_huber: requires lo < hi");
  EProcessSpec s;
  s.direction = d;
  s.family = EFamily::huber_lfd;
  s.num = num;
  s.den = den;
  s.clip_lo = lo;
  s.clip_hi = hi;
  return s;
}

double forward_eval(const EProcessSpec& s, std::span<const double> data, Index t, Index n) {
  if (n < t || t < 1) throw std::domain_error("forward_eval: requires 1 <= t <= n");
  if (n > static_cast<Index>(data.size())) throw std::domain_error("forward_eval: n beyond the data");
  switch (s.family) {
    case EFamily::discrete_mixture: return mixture_eval(s, data, t, n);
    case EFamily::histogram_plugin: {
      std::vector<int> counts(static_cast<std::size_t>(s.bins), 0);
      double acc = 0.0;
      for (Index i = t; i <= n; ++i) {
        const int b = bin_of(x_at(data, i), s.bins);
        const double phat = (1.0 + counts[b]) / (s.bins + static_cast<double>(i - t));
        acc += std::log(phat / bin_mass(s.hist_null, b, s.bins));
        counts[b] += 1;
      }
      return acc;
    }
    case EFamily::subgaussian_plugin: {
      double sum = 0.0, acc = 0.0;
      for (Index i = t; i <= n; ++i) {
        const double mean = i > t ? sum / static_cast<double>(i - t) : 0.0;
        const double lam = std::max(s.boundary, mean);
        const double x = x_at(data, i);
        acc += lam * x - 0.5 * lam * lam;
        sum += x;
      }
      return acc;
    }
    case EFamily::subgaussian_running: {
      double sum = 0.0, acc = 0.0;
      for (Index i = 1; i < t; ++i) sum += x_at(data, i);
      for (Index i = t; i <= n; ++i) {
        const double mean = i > 1 ? sum / static_cast<double>(i - 1) : 0.0;
        const double nu = std::min(0.0, mean) - s.boundary;
        const double x = x_at(data, i);
        acc += nu * x - 0.5 * nu * nu;
        sum += x;
      }
      return acc;
    }
    default: {
      double acc = 0.0;
      for (Index i = t; i <= n; ++i) acc += static_factor(s, data, i);
      return acc;
    }
  }
}

double backward_eval(const EProcessSpec& s, std::span<const double> data, Index t, Index n) {
  if (n >= t || n < 1) throw std::domain_error("backward_eval: requires 1 <= n < t");
  if (t - 1 > static_cast<Index>(data.size())) throw std::domain_error("backward_eval: t beyond the data");
  switch (s.family) {
    case EFamily::discrete_mixture: return mixture_eval(s, data, n, t - 1);
    case EFamily::histogram_plugin: {
      std::vector<int> counts(static_cast<std::size_t>(s.bins), 0);
      double acc = 0.0;
      if (!s.literal_window) {
        for (Index i = t - 1; i >= n; --i) {
          const int b = bin_of(x_at(data, i), s.bins);
          const double phat = (1.0 + counts[b]) / (s.bins + static_cast<double>(t - 1 - i));
          acc += std::log(phat / bin_mass(s.hist_null, b, s.bins));
          counts[b] += 1;
        }
        return acc;
      }
      // literal window j = i-1..t-1 with denominator (bins-1) + t - i
      for (Index i = t - 1; i >= n; --i) {
        const int b = bin_of(x_at(data, i), s.bins);
        int c = 0;
        for (Index j = std::max<Index>(1, i - 1); j <= t - 1; ++j) c += bin_of(x_at(data, j), s.bins) == b ? 1 : 0;
        const double phat = (1.0 + c) / (s.bins - 1 + static_cast<double>(t - i));
        acc += std::log(phat / bin_mass(s.hist_null, b, s.bins));
      }
      return acc;
    }
    case EFamily::subgaussian_plugin: {
      double sum = 0.0, acc = 0.0;
      for (Index i = t - 1; i >= n; --i) {
        const Index len = t - 1 - i;
        const double mean = len > 0 ? sum / static_cast<double>(len) : 0.0;
        const double m = std::min(0.0, mean) - s.boundary;
        const double x = x_at(data, i);
        acc += m * x - 0.5 * m * m;
        sum += x;
      }
      return acc;
    }
    case EFamily::subgaussian_running: throw std::domain_error("backward_eval: subgaussian_running is forward only");
    default: {
      double acc = 0.0;
      for (Index i = t - 1; i >= n; --i) acc += static_factor(s, data, i);
      return acc;
    }
  }
}

}  // namespace cpl
