#include "cpl/confseq.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cpl/numerics.hpp"

namespace cpl {

Interval Interval::intersect(const Interval& o) const {
  if (empty || o.empty) return none();
  Interval r{std::max(lo, o.lo), std::min(hi, o.hi), false};
  if (r.lo > r.hi) return none();
  return r;
}

nlohmann::json Interval::to_json() const {
  if (empty) return nlohmann::json::array();
  auto enc = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return v > 0 ? "inf" : "-inf";
  };
  return nlohmann::json::array({enc(lo), enc(hi)});
}

double gaussian_cs_radius(Index n, double beta, double sd) {
  if (n < 1) throw std::domain_error("gaussian_cs_radius: n must be >= 1");
  const double dn = static_cast<double>(n);
  const double s = std::sqrt(std::log(std::log(2.0 * dn)) + 0.72 * std::log(10.4 / beta));
  return sd * s / std::sqrt(dn);
}

namespace {
double window_mean(std::span<const double> w) {
  double s = 0.0;
  for (double x : w) s += x;
  return s / static_cast<double>(w.size());
}
}  // namespace

Interval gaussian_cs(std::span<const double> window, double coverage, double sd, const Interval& space) {
  if (window.empty()) throw std::domain_error("gaussian_cs: empty window");
  if (!(coverage > 0.0 && coverage < 1.0)) throw std::domain_error("gaussian_cs: coverage must lie in (0,1)");
  const double m = window_mean(window);
  const double r = gaussian_cs_radius(static_cast<Index>(window.size()), 1.0 - coverage, sd);
  return Interval{m - r, m + r}.intersect(space);
}

Interval gaussian_ci(std::span<const double> window, double coverage, double sd, const Interval& space) {
  if (window.empty()) throw std::domain_error("gaussian_ci: empty window");
  if (!(coverage > 0.0 && coverage < 1.0)) throw std::domain_error("gaussian_ci: coverage must lie in (0,1)");
  const double m = window_mean(window);
  const double z = normal_quantile(1.0 - (1.0 - coverage) / 2.0);
  const double r = sd * z / std::sqrt(static_cast<double>(window.size()));
  return Interval{m - r, m + r}.intersect(space);
}

double poisson_cs_boundary(double n, double sum, double beta, double c, double theta) {
  return n * theta - sum * std::log(theta) - std::log(1.0 / beta) - log_I(c, c * theta) +
         log_I(n + c, sum + c * theta);
}

Interval poisson_cs(std::span<const double> window, double coverage, double c, const Interval& space) {
  if (window.empty()) throw std::domain_error("poisson_cs: empty window");
  if (!(c > 0.0)) throw std::domain_error("poisson_cs: c must be > 0");
  if (!(coverage > 0.0 && coverage < 1.0)) throw std::domain_error("poisson_cs: coverage must lie in (0,1)");
  const double n = static_cast<double>(window.size());
  double sum = 0.0;
  for (double x : window) sum += x;
  const double beta = 1.0 - coverage;
  auto h = [&](double th) { return poisson_cs_boundary(n, sum, beta, c, th); };
  const double lo_b = 1e-6;
  double hi_b = std::max(10.0, 3.0 * sum / n);
  while (h(hi_b) <= 0.0) hi_b *= 2.0;
  // unimodal in log theta
  auto hl = [&](double u) { return h(std::exp(u)); };
  const MinimizeResult mn = golden_section(hl, std::log(lo_b), std::log(hi_b), 1e-10);
  if (mn.fx > 0.0) return Interval::none();
  const double arg = std::exp(mn.x);
  double lo = 0.0;
  if (h(lo_b) > 0.0) lo = find_root(h, lo_b, arg);
  const double hi = find_root(h, arg, hi_b);
  return Interval{lo, hi}.intersect(space);
}

bool ParamConfidenceSet::contains(double x) const {
  return std::any_of(parts.begin(), parts.end(), [x](const Interval& i) { return i.contains(x); });
}

double ParamConfidenceSet::total_length() const {
  double s = 0.0;
  for (auto& p : parts) s += p.length();
  return s;
}

Interval ParamConfidenceSet::hull() const {
  if (parts.empty()) return Interval::none();
  return {parts.front().lo, parts.back().hi};
}

nlohmann::json ParamConfidenceSet::to_json() const {
  nlohmann::json a = nlohmann::json::array();
  for (auto& p : parts) a.push_back(p.to_json());
  return {{"target", target == ParamTarget::theta0 ? "theta0" : "theta1"},
          {"alpha", alpha},
          {"eta", eta},
          {"intervals", a},
          {"flagged_empty", flagged_empty}};
}

std::vector<Interval> normalize_union(std::vector<Interval> parts) {
  std::erase_if(parts, [](const Interval& i) { return i.empty; });
  std::sort(parts.begin(), parts.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> out;
  for (auto& p : parts) {
    if (!out.empty() && p.lo <= out.back().hi) out.back().hi = std::max(out.back().hi, p.hi);
    else out.push_back(p);
  }
  return out;
}

Interval IntervalConstructor::operator()(std::span<const double> window, double coverage) const {
  switch (kind) {
    case IntervalKind::gaussian_cs: return gaussian_cs(window, coverage, sd, space);
    case IntervalKind::gaussian_ci: return gaussian_ci(window, coverage, sd, space);
    case IntervalKind::poisson_cs: return poisson_cs(window, coverage, c, space);
  }
  throw std::logic_error("unknown interval kind");
}

ParamConfidenceSet param_set_union(const ConfidenceSetT& set_t, std::span<const double> data,
                                   const SurvivalCurve& curve, double eta, ParamTarget target,
                                   const IntervalConstructor& ctor) {
  ParamConfidenceSet out;
  out.target = target;
  out.alpha = set_t.alpha;
  out.eta = eta;
  if (set_t.members.empty()) {
    out.flagged_empty = true;
    return out;
  }
  std::vector<Interval> parts;
  const Index tau = set_t.tau;
  for (Index t : set_t.members) {
    const double coverage = 1.0 - eta * curve.at(t);
    if (target == ParamTarget::theta1) {
      parts.push_back(ctor(data.subspan(static_cast<std::size_t>(t - 1), static_cast<std::size_t>(tau - t + 1)), coverage));
    } else {
      if (t < 2) {
        parts.push_back(ctor.space);
        continue;
      }
      parts.push_back(ctor(data.first(static_cast<std::size_t>(t - 1)), coverage));
    }
  }
  out.parts = normalize_union(std::move(parts));
  return out;
}

}  // namespace cpl
