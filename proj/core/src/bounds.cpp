#include "cpl/bounds.hpp"

#include <cmath>
#include <stdexcept>

#include "cpl/numerics.hpp"
#include "cpl/rng.hpp"

namespace cpl {
namespace {

double log_density_or_neg_inf(const Distribution& d, double x) {
  try {
    return d.log_density(x);
  } catch (const std::domain_error&) {
    return kNegInf;
  }
}

}  // namespace

double rho_eval(const Distribution& d0, const Distribution& d1, double s) {
  if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("rho_eval: s must lie in [0,1]");
  if (d0.is_markov() || d1.is_markov()) throw std::invalid_argument("rho_eval: Markov models are not supported");
  if (s == 0.0) return 1.0;
  const auto* g0 = d0.as<Gaussian>();
  const auto* g1 = d1.as<Gaussian>();
  if (g0 && g1 && g0->sd == g1->sd) {
    const double k = (g1->mean - g0->mean) * (g1->mean - g0->mean) / (2.0 * g0->sd * g0->sd);
    return std::exp(-s * (1.0 - s) * k);
  }
  auto term = [&](double x) {
    const double l0 = d0.log_density(x);
    if (l0 == kNegInf) return 0.0;
    const double l1 = log_density_or_neg_inf(d1, x);
    if (l1 == kNegInf) return 0.0;
    return std::exp(s * (l1 - l0));
  };
  double value = 0.0;
  if (d0.is_discrete()) {
    // sum over the support of d0 until the remaining mass is negligible
    const double top = d0.quantile(1.0 - 1e-16);
    for (double k = d0.quantile(1e-300); k <= top + 0.5; k += 1.0) {
      const double l0 = d0.log_density(k);
      if (l0 == kNegInf) continue;
      value += std::exp(l0) * term(k);
    }
    if (d0.as<Poisson>()) {
      // tail beyond the quantile: keep adding while terms matter
      double k = std::floor(top) + 1.0;
      for (int i = 0; i < 100000; ++i, k += 1.0) {
        const double add = std::exp(d0.log_density(k)) * term(k);
        value += add;
        if (add < 1e-18 * value) break;
      }
    }
  } else {
    // integrate in x: the quantile transform has unbounded integrands when f1 has heavier tails
    auto dens = [&](double x) {
      const double l0 = log_density_or_neg_inf(d0, x);
      const double l1 = log_density_or_neg_inf(d1, x);
      if (l0 == kNegInf || l1 == kNegInf) return 0.0;
      return std::exp((1.0 - s) * l0 + s * l1);
    };
    const double a = d0.quantile(1e-9), m = d0.quantile(0.5), b = d0.quantile(1.0 - 1e-9);
    value = integrate(dens, kNegInf, a, 1e-12) + integrate(dens, a, m, 1e-12) + integrate(dens, m, b, 1e-12) +
            integrate(dens, b, kInf, 1e-12);
  }
  if (!std::isfinite(value)) throw std::domain_error("rho_eval: non-integrable pair");
  return value;
}

RhoMinimum minimize_rho(const std::function<double(double)>& rho) {
  const MinimizeResult r = golden_section(rho, 0.0, 1.0, 1e-9);
  return {r.x, r.fx};
}

HardnessProfile hardness_profile(const Distribution& f0, const Distribution& f1) {
  HardnessProfile h;
  h.rho0 = [f0, f1](double s) { return rho_eval(f0, f1, s); };
  h.rho1 = [f0, f1](double s) { return rho_eval(f1, f0, s); };
  const RhoMinimum m0 = minimize_rho(h.rho0);
  const RhoMinimum m1 = minimize_rho(h.rho1);
  h.s0 = m0.s;
  h.rho0_min = m0.rho;
  h.s1 = m1.s;
  h.rho1_min = m1.rho;
  return h;
}

std::string to_string(BoundMode m) {
  switch (m) {
    case BoundMode::plain: return "plain";
    case BoundMode::sensitive: return "sensitive";
    case BoundMode::composite: return "composite";
    case BoundMode::composite_well_behaved: return "composite_well_behaved";
  }
  return "plain";
}

BoundMode bound_mode_from_string(const std::string& s) {
  if (s == "plain") return BoundMode::plain;
  if (s == "sensitive") return BoundMode::sensitive;
  if (s == "composite") return BoundMode::composite;
  if (s == "composite_well_behaved" || s == "well_behaved") return BoundMode::composite_well_behaved;
  throw std::invalid_argument("unknown bound mode: " + s);
}

nlohmann::json LengthBound::to_json() const {
  auto num = [](double v) -> nlohmann::json {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
  };
  return {{"terms", {{"pre", num(term_pre)}, {"mid", term_mid}, {"post", num(term_post)}}},
          {"total", num(total)},
          {"delta", num(delta)},
          {"psi", num(psi)},
          {"mode", to_string(mode)}};
}

LengthBound length_bound(const HardnessProfile& h, double alpha, double p_T, Index T, double delay, BoundMode mode) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("length_bound: alpha must lie in (0,1)");
  if (!(p_T > 0.0 && p_T <= 1.0)) throw std::invalid_argument("length_bound: p_T must lie in (0,1]");
  if (!(delay >= 0.0)) throw std::invalid_argument("length_bound: delay must be >= 0");
  if (T < 1) throw std::invalid_argument("length_bound: T must be >= 1");
  const double r0 = h.rho0_min;
  if (!(r0 < 1.0)) throw std::domain_error("length_bound: rho0 = 1, the bound is infinite");

  const bool composite = mode == BoundMode::composite || mode == BoundMode::composite_well_behaved;
  const double tm1 = static_cast<double>(T - 1);
  double geom;
  if (composite) geom = (1.0 - std::pow(r0, tm1)) / (1.0 - r0);
  else geom = T <= 2 ? 0.0 : (r0 - std::pow(r0, tm1)) / (1.0 - r0);

  LengthBound b;
  b.mode = mode;
  b.delta = delay;
  b.term_pre = std::pow(2.0 / alpha, h.s0) * std::pow(p_T, -(h.s0 + 1.0)) * geom;

  const double r1 = h.rho1_min;
  if (r1 < 1.0) {
    const double r1s = std::pow(r1, h.s1);
    b.psi = (std::pow(2.0 / alpha, h.s1) * r1s / (1.0 - r1s) + r1 / (1.0 - r1)) / p_T;
  } else {
    b.psi = kInf;
  }
  const bool refine = mode == BoundMode::sensitive || mode == BoundMode::composite_well_behaved;
  b.term_post = refine ? std::min(delay, b.psi) : delay;
  b.total = b.term_pre + b.term_mid + b.term_post;
  return b;
}

DelayEstimate estimate_delay(const Distribution& pre, const Distribution& post, Index T, const DetectorSpec& spec,
                             int runs, std::uint64_t seed, Index cap) {
  if (runs < 1) throw std::invalid_argument("estimate_delay: runs must be >= 1");
  DelayEstimate e;
  e.runs = runs;
  double sum = 0.0;
  for (int j = 0; j < runs; ++j) {
    const std::uint64_t key = derive_seed(seed, "delay", {static_cast<std::uint64_t>(j)});
    double prev = kNoPrev;
    const StopOutcome o = run_to_stop(
        spec,
        [&](Index n) {
          prev = draw_at(n < T ? pre : post, key, n, prev);
          return prev;
        },
        cap);
    if (!o.stopped || o.time < T) continue;
    sum += static_cast<double>(o.time - T);
    ++e.conditional_runs;
  }
  e.mean = e.conditional_runs > 0 ? sum / e.conditional_runs : kInf;
  return e;
}

}  // namespace cpl
