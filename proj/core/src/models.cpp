#include "cpl/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "cpl/numerics.hpp"
#include "cpl/rng.hpp"

namespace cpl {
namespace {

template <class... Ts> struct Overloaded : Ts... { using Ts::operator()...; };
template <class... Ts> Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kLogSqrt2Pi = 0.91893853320467274178;

bool is_integer_valued(double x) { return std::isfinite(x) && std::floor(x) == x; }

double huber_split(const HuberLfd& h, double c) {
  // x where the nominal ratio f1/f0 equals c
  const double mid = 0.5 * (h.mu0 + h.mu1);
  return mid + std::log(c) * h.sd * h.sd / (h.mu1 - h.mu0);
}

double gauss_logpdf(double x, double m, double s) {
  const double z = (x - m) / s;
  return -0.5 * z * z - kLogSqrt2Pi - std::log(s);
}

}  // namespace

HuberConstants huber_constants(double mu0, double mu1, double sd, double eps) {
  if (!(mu1 > mu0)) throw std::invalid_argument("huber_constants: requires mu1 > mu0");
  if (!(eps >= 0.0 && eps < 1.0)) throw std::invalid_argument("huber_constants: eps outside [0,1)");
  const double mid = 0.5 * (mu0 + mu1);
  const double scale = sd * sd / (mu1 - mu0);
  auto split = [&](double c) { return mid + std::log(c) * scale; };
  auto Phi0 = [&](double x) { return normal_cdf((x - mu0) / sd); };
  auto Phi1 = [&](double x) { return normal_cdf((x - mu1) / sd); };
  // q0 normalisation as a function of c'' >= 1 and q1 normalisation as a function of c' <= 1
  auto g_hi = [&](double c) { return (1.0 - eps) * (Phi0(split(c)) + (1.0 - Phi1(split(c))) / c) - 1.0; };
  auto g_lo = [&](double c) { return (1.0 - eps) * (1.0 - Phi1(split(c)) + c * Phi0(split(c))) - 1.0; };
  HuberConstants out{1.0, 1.0};
  if (eps == 0.0) return {0.0, kInf};
  if (g_hi(1.0) > 0.0) {
    double hi = 2.0;
    while (g_hi(hi) > 0.0) hi *= 2.0;
    out.c_hi = find_root(g_hi, 1.0, hi);
  }
  if (g_lo(1.0) > 0.0) {
    double lo = 0.5;
    while (g_lo(lo) > 0.0) lo *= 0.5;
    out.c_lo = find_root(g_lo, lo, 1.0);
  }
  return out;
}

Distribution::Distribution(Variant v) : v_(std::move(v)) {
  std::visit(Overloaded{
                 [](const Gaussian& g) {
                   if (!(g.sd > 0.0) || !std::isfinite(g.mean)) throw std::invalid_argument("gaussian: sd must be > 0");
                 },
                 [](const Poisson& p) {
                   if (!(p.rate > 0.0)) throw std::invalid_argument("poisson: rate must be > 0");
                 },
                 [](const Bernoulli& b) {
                   if (!(b.p >= 0.0 && b.p <= 1.0)) throw std::invalid_argument("bernoulli: p outside [0,1]");
                 },
                 [](const Uniform& u) {
                   if (!(u.lo < u.hi)) throw std::invalid_argument("uniform: requires lo < hi");
                 },
                 [](const Exponential& e) {
                   if (!(e.rate > 0.0)) throw std::invalid_argument("exponential: rate must be > 0");
                 },
                 [](const Cauchy& c) {
                   if (!(c.scale > 0.0)) throw std::invalid_argument("cauchy: scale must be > 0");
                 },
                 [](const Named&) {},
                 [](const Mixture& m) {
                   if (m.weights.size() != m.components.size() || m.weights.empty())
                     throw std::invalid_argument("mixture: weights and components must match");
                   double s = 0.0;
                   for (double w : m.weights) {
                     if (w < 0.0) throw std::invalid_argument("mixture: negative weight");
                     s += w;
                   }
                   if (std::abs(s - 1.0) > 1e-12) throw std::invalid_argument("mixture: weights must sum to 1");
                   for (auto& c : m.components)
                     if (!c || c->is_markov()) throw std::invalid_argument("mixture: invalid component");
                 },
                 [](const Markov2& m) {
                   for (double p : {m.p01, m.p11, m.init_p1})
                     if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("markov2: probability outside [0,1]");
                 },
                 [](const Contaminated& c) {
                   if (!(c.eps >= 0.0 && c.eps <= 1.0)) throw std::invalid_argument("contaminated: eps outside [0,1]");
                   if (!c.base || !c.contaminant) throw std::invalid_argument("contaminated: missing component");
                 },
                 [](const HuberLfd& h) {
                   if (!(h.mu1 > h.mu0) || !(h.sd > 0.0) || !(h.eps >= 0.0 && h.eps < 1.0) ||
                       (h.role != 0 && h.role != 1))
                     throw std::invalid_argument("huber_lfd: invalid parameters");
                 },
             },
             v_);
}

Distribution Distribution::mixture(std::vector<double> weights, std::vector<Distribution> comps) {
  Mixture m;
  m.weights = std::move(weights);
  for (auto& c : comps) m.components.push_back(std::make_shared<const Distribution>(std::move(c)));
  return Distribution(std::move(m));
}

Distribution Distribution::contaminated(const Distribution& base, double eps, const Distribution& contaminant) {
  return Distribution(Contaminated{std::make_shared<const Distribution>(base), eps,
                                   std::make_shared<const Distribution>(contaminant)});
}

Distribution Distribution::huber_lfd(double mu0, double mu1, double sd, double eps, int role) {
  HuberConstants c = huber_constants(mu0, mu1, sd, eps);
  return Distribution(HuberLfd{mu0, mu1, sd, eps, role, c.c_lo, c.c_hi});
}

bool Distribution::is_discrete() const {
  return std::visit(Overloaded{
                        [](const Poisson&) { return true; },
                        [](const Bernoulli&) { return true; },
                        [](const Markov2&) { return true; },
                        [](const Mixture& m) {
                          return std::all_of(m.components.begin(), m.components.end(),
                                             [](const DistPtr& c) { return c->is_discrete(); });
                        },
                        [](const Contaminated& c) { return c.base->is_discrete() && c.contaminant->is_discrete(); },
                        [](const auto&) { return false; },
                    },
                    v_);
}

std::string Distribution::kind_name() const {
  return std::visit(Overloaded{
                        [](const Gaussian&) { return std::string("gaussian"); },
                        [](const Poisson&) { return std::string("poisson"); },
                        [](const Bernoulli&) { return std::string("bernoulli"); },
                        [](const Uniform&) { return std::string("uniform"); },
                        [](const Exponential&) { return std::string("exponential"); },
                        [](const Cauchy&) { return std::string("cauchy"); },
                        [](const Named&) { return std::string("named"); },
                        [](const Mixture&) { return std::string("mixture"); },
                        [](const Markov2&) { return std::string("markov2"); },
                        [](const Contaminated&) { return std::string("contaminated"); },
                        [](const HuberLfd&) { return std::string("huber_lfd"); },
                    },
                    v_);
}

namespace {

// Log density that returns -inf outside the support instead of throwing; the
// public wrapper enforces the support check only at the top level.
double log_density_impl(const Distribution::Variant& v, double x, double prev, bool strict) {
  auto outside = [&]() -> double {
    if (strict) throw std::domain_error("log_density: x outside the support");
    return kNegInf;
  };
  return std::visit(
      Overloaded{
          [&](const Gaussian& g) { return gauss_logpdf(x, g.mean, g.sd); },
          [&](const Poisson& p) {
            if (!is_integer_valued(x) || x < 0) return outside();
            return x * std::log(p.rate) - p.rate - std::lgamma(x + 1.0);
          },
          [&](const Bernoulli& b) {
            if (x == 1.0) return std::log(b.p);
            if (x == 0.0) return std::log1p(-b.p);
            return outside();
          },
          [&](const Uniform& u) {
            if (x < u.lo || x > u.hi) return outside();
            return -std::log(u.hi - u.lo);
          },
          [&](const Exponential& e) {
            if (x < 0) return outside();
            return std::log(e.rate) - e.rate * x;
          },
          [&](const Cauchy& c) {
            const double z = (x - c.loc) / c.scale;
            return -std::log(std::numbers::pi * c.scale * (1.0 + z * z));
          },
          [&](const Named& n) {
            if (x < 0.0 || x > 1.0) return outside();
            switch (n.which) {
              case NamedDensity::quartic_decay: return std::log(4.0) + 3.0 * std::log1p(-x);
              case NamedDensity::step_mixture: return x <= 0.2 ? std::log(4.0) : std::log(0.25);
            }
            return kNegInf;
          },
          [&](const Mixture& m) {
            std::vector<double> terms;
            terms.reserve(m.weights.size());
            for (std::size_t k = 0; k < m.weights.size(); ++k)
              terms.push_back(std::log(m.weights[k]) + log_density_impl(m.components[k]->variant(), x, prev, false));
            double r = log_sum_exp(terms);
            if (strict && r == kNegInf) {
              bool any = false;
              for (auto& c : m.components) {
                try {
                  (void)c->log_density(x);
                  any = true;
                } catch (const std::domain_error&) {
                }
              }
              if (!any) return outside();
            }
            return r;
          },
          [&](const Markov2& mk) {
            if (x != 0.0 && x != 1.0) return outside();
            double p1 = std::isnan(prev) ? mk.init_p1 : (prev > 0.5 ? mk.p11 : mk.p01);
            return x == 1.0 ? std::log(p1) : std::log1p(-p1);
          },
          [&](const Contaminated& c) {
            double a = std::log1p(-c.eps) + log_density_impl(c.base->variant(), x, prev, false);
            double b = std::log(c.eps) + log_density_impl(c.contaminant->variant(), x, prev, false);
            return log_add_exp(a, b);
          },
          [&](const HuberLfd& h) {
            const double l0 = gauss_logpdf(x, h.mu0, h.sd);
            const double l1 = gauss_logpdf(x, h.mu1, h.sd);
            const double base = std::log1p(-h.eps);
            if (h.role == 0) {
              return x < huber_split(h, h.c_hi) ? base + l0 : base + l1 - std::log(h.c_hi);
            }
            return x > huber_split(h, h.c_lo) ? base + l1 : base + std::log(h.c_lo) + l0;
          },
      },
      v);
}

double poisson_quantile(double rate, double u) {
  double p = std::exp(-rate);
  double c = p;
  int k = 0;
  const int kmax = 1000 + static_cast<int>(20.0 * rate);
  while (c < u && k < kmax) {
    ++k;
    p *= rate / k;
    c += p;
  }
  return k;
}

double bisect_quantile(const Distribution& d, double u) {
  double lo = -1.0, hi = 1.0;
  while (d.cdf(lo) > u) lo *= 2.0;
  while (d.cdf(hi) < u) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(lo)); ++it) {
    double mid = 0.5 * (lo + hi);
    (d.cdf(mid) < u ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double Distribution::log_density(double x, double prev) const { return log_density_impl(v_, x, prev, true); }

double Distribution::cdf(double x) const {
  return std::visit(
      Overloaded{
          [&](const Gaussian& g) { return normal_cdf((x - g.mean) / g.sd); },
          [&](const Poisson& p) {
            if (x < 0) return 0.0;
            double k = std::floor(x), pm = std::exp(-p.rate), c = pm;
            for (int i = 1; i <= k; ++i) {
              pm *= p.rate / i;
              c += pm;
            }
            return std::min(1.0, c);
          },
          [&](const Bernoulli& b) { return x < 0 ? 0.0 : (x < 1 ? 1.0 - b.p : 1.0); },
          [&](const Uniform& u) { return std::clamp((x - u.lo) / (u.hi - u.lo), 0.0, 1.0); },
          [&](const Exponential& e) { return x <= 0 ? 0.0 : -std::expm1(-e.rate * x); },
          [&](const Cauchy& c) { return 0.5 + std::atan((x - c.loc) / c.scale) / std::numbers::pi; },
          [&](const Named& n) {
            if (x <= 0) return 0.0;
            if (x >= 1) return 1.0;
            if (n.which == NamedDensity::quartic_decay) return 1.0 - std::pow(1.0 - x, 4.0);
            return x <= 0.2 ? 4.0 * x : 0.8 + 0.25 * (x - 0.2);
          },
          [&](const Mixture& m) {
            double s = 0.0;
            for (std::size_t k = 0; k < m.weights.size(); ++k) s += m.weights[k] * m.components[k]->cdf(x);
            return s;
          },
          [&](const Markov2&) -> double { throw std::logic_error("cdf: markov2 has no marginal cdf"); },
          [&](const Contaminated& c) { return (1.0 - c.eps) * c.base->cdf(x) + c.eps * c.contaminant->cdf(x); },
          [&](const HuberLfd& h) {
            const double q = 1.0 - h.eps;
            auto P0 = [&](double y) { return normal_cdf((y - h.mu0) / h.sd); };
            auto P1 = [&](double y) { return normal_cdf((y - h.mu1) / h.sd); };
            if (h.role == 0) {
              const double s = huber_split(h, h.c_hi);
              if (x < s) return q * P0(x);
              return q * P0(s) + q * (P1(x) - P1(s)) / h.c_hi;
            }
            const double s = huber_split(h, h.c_lo);
            if (x <= s) return q * h.c_lo * P0(x);
            return q * h.c_lo * P0(s) + q * (P1(x) - P1(s));
          },
      },
      v_);
}

double Distribution::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) throw std::domain_error("quantile: u must lie in (0,1)");
  return std::visit(
      Overloaded{
          [&](const Gaussian& g) { return g.mean + g.sd * normal_quantile(u); },
          [&](const Poisson& p) { return poisson_quantile(p.rate, u); },
          [&](const Bernoulli& b) { return u < 1.0 - b.p ? 0.0 : 1.0; },
          [&](const Uniform& un) { return un.lo + u * (un.hi - un.lo); },
          [&](const Exponential& e) { return -std::log1p(-u) / e.rate; },
          [&](const Cauchy& c) { return c.loc + c.scale * std::tan(std::numbers::pi * (u - 0.5)); },
          [&](const Named& n) {
            if (n.which == NamedDensity::quartic_decay) return 1.0 - std::pow(1.0 - u, 0.25);
            return u <= 0.8 ? u / 4.0 : 0.2 + (u - 0.8) / 0.25;
          },
          [&](const Mixture&) { return bisect_quantile(*this, u); },
          [&](const Markov2&) -> double { throw std::logic_error("quantile: markov2 has no marginal quantile"); },
          [&](const Contaminated&) { return bisect_quantile(*this, u); },
          [&](const HuberLfd& h) {
            const double q = 1.0 - h.eps;
            auto P0 = [&](double y) { return normal_cdf((y - h.mu0) / h.sd); };
            auto P1 = [&](double y) { return normal_cdf((y - h.mu1) / h.sd); };
            auto Q0 = [&](double p) { return h.mu0 + h.sd * normal_quantile(std::clamp(p, 1e-300, 1.0 - 1e-16)); };
            auto Q1 = [&](double p) { return h.mu1 + h.sd * normal_quantile(std::clamp(p, 1e-300, 1.0 - 1e-16)); };
            if (h.role == 0) {
              const double s = huber_split(h, h.c_hi);
              const double left = q * P0(s);
              if (u < left) return Q0(u / q);
              return Q1(P1(s) + (u - left) * h.c_hi / q);
            }
            const double s = huber_split(h, h.c_lo);
            const double left = q * h.c_lo * P0(s);
            if (u <= left) return Q0(u / (q * h.c_lo));
            return Q1(P1(s) + (u - left) / q);
          },
      },
      v_);
}

double Distribution::mean() const {
  return std::visit(
      Overloaded{
          [](const Gaussian& g) { return g.mean; },
          [](const Poisson& p) { return p.rate; },
          [](const Bernoulli& b) { return b.p; },
          [](const Uniform& u) { return 0.5 * (u.lo + u.hi); },
          [](const Exponential& e) { return 1.0 / e.rate; },
          [](const Cauchy&) { return std::numeric_limits<double>::quiet_NaN(); },
          [](const Named&) { return 0.2; },  // both named densities have mean 1/5
          [](const Mixture& m) {
            double s = 0.0;
            for (std::size_t k = 0; k < m.weights.size(); ++k) s += m.weights[k] * m.components[k]->mean();
            return s;
          },
          [](const Markov2& m) {
            const double denom = 1.0 - m.p11 + m.p01;
            return denom > 0 ? m.p01 / denom : m.init_p1;
          },
          [](const Contaminated& c) { return (1.0 - c.eps) * c.base->mean() + c.eps * c.contaminant->mean(); },
          [](const HuberLfd& h) {
            // numerical, the LFD has no simple closed form for its mean
            Distribution d{h};
            return integrate([&](double x) { return x * std::exp(d.log_density(x)); }, kNegInf, kInf, 1e-10);
          },
      },
      v_);
}

double Distribution::draw(double u, double v, double prev) const {
  if (const auto* m = as<Markov2>()) {
    double p1 = std::isnan(prev) ? m->init_p1 : (prev > 0.5 ? m->p11 : m->p01);
    return u < p1 ? 1.0 : 0.0;
  }
  if (const auto* m = as<Mixture>()) {
    double acc = 0.0;
    for (std::size_t k = 0; k < m->weights.size(); ++k) {
      const double w = m->weights[k];
      if (v < acc + w || k + 1 == m->weights.size()) {
        const double vv = w > 0 ? std::clamp((v - acc) / w, 1e-300, 1.0 - 1e-16) : 0.5;
        return m->components[k]->draw(u, vv, prev);
      }
      acc += w;
    }
  }
  if (const auto* c = as<Contaminated>()) {
    if (v < c->eps) return c->contaminant->draw(u, std::clamp(v / c->eps, 1e-300, 1.0 - 1e-16), prev);
    return c->base->draw(u, std::clamp((v - c->eps) / (1.0 - c->eps), 1e-300, 1.0 - 1e-16), prev);
  }
  return quantile(u);
}

nlohmann::json Distribution::to_json() const {
  using nlohmann::json;
  return std::visit(
      Overloaded{
          [](const Gaussian& g) { return json{{"kind", "gaussian"}, {"mean", g.mean}, {"sd", g.sd}}; },
          [](const Poisson& p) { return json{{"kind", "poisson"}, {"rate", p.rate}}; },
          [](const Bernoulli& b) { return json{{"kind", "bernoulli"}, {"p", b.p}}; },
          [](const Uniform& u) { return json{{"kind", "uniform"}, {"lo", u.lo}, {"hi", u.hi}}; },
          [](const Exponential& e) { return json{{"kind", "exponential"}, {"rate", e.rate}}; },
          [](const Cauchy& c) { return json{{"kind", "cauchy"}, {"loc", c.loc}, {"scale", c.scale}}; },
          [](const Named& n) {
            return json{{"kind", "named"},
                        {"name", n.which == NamedDensity::quartic_decay ? "quartic_decay" : "step_mixture"}};
          },
          [](const Mixture& m) {
            json comps = json::array();
            for (auto& c : m.components) comps.push_back(c->to_json());
            return json{{"kind", "mixture"}, {"weights", m.weights}, {"components", comps}};
          },
          [](const Markov2& m) {
            return json{{"kind", "markov2"}, {"p01", m.p01}, {"p11", m.p11}, {"init_p1", m.init_p1}};
          },
          [](const Contaminated& c) {
            return json{{"kind", "contaminated"},
                        {"base", c.base->to_json()},
                        {"eps", c.eps},
                        {"contaminant", c.contaminant->to_json()}};
          },
          [](const HuberLfd& h) {
            return json{{"kind", "huber_lfd"}, {"mu0", h.mu0}, {"mu1", h.mu1}, {"sd", h.sd},
                        {"eps", h.eps},        {"role", h.role}};
          },
      },
      v_);
}

Distribution Distribution::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "gaussian") return gaussian(j.at("mean").get<double>(), j.value("sd", 1.0));
  if (kind == "poisson") return poisson(j.at("rate").get<double>());
  if (kind == "bernoulli") return bernoulli(j.at("p").get<double>());
  if (kind == "uniform") return uniform(j.at("lo").get<double>(), j.at("hi").get<double>());
  if (kind == "exponential") return exponential(j.at("rate").get<double>());
  if (kind == "cauchy") return cauchy(j.at("loc").get<double>(), j.at("scale").get<double>());
  if (kind == "named") {
    const std::string name = j.at("name").get<std::string>();
    if (name == "quartic_decay") return named(NamedDensity::quartic_decay);
    if (name == "step_mixture") return named(NamedDensity::step_mixture);
    throw std::invalid_argument("unknown named density: " + name);
  }
  if (kind == "mixture") {
    std::vector<Distribution> comps;
    for (auto& c : j.at("components")) comps.push_back(from_json(c));
    return mixture(j.at("weights").get<std::vector<double>>(), std::move(comps));
  }
  if (kind == "markov2")
    return markov2(j.at("p01").get<double>(), j.at("p11").get<double>(), j.value("init_p1", 0.5));
  if (kind == "contaminated")
    return contaminated(from_json(j.at("base")), j.at("eps").get<double>(), from_json(j.at("contaminant")));
  if (kind == "huber_lfd")
    return huber_lfd(j.at("mu0").get<double>(), j.at("mu1").get<double>(), j.value("sd", 1.0),
                     j.at("eps").get<double>(), j.value("role", 0));
  throw std::invalid_argument("unknown distribution kind: " + kind);
}

Distribution ParametricFamily::make(double theta) const {
  switch (kind) {
    case FamilyKind::gaussian_location: return Distribution::gaussian(theta, fixed);
    case FamilyKind::gaussian_scale: return Distribution::gaussian(fixed, theta);
    case FamilyKind::poisson: return Distribution::poisson(theta);
    case FamilyKind::exponential: return Distribution::exponential(theta);
    case FamilyKind::bernoulli: return Distribution::bernoulli(theta);
  }
  throw std::logic_error("unknown family");
}

double couple(const CouplingRule& rule, double x, double theta) {
  switch (rule.family) {
    case CouplingFamily::location: return x + theta - rule.base_param;
    case CouplingFamily::scale:
      if (rule.base_param == 0.0) throw std::invalid_argument("couple: scale rule with zero base parameter");
      return x * theta / rule.base_param;
    case CouplingFamily::inverse_cdf: {
      if (!rule.param_family.continuous()) throw std::invalid_argument("couple: inverse_cdf needs a continuous family");
      const double u = rule.param_family.make(rule.base_param).cdf(x);
      return rule.param_family.make(theta).quantile(std::clamp(u, 1e-300, 1.0 - 1e-16));
    }
    case CouplingFamily::poisson_thinning:
      throw std::invalid_argument("couple: use poisson_thin for the thinning rule");
  }
  throw std::logic_error("unknown coupling");
}

int poisson_thin(int count, const std::vector<double>& uniforms, double ratio) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw std::invalid_argument("poisson_thin: ratio outside [0,1]");
  if (static_cast<int>(uniforms.size()) < count) throw std::invalid_argument("poisson_thin: too few uniforms");
  int kept = 0;
  for (int i = 0; i < count; ++i) kept += uniforms[i] < ratio ? 1 : 0;
  return kept;
}

double draw_at(const Distribution& d, std::uint64_t key, Index n, double prev) {
  return d.draw(counter_uniform(key, static_cast<std::uint64_t>(n), 0),
                counter_uniform(key, static_cast<std::uint64_t>(n), 1), prev);
}

ObservationPath sample_path(const Distribution& pre, const Distribution& post, Index change_index,
                            Index horizon, std::uint64_t seed) {
  if (horizon < 1) throw std::invalid_argument("sample_path: horizon must be >= 1");
  if (change_index < 1) throw std::invalid_argument("sample_path: change_index must be >= 1");
  ObservationPath path;
  path.change_index = change_index;
  path.seed = seed;
  path.values.reserve(static_cast<std::size_t>(horizon));
  double prev = kNoPrev;
  for (Index n = 1; n <= horizon; ++n) {
    const Distribution& d = n < change_index ? pre : post;
    prev = draw_at(d, seed, n, prev);
    path.values.push_back(prev);
  }
  return path;
}

}  // namespace cpl
