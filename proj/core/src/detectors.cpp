#include "cpl/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cpl/rng.hpp"

namespace cpl {
namespace {

struct FamilyName {
  DetectorFamily f;
  const char* name;
};
constexpr FamilyName kNames[] = {
    {DetectorFamily::cusum_lr, "cusum_lr"},
    {DetectorFamily::weighted_cusum, "weighted_cusum"},
    {DetectorFamily::wcs_ripr, "wcs_ripr"},
    {DetectorFamily::sr, "sr"},
    {DetectorFamily::lr_pfa, "lr_pfa"},
    {DetectorFamily::mixture_lr_pfa, "mixture_lr_pfa"},
    {DetectorFamily::mixture_lr_ripr_pfa, "mixture_lr_ripr_pfa"},
    {DetectorFamily::e_hist, "e_hist"},
    {DetectorFamily::e_subgaussian, "e_subgaussian"},
    {DetectorFamily::huber_cusum, "huber_cusum"},
    {DetectorFamily::markov_cusum, "markov_cusum"},
    {DetectorFamily::wu_reflected, "wu_reflected"},
};

bool uses_atom_rows(DetectorFamily f) {
  return f == DetectorFamily::weighted_cusum || f == DetectorFamily::wcs_ripr;
}
bool uses_atom_stats(DetectorFamily f) {
  return f == DetectorFamily::sr || f == DetectorFamily::mixture_lr_pfa ||
         f == DetectorFamily::mixture_lr_ripr_pfa;
}
bool scalar_lr(DetectorFamily f) {
  return f == DetectorFamily::cusum_lr || f == DetectorFamily::lr_pfa || f == DetectorFamily::huber_cusum ||
         f == DetectorFamily::markov_cusum;
}

int hist_bin(double x, int bins) {
  int b = static_cast<int>(std::floor(x * bins));
  return std::clamp(b, 0, bins - 1);
}

double mixture_value(const DetectorSpec& spec, const double* row) {
  const std::size_t m = spec.atoms.size();
  double mx = kNegInf;
  for (std::size_t k = 0; k < m; ++k) mx = std::max(mx, row[k]);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (std::size_t k = 0; k < m; ++k) s += spec.masses[k] * std::exp(row[k] - mx);
  return mx + std::log(s);
}

}  // namespace

std::string to_string(DetectorFamily f) {
  for (auto& n : kNames)
    if (n.f == f) return n.name;
  return "unknown";
}

DetectorFamily detector_family_from_string(const std::string& s) {
  for (auto& n : kNames)
    if (s == n.name) return n.f;
  if (s == "cusum") return DetectorFamily::cusum_lr;
  throw std::invalid_argument("unknown detector family: " + s);
}

std::vector<double> truncated_geometric_weights(int m) {
  if (m < 1) throw std::invalid_argument("truncated_geometric_weights: m must be >= 1");
  std::vector<double> w(static_cast<std::size_t>(m));
  for (int i = 1; i < m; ++i) w[i - 1] = std::exp(-(i - 1) / 2.0) - std::exp(-i / 2.0);
  w[m - 1] = std::exp(-(m - 1) / 2.0);
  return w;
}

void DetectorSpec::validate() const {
  if (!(threshold > 0.0)) throw std::invalid_argument("detector: threshold must be > 0");
  switch (family) {
    case DetectorFamily::wu_reflected:
    case DetectorFamily::e_subgaussian: return;
    case DetectorFamily::e_hist:
      if (bins < 2) throw std::invalid_argument("detector: e_hist needs bins >= 2");
      return;
    default: break;
  }
  if (atoms.empty()) throw std::invalid_argument("detector: at least one post-change atom required");
  if (masses.size() != atoms.size()) throw std::invalid_argument("detector: masses and atoms differ in length");
  double s = 0.0;
  for (double w : masses) {
    if (w < 0.0) throw std::invalid_argument("detector: negative mass");
    s += w;
  }
  if (std::abs(s - 1.0) > 1e-12) throw std::invalid_argument("detector: masses must sum to 1");
  if (family == DetectorFamily::huber_cusum && !(clip_lo < clip_hi))
    throw std::invalid_argument("detector: huber_cusum requires c' < c''");
  if (family == DetectorFamily::markov_cusum && (!pre.is_markov() || !atoms.front().is_markov()))
    throw std::invalid_argument("detector: markov_cusum requires markov2 models");
}

double DetectorSpec::log_threshold() const {
  return family == DetectorFamily::wu_reflected ? threshold : std::log(threshold);
}

nlohmann::json DetectorSpec::to_json() const {
  nlohmann::json j{{"family", to_string(family)}, {"threshold", threshold}, {"pre", pre.to_json()}};
  nlohmann::json a = nlohmann::json::array();
  for (auto& d : atoms) a.push_back(d.to_json());
  j["atoms"] = a;
  j["masses"] = masses;
  j["bins"] = bins;
  j["clip_lo"] = clip_lo;
  if (std::isfinite(clip_hi)) j["clip_hi"] = clip_hi;
  j["subgaussian_boundary"] = subgaussian_boundary;
  j["prune"] = prune;
  return j;
}

DetectorSpec DetectorSpec::from_json(const nlohmann::json& j) {
  DetectorSpec s;
  s.family = detector_family_from_string(j.at("family").get<std::string>());
  s.threshold = j.at("threshold").get<double>();
  if (j.contains("pre")) s.pre = Distribution::from_json(j.at("pre"));
  if (j.contains("atoms"))
    for (auto& a : j.at("atoms")) s.atoms.push_back(Distribution::from_json(a));
  if (j.contains("post")) s.atoms.push_back(Distribution::from_json(j.at("post")));
  if (j.contains("masses")) s.masses = j.at("masses").get<std::vector<double>>();
  else if (!s.atoms.empty()) s.masses.assign(s.atoms.size(), 1.0 / s.atoms.size());
  s.bins = j.value("bins", 10);
  s.clip_lo = j.value("clip_lo", 0.0);
  s.clip_hi = j.value("clip_hi", kInf);
  s.subgaussian_boundary = j.value("subgaussian_boundary", 0.5);
  s.prune = j.value("prune", true);
  s.validate();
  return s;
}

DetectorSpec make_cusum(const Distribution& pre, const Distribution& post, double A) {
  DetectorSpec s;
  s.family = pre.is_markov() ? DetectorFamily::markov_cusum : DetectorFamily::cusum_lr;
  s.threshold = A;
  s.pre = pre;
  s.atoms = {post};
  s.masses = {1.0};
  s.validate();
  return s;
}

DetectorSpec make_weighted(DetectorFamily family, const Distribution& pre, const ParametricFamily& fam,
                           double start, double step, int n_atoms, double A) {
  DetectorSpec s;
  s.family = family;
  s.threshold = A;
  s.pre = pre;
  for (int k = 0; k < n_atoms; ++k) s.atoms.push_back(fam.make(start + step * k));
  s.masses = truncated_geometric_weights(n_atoms);
  s.validate();
  return s;
}

DetectorSpec make_huber_cusum(double mu0, double mu1, double sd, double c_lo, double c_hi, double A) {
  DetectorSpec s;
  s.family = DetectorFamily::huber_cusum;
  s.threshold = A;
  s.pre = Distribution::gaussian(mu0, sd);
  s.atoms = {Distribution::gaussian(mu1, sd)};
  s.masses = {1.0};
  s.clip_lo = c_lo;
  s.clip_hi = c_hi;
  s.validate();
  return s;
}

DetectorSpec make_e_hist(const Distribution& pre, int bins, double A) {
  DetectorSpec s;
  s.family = DetectorFamily::e_hist;
  s.threshold = A;
  s.pre = pre;
  s.bins = bins;
  s.validate();
  return s;
}

DetectorSpec make_e_subgaussian(double boundary, double A) {
  DetectorSpec s;
  s.family = DetectorFamily::e_subgaussian;
  s.threshold = A;
  s.subgaussian_boundary = boundary;
  s.validate();
  return s;
}

DetectorSpec make_wu(double d) {
  DetectorSpec s;
  s.family = DetectorFamily::wu_reflected;
  s.threshold = d;
  s.validate();
  return s;
}

DetectorState init_state(const DetectorSpec& spec) {
  DetectorState st;
  if (uses_atom_stats(spec.family)) {
    const double init = spec.family == DetectorFamily::sr ? kNegInf : 0.0;
    st.atom_stat.assign(spec.atoms.size(), init);
  }
  st.stat = 0.0;
  return st;
}

double DetectorState::statistic(const DetectorSpec& spec) const {
  if (uses_atom_rows(spec.family)) {
    const std::size_t m = spec.atoms.size();
    double best = kNegInf;
    for (std::size_t r = 0; r * m < rows.size(); ++r) best = std::max(best, mixture_value(spec, &rows[r * m]));
    return best;
  }
  if (uses_atom_stats(spec.family)) return mixture_value(spec, atom_stat.data());
  if (spec.family == DetectorFamily::e_hist) {
    double best = kNegInf;
    for (double v : hist_logprod) best = std::max(best, v);
    return best;
  }
  return stat;
}

void detector_step(const DetectorSpec& spec, DetectorState& st, double x) {
  if (st.stopped) throw std::logic_error("detector_step: detector already stopped");
  st.n += 1;
  const double logA = spec.log_threshold();
  const double prev = st.prev;
  st.prev = x;

  if (scalar_lr(spec.family)) {
    double l = spec.atoms.front().log_density(x, prev) - spec.pre.log_density(x, prev);
    if (spec.family == DetectorFamily::huber_cusum)
      l = std::clamp(l, std::log(spec.clip_lo), std::log(spec.clip_hi));
    if (spec.family == DetectorFamily::lr_pfa) st.stat += l;
    else st.stat = std::max(st.stat, 0.0) + l;
    st.stopped = st.stat >= logA;
    return;
  }

  switch (spec.family) {
    case DetectorFamily::wu_reflected:
      st.stat = std::max(0.0, st.stat + x);
      st.stopped = st.stat >= spec.threshold;
      return;
    case DetectorFamily::e_subgaussian: {
      const double mean = st.n > 1 ? st.running_sum / static_cast<double>(st.n - 1) : 0.0;
      const double nu = std::min(0.0, mean) - spec.subgaussian_boundary;
      st.stat = std::max(st.stat, 0.0) + nu * x - 0.5 * nu * nu;
      st.running_sum += x;
      st.stopped = st.stat >= logA;
      return;
    }
    case DetectorFamily::e_hist: {
      const int bins = spec.bins;
      const int b = hist_bin(x, bins);
      const double p0 = spec.pre.cdf(static_cast<double>(b + 1) / bins) - spec.pre.cdf(static_cast<double>(b) / bins);
      const double lp0 = std::log(p0);
      st.hist_logprod.push_back(0.0);
      st.hist_counts.resize(st.hist_counts.size() + static_cast<std::size_t>(bins), 0);
      const std::size_t nrows = st.hist_logprod.size();
      bool hit = false;
      for (std::size_t r = 0; r < nrows; ++r) {
        // row r started at step r+1 and has seen (n - r - 1) earlier observations
        const double len = static_cast<double>(static_cast<std::size_t>(st.n) - r - 1);
        int& c = st.hist_counts[r * bins + b];
        st.hist_logprod[r] += std::log((1.0 + c) / (bins + len)) - lp0;
        c += 1;
        hit = hit || st.hist_logprod[r] >= logA;
      }
      st.stopped = hit;
      return;
    }
    default: break;
  }

  const std::size_t m = spec.atoms.size();
  thread_local std::vector<double> inc;
  inc.resize(m);
  const double l0 = spec.pre.log_density(x, prev);
  for (std::size_t k = 0; k < m; ++k) inc[k] = spec.atoms[k].log_density(x, prev) - l0;

  if (uses_atom_stats(spec.family)) {
    for (std::size_t k = 0; k < m; ++k) {
      if (spec.family == DetectorFamily::sr) st.atom_stat[k] = log_add_exp(0.0, st.atom_stat[k]) + inc[k];
      else st.atom_stat[k] += inc[k];
    }
    st.stopped = mixture_value(spec, st.atom_stat.data()) >= logA;
    return;
  }

  // weighted CUSUM families
  std::vector<double>& rows = st.rows;
  const std::size_t nrows = rows.size() / m;
  for (std::size_t r = 0; r < nrows; ++r) {
    double* row = &rows[r * m];
    for (std::size_t k = 0; k < m; ++k) row[k] += inc[k];
  }
  rows.insert(rows.end(), inc.begin(), inc.end());
  const std::size_t total = nrows + 1;
  for (std::size_t r = 0; r < total && !st.stopped; ++r) {
    const double* row = &rows[r * m];
    double mx = kNegInf;
    for (std::size_t k = 0; k < m; ++k) mx = std::max(mx, row[k]);
    // the mixture never exceeds its largest component
    if (mx >= logA && mixture_value(spec, row) >= logA) st.stopped = true;
  }
  if (spec.prune && !st.stopped) {
    // A row whose every atom product is <= 1 is dominated forever by the row
    // that starts at the next step, so it can no longer decide a stop.
    std::size_t out = 0;
    for (std::size_t r = 0; r < total; ++r) {
      const double* row = &rows[r * m];
      bool keep = false;
      for (std::size_t k = 0; k < m; ++k) keep = keep || row[k] > 0.0;
      if (keep) {
        if (out != r) std::copy(row, row + m, &rows[out * m]);
        ++out;
      }
    }
    rows.resize(out * m);
  }
}

StopOutcome run_to_stop(const DetectorSpec& spec, const std::vector<double>& data, Index cap) {
  const Index limit = std::min<Index>(cap, static_cast<Index>(data.size()));
  return run_to_stop(spec, [&](Index n) { return data[static_cast<std::size_t>(n - 1)]; }, limit);
}

CoupledNoise CoupledNoise::gaussian(std::uint64_t key, double sd) {
  CoupledNoise c;
  c.key_ = key;
  c.sd_ = sd;
  return c;
}

CoupledNoise CoupledNoise::poisson(std::uint64_t key, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("CoupledNoise: lambda must be > 0");
  CoupledNoise c;
  c.key_ = key;
  c.poisson_ = true;
  c.lambda_ = lambda;
  return c;
}

void CoupledNoise::extend(Index n) const {
  const std::size_t need = static_cast<std::size_t>(n);
  if (!poisson_) {
    while (eps_.size() < need) {
      const auto i = static_cast<std::uint64_t>(eps_.size() + 1);
      eps_.push_back(normal_quantile(counter_uniform(key_, i, 0)));
    }
    return;
  }
  const Distribution base = Distribution::poisson(lambda_);
  while (counts_.size() < need) {
    const auto i = static_cast<std::uint64_t>(counts_.size() + 1);
    const int c = static_cast<int>(base.quantile(counter_uniform(key_, i, 0)));
    counts_.push_back(c);
    std::vector<double> u(static_cast<std::size_t>(c));
    for (int k = 0; k < c; ++k) u[k] = counter_uniform(key_, i, static_cast<std::uint64_t>(k) + 1);
    std::sort(u.begin(), u.end());
    uniforms_.push_back(std::move(u));
  }
}

double CoupledNoise::eps(Index n) const {
  extend(n);
  return eps_[static_cast<std::size_t>(n - 1)];
}

int CoupledNoise::count(Index n) const {
  extend(n);
  return counts_[static_cast<std::size_t>(n - 1)];
}

double CoupledNoise::thin_uniform(Index n, int k) const {
  extend(n);
  return uniforms_[static_cast<std::size_t>(n - 1)][static_cast<std::size_t>(k)];
}

double CoupledNoise::value(Index n, double theta) const {
  extend(n);
  if (!poisson_) return theta + sd_ * eps_[static_cast<std::size_t>(n - 1)];
  if (theta > lambda_ * (1.0 + 1e-12)) throw std::invalid_argument("CoupledNoise: theta exceeds the base rate");
  // uniforms are stored sorted, so the thinned count is a lower_bound position
  const auto& u = uniforms_[static_cast<std::size_t>(n - 1)];
  const double ratio = theta / lambda_;
  return static_cast<double>(std::lower_bound(u.begin(), u.end(), ratio) - u.begin());
}

int monotone_direction(const DetectorSpec& spec) {
  switch (spec.family) {
    case DetectorFamily::wu_reflected: return 1;
    case DetectorFamily::e_hist:
    case DetectorFamily::e_subgaussian:
    case DetectorFamily::markov_cusum: return 0;
    default: break;
  }
  int dir = 0;
  for (const auto& a : spec.atoms) {
    int d = 0;
    if (auto* g0 = spec.pre.as<Gaussian>(); g0) {
      auto* g1 = a.as<Gaussian>();
      if (!g1 || g1->sd != g0->sd) return 0;
      d = g1->mean > g0->mean ? 1 : (g1->mean < g0->mean ? -1 : 0);
    } else if (auto* p0 = spec.pre.as<Poisson>(); p0) {
      auto* p1 = a.as<Poisson>();
      if (!p1) return 0;
      d = p1->rate > p0->rate ? 1 : (p1->rate < p0->rate ? -1 : 0);
    } else {
      return 0;
    }
    if (d == 0) continue;
    if (dir != 0 && d != dir) return 0;
    dir = d;
  }
  return dir;
}

MonotoneBracket stop_time_bounds(const DetectorSpec& spec, const CoupledNoise& noise, Index t, ParamRange pre,
                                 ParamRange post, Index cap) {
  const int dir = monotone_direction(spec);
  if (dir == 0) throw std::invalid_argument("stop_time_bounds: detector has no monotonicity metadata");
  const double fast_pre = dir > 0 ? pre.hi : pre.lo, slow_pre = dir > 0 ? pre.lo : pre.hi;
  const double fast_post = dir > 0 ? post.hi : post.lo, slow_post = dir > 0 ? post.lo : post.hi;
  auto run = [&](double a, double b) {
    return run_to_stop(spec, [&](Index n) { return noise.value(n, n < t ? a : b); }, cap);
  };
  const StopOutcome fast = run(fast_pre, fast_post);
  const bool same = fast_pre == slow_pre && fast_post == slow_post;
  const StopOutcome slow = same ? fast : run(slow_pre, slow_post);
  return {fast.time, slow.time, fast.stopped, slow.stopped};
}

}  // namespace cpl
