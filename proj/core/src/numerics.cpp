#include "cpl/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>

namespace cpl {

double log_sum_exp(std::span<const double> v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

double log_add_exp(double a, double b) {
  if (a < b) std::swap(a, b);
  if (!std::isfinite(a)) return a;
  return a + std::log1p(std::exp(b - a));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return kNegInf;
    if (p == 1.0) return kInf;
    throw std::domain_error("normal_quantile: p outside [0,1]");
  }
  static const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(standard, p);
}

MinimizeResult golden_section(const std::function<double(double)>& f, double lo, double hi,
                              double tol) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  double x = 0.5 * (a + b);
  double fx = f(x);
  // the endpoints can win when the minimum sits on the boundary
  double flo = f(lo), fhi = f(hi);
  if (flo < fx) return {lo, flo};
  if (fhi < fx) return {hi, fhi};
  return {x, fx};
}

double find_root(const std::function<double(double)>& f, double lo, double hi, double xtol,
                 int max_iter) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0)) throw std::runtime_error("find_root: no sign change on bracket");
  boost::uintmax_t iters = static_cast<boost::uintmax_t>(max_iter);
  auto tol = [xtol](double a, double b) { return std::abs(b - a) <= xtol * std::max(1.0, std::abs(a)); };
  auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
  double a = r.first, b = r.second;
  return std::abs(f(a)) <= std::abs(f(b)) ? a : b;
}

double integrate(const std::function<double(double)>& f, double lo, double hi, double rel_tol) {
  using namespace boost::math::quadrature;
  if (std::isinf(lo) && std::isinf(hi)) {
    sinh_sinh<double> integrator;
    return integrator.integrate(f, rel_tol);
  }
  if (std::isinf(hi)) {
    exp_sinh<double> integrator;
    return integrator.integrate(f, lo, hi, rel_tol);
  }
  if (std::isinf(lo)) {
    exp_sinh<double> integrator;
    return integrator.integrate([&](double x) { return f(-x); }, -hi, kInf, rel_tol);
  }
  return gauss_kronrod<double, 61>::integrate(f, lo, hi, 15, rel_tol);
}

double log_I(double a, double b) {
  if (a <= 0.0 || b <= 0.0) return kInf;
  return std::lgamma(b) - b * std::log(a);
}

}  // namespace cpl
