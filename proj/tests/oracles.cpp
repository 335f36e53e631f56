#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace oracle {

std::optional<double> lambda_bisection(const std::vector<double>& u,
                                       const std::vector<double>& w) {
  double umax = -std::numeric_limits<double>::infinity();
  double umin = std::numeric_limits<double>::infinity();
  for (double v : u) {
    umax = std::max(umax, v);
    umin = std::min(umin, v);
  }
  if (!(umin < 0.0 && umax > 0.0)) {
    // mean may still be exactly zero in degenerate all-zero cases
    double mean = 0.0;
    for (size_t i = 0; i < u.size(); ++i) mean += w[i] * u[i];
    if (mean == 0.0) return 0.0;
    return std::nullopt;
  }
  auto g = [&](double lam) {
    double s = 0.0;
    for (size_t i = 0; i < u.size(); ++i) s += w[i] * u[i] / (1.0 + lam * u[i]);
    return s;
  };
  // feasible open interval (-1/umax, -1/umin); g decreases from +inf to -inf
  double lo = -1.0 / umax, hi = -1.0 / umin;
  double width = hi - lo;
  lo += 1e-12 * width;
  hi -= 1e-12 * width;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (g(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

std::optional<double> classical_el_log_ratio(const std::vector<double>& v) {
  const size_t n = v.size();
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  auto lam = lambda_bisection(v, w);
  if (!lam) return std::nullopt;
  double r = 0.0;
  for (double vi : v) r -= std::log(1.0 + *lam * vi);
  return r;
}

double quadform_tail(const std::vector<double>& delta, double q, long draws,
                     unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  long count = 0;
  for (long i = 0; i < draws; ++i) {
    double s = 0.0;
    for (double d : delta) {
      double z = nd(gen);
      s += d * z * z;
    }
    if (s > q) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(draws);
}

double hh_variance(const std::vector<double>& g, const std::vector<double>& size,
                   int n) {
  double zsum = 0.0;
  for (double s : size) zsum += s;
  double total = 0.0;
  for (double v : g) total += v;
  double second = 0.0;
  for (size_t i = 0; i < g.size(); ++i) {
    double z = size[i] / zsum;
    second += g[i] * g[i] / z;
  }
  return (second - total * total) / n;
}

}  // namespace oracle
