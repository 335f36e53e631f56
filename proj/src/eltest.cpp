#include "elsurv/eltest.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <limits>

#include "elsurv/bootstrap.hpp"
#include "elsurv/errors.hpp"
#include "elsurv/rng.hpp"

namespace elsurv {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::MatrixXd sym_sqrt(const Eigen::MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  Eigen::VectorXd d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

std::int64_t quadform_exceed_count(const Eigen::VectorXd& eigs, double stat,
                                   int draws, std::uint64_t seed) {
  const int k = static_cast<int>(eigs.size());
  std::int64_t count = 0;
#pragma omp parallel for reduction(+ : count) schedule(static)
  for (int i = 0; i < draws; ++i) {
    Rng rng(seed, static_cast<std::uint64_t>(i));
    double s = 0.0;
    for (int j = 0; j < k; ++j) {
      double z = rng.normal();
      s += eigs[j] * z * z;
    }
    if (s > stat) ++count;
  }
  return count;
}

std::vector<double> quadform_sample(const Eigen::VectorXd& eigs, int draws,
                                    std::uint64_t seed) {
  const int k = static_cast<int>(eigs.size());
  std::vector<double> out(draws);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < draws; ++i) {
    Rng rng(seed, static_cast<std::uint64_t>(i));
    double s = 0.0;
    for (int j = 0; j < k; ++j) {
      double z = rng.normal();
      s += eigs[j] * z * z;
    }
    out[i] = s;
  }
  return out;
}

QuadraticFormDist build_delta(const FitResult& fit,
                              const std::optional<Eigen::MatrixXd>& Phi,
                              TailMethod method, int mc_draws,
                              std::uint64_t seed) {
  Eigen::MatrixXd Winv = fit.W_hat.inverse();
  Eigen::MatrixXd GtWG = fit.Gamma_hat.transpose() * Winv * fit.Gamma_hat;
  Eigen::MatrixXd Sigma = GtWG.inverse();
  Eigen::MatrixXd S = sym_sqrt(fit.Omega_hat);

  Eigen::MatrixXd core;
  if (Phi) {
    const Eigen::MatrixXd& P = *Phi;
    Eigen::MatrixXd PSP = P * Sigma * P.transpose();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(PSP);
    if (!lu.isInvertible())
      throw RankDeficient("Phi Sigma Phi' is singular (constraint Jacobian rank)");
    core = Sigma * P.transpose() * lu.solve(P * Sigma);
  } else {
    core = Sigma;
  }
  Eigen::MatrixXd Delta =
      S * Winv * fit.Gamma_hat * core * fit.Gamma_hat.transpose() * Winv * S;
  Delta = 0.5 * (Delta + Delta.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Delta);
  Eigen::VectorXd all = es.eigenvalues();
  double dmax = all.size() ? all.maxCoeff() : 0.0;
  std::vector<double> kept;
  for (int j = static_cast<int>(all.size()) - 1; j >= 0; --j)
    if (all[j] > 1e-8 * dmax) kept.push_back(all[j]);
  if (kept.empty())
    throw DegenerateStatistic("no retained eigenvalues in Delta");

  QuadraticFormDist dist;
  dist.eigenvalues = Eigen::Map<Eigen::VectorXd>(kept.data(), kept.size());
  dist.method = method;
  dist.mc_draws = mc_draws;
  dist.seed = seed;
  dist.rs_m = static_cast<int>(kept.size());
  double s1 = dist.eigenvalues.sum();
  double s2 = dist.eigenvalues.squaredNorm();
  dist.rs_a = s1 / dist.rs_m;
  dist.rs_c = s2 / s1;
  dist.rs_kstar = s1 * s1 / s2;
  return dist;
}

double chi2_upper_tail(int df, double statistic) {
  if (statistic <= 0.0) return 1.0;
  boost::math::chi_squared dist(df);
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

double chi2_quantile_upper(int df, double alpha) {
  boost::math::chi_squared dist(df);
  return boost::math::quantile(dist, 1.0 - alpha);
}

double pvalue(const QuadraticFormDist& dist, double statistic) {
  if (!(statistic >= 0.0) || !std::isfinite(statistic))
    throw ValidationError("statistic must be finite and nonnegative");
  if (statistic == 0.0) return 1.0;
  switch (dist.method) {
    case TailMethod::EIGEN_MC: {
      std::int64_t c = quadform_exceed_count(dist.eigenvalues, statistic,
                                             dist.mc_draws, dist.seed);
      return static_cast<double>(c) / dist.mc_draws;
    }
    case TailMethod::RS1:
      return chi2_upper_tail(dist.rs_m, statistic / dist.rs_a);
    case TailMethod::RS2: {
      // c * chi2(k*) with fractional df read as gamma(k*/2, scale 2)
      boost::math::gamma_distribution<> g(dist.rs_kstar / 2.0, 2.0);
      return boost::math::cdf(boost::math::complement(g, statistic / dist.rs_c));
    }
  }
  throw ValidationError("unknown tail method");
}

double critical_value(const QuadraticFormDist& dist, double alpha) {
  switch (dist.method) {
    case TailMethod::EIGEN_MC: {
      std::vector<double> s =
          quadform_sample(dist.eigenvalues, dist.mc_draws, dist.seed);
      // upper-alpha quantile, order statistic ceil((1-alpha)*draws)
      int k = static_cast<int>(
          std::ceil((1.0 - alpha) * static_cast<double>(dist.mc_draws)));
      k = std::min(std::max(k, 1), dist.mc_draws);
      std::nth_element(s.begin(), s.begin() + (k - 1), s.end());
      return s[k - 1];
    }
    case TailMethod::RS1: {
      boost::math::chi_squared c(dist.rs_m);
      return dist.rs_a * boost::math::quantile(c, 1.0 - alpha);
    }
    case TailMethod::RS2: {
      boost::math::gamma_distribution<> g(dist.rs_kstar / 2.0, 2.0);
      return dist.rs_c * boost::math::quantile(g, 1.0 - alpha);
    }
  }
  throw ValidationError("unknown tail method");
}

void fill_rejections(TestResult& t) {
  for (double a : {0.01, 0.05, 0.10}) t.reject_at[a] = t.p_value < a;
}

double lr_simple(ELKind kind, const SurveyDataset& ds,
                 const EstimatingFunction& gf, const Eigen::VectorXd& theta0,
                 const ParamSpace& space, const SolverConfig& cfg, bool* hull) {
  if (hull) *hull = false;
  MaximizeResult fit = maximize(kind, ds, gf, space, cfg);
  ELProfile at0 = profile(kind, ds, gf, theta0, cfg);
  if (std::isinf(at0.log_ratio)) {
    if (hull) *hull = true;
    return kInf;
  }
  return std::max(0.0, 2.0 * (fit.profile.log_ratio - at0.log_ratio));
}

TestResult lr_nested(ELKind kind, const SurveyDataset& ds,
                     const EstimatingFunction& gf, const ParamSpace& space,
                     const RFunction& constraint, TailMethod method,
                     int mc_draws, std::uint64_t seed,
                     const SolverConfig& cfg) {
  MaximizeResult fit = maximize(kind, ds, gf, space, cfg);
  MaximizeResult rfit = maximize_restricted(kind, ds, gf, space, constraint, cfg);
  TestResult t;
  t.statistic =
      std::max(0.0, 2.0 * (fit.profile.log_ratio - rfit.profile.log_ratio));
  // plug-ins evaluated at the unrestricted maximizer
  FitResult comp = plugin_components(kind, ds, gf, fit.theta);
  Eigen::MatrixXd Phi = constraint.jac(fit.theta);
  QuadraticFormDist dist = build_delta(comp, Phi, method, mc_draws, seed);
  t.p_value = pvalue(dist, t.statistic);
  t.eigenvalues = dist.eigenvalues;
  switch (method) {
    case TailMethod::EIGEN_MC: t.method = "eigmc"; break;
    case TailMethod::RS1: t.method = "rs1"; break;
    case TailMethod::RS2: t.method = "rs2"; break;
  }
  fill_rejections(t);
  return t;
}

TestResult wald_test(const FitResult& fit, const Eigen::VectorXd& contrast,
                     double value0) {
  if (!fit.has_V) throw ValidationError("wald_test needs the sandwich variance");
  double var = contrast.dot(fit.V_hat * contrast) / fit.n;
  if (!(var > 0.0))
    throw DegenerateStatistic("zero standard error for the contrast");
  double z = (contrast.dot(fit.theta_hat) - value0) / std::sqrt(var);
  TestResult t;
  t.statistic = z;
  boost::math::normal nd;
  t.p_value = 2.0 * boost::math::cdf(boost::math::complement(nd, std::fabs(z)));
  t.method = "wald";
  fill_rejections(t);
  return t;
}

namespace {

// reference maximum of the EL ratio for a nonsmooth scalar family: the step
// point adjacent to the EE sign change can carry a (slightly) higher ratio
// than the infimum-convention point estimate
double step_reference_ratio(ELKind kind, const SurveyDataset& ds,
                            const EstimatingFunction& gf, double theta_hat,
                            const std::vector<double>& steps,
                            const SolverConfig& cfg) {
  auto ratio_at = [&](double th) {
    Eigen::VectorXd t(1);
    t[0] = th;
    return profile(kind, ds, gf, t, cfg).log_ratio;
  };
  double best = ratio_at(theta_hat);
  auto it = std::lower_bound(steps.begin(), steps.end(), theta_hat);
  if (it != steps.begin()) best = std::max(best, ratio_at(*std::prev(it)));
  return best;
}

}  // namespace

double weighted_quantile(const SurveyDataset& ds, double level) {
  const int n = ds.n();
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return ds.Y(a, 0) < ds.Y(b, 0); });
  const double target = level * ds.w.sum();
  double cum = 0.0;
  for (int k = 0; k < n; ++k) {
    cum += ds.w[order[k]];
    if (cum >= target) return ds.Y(order[k], 0);
  }
  return ds.Y(order[n - 1], 0);
}

CiResult ci_woodruff(const SurveyDataset& ds, double tau, double alpha) {
  if (ds.B() < 1)
    throw ValidationError("Woodruff interval needs replication weights");
  const int n = ds.n();
  const double theta_hat = weighted_quantile(ds, tau);

  Eigen::VectorXd ind(n);
  for (int i = 0; i < n; ++i) ind[i] = ds.Y(i, 0) <= theta_hat ? 1.0 : 0.0;
  const double Fhat = ds.w.dot(ind) / ds.w.sum();
  double v = 0.0;
  for (int b = 0; b < ds.B(); ++b) {
    double sb = ds.rep.col(b).sum();
    if (sb <= 0.0) continue;
    double Fb = ds.rep.col(b).dot(ind) / sb;
    v += (Fb - Fhat) * (Fb - Fhat);
  }
  v /= ds.B();
  const double se = std::sqrt(v);

  boost::math::normal nd;
  const double z = boost::math::quantile(nd, 1.0 - alpha / 2.0);
  CiResult ci;
  ci.point = theta_hat;
  double lo = tau - z * se, hi = tau + z * se;
  ci.lower_flagged = lo <= 0.0;
  ci.upper_flagged = hi >= 1.0;
  ci.lower = weighted_quantile(ds, std::max(lo, 1e-12));
  ci.upper = weighted_quantile(ds, std::min(hi, 1.0));
  return ci;
}

CiResult ci_invert(ELKind kind, const SurveyDataset& ds,
                   const EstimatingFunction& gf, double alpha,
                   DistSource source, int mc_draws, std::uint64_t seed,
                   const SolverConfig& cfg) {
  if (gf.p != 1)
    throw ValidationError("ci_invert supports scalar targets only");
  ParamSpace space = ParamSpace::unbounded(1);
  MaximizeResult fit = maximize(kind, ds, gf, space, cfg);
  const double theta_hat = fit.theta[0];

  FitResult comp = plugin_components(kind, ds, gf, fit.theta);
  double crit = 0.0;
  if (source == DistSource::BOOTSTRAP) {
    BootstrapCritical bc =
        bootstrap_critical_from_replicates(kind, ds, gf, space, alpha, cfg);
    crit = bc.b_alpha;
  } else {
    TailMethod m = source == DistSource::EIGEN_MC ? TailMethod::EIGEN_MC
                   : source == DistSource::RS1    ? TailMethod::RS1
                                                  : TailMethod::RS2;
    QuadraticFormDist dist = build_delta(comp, {}, m, mc_draws, seed);
    crit = critical_value(dist, alpha);
  }

  CiResult ci;
  ci.point = theta_hat;
  ci.critical = crit;

  if (!gf.smooth) {
    // search over the sorted data step points
    std::vector<double> steps(ds.n());
    for (int i = 0; i < ds.n(); ++i) steps[i] = ds.Y(i, 0);
    std::sort(steps.begin(), steps.end());
    steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
    const double r_ref = step_reference_ratio(kind, ds, gf, theta_hat, steps, cfg);
    auto lr_at = [&](double th) {
      Eigen::VectorXd t(1);
      t[0] = th;
      double r = profile(kind, ds, gf, t, cfg).log_ratio;
      return std::isinf(r) ? kInf : std::max(0.0, 2.0 * (r_ref - r));
    };
    auto pos = std::lower_bound(steps.begin(), steps.end(), theta_hat) -
               steps.begin();
    long lo = pos, hi = pos;
    while (lo > 0 && lr_at(steps[lo - 1]) <= crit) --lo;
    while (hi + 1 < static_cast<long>(steps.size()) &&
           lr_at(steps[hi + 1]) <= crit)
      ++hi;
    ci.lower = steps[lo];
    ci.upper = steps[hi];
    ci.lower_flagged = (lo == 0);
    ci.upper_flagged = (hi + 1 == static_cast<long>(steps.size()));
    return ci;
  }

  FitResult swch = sandwich(comp);
  double step = std::max(swch.se[0], 1e-8 * (1.0 + std::fabs(theta_hat)));
  auto lr_at = [&](double th) {
    Eigen::VectorXd t(1);
    t[0] = th;
    double r = profile(kind, ds, gf, t, cfg).log_ratio;
    return std::isinf(r) ? kInf
                         : std::max(0.0, 2.0 * (fit.profile.log_ratio - r));
  };
  auto solve_side = [&](double dir, bool* flagged) {
    double a = theta_hat, b = theta_hat + dir * step;
    int expansions = 0;
    while (lr_at(b) <= crit && expansions < 120) {
      a = b;
      b = theta_hat + (b - theta_hat) * 2.0;
      ++expansions;
    }
    if (expansions >= 120) {
      *flagged = true;
      return a;
    }
    // bisect the crossing between a (inside) and b (outside)
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (a + b);
      if (lr_at(mid) <= crit)
        a = mid;
      else
        b = mid;
      if (std::fabs(b - a) <= 1e-6 * (1.0 + std::fabs(theta_hat))) break;
    }
    return a;
  };
  ci.lower = solve_side(-1.0, &ci.lower_flagged);
  ci.upper = solve_side(+1.0, &ci.upper_flagged);
  return ci;
}

}  // namespace elsurv
