#include "elsurv/bootstrap.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "elsurv/errors.hpp"

namespace elsurv {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Eigen::VectorXd calibrate_chisq(const Eigen::VectorXd& d,
                                const Eigen::MatrixXd& X,
                                const Eigen::VectorXd& T,
                                bool* negative_flag) {
  if (negative_flag) *negative_flag = false;
  if (X.cols() == 0) return d;
  Eigen::MatrixXd gram = X.transpose() * d.asDiagonal() * X;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
  if (!lu.isInvertible())
    throw SingularGram("calibration Gram matrix is singular");
  Eigen::VectorXd lam = lu.solve(T - X.transpose() * d);
  Eigen::VectorXd w = d.array() * (1.0 + (X * lam).array());
  if (negative_flag && w.minCoeff() <= 0.0) *negative_flag = true;
  return w;
}

BootstrapDraw draw_bootstrap(const Eigen::VectorXd& d,
                             const Eigen::MatrixXd& Xcal, Rng& rng) {
  const int n = static_cast<int>(d.size());
  if (n < 2) throw ValidationError("bootstrap needs n >= 2");
  for (int attempt = 0; attempt < 10; ++attempt) {
    BootstrapDraw draw;
    draw.counts.assign(n, 0);
    for (int j = 0; j < n; ++j)
      ++draw.counts[static_cast<int>(rng.uniform_int(n))];

    if (Xcal.cols() == 0) {
      draw.w_star = d;
      return draw;
    }
    Eigen::VectorXd dh(n);
    for (int i = 0; i < n; ++i) dh[i] = draw.counts[i] * d[i];
    Eigen::MatrixXd gram = Xcal.transpose() * dh.asDiagonal() * Xcal;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    if (!lu.isInvertible()) continue;  // degenerate resample, redraw
    Eigen::VectorXd target = Xcal.transpose() * d;  // HT totals of the sample
    Eigen::VectorXd lam = lu.solve(target - Xcal.transpose() * dh);
    draw.w_star = d.array() * (1.0 + (Xcal * lam).array());
    for (int i = 0; i < n; ++i)
      if (draw.counts[i] > 0 && draw.w_star[i] <= 0.0)
        draw.negative_weights = true;
    return draw;
  }
  throw SingularGram("10 consecutive bootstrap resamples had singular Grams");
}

Eigen::MatrixXd make_replication_weights(const Eigen::VectorXd& d,
                                         const Eigen::MatrixXd& Xcal, int B,
                                         std::uint64_t seed) {
  if (B < 1) throw ValidationError("B must be >= 1");
  const int n = static_cast<int>(d.size());
  Eigen::MatrixXd rep(n, B);
#pragma omp parallel for schedule(static)
  for (int b = 0; b < B; ++b) {
    Rng rng(seed, static_cast<std::uint64_t>(b));
    BootstrapDraw draw = draw_bootstrap(d, Xcal, rng);
    for (int i = 0; i < n; ++i) rep(i, b) = draw.counts[i] * draw.w_star[i];
  }
  return rep;
}

SurveyDataset expand_bootstrap(const SurveyDataset& ds,
                               const BootstrapDraw& draw) {
  const int n = ds.n();
  SurveyDataset out;
  out.y_names = ds.y_names;
  out.x_names = ds.x_names;
  out.weight_name = ds.weight_name;
  out.Y.resize(n, ds.Y.cols());
  out.X.resize(n, ds.X.cols());
  out.w.resize(n);
  out.rep.resize(n, 0);
  int k = 0;
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < draw.counts[i]; ++c) {
      out.Y.row(k) = ds.Y.row(i);
      out.X.row(k) = ds.X.row(i);
      out.w[k] = draw.w_star[i];
      ++k;
    }
  }
  return out;
}

double bootstrap_quantile(std::vector<double> lr, double alpha) {
  const int B = static_cast<int>(lr.size());
  int finite = static_cast<int>(
      std::count_if(lr.begin(), lr.end(), [](double v) { return std::isfinite(v); }));
  if (finite < 20)
    throw UnstableQuantile("fewer than 20 finite bootstrap statistics");
  std::sort(lr.begin(), lr.end());
  int k = static_cast<int>(std::ceil((1.0 - alpha) * B));
  k = std::min(std::max(k, 1), B);
  return lr[k - 1];
}

namespace {

RFunction recenter(const RFunction& constraint, const Eigen::VectorXd& theta_hat) {
  if (constraint.affine) {
    return RFunction::affine_constraint(constraint.A, constraint.A * theta_hat);
  }
  RFunction rf;
  rf.k = constraint.k;
  Eigen::VectorXd shift = constraint.R(theta_hat);
  auto base = constraint.R;
  rf.R = [base, shift](const Eigen::VectorXd& th) {
    return Eigen::VectorXd(base(th) - shift);
  };
  rf.jac = constraint.jac;
  return rf;
}

// one replicate LR* under an arbitrary weight column of `work`
double replicate_lr(ELKind kind, const SurveyDataset& work,
                    const EstimatingFunction& gf, const ParamSpace& space,
                    const Eigen::VectorXd& v, const Eigen::VectorXd& theta_hat,
                    const std::optional<RFunction>& recentered,
                    const SolverConfig& cfg, int* hull, int* failed) {
  try {
    MaximizeResult star =
        maximize_w(kind, work, gf, space, v, cfg, &theta_hat);
    double ref;
    if (recentered) {
      MaximizeResult restr = maximize_restricted_w(kind, work, gf, space,
                                                   *recentered, v, cfg,
                                                   &theta_hat);
      ref = restr.profile.log_ratio;
    } else {
      ref = profile_w(kind, work, gf, theta_hat, v, cfg).log_ratio;
    }
    if (std::isinf(ref)) {
      ++*hull;
      return kInf;
    }
    return std::max(0.0, 2.0 * (star.profile.log_ratio - ref));
  } catch (const Error&) {
    ++*failed;
    return kInf;
  }
}

}  // namespace

BootstrapCritical bootstrap_critical_value(
    ELKind kind, const SurveyDataset& ds, const Eigen::MatrixXd& Xcal,
    const EstimatingFunction& gf, const ParamSpace& space,
    const std::optional<RFunction>& constraint, double alpha, int B,
    std::uint64_t seed, const SolverConfig& cfg) {
  if (!ds.design_w)
    throw ValidationError(
        "bootstrap calibration needs design weights (single-stage "
        "with-replacement construction)");
  const Eigen::VectorXd& d = *ds.design_w;
  Eigen::VectorXd theta_hat = maximize(kind, ds, gf, space, cfg).theta;
  std::optional<RFunction> recentered;
  if (constraint) recentered = recenter(*constraint, theta_hat);

  BootstrapCritical out;
  out.lr.assign(B, 0.0);
  std::vector<int> hulls(B, 0), fails(B, 0);
#pragma omp parallel for schedule(dynamic)
  for (int b = 0; b < B; ++b) {
    Rng rng(seed, static_cast<std::uint64_t>(b));
    BootstrapDraw draw = draw_bootstrap(d, Xcal, rng);
    SurveyDataset work = expand_bootstrap(ds, draw);
    out.lr[b] = replicate_lr(kind, work, gf, space, work.w, theta_hat,
                             recentered, cfg, &hulls[b], &fails[b]);
  }
  for (int b = 0; b < B; ++b) {
    out.n_hull += hulls[b];
    out.n_failed += fails[b];
  }
  out.b_alpha = bootstrap_quantile(out.lr, alpha);
  return out;
}

BootstrapCritical bootstrap_critical_from_replicates(
    ELKind kind, const SurveyDataset& ds, const EstimatingFunction& gf,
    const ParamSpace& space, double alpha, const SolverConfig& cfg,
    const std::optional<RFunction>& constraint) {
  const int B = ds.B();
  if (B < 1)
    throw ValidationError("no replication-weight columns to use as draws");
  Eigen::VectorXd theta_hat = maximize(kind, ds, gf, space, cfg).theta;
  std::optional<RFunction> recentered;
  if (constraint) recentered = recenter(*constraint, theta_hat);

  BootstrapCritical out;
  out.lr.assign(B, 0.0);
  std::vector<int> hulls(B, 0), fails(B, 0);
#pragma omp parallel for schedule(dynamic)
  for (int b = 0; b < B; ++b) {
    Eigen::VectorXd v = ds.rep.col(b);
    out.lr[b] = replicate_lr(kind, ds, gf, space, v, theta_hat, recentered,
                             cfg, &hulls[b], &fails[b]);
  }
  for (int b = 0; b < B; ++b) {
    out.n_hull += hulls[b];
    out.n_failed += fails[b];
  }
  out.b_alpha = bootstrap_quantile(out.lr, alpha);
  return out;
}

}  // namespace elsurv
