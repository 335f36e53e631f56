#include "elsurv/penel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "elsurv/errors.hpp"

namespace elsurv {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kZeroTol = 1e-8;
}  // namespace

double scad_penalty(double t, const PenaltySpec& spec) {
  if (t < 0.0) throw ValidationError("scad_penalty needs t >= 0");
  const double tau = spec.tau, a = spec.a;
  if (t <= tau) return tau * t;
  if (t <= a * tau) return -(t * t - 2.0 * a * tau * t + tau * tau) / (2.0 * (a - 1.0));
  return (a + 1.0) * tau * tau / 2.0;
}

double scad_derivative(double t, const PenaltySpec& spec) {
  if (t < 0.0) throw ValidationError("scad_derivative needs t >= 0");
  const double tau = spec.tau, a = spec.a;
  if (t <= tau) return tau;
  if (t <= a * tau) return (a * tau - t) / (a - 1.0);
  return 0.0;
}

namespace {

double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

// negative profile log-ratio and envelope gradient; +inf outside the support
double neg_ratio_grad(ELKind kind, const SurveyDataset& ds,
                      const EstimatingFunction& gf, const Eigen::VectorXd& th,
                      const SolverConfig& cfg, Eigen::VectorXd* grad) {
  ELProfile prof = profile(kind, ds, gf, th, cfg);
  if (std::isinf(prof.log_ratio)) return kInf;
  if (grad) *grad = -profile_gradient(kind, ds, gf, th, prof, ds.w);
  return -prof.log_ratio;
}

// proximal-gradient minimization of -r(theta) + n sum_j v_j |theta_j|
Eigen::VectorXd weighted_l1_step(ELKind kind, const SurveyDataset& ds,
                                 const EstimatingFunction& gf,
                                 const Eigen::VectorXd& start,
                                 const Eigen::VectorXd& v, int n,
                                 const SolverConfig& cfg) {
  Eigen::VectorXd theta = start;
  Eigen::VectorXd grad;
  double f = neg_ratio_grad(kind, ds, gf, theta, cfg, &grad);
  if (std::isinf(f)) throw NoConvergence("penalized fit started outside support");
  double step = 1.0 / (1.0 + grad.norm());

  const int max_iter = 500;
  for (int it = 0; it < max_iter; ++it) {
    bool accepted = false;
    Eigen::VectorXd theta_new;
    double f_new = 0.0;
    for (int half = 0; half < 60; ++half) {
      theta_new = theta - step * grad;
      for (int j = 0; j < theta.size(); ++j)
        if (v[j] > 0.0)
          theta_new[j] = soft_threshold(theta_new[j], step * n * v[j]);
      f_new = neg_ratio_grad(kind, ds, gf, theta_new, cfg, nullptr);
      Eigen::VectorXd diff = theta_new - theta;
      if (std::isfinite(f_new) &&
          f_new <= f + grad.dot(diff) + diff.squaredNorm() / (2.0 * step) +
                       1e-12 * (1.0 + std::fabs(f))) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    double move = (theta_new - theta).norm();
    theta = theta_new;
    f = neg_ratio_grad(kind, ds, gf, theta, cfg, &grad);
    if (move <= 1e-9 * (1.0 + theta.norm())) break;
    step *= 1.5;
  }
  return theta;
}

double penalized_objective(ELKind kind, const SurveyDataset& ds,
                           const EstimatingFunction& gf,
                           const Eigen::VectorXd& th, const PenaltySpec& spec,
                           const std::vector<bool>& penalize,
                           const SolverConfig& cfg) {
  double r = profile(kind, ds, gf, th, cfg).log_ratio;
  if (std::isinf(r)) return -kInf;
  double pen = 0.0;
  for (int j = 0; j < th.size(); ++j)
    if (penalize[j]) pen += scad_penalty(std::fabs(th[j]), spec);
  return r - ds.n() * pen;
}

}  // namespace

SelectionResult maximize_penalized(ELKind kind, const SurveyDataset& ds,
                                   const EstimatingFunction& gf,
                                   const ParamSpace& space,
                                   const PenaltySpec& spec,
                                   const std::vector<bool>& penalize,
                                   const SolverConfig& cfg,
                                   const Eigen::VectorXd* theta_unpen) {
  if (gf.r != gf.p || !gf.smooth)
    throw ValidationError("penalized selection needs a smooth r == p family");
  if (static_cast<int>(penalize.size()) != gf.p)
    throw ValidationError("penalize mask length differs from p");

  Eigen::VectorXd theta =
      theta_unpen ? *theta_unpen : maximize(kind, ds, gf, space, cfg).theta;
  double best_obj = penalized_objective(kind, ds, gf, theta, spec, penalize, cfg);
  Eigen::VectorXd best = theta;

  for (int round = 0; round < 4; ++round) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(gf.p);
    for (int j = 0; j < gf.p; ++j)
      if (penalize[j]) v[j] = scad_derivative(std::fabs(theta[j]), spec);
    theta = weighted_l1_step(kind, ds, gf, theta, v, ds.n(), cfg);
    double obj = penalized_objective(kind, ds, gf, theta, spec, penalize, cfg);
    if (obj > best_obj + 1e-10 * (1.0 + std::fabs(best_obj))) {
      best_obj = obj;
      best = theta;
    } else {
      break;  // LLA fixed point
    }
  }

  SelectionResult res;
  res.theta_hat = best;
  for (int j = 0; j < gf.p; ++j) {
    if (std::fabs(res.theta_hat[j]) < kZeroTol) res.theta_hat[j] = 0.0;
    if (res.theta_hat[j] != 0.0) res.selected.push_back(j);
  }
  res.tau_chosen = spec.tau;
  return res;
}

std::vector<double> default_tau_grid(int p, int n) {
  const double scale = std::sqrt(std::log(static_cast<double>(p)) / n);
  const double lo = 0.01 * scale, hi = 2.0 * scale;
  const int m = 20;
  std::vector<double> grid(m);
  for (int i = 0; i < m; ++i)
    grid[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (m - 1));
  return grid;
}

SelectionResult select_tau(ELKind kind, const SurveyDataset& ds,
                           const EstimatingFunction& gf,
                           const ParamSpace& space,
                           const std::vector<double>& tau_grid, double a,
                           const std::vector<bool>& penalize,
                           const SolverConfig& cfg) {
  if (tau_grid.empty()) throw UsageError("empty tau grid");
  const double logn = std::log(static_cast<double>(ds.n()));
  const Eigen::VectorXd unpen = maximize(kind, ds, gf, space, cfg).theta;

  SelectionResult best;
  double best_bic = kInf;
  std::vector<std::array<double, 3>> path;
  for (double tau : tau_grid) {
    PenaltySpec spec{tau, a};
    SelectionResult fit = maximize_penalized(kind, ds, gf, space, spec,
                                             penalize, cfg, &unpen);
    double l_fit = profile(kind, ds, gf, fit.theta_hat, cfg).log_ratio;
    int df = static_cast<int>(fit.selected.size());
    double bic = -2.0 * l_fit + df * logn;
    path.push_back({tau, bic, static_cast<double>(df)});
    if (bic < best_bic) {
      best_bic = bic;
      best = fit;
    }
  }
  best.criterion_path = path;
  return best;
}

}  // namespace elsurv
