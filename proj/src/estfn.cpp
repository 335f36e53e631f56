#include "elsurv/estfn.hpp"

#include <cmath>
#include <limits>

#include "elsurv/errors.hpp"

namespace elsurv {

ParamSpace ParamSpace::unbounded(int p) {
  ParamSpace s;
  const double inf = std::numeric_limits<double>::infinity();
  s.lower = Eigen::VectorXd::Constant(p, -inf);
  s.upper = Eigen::VectorXd::Constant(p, inf);
  s.initial = Eigen::VectorXd::Zero(p);
  return s;
}

void ParamSpace::clamp(Eigen::VectorXd& theta) const {
  for (int j = 0; j < theta.size(); ++j)
    theta[j] = std::min(upper[j], std::max(lower[j], theta[j]));
}

double logistic_mu(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  double e = std::exp(t);
  return e / (1.0 + e);
}

EstimatingFunction family_mean() {
  EstimatingFunction f;
  f.r = f.p = 1;
  f.smooth = true;
  f.name = "mean";
  f.eval = [](EstimatingFunction::Row, EstimatingFunction::Row y,
              std::span<const double> theta, std::span<double> out) {
    out[0] = y[0] - theta[0];
  };
  f.jac = [](EstimatingFunction::Row, EstimatingFunction::Row,
             std::span<const double>, std::span<double> out) { out[0] = -1.0; };
  return f;
}

EstimatingFunction family_linear_regression(int p) {
  EstimatingFunction f;
  f.r = f.p = p;
  f.smooth = true;
  f.name = "linear";
  f.eval = [p](EstimatingFunction::Row x, EstimatingFunction::Row y,
               std::span<const double> theta, std::span<double> out) {
    if (static_cast<int>(x.size()) != p)
      throw ValidationError("linear family: x-row length differs from p");
    double resid = y[0];
    for (int j = 0; j < p; ++j) resid -= x[j] * theta[j];
    for (int j = 0; j < p; ++j) out[j] = x[j] * resid;
  };
  f.jac = [p](EstimatingFunction::Row x, EstimatingFunction::Row,
              std::span<const double>, std::span<double> out) {
    for (int a = 0; a < p; ++a)
      for (int b = 0; b < p; ++b) out[a * p + b] = -x[a] * x[b];
  };
  return f;
}

EstimatingFunction family_logistic_regression(int p) {
  EstimatingFunction f;
  f.r = f.p = p;
  f.smooth = true;
  f.name = "logistic";
  f.eval = [p](EstimatingFunction::Row x, EstimatingFunction::Row y,
               std::span<const double> theta, std::span<double> out) {
    if (y[0] != 0.0 && y[0] != 1.0)
      throw ValidationError("logistic family: y must be 0 or 1");
    double t = 0.0;
    for (int j = 0; j < p; ++j) t += x[j] * theta[j];
    double mu = logistic_mu(t);
    for (int j = 0; j < p; ++j) out[j] = x[j] * (y[0] - mu);
  };
  f.jac = [p](EstimatingFunction::Row x, EstimatingFunction::Row,
              std::span<const double> theta, std::span<double> out) {
    double t = 0.0;
    for (int j = 0; j < p; ++j) t += x[j] * theta[j];
    double mu = logistic_mu(t);
    double v = -mu * (1.0 - mu);
    for (int a = 0; a < p; ++a)
      for (int b = 0; b < p; ++b) out[a * p + b] = v * x[a] * x[b];
  };
  return f;
}

EstimatingFunction family_quantile(double tau) {
  if (!(tau > 0.0 && tau < 1.0))
    throw ValidationError("quantile level must lie in (0,1)");
  EstimatingFunction f;
  f.r = f.p = 1;
  f.smooth = false;
  f.name = "quantile";
  f.eval = [tau](EstimatingFunction::Row, EstimatingFunction::Row y,
                 std::span<const double> theta, std::span<double> out) {
    out[0] = (y[0] <= theta[0] ? 1.0 : 0.0) - tau;
  };
  f.jac = nullptr;
  return f;
}

EstimatingFunction family_custom(int r, int p, bool smooth,
                                 decltype(EstimatingFunction::eval) eval,
                                 decltype(EstimatingFunction::jac) jac) {
  if (p < 1 || r < p) throw ValidationError("custom family needs 1 <= p <= r");
  EstimatingFunction f;
  f.r = r;
  f.p = p;
  f.smooth = smooth;
  f.name = "custom";
  f.eval = std::move(eval);
  f.jac = std::move(jac);
  return f;
}

EstimatingFunction family_by_name(const std::string& name,
                                  const SurveyDataset& ds, double tau) {
  if (name == "mean") return family_mean();
  if (name == "linear") return family_linear_regression(static_cast<int>(ds.X.cols()));
  if (name == "logistic")
    return family_logistic_regression(static_cast<int>(ds.X.cols()));
  if (name == "quantile") return family_quantile(tau);
  throw UsageError("unknown family '" + name + "'");
}

Eigen::MatrixXd eval_all(const SurveyDataset& ds, const EstimatingFunction& gf,
                         const Eigen::VectorXd& theta) {
  const int n = ds.n();
  Eigen::MatrixXd G(n, gf.r);
  std::vector<double> xrow(ds.X.cols()), yrow(ds.Y.cols()), out(gf.r);
  std::span<const double> th(theta.data(), theta.size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < ds.X.cols(); ++j) xrow[j] = ds.X(i, j);
    for (int j = 0; j < ds.Y.cols(); ++j) yrow[j] = ds.Y(i, j);
    gf.eval(xrow, yrow, th, out);
    for (int k = 0; k < gf.r; ++k) G(i, k) = out[k];
  }
  return G;
}

Eigen::MatrixXd weighted_jacobian_sum(const SurveyDataset& ds,
                                      const EstimatingFunction& gf,
                                      const Eigen::VectorXd& theta,
                                      const Eigen::VectorXd& c) {
  if (!gf.jac) throw ValidationError("family '" + gf.name + "' has no Jacobian");
  const int n = ds.n();
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(gf.r, gf.p);
  std::vector<double> xrow(ds.X.cols()), yrow(ds.Y.cols()),
      out(static_cast<size_t>(gf.r) * gf.p);
  std::span<const double> th(theta.data(), theta.size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < ds.X.cols(); ++j) xrow[j] = ds.X(i, j);
    for (int j = 0; j < ds.Y.cols(); ++j) yrow[j] = ds.Y(i, j);
    gf.jac(xrow, yrow, th, out);
    for (int a = 0; a < gf.r; ++a)
      for (int b = 0; b < gf.p; ++b) J(a, b) += c[i] * out[a * gf.p + b];
  }
  return J;
}

}  // namespace elsurv
