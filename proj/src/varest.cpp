#include "elsurv/varest.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "elsurv/errors.hpp"

namespace elsurv {

namespace {

void check_condition(const Eigen::MatrixXd& M, const char* what) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  const auto& s = svd.singularValues();
  if (s[s.size() - 1] <= 0.0 || s[0] / s[s.size() - 1] > 1e12)
    throw SingularComponent(std::string(what) + " is singular or ill-conditioned");
}

}  // namespace

Eigen::MatrixXd rep_variance_total(const SurveyDataset& ds,
                                   const EstimatingFunction& gf,
                                   const Eigen::VectorXd& theta) {
  const int B = ds.B();
  if (B < 1) throw ValidationError("replication variance needs B >= 1");
  Eigen::MatrixXd G = eval_all(ds, gf, theta);          // n x r
  Eigen::VectorXd U = G.transpose() * ds.w;             // r
  Eigen::MatrixXd Eta = G.transpose() * ds.rep;         // r x B
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(gf.r, gf.r);
  for (int b = 0; b < B; ++b) {
    Eigen::VectorXd d = Eta.col(b) - U;
    V.noalias() += d * d.transpose();
  }
  return V / B;
}

FitResult plugin_components(ELKind kind, const SurveyDataset& ds,
                            const EstimatingFunction& gf,
                            const Eigen::VectorXd& theta_hat) {
  FitResult fit;
  fit.kind = kind;
  fit.theta_hat = theta_hat;
  fit.n = ds.n();
  fit.n_hat = ds.n_hat();

  Eigen::MatrixXd G = eval_all(ds, gf, theta_hat);
  const double nh = fit.n_hat;
  if (kind == ELKind::PEL) {
    fit.W_hat = (G.transpose() * ds.w.asDiagonal() * G) / nh;
  } else {
    Eigen::VectorXd w2 = ds.w.array().square();
    fit.W_hat = fit.n * (G.transpose() * w2.asDiagonal() * G) / (nh * nh);
  }
  fit.W_hat = 0.5 * (fit.W_hat + fit.W_hat.transpose());
  check_condition(fit.W_hat, "W_hat");

  fit.Gamma_hat = weighted_jacobian_sum(ds, gf, theta_hat, ds.w) / nh;
  fit.Omega_hat = fit.n * rep_variance_total(ds, gf, theta_hat) / (nh * nh);
  fit.Omega_hat = 0.5 * (fit.Omega_hat + fit.Omega_hat.transpose());
  return fit;
}

FitResult sandwich(FitResult fit) {
  check_condition(fit.W_hat, "W_hat");
  Eigen::MatrixXd Winv = fit.W_hat.inverse();
  Eigen::MatrixXd GtWG = fit.Gamma_hat.transpose() * Winv * fit.Gamma_hat;
  check_condition(GtWG, "Gamma' W^-1 Gamma");
  Eigen::MatrixXd Sigma = GtWG.inverse();
  Eigen::MatrixXd core =
      fit.Gamma_hat.transpose() * Winv * fit.Omega_hat * Winv * fit.Gamma_hat;
  fit.V_hat = Sigma * core * Sigma;
  fit.V_hat = 0.5 * (fit.V_hat + fit.V_hat.transpose());
  fit.se.resize(fit.V_hat.rows());
  for (int j = 0; j < fit.V_hat.rows(); ++j)
    fit.se[j] = std::sqrt(std::max(0.0, fit.V_hat(j, j)) / fit.n);
  fit.has_V = true;
  return fit;
}

}  // namespace elsurv
