#pragma once

#include <Eigen/Core>

#include "elsurv/dataset.hpp"
#include "elsurv/elcore.hpp"
#include "elsurv/estfn.hpp"

namespace elsurv {

// Plug-in components evaluated at theta_hat. W_hat is the kind-specific
// second-moment matrix; every population-size factor is carried by
// n_hat = sum(w).
struct FitResult {
  ELKind kind = ELKind::PEL;
  Eigen::VectorXd theta_hat;
  Eigen::MatrixXd W_hat;      // r x r
  Eigen::MatrixXd Gamma_hat;  // r x p
  Eigen::MatrixXd Omega_hat;  // r x r
  Eigen::MatrixXd V_hat;      // p x p, present after sandwich()
  Eigen::VectorXd se;         // sqrt(diag(V_hat)/n)
  int n = 0;
  double n_hat = 0.0;
  bool has_V = false;
};

// Replication variance of the weighted total of g at a fixed theta:
// (1/B) sum_b (eta_b - U)(eta_b - U)' with eta_b = sum_i w_i^(b) g_i.
Eigen::MatrixXd rep_variance_total(const SurveyDataset& ds,
                                   const EstimatingFunction& gf,
                                   const Eigen::VectorXd& theta);

FitResult plugin_components(ELKind kind, const SurveyDataset& ds,
                            const EstimatingFunction& gf,
                            const Eigen::VectorXd& theta_hat);

// Fills V_hat = Sigma Gamma' W^-1 Omega W^-1 Gamma Sigma with
// Sigma = (Gamma' W^-1 Gamma)^-1, and se_j = sqrt(V_jj / n).
FitResult sandwich(FitResult fit);

// soft warning threshold for the replicate count
inline constexpr int kMinRecommendedReplicates = 50;

}  // namespace elsurv
