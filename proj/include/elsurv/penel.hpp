#pragma once

#include <Eigen/Core>
#include <vector>

#include "elsurv/dataset.hpp"
#include "elsurv/elcore.hpp"
#include "elsurv/estfn.hpp"

namespace elsurv {

struct PenaltySpec {
  double tau = 0.1;  // regularization strength
  double a = 3.7;    // SCAD shape, a > 2
};

// SCAD penalty value: linear up to tau, quadratic blend to a*tau, constant
// (a+1)tau^2/2 beyond.
double scad_penalty(double t, const PenaltySpec& spec);
double scad_derivative(double t, const PenaltySpec& spec);

struct SelectionResult {
  Eigen::VectorXd theta_hat;  // exact zeros after hard thresholding
  std::vector<int> selected;  // indices with theta_hat[j] != 0
  double tau_chosen = 0.0;
  // (tau, BIC, df) per grid point
  std::vector<std::array<double, 3>> criterion_path;
};

// Penalized maximizer at fixed tau: local linear approximation around the
// unpenalized fit, iterated reweighted-L1 proximal steps on the profile
// objective. Entries of `penalize` set to false (e.g. the intercept) are
// excluded from the penalty sum.
SelectionResult maximize_penalized(ELKind kind, const SurveyDataset& ds,
                                   const EstimatingFunction& gf,
                                   const ParamSpace& space,
                                   const PenaltySpec& spec,
                                   const std::vector<bool>& penalize,
                                   const SolverConfig& cfg = {},
                                   const Eigen::VectorXd* theta_unpen = nullptr);

// geometric grid of 20 points spanning [0.01, 2] * sqrt(log(p)/n)
std::vector<double> default_tau_grid(int p, int n);

// BIC(tau) = -2 r(theta_tau) + df log(n); df = nonzero count
SelectionResult select_tau(ELKind kind, const SurveyDataset& ds,
                           const EstimatingFunction& gf,
                           const ParamSpace& space,
                           const std::vector<double>& tau_grid, double a,
                           const std::vector<bool>& penalize,
                           const SolverConfig& cfg = {});

}  // namespace elsurv
