#pragma once

#include <Eigen/Core>
#include <functional>
#include <span>
#include <string>

#include "elsurv/dataset.hpp"

namespace elsurv {

// Evaluator for g(x, y, theta) in R^r with a p-column Jacobian. Evaluators
// must be pure; they are called concurrently from simulation workers.
struct EstimatingFunction {
  int r = 0;
  int p = 0;
  bool smooth = true;
  std::string name;

  using Row = std::span<const double>;
  // writes r values into out
  std::function<void(Row x, Row y, std::span<const double> theta,
                     std::span<double> out)>
      eval;
  // writes r*p values into out, row-major; absent when smooth == false
  std::function<void(Row x, Row y, std::span<const double> theta,
                     std::span<double> out)>
      jac;
};

// Optional box bounds plus the starting point for iterative solvers.
struct ParamSpace {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  Eigen::VectorXd initial;

  static ParamSpace unbounded(int p);
  void clamp(Eigen::VectorXd& theta) const;
};

EstimatingFunction family_mean();
EstimatingFunction family_linear_regression(int p);
EstimatingFunction family_logistic_regression(int p);
EstimatingFunction family_quantile(double tau);
EstimatingFunction family_custom(int r, int p, bool smooth,
                                 decltype(EstimatingFunction::eval) eval,
                                 decltype(EstimatingFunction::jac) jac);

EstimatingFunction family_by_name(const std::string& name,
                                  const SurveyDataset& ds, double tau = 0.5);

// n x r matrix of g_i(theta) rows
Eigen::MatrixXd eval_all(const SurveyDataset& ds, const EstimatingFunction& gf,
                         const Eigen::VectorXd& theta);

// sum_i c_i * dg_i/dtheta, an r x p matrix
Eigen::MatrixXd weighted_jacobian_sum(const SurveyDataset& ds,
                                      const EstimatingFunction& gf,
                                      const Eigen::VectorXd& theta,
                                      const Eigen::VectorXd& c);

// overflow-safe logistic mean, valid for |t| up to ~700
double logistic_mu(double t);

}  // namespace elsurv
