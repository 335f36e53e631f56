#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "elsurv/dataset.hpp"
#include "elsurv/estfn.hpp"

namespace elsurv {

enum class ELKind { PEL, SEL };

const char* to_string(ELKind kind);
ELKind el_kind_from_string(const std::string& s);

struct SolverConfig {
  double lambda_tol = 1e-10;  // on ||g(lambda)||, relative to 1 + max ||u_i||
  double theta_tol = 1e-8;    // relative step size
  int max_inner = 100;
  int max_outer = 200;
};

struct ELProfile {
  Eigen::VectorXd theta;
  Eigen::VectorXd lambda;
  Eigen::VectorXd p_hat;
  double log_ratio = 0.0;  // r_PEL(theta) or r_SEL(theta), always <= 0
  bool converged = false;
  int iters = 0;
};

// Constraint rows u_i, outer weights a_i (summing to 1 over active rows) and
// the EL sample size n used by the feasibility floor 1 + lambda'u_i > 1/n.
// PEL: u_i = g_i(theta), a_i = w_i / sum(w).  SEL: u_i = w_i g_i(theta),
// a_i = 1/n.  The multiset variant folds bootstrap counts into a_i.
struct ELParts {
  Eigen::MatrixXd U;
  Eigen::VectorXd a;
  int n = 0;
};

ELParts make_parts(ELKind kind, const Eigen::MatrixXd& G,
                   const Eigen::VectorXd& w);

struct LambdaResult {
  Eigen::VectorXd lambda;
  bool converged = false;
  int iters = 0;
};

// Newton with step halving; every accepted step keeps min_i(1 + lambda'u_i)
// above 1/n. Throws HullViolation when no feasible root is found within
// cfg.max_inner iterations.
LambdaResult solve_lambda(const Eigen::MatrixXd& U, const Eigen::VectorXd& a,
                          int n, const SolverConfig& cfg = {});

// log-EL-ratio of the parts: -n * sum_i a_i log(1 + lambda'u_i).
// Hull violations surface as log_ratio = -inf with converged = false.
ELProfile profile_parts(const ELParts& parts, const SolverConfig& cfg = {});

ELProfile profile(ELKind kind, const SurveyDataset& ds,
                  const EstimatingFunction& gf, const Eigen::VectorXd& theta,
                  const SolverConfig& cfg = {});

// same, with an explicit weight column (bootstrap replicates)
ELProfile profile_w(ELKind kind, const SurveyDataset& ds,
                    const EstimatingFunction& gf, const Eigen::VectorXd& theta,
                    const Eigen::VectorXd& weights,
                    const SolverConfig& cfg = {});

struct MaximizeResult {
  Eigen::VectorXd theta;
  ELProfile profile;
};

MaximizeResult maximize(ELKind kind, const SurveyDataset& ds,
                        const EstimatingFunction& gf, const ParamSpace& space,
                        const SolverConfig& cfg = {});

MaximizeResult maximize_w(ELKind kind, const SurveyDataset& ds,
                          const EstimatingFunction& gf, const ParamSpace& space,
                          const Eigen::VectorXd& weights,
                          const SolverConfig& cfg = {},
                          const Eigen::VectorXd* warm_start = nullptr);

// k restrictions R(theta) = 0 with Jacobian Phi(theta), k x p.
struct RFunction {
  int k = 0;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> R;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jac;
  bool affine = false;
  Eigen::MatrixXd A;  // affine form A theta = c
  Eigen::VectorXd c;

  static RFunction affine_constraint(const Eigen::MatrixXd& A,
                                     const Eigen::VectorXd& c);
};

// Restricted maximizer over {theta : R(theta)=0}: exact null-space
// reparameterization for affine R, augmented Lagrangian otherwise.
MaximizeResult maximize_restricted(ELKind kind, const SurveyDataset& ds,
                                   const EstimatingFunction& gf,
                                   const ParamSpace& space,
                                   const RFunction& constraint,
                                   const SolverConfig& cfg = {});

MaximizeResult maximize_restricted_w(ELKind kind, const SurveyDataset& ds,
                                     const EstimatingFunction& gf,
                                     const ParamSpace& space,
                                     const RFunction& constraint,
                                     const Eigen::VectorXd& weights,
                                     const SolverConfig& cfg = {},
                                     const Eigen::VectorXd* warm_start = nullptr);

// Solves the weighted estimating equations sum_i v_i g_i(theta) = 0 by
// damped Newton (r = p only).
Eigen::VectorXd solve_weighted_ee(const SurveyDataset& ds,
                                  const EstimatingFunction& gf,
                                  const Eigen::VectorXd& v,
                                  const ParamSpace& space,
                                  const SolverConfig& cfg = {},
                                  const Eigen::VectorXd* warm_start = nullptr);

// Smallest step point theta with sum_i v_i g_i(theta) >= 0 over the observed
// y values (deterministic infimum tie rule for nonsmooth scalar families).
double nonsmooth_step_maximizer(const SurveyDataset& ds,
                                const EstimatingFunction& gf,
                                const Eigen::VectorXd& v);

// Envelope gradient of the log-EL-ratio at theta given the solved profile.
Eigen::VectorXd profile_gradient(ELKind kind, const SurveyDataset& ds,
                                 const EstimatingFunction& gf,
                                 const Eigen::VectorXd& theta,
                                 const ELProfile& prof,
                                 const Eigen::VectorXd& weights);

}  // namespace elsurv
