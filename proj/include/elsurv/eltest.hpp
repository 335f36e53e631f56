#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "elsurv/elcore.hpp"
#include "elsurv/estfn.hpp"
#include "elsurv/varest.hpp"

namespace elsurv {

inline constexpr std::uint64_t kDefaultMcSeed = 12345;

enum class TailMethod { EIGEN_MC, RS1, RS2 };

// Eigenvalues of Delta (or Delta^R) plus the calibration method; supplies
// p-values and critical values for the weighted chi-square limit.
struct QuadraticFormDist {
  Eigen::VectorXd eigenvalues;  // retained, descending
  TailMethod method = TailMethod::EIGEN_MC;
  int mc_draws = 100000;
  std::uint64_t seed = kDefaultMcSeed;
  int rs_m = 0;        // retained count
  double rs_a = 0.0;   // first-order scale: sum(delta)/m
  double rs_c = 0.0;   // second-order scale: sum(delta^2)/sum(delta)
  double rs_kstar = 0.0;
};

// Delta = Omega^{1/2} W^-1 Gamma Sigma Gamma' W^-1 Omega^{1/2}; with a
// constraint Jacobian Phi the projected form
// ... Gamma Sigma Phi'(Phi Sigma Phi')^-1 Phi Sigma Gamma' ... is used.
QuadraticFormDist build_delta(const FitResult& fit,
                              const std::optional<Eigen::MatrixXd>& Phi = {},
                              TailMethod method = TailMethod::EIGEN_MC,
                              int mc_draws = 100000,
                              std::uint64_t seed = kDefaultMcSeed);

double pvalue(const QuadraticFormDist& dist, double statistic);
double critical_value(const QuadraticFormDist& dist, double alpha);

// upper tail of a plain chi-square (the "naive" miscalibration reference)
double chi2_upper_tail(int df, double statistic);
double chi2_quantile_upper(int df, double alpha);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::string method;
  Eigen::VectorXd eigenvalues;
  bool hull_violation = false;
  std::map<double, bool> reject_at;  // alpha -> reject
};

void fill_rejections(TestResult& t);

// LR statistic for H0: theta = theta0 (2{r(theta_hat) - r(theta0)});
// +inf with *hull set when theta0 lies outside the EL support.
double lr_simple(ELKind kind, const SurveyDataset& ds,
                 const EstimatingFunction& gf, const Eigen::VectorXd& theta0,
                 const ParamSpace& space, const SolverConfig& cfg = {},
                 bool* hull = nullptr);

TestResult lr_nested(ELKind kind, const SurveyDataset& ds,
                     const EstimatingFunction& gf, const ParamSpace& space,
                     const RFunction& constraint,
                     TailMethod method = TailMethod::EIGEN_MC,
                     int mc_draws = 100000,
                     std::uint64_t seed = kDefaultMcSeed,
                     const SolverConfig& cfg = {});

TestResult wald_test(const FitResult& fit, const Eigen::VectorXd& contrast,
                     double value0);

enum class DistSource { EIGEN_MC, RS1, RS2, BOOTSTRAP };

struct CiResult {
  double point = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool lower_flagged = false;  // endpoint hit the data range
  bool upper_flagged = false;
  double critical = 0.0;
};

// Test-inversion interval for a scalar target (p = 1 smooth family or the
// quantile family, whose search runs over the sorted data step points).
CiResult ci_invert(ELKind kind, const SurveyDataset& ds,
                   const EstimatingFunction& gf, double alpha,
                   DistSource source, int mc_draws = 100000,
                   std::uint64_t seed = kDefaultMcSeed,
                   const SolverConfig& cfg = {});

// Normal-approximation interval for the tau-quantile: Woodruff inversion of
// the replication-variance z-test of the weighted distribution function.
CiResult ci_woodruff(const SurveyDataset& ds, double tau, double alpha);

// smallest y value whose cumulative weight share reaches `level`
double weighted_quantile(const SurveyDataset& ds, double level);

// Monte Carlo kernels for sum_j delta_j Z_j^2; one RNG substream per draw,
// so results do not depend on thread count or chunking.
std::int64_t quadform_exceed_count(const Eigen::VectorXd& eigs, double stat,
                                   int draws, std::uint64_t seed);
std::vector<double> quadform_sample(const Eigen::VectorXd& eigs, int draws,
                                    std::uint64_t seed);

}  // namespace elsurv
