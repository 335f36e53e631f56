#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <vector>

#include "elsurv/dataset.hpp"
#include "elsurv/elcore.hpp"
#include "elsurv/estfn.hpp"
#include "elsurv/rng.hpp"

namespace elsurv {

// One with-replacement resample: selection counts h (sum n) and the
// chi-square-calibrated weights w* for the resampled multiset. Replicate
// weight column b is h .* w*.
struct BootstrapDraw {
  std::vector<int> counts;
  Eigen::VectorXd w_star;
  bool negative_weights = false;
};

// Columns of x used for calibration plus their target totals (producer side;
// bootstrap columns always target the weighted totals of the parent sample).
struct CalibrationSpec {
  std::vector<int> calib_columns;
  Eigen::VectorXd totals;
};

// Minimum chi-square-distance adjustment of d subject to sum_i w_i x_i = T:
// w_i = d_i (1 + x_i' lambda_c). Negative weights are possible and flagged,
// not rejected.
Eigen::VectorXd calibrate_chisq(const Eigen::VectorXd& d,
                                const Eigen::MatrixXd& X,
                                const Eigen::VectorXd& T,
                                bool* negative_flag = nullptr);

// Multinomial resample of size n plus calibration of w* against the
// weighted totals sum_i d_i x_i. Retries on a singular bootstrap Gram
// (up to 10 fresh draws).
BootstrapDraw draw_bootstrap(const Eigen::VectorXd& d,
                             const Eigen::MatrixXd& Xcal, Rng& rng);

// n x B matrix of replicate weight columns, one RNG substream per column.
Eigen::MatrixXd make_replication_weights(const Eigen::VectorXd& d,
                                         const Eigen::MatrixXd& Xcal, int B,
                                         std::uint64_t seed);

// The resampled multiset as a plain dataset (rows repeated per count,
// weights w*), so every EL routine applies unchanged.
SurveyDataset expand_bootstrap(const SurveyDataset& ds,
                               const BootstrapDraw& draw);

struct BootstrapCritical {
  double b_alpha = 0.0;
  std::vector<double> lr;  // all B replicate statistics
  int n_hull = 0;
  int n_failed = 0;
};

// Steps 1-4 calibration of the LR test: fresh with-replacement resamples
// built from the design weights. With a constraint, the bootstrap null is
// recentered at the sample estimate (R*(theta) = R(theta) - R(theta_hat)).
BootstrapCritical bootstrap_critical_value(
    ELKind kind, const SurveyDataset& ds, const Eigen::MatrixXd& Xcal,
    const EstimatingFunction& gf, const ParamSpace& space,
    const std::optional<RFunction>& constraint, double alpha, int B,
    std::uint64_t seed, const SolverConfig& cfg = {});

// Consumer path: the replication-weight columns are used as pre-built
// bootstrap draws. Exact for PEL; for SEL the column is used as a literal
// weight vector (the producer-side multiset is not recoverable from the
// public file).
BootstrapCritical bootstrap_critical_from_replicates(
    ELKind kind, const SurveyDataset& ds, const EstimatingFunction& gf,
    const ParamSpace& space, double alpha, const SolverConfig& cfg = {},
    const std::optional<RFunction>& constraint = {});

// upper-alpha order statistic ceil((1-alpha)B) of the sorted statistics;
// throws UnstableQuantile when fewer than 20 finite values remain
double bootstrap_quantile(std::vector<double> lr, double alpha);

}  // namespace elsurv
