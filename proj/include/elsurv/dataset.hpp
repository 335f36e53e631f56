#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

namespace elsurv {

// Column-role map for a public-use CSV: names of the response column(s),
// covariate columns, the final-weight column, the replication-weight prefix
// and an optional design-weight column (simulation lab / producer mode only).
struct Schema {
  std::vector<std::string> y_columns;
  std::vector<std::string> x_columns;
  std::string weight_column;
  std::string rep_prefix;  // replication columns are <prefix>1..<prefix>B
  std::string design_weight_column;  // optional

  static Schema from_file(const std::string& path);
};

// Immutable after construction; safe for concurrent reads.
struct SurveyDataset {
  Eigen::MatrixXd Y;    // n x (#y columns)
  Eigen::MatrixXd X;    // n x (#x columns)
  Eigen::VectorXd w;    // final weights, strictly positive
  Eigen::MatrixXd rep;  // n x B replication weights (B may be 0)
  std::optional<Eigen::VectorXd> design_w;

  std::vector<std::string> y_names;
  std::vector<std::string> x_names;
  std::string weight_name = "w";
  std::string rep_prefix = "w_rep_";
  std::string design_weight_name;

  int n() const { return static_cast<int>(w.size()); }
  int B() const { return static_cast<int>(rep.cols()); }
  double n_hat() const { return w.sum(); }

  // throws ValidationError on invariant breaches
  void validate() const;
};

SurveyDataset load_dataset(const std::string& path, const Schema& schema);
void save_dataset(const SurveyDataset& ds, const std::string& path);

// Multiplies every weight column (final and each replicate) by its own
// factor so each column sums to `target`; within-column ratios unchanged.
SurveyDataset rescale_weights(const SurveyDataset& ds, double target);

}  // namespace elsurv
