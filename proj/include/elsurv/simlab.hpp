#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "elsurv/dataset.hpp"
#include "elsurv/elcore.hpp"
#include "elsurv/rng.hpp"

namespace elsurv {

enum class SigmaMode { S1, S2, S3 };  // sigma = 1, 3, or rho-controlled
enum class ModelKind { LINEAR, QUANTILE_MODEL };

struct PopulationSpec {
  int N = 20000;
  ModelKind model = ModelKind::LINEAR;
  Eigen::VectorXd theta;  // linear model coefficients (intercept first)
  SigmaMode sigma = SigmaMode::S1;
  double rho = 0.8;          // controlled corr(y, x'theta) for S3
  int noise_covariates = 0;  // appended N(0,1) columns with coefficient 0
  std::uint64_t seed = 1;
};

struct Population {
  Eigen::MatrixXd X;     // N x p covariates, intercept first
  Eigen::VectorXd y;
  Eigen::VectorXd size;  // PPS size variable
  Eigen::VectorXd theta_N;  // census estimating-equation solution (linear)
  double sigma_used = 0.0;
};

Population generate_population(const PopulationSpec& spec);

// census quantile: smallest y value whose population share reaches tau
double population_quantile(const Population& pop, double tau);

struct DrawnSample {
  std::vector<int> idx;
  Eigen::VectorXd d;  // design weights (possibly nonresponse-adjusted)
};

// random permutation, then systematic selection on the cumulated inclusion
// probabilities pi_i = n size_i / sum(size); errors on any pi_i >= 1
DrawnSample pps_randomized_systematic(const Eigen::VectorXd& size, int n,
                                      Rng& rng);

// Bernoulli thinning plus the ratio adjustment that preserves the weight sum
DrawnSample apply_nonresponse_ratio(const DrawnSample& sample,
                                    double response_prob, Rng& rng);

// Final weights calibrated to `totals` over the named population columns;
// B replicate columns built by the with-replacement bootstrap against the
// weighted sample totals.
SurveyDataset assemble_survey_dataset(const Population& pop,
                                      const DrawnSample& sample,
                                      const std::vector<int>& calib_cols,
                                      const Eigen::VectorXd& totals, int B,
                                      std::uint64_t rep_seed);

struct ExperimentSpec {
  std::string name = "experiment";
  ModelKind model = ModelKind::LINEAR;
  char scenario = 'A';
  std::vector<SigmaMode> sigmas = {SigmaMode::S1};
  double fraction = 0.02;
  int n = 400;
  double response_prob = 0.7;
  std::string hypothesis = "simple";  // simple: theta1 = 1; nested: theta1 = theta2
  std::vector<double> b_grid;
  std::vector<std::pair<double, double>> pair_grid;
  std::vector<double> tau_grid;
  std::vector<std::string> methods = {"eigmc"};
  std::vector<ELKind> kinds = {ELKind::PEL, ELKind::SEL};
  int runs = 500;
  int B = 500;
  std::uint64_t seed = 12345;
  double alpha = 0.05;
  int mc_draws = 20000;
};

ExperimentSpec parse_descriptor(const std::string& path);

struct ExperimentCell {
  std::string kind;
  std::string method;
  std::string sigma;
  double b1 = 0.0, b2 = 0.0;
  double rate = 0.0;
  int runs_ok = 0;
  int runs_err = 0;
};

struct QuantileCell {
  std::string kind;  // pel / sel / na
  double tau = 0.0;
  double LE = 0.0, CP = 0.0, UE = 0.0, AL = 0.0;
  int runs_ok = 0;
  int runs_err = 0;
};

struct ExperimentResult {
  ExperimentSpec spec;
  std::vector<ExperimentCell> cells;
  std::vector<QuantileCell> qcells;
};

// Deterministic given (seed, runs, B): per-run RNG substreams, aggregation
// in run order.
ExperimentResult run_experiment(const ExperimentSpec& spec);

void write_experiment_csv(const ExperimentResult& res,
                          const std::string& out_dir);

// Synthetic stand-in for a GSS-style public-use file: n units, 14 mixed
// binary/ordinal/count covariates, logistic response driven by covariate 8,
// PPS-style weights and B bootstrap replicate columns, all columns rescaled
// to sum to n.
SurveyDataset make_gss_style_replica(int n, int B, std::uint64_t seed);

const char* to_string(SigmaMode s);

}  // namespace elsurv
