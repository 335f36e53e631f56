#include "elsurv/simlab.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "elsurv/bootstrap.hpp"
#include "elsurv/eltest.hpp"
#include "elsurv/errors.hpp"
#include "elsurv/estfn.hpp"
#include "elsurv/varest.hpp"

namespace elsurv {

const char* to_string(SigmaMode s) {
  switch (s) {
    case SigmaMode::S1: return "s1";
    case SigmaMode::S2: return "s2";
    case SigmaMode::S3: return "s3";
  }
  return "?";
}

Population generate_population(const PopulationSpec& spec) {
  Rng rng(spec.seed);
  Population pop;
  const int N = spec.N;

  if (spec.model == ModelKind::LINEAR) {
    const int p_base = 4;
    const int p = p_base + spec.noise_covariates;
    pop.X.resize(N, p);
    for (int i = 0; i < N; ++i) {
      pop.X(i, 0) = 1.0;
      pop.X(i, 1) = rng.bernoulli(0.5) ? 1.0 : 0.0;
      pop.X(i, 2) = rng.uniform();
      pop.X(i, 3) = 0.5 + rng.exponential(2.0);
    }
    Eigen::VectorXd theta = spec.theta;
    if (theta.size() == p_base && spec.noise_covariates > 0) {
      theta.conservativeResize(p);
      theta.tail(spec.noise_covariates).setZero();
    }
    Eigen::VectorXd eta = pop.X.leftCols(p_base) * theta.head(p_base);
    double sigma = 1.0;
    if (spec.sigma == SigmaMode::S2) sigma = 3.0;
    if (spec.sigma == SigmaMode::S3) {
      double mean = eta.mean();
      double var = (eta.array() - mean).square().sum() / N;
      sigma = std::sqrt(var * (1.0 / (spec.rho * spec.rho) - 1.0));
    }
    pop.sigma_used = sigma;
    pop.y.resize(N);
    for (int i = 0; i < N; ++i) pop.y[i] = eta[i] + sigma * rng.normal();
    for (int j = 0; j < spec.noise_covariates; ++j)
      for (int i = 0; i < N; ++i) pop.X(i, p_base + j) = rng.normal();
    pop.size = pop.X.col(3);
    // census estimating equations for the linear family reduce to
    // population least squares
    pop.theta_N =
        (pop.X.transpose() * pop.X).ldlt().solve(pop.X.transpose() * pop.y);
  } else {
    pop.X.resize(N, 3);
    pop.y.resize(N);
    pop.size.resize(N);
    for (int i = 0; i < N; ++i) {
      pop.X(i, 0) = 1.0;
      pop.X(i, 1) = rng.bernoulli(0.5) ? 1.0 : 0.0;
      pop.X(i, 2) = rng.exponential(1.0);
      pop.y[i] = 0.5 + pop.X(i, 1) + pop.X(i, 2) + rng.chisq(3);
    }
    // auxiliary PPS size variable, same law as the linear design's size
    for (int i = 0; i < N; ++i) pop.size[i] = 0.5 + rng.exponential(2.0);
    pop.sigma_used = 0.0;
  }
  return pop;
}

double population_quantile(const Population& pop, double tau) {
  std::vector<double> ys(pop.y.data(), pop.y.data() + pop.y.size());
  std::sort(ys.begin(), ys.end());
  const int N = static_cast<int>(ys.size());
  int k = static_cast<int>(std::ceil(tau * N));
  k = std::min(std::max(k, 1), N);
  return ys[k - 1];
}

DrawnSample pps_randomized_systematic(const Eigen::VectorXd& size, int n,
                                      Rng& rng) {
  const int N = static_cast<int>(size.size());
  const double total = size.sum();
  Eigen::VectorXd pi = size * (static_cast<double>(n) / total);
  if (pi.maxCoeff() >= 1.0)
    throw CertaintyUnit("inclusion probability >= 1; certainty units unsupported");

  std::vector<int> perm = rng.permutation(N);
  const double start = rng.uniform();

  DrawnSample s;
  s.idx.reserve(n);
  double cum = 0.0;
  double target = start;
  std::vector<double> d;
  d.reserve(n);
  for (int k = 0; k < N && static_cast<int>(s.idx.size()) < n; ++k) {
    int unit = perm[k];
    cum += pi[unit];
    if (target < cum) {
      s.idx.push_back(unit);
      d.push_back(1.0 / pi[unit]);
      target += 1.0;
    }
  }
  // guard against terminal rounding in the cumulated sizes
  for (int k = N - 1; static_cast<int>(s.idx.size()) < n && k >= 0; --k) {
    int unit = perm[k];
    if (s.idx.empty() || s.idx.back() != unit) {
      s.idx.push_back(unit);
      d.push_back(1.0 / pi[unit]);
    }
  }
  s.d = Eigen::Map<Eigen::VectorXd>(d.data(), d.size());
  return s;
}

DrawnSample apply_nonresponse_ratio(const DrawnSample& sample,
                                    double response_prob, Rng& rng) {
  if (!(response_prob > 0.0 && response_prob <= 1.0))
    throw ValidationError("response probability must lie in (0,1]");
  const int n0 = static_cast<int>(sample.idx.size());
  std::vector<int> keep;
  for (int k = 0; k < n0; ++k)
    if (rng.bernoulli(response_prob)) keep.push_back(k);
  if (keep.empty()) throw EmptyRespondents("no respondents in the sample");

  double sum_all = sample.d.sum();
  double sum_resp = 0.0;
  for (int k : keep) sum_resp += sample.d[k];
  const double ratio = sum_all / sum_resp;

  DrawnSample out;
  out.idx.reserve(keep.size());
  out.d.resize(static_cast<int>(keep.size()));
  for (size_t j = 0; j < keep.size(); ++j) {
    out.idx.push_back(sample.idx[keep[j]]);
    out.d[j] = sample.d[keep[j]] * ratio;
  }
  return out;
}

SurveyDataset assemble_survey_dataset(const Population& pop,
                                      const DrawnSample& sample,
                                      const std::vector<int>& calib_cols,
                                      const Eigen::VectorXd& totals, int B,
                                      std::uint64_t rep_seed) {
  const int n = static_cast<int>(sample.idx.size());
  SurveyDataset ds;
  ds.Y.resize(n, 1);
  ds.X.resize(n, pop.X.cols());
  for (int i = 0; i < n; ++i) {
    ds.Y(i, 0) = pop.y[sample.idx[i]];
    ds.X.row(i) = pop.X.row(sample.idx[i]);
  }
  Eigen::MatrixXd Xcal(n, static_cast<int>(calib_cols.size()));
  for (size_t j = 0; j < calib_cols.size(); ++j)
    Xcal.col(j) = ds.X.col(calib_cols[j]);

  ds.w = calibrate_chisq(sample.d, Xcal, totals);
  // calibration can produce nonpositive weights on extreme draws; keep the
  // magnitude floor so the dataset invariants hold
  for (int i = 0; i < n; ++i) ds.w[i] = std::max(ds.w[i], 1e-8);
  ds.rep = B > 0 ? make_replication_weights(sample.d, Xcal, B, rep_seed)
                 : Eigen::MatrixXd(n, 0);
  ds.design_w = sample.d;
  ds.y_names = {"y"};
  ds.x_names.resize(pop.X.cols());
  for (int j = 0; j < pop.X.cols(); ++j)
    ds.x_names[j] = j == 0 ? "const" : ("x" + std::to_string(j));
  ds.design_weight_name = "d";
  return ds;
}

namespace {

constexpr int kMethodCount = 6;
const char* kMethodNames[kMethodCount] = {"naive", "eigmc", "rs1",
                                          "rs2",   "boot",  "wald"};

int method_index(const std::string& m) {
  for (int i = 0; i < kMethodCount; ++i)
    if (m == kMethodNames[i]) return i;
  throw UsageError("unknown method '" + m + "'");
}

struct LinearRunResult {
  bool ok = false;
  bool reject[2][kMethodCount] = {};
};

LinearRunResult run_linear_once(const Population& pop,
                                const ExperimentSpec& spec,
                                const Eigen::VectorXd& totals,
                                const RFunction& constraint,
                                const Eigen::VectorXd& contrast, double value0,
                                const bool* method_mask, Rng run_rng) {
  LinearRunResult out;
  const int p = static_cast<int>(pop.X.cols());
  const EstimatingFunction gf = family_linear_regression(p);
  const ParamSpace space = ParamSpace::unbounded(p);
  const SolverConfig cfg{};

  const int n0 = spec.scenario == 'B'
                     ? static_cast<int>(std::lround(spec.n / spec.response_prob))
                     : spec.n;
  DrawnSample sample = pps_randomized_systematic(pop.size, n0, run_rng);
  if (spec.scenario == 'B')
    sample = apply_nonresponse_ratio(sample, spec.response_prob, run_rng);

  const std::uint64_t rep_seed = run_rng.u64();
  std::uint64_t dist_seed[2] = {run_rng.u64(), run_rng.u64()};
  std::uint64_t boot_seed[2] = {run_rng.u64(), run_rng.u64()};

  SurveyDataset ds = assemble_survey_dataset(pop, sample, {1, 2}, totals,
                                             spec.B, rep_seed);
  Eigen::MatrixXd Xcal(ds.n(), 2);
  Xcal.col(0) = ds.X.col(1);
  Xcal.col(1) = ds.X.col(2);

  Eigen::VectorXd theta_hat = solve_weighted_ee(ds, gf, ds.w, space, cfg);

  for (int ki = 0; ki < 2; ++ki) {
    ELKind kind = ki == 0 ? ELKind::PEL : ELKind::SEL;
    bool wanted = false;
    for (ELKind k : spec.kinds) wanted |= (k == kind);
    if (!wanted) continue;

    ELProfile at_hat = profile(kind, ds, gf, theta_hat, cfg);
    MaximizeResult restr =
        maximize_restricted_w(kind, ds, gf, space, constraint, ds.w, cfg,
                              &theta_hat);
    double lr = std::max(0.0, 2.0 * (at_hat.log_ratio -
                                     restr.profile.log_ratio));

    FitResult comp = plugin_components(kind, ds, gf, theta_hat);
    const int k = constraint.k;

    if (method_mask[0])
      out.reject[ki][0] = lr > chi2_quantile_upper(k, spec.alpha);
    if (method_mask[1] || method_mask[2] || method_mask[3]) {
      QuadraticFormDist dist =
          build_delta(comp, constraint.jac(theta_hat), TailMethod::EIGEN_MC,
                      spec.mc_draws, dist_seed[ki]);
      if (method_mask[1])
        out.reject[ki][1] = pvalue(dist, lr) < spec.alpha;
      if (method_mask[2]) {
        QuadraticFormDist d1 = dist;
        d1.method = TailMethod::RS1;
        out.reject[ki][2] = pvalue(d1, lr) < spec.alpha;
      }
      if (method_mask[3]) {
        QuadraticFormDist d2 = dist;
        d2.method = TailMethod::RS2;
        out.reject[ki][3] = pvalue(d2, lr) < spec.alpha;
      }
    }
    if (method_mask[4]) {
      BootstrapCritical bc =
          bootstrap_critical_value(kind, ds, Xcal, gf, space, constraint,
                                   spec.alpha, spec.B, boot_seed[ki], cfg);
      out.reject[ki][4] = lr > bc.b_alpha;
    }
    if (method_mask[5]) {
      FitResult swch = sandwich(comp);
      TestResult wt = wald_test(swch, contrast, value0);
      out.reject[ki][5] = wt.p_value < spec.alpha;
    }
  }
  out.ok = true;
  return out;
}

struct QuantRunResult {
  bool ok = false;
  // per tau, per method (pel, sel, na): CI endpoints
  std::vector<std::array<std::array<double, 2>, 3>> ci;
};

QuantRunResult run_quantile_once(const Population& pop,
                                 const ExperimentSpec& spec,
                                 const Eigen::VectorXd& totals, Rng run_rng) {
  QuantRunResult out;
  const SolverConfig cfg{};
  DrawnSample sample = pps_randomized_systematic(pop.size, spec.n, run_rng);
  const std::uint64_t rep_seed = run_rng.u64();
  SurveyDataset ds = assemble_survey_dataset(pop, sample, {1, 2}, totals,
                                             spec.B, rep_seed);
  out.ci.resize(spec.tau_grid.size());
  for (size_t ti = 0; ti < spec.tau_grid.size(); ++ti) {
    const double tau = spec.tau_grid[ti];
    EstimatingFunction gf = family_quantile(tau);
    for (int ki = 0; ki < 2; ++ki) {
      ELKind kind = ki == 0 ? ELKind::PEL : ELKind::SEL;
      CiResult ci = ci_invert(kind, ds, gf, spec.alpha, DistSource::RS1,
                              spec.mc_draws, spec.seed, cfg);
      out.ci[ti][ki] = {ci.lower, ci.upper};
    }
    CiResult na = ci_woodruff(ds, tau, spec.alpha);
    out.ci[ti][2] = {na.lower, na.upper};
  }
  out.ok = true;
  return out;
}

std::vector<std::string> split_list_str(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto b = item.find_first_not_of(" \t");
    auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace

ExperimentSpec parse_descriptor(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open descriptor '" + path + "'");
  ExperimentSpec spec;
  spec.sigmas.clear();
  spec.kinds.clear();
  spec.methods.clear();
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r\n");
      if (b == std::string::npos) return std::string();
      auto e = s.find_last_not_of(" \t\r\n");
      return s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty()) continue;
    if (key == "name") spec.name = val;
    else if (key == "model")
      spec.model = val == "quantile" ? ModelKind::QUANTILE_MODEL
                                     : ModelKind::LINEAR;
    else if (key == "scenario") spec.scenario = val[0];
    else if (key == "sigmas") {
      for (const auto& s : split_list_str(val)) {
        if (s == "s1") spec.sigmas.push_back(SigmaMode::S1);
        else if (s == "s2") spec.sigmas.push_back(SigmaMode::S2);
        else if (s == "s3") spec.sigmas.push_back(SigmaMode::S3);
        else throw ParseError("unknown sigma mode '" + s + "'");
      }
    } else if (key == "fraction") spec.fraction = std::stod(val);
    else if (key == "n") spec.n = std::stoi(val);
    else if (key == "response_prob") spec.response_prob = std::stod(val);
    else if (key == "hypothesis") spec.hypothesis = val;
    else if (key == "b_grid") {
      for (const auto& s : split_list_str(val)) spec.b_grid.push_back(std::stod(s));
    } else if (key == "pair_grid") {
      for (const auto& s : split_list_str(val)) {
        auto colon = s.find(':');
        if (colon == std::string::npos)
          throw ParseError("pair_grid entries must look like b1:b2");
        spec.pair_grid.emplace_back(std::stod(s.substr(0, colon)),
                                    std::stod(s.substr(colon + 1)));
      }
    } else if (key == "tau_grid") {
      for (const auto& s : split_list_str(val)) spec.tau_grid.push_back(std::stod(s));
    } else if (key == "methods") spec.methods = split_list_str(val);
    else if (key == "kinds") {
      for (const auto& s : split_list_str(val))
        spec.kinds.push_back(el_kind_from_string(s));
    } else if (key == "runs") spec.runs = std::stoi(val);
    else if (key == "B") spec.B = std::stoi(val);
    else if (key == "seed") spec.seed = std::stoull(val);
    else if (key == "alpha") spec.alpha = std::stod(val);
    else if (key == "mc_draws") spec.mc_draws = std::stoi(val);
    else throw ParseError("unknown descriptor key '" + key + "'");
  }
  if (spec.sigmas.empty()) spec.sigmas.push_back(SigmaMode::S1);
  if (spec.kinds.empty()) spec.kinds = {ELKind::PEL, ELKind::SEL};
  if (spec.methods.empty()) spec.methods = {"eigmc"};
  return spec;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  ExperimentResult res;
  res.spec = spec;
  const int N = static_cast<int>(std::lround(spec.n / spec.fraction));

  if (spec.model == ModelKind::QUANTILE_MODEL) {
    if (spec.tau_grid.empty())
      throw UsageError("quantile experiment needs tau_grid");
    PopulationSpec ps;
    ps.N = N;
    ps.model = ModelKind::QUANTILE_MODEL;
    ps.seed = Rng(spec.seed, 0xFFFF0000ULL).u64();
    Population pop = generate_population(ps);
    Eigen::VectorXd totals(2);
    totals[0] = pop.X.col(1).sum();
    totals[1] = pop.X.col(2).sum();
    std::vector<double> truth(spec.tau_grid.size());
    for (size_t t = 0; t < spec.tau_grid.size(); ++t)
      truth[t] = population_quantile(pop, spec.tau_grid[t]);

    std::vector<QuantRunResult> runs(spec.runs);
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < spec.runs; ++k) {
      try {
        runs[k] = run_quantile_once(pop, spec, totals,
                                    Rng(spec.seed, 1, static_cast<std::uint64_t>(k)));
      } catch (const Error&) {
        runs[k].ok = false;
      }
    }
    const char* mnames[3] = {"pel", "sel", "na"};
    for (size_t t = 0; t < spec.tau_grid.size(); ++t) {
      for (int m = 0; m < 3; ++m) {
        QuantileCell cell;
        cell.kind = mnames[m];
        cell.tau = spec.tau_grid[t];
        for (int k = 0; k < spec.runs; ++k) {
          if (!runs[k].ok) {
            if (t == 0 && m == 0) ++cell.runs_err;
            continue;
          }
          double L = runs[k].ci[t][m][0], U = runs[k].ci[t][m][1];
          cell.AL += U - L;
          cell.CP += (L < truth[t] && truth[t] < U) ? 1.0 : 0.0;
          cell.LE += (truth[t] <= L) ? 1.0 : 0.0;
          cell.UE += (truth[t] >= U) ? 1.0 : 0.0;
          ++cell.runs_ok;
        }
        if (cell.runs_ok > 0) {
          cell.AL /= cell.runs_ok;
          cell.CP /= cell.runs_ok;
          cell.LE /= cell.runs_ok;
          cell.UE /= cell.runs_ok;
        }
        res.qcells.push_back(cell);
      }
    }
    return res;
  }

  // linear model: one population per (sigma, grid cell)
  const bool nested = spec.hypothesis == "nested";
  std::vector<std::pair<double, double>> grid;
  if (nested) {
    grid = spec.pair_grid;
  } else {
    for (double b : spec.b_grid) grid.emplace_back(b, 1.0);
  }
  if (grid.empty()) throw UsageError("empty hypothesis grid");

  bool method_mask[kMethodCount] = {};
  for (const auto& m : spec.methods) method_mask[method_index(m)] = true;

  const int p = 4;
  Eigen::MatrixXd A(1, p);
  A.setZero();
  Eigen::VectorXd c(1);
  Eigen::VectorXd contrast = Eigen::VectorXd::Zero(p);
  double value0;
  if (nested) {
    A(0, 1) = 1.0;
    A(0, 2) = -1.0;
    c[0] = 0.0;
    contrast[1] = 1.0;
    contrast[2] = -1.0;
    value0 = 0.0;
  } else {
    A(0, 1) = 1.0;
    c[0] = 1.0;
    contrast[1] = 1.0;
    value0 = 1.0;
  }
  RFunction constraint = RFunction::affine_constraint(A, c);

  int cell_id = 0;
  for (SigmaMode sigma : spec.sigmas) {
    for (const auto& cell : grid) {
      PopulationSpec ps;
      ps.N = N;
      ps.model = ModelKind::LINEAR;
      ps.sigma = sigma;
      ps.theta.resize(4);
      if (nested)
        ps.theta << 1.0, cell.first, cell.second, 1.0;
      else
        ps.theta << 1.0, cell.first, 1.0, 1.0;
      ps.seed = Rng(spec.seed, 0xFFFF0000ULL + cell_id).u64();
      Population pop = generate_population(ps);
      Eigen::VectorXd totals(2);
      totals[0] = pop.X.col(1).sum();
      totals[1] = pop.X.col(2).sum();

      std::vector<LinearRunResult> runs(spec.runs);
#pragma omp parallel for schedule(dynamic)
      for (int k = 0; k < spec.runs; ++k) {
        try {
          runs[k] = run_linear_once(
              pop, spec, totals, constraint, contrast, value0, method_mask,
              Rng(spec.seed, 1000 + cell_id, static_cast<std::uint64_t>(k)));
        } catch (const Error&) {
          runs[k].ok = false;
        }
      }

      for (ELKind kind : spec.kinds) {
        int ki = kind == ELKind::PEL ? 0 : 1;
        for (int m = 0; m < kMethodCount; ++m) {
          if (!method_mask[m]) continue;
          ExperimentCell out;
          out.kind = to_string(kind);
          out.method = kMethodNames[m];
          out.sigma = to_string(sigma);
          out.b1 = cell.first;
          out.b2 = nested ? cell.second : 0.0;
          for (int k = 0; k < spec.runs; ++k) {
            if (!runs[k].ok) {
              ++out.runs_err;
              continue;
            }
            ++out.runs_ok;
            if (runs[k].reject[ki][m]) out.rate += 1.0;
          }
          if (out.runs_ok > 0) out.rate /= out.runs_ok;
          res.cells.push_back(out);
        }
      }
      ++cell_id;
    }
  }
  return res;
}

void write_experiment_csv(const ExperimentResult& res,
                          const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const ExperimentSpec& spec = res.spec;

  if (!res.qcells.empty()) {
    std::ofstream out(fs::path(out_dir) / (spec.name + "_quantiles.csv"));
    out << "method,tau,LE,CP,UE,AL,runs_ok,runs_err\n";
    for (const auto& c : res.qcells)
      out << c.kind << ',' << c.tau << ',' << c.LE << ',' << c.CP << ','
          << c.UE << ',' << c.AL << ',' << c.runs_ok << ',' << c.runs_err
          << "\n";
    return;
  }

  std::ofstream out(fs::path(out_dir) / (spec.name + "_cells.csv"));
  out << "kind,method,sigma,b1,b2,reject_rate,runs_ok,runs_err\n";
  for (const auto& c : res.cells)
    out << c.kind << ',' << c.method << ',' << c.sigma << ',' << c.b1 << ','
        << c.b2 << ',' << c.rate << ',' << c.runs_ok << ',' << c.runs_err
        << "\n";

  // wide layout mirroring the report tables: one row per kind/method/sigma
  const bool nested = spec.hypothesis == "nested";
  std::vector<std::string> labels;
  for (const auto& c : res.cells) {
    std::ostringstream lab;
    if (nested)
      lab << c.b1 << ':' << c.b2;
    else
      lab << c.b1;
    if (std::find(labels.begin(), labels.end(), lab.str()) == labels.end())
      labels.push_back(lab.str());
  }
  std::ofstream wide(fs::path(out_dir) / (spec.name + "_table.csv"));
  wide << "kind,method,sigma";
  for (const auto& l : labels) wide << ",b=" << l;
  wide << "\n";
  for (ELKind kind : spec.kinds) {
    for (const auto& m : spec.methods) {
      for (SigmaMode s : spec.sigmas) {
        wide << to_string(kind) << ',' << m << ',' << to_string(s);
        for (const auto& l : labels) {
          for (const auto& c : res.cells) {
            std::ostringstream lab;
            if (nested)
              lab << c.b1 << ':' << c.b2;
            else
              lab << c.b1;
            if (c.kind == to_string(kind) && c.method == m &&
                c.sigma == to_string(s) && lab.str() == l) {
              wide << ',' << c.rate;
              break;
            }
          }
        }
        wide << "\n";
      }
    }
  }
}

SurveyDataset make_gss_style_replica(int n, int B, std::uint64_t seed) {
  Rng rng(seed);
  const int p = 15;  // intercept + 14 covariates
  SurveyDataset ds;
  ds.X.resize(n, p);
  ds.Y.resize(n, 1);
  Eigen::VectorXd d(n);
  for (int i = 0; i < n; ++i) {
    ds.X(i, 0) = 1.0;
    ds.X(i, 1) = rng.bernoulli(0.5) ? 1.0 : 0.0;          // gender
    ds.X(i, 2) = 1.0 + rng.uniform_int(6);                // marital status
    ds.X(i, 3) = rng.bernoulli(0.25) ? 1.0 : 0.0;         // landed immigrant
    ds.X(i, 4) = 1.0 + rng.uniform_int(6);                // citizenship
    double weeks = 1.0 + rng.uniform_int(52);
    ds.X(i, 5) = weeks;                                   // weeks employed
    ds.X(i, 6) = std::min(weeks, 1.0 + rng.uniform_int(52));  // weeks at job
    ds.X(i, 7) = rng.bernoulli(0.3) ? 1.0 : 0.0;          // unionized
    ds.X(i, 8) = rng.bernoulli(0.6) ? 1.0 : 0.0;          // happy working hard
    ds.X(i, 9) = rng.bernoulli(0.5) ? 1.0 : 0.0;          // pension plan
    ds.X(i, 10) = rng.bernoulli(0.5) ? 1.0 : 0.0;         // paid sick leave
    ds.X(i, 11) = rng.bernoulli(0.55) ? 1.0 : 0.0;        // paid vacation
    ds.X(i, 12) = rng.bernoulli(0.15) ? 1.0 : 0.0;        // unfair treatment
    ds.X(i, 13) = 1.0 + rng.uniform_int(7);               // age group
    ds.X(i, 14) = 1.0 + rng.uniform_int(6);               // workplace size
    double eta = 0.8 + 1.26 * ds.X(i, 8);
    ds.Y(i, 0) = rng.bernoulli(logistic_mu(eta)) ? 1.0 : 0.0;
    d[i] = 50.0 * std::exp(0.3 * rng.normal());
  }
  ds.w = d;
  ds.rep = make_replication_weights(d, Eigen::MatrixXd(n, 0), B, rng.u64());
  ds.y_names = {"y"};
  ds.x_names.resize(p);
  for (int j = 0; j < p; ++j)
    ds.x_names[j] = j == 0 ? "const" : ("x" + std::to_string(j));
  return rescale_weights(ds, static_cast<double>(n));
}

}  // namespace elsurv
