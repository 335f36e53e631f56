#include <omp.h>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "elsurv/bootstrap.hpp"
#include "elsurv/dataset.hpp"
#include "elsurv/elcore.hpp"
#include "elsurv/eltest.hpp"
#include "elsurv/errors.hpp"
#include "elsurv/estfn.hpp"
#include "elsurv/penel.hpp"
#include "elsurv/report.hpp"
#include "elsurv/simlab.hpp"
#include "elsurv/varest.hpp"

namespace fs = std::filesystem;
using namespace elsurv;

namespace {

const char* kBootCaveat =
    "note: bootstrap calibration assumes replicate weights built by "
    "single-stage with-replacement resampling; validity degrades for large "
    "sampling fractions";

struct CommonOpts {
  std::string data, schema, out_dir = ".";
  std::string family = "mean";
  std::string el = "pel";
  std::string method = "rs1";
  double alpha = 0.05;
  std::uint64_t seed = kDefaultMcSeed;
  int mc_draws = 100000;
  int B = 500;
  int threads = 0;
};

void apply_threads(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

SurveyDataset load(const CommonOpts& o) {
  Schema schema = Schema::from_file(o.schema);
  return load_dataset(o.data, schema);
}

// affine hypothesis rows like "theta[1]=1" or "2*theta[1]-theta[2]=0"
void parse_hypothesis(const std::string& text, int p, Eigen::MatrixXd& A,
                      Eigen::VectorXd& c, int row) {
  auto eq = text.find('=');
  if (eq == std::string::npos)
    throw UsageError("hypothesis needs '=': " + text);
  std::string lhs = text.substr(0, eq);
  std::string rhs = text.substr(eq + 1);
  try {
    c[row] = std::stod(rhs);
  } catch (...) {
    throw UsageError("cannot parse hypothesis value '" + rhs + "'");
  }

  size_t i = 0;
  double sign = 1.0;
  bool any = false;
  auto skip_ws = [&] { while (i < lhs.size() && std::isspace(lhs[i])) ++i; };
  while (true) {
    skip_ws();
    if (i >= lhs.size()) break;
    if (lhs[i] == '+') { sign = 1.0; ++i; continue; }
    if (lhs[i] == '-') { sign = -1.0; ++i; continue; }
    double coef = 1.0;
    skip_ws();
    if (i < lhs.size() && (std::isdigit(lhs[i]) || lhs[i] == '.')) {
      size_t used = 0;
      coef = std::stod(lhs.substr(i), &used);
      i += used;
      skip_ws();
      if (i < lhs.size() && lhs[i] == '*') { ++i; skip_ws(); }
    }
    if (lhs.compare(i, 6, "theta[") != 0)
      throw UsageError("expected theta[j] in hypothesis: " + text);
    i += 6;
    size_t close = lhs.find(']', i);
    if (close == std::string::npos)
      throw UsageError("missing ']' in hypothesis: " + text);
    int idx = std::stoi(lhs.substr(i, close - i));
    if (idx < 1 || idx > p)
      throw UsageError("theta index out of range in hypothesis: " + text);
    A(row, idx - 1) += sign * coef;
    i = close + 1;
    sign = 1.0;
    any = true;
  }
  if (!any) throw UsageError("empty hypothesis: " + text);
}

std::vector<int> calib_indices(const SurveyDataset& ds,
                               const std::vector<std::string>& names) {
  std::vector<int> idx;
  for (const auto& name : names) {
    auto it = std::find(ds.x_names.begin(), ds.x_names.end(), name);
    if (it == ds.x_names.end())
      throw SchemaError("calibration column '" + name + "' not among x columns");
    idx.push_back(static_cast<int>(it - ds.x_names.begin()));
  }
  return idx;
}

Eigen::MatrixXd calib_matrix(const SurveyDataset& ds,
                             const std::vector<int>& idx) {
  Eigen::MatrixXd X(ds.n(), static_cast<int>(idx.size()));
  for (size_t j = 0; j < idx.size(); ++j) X.col(j) = ds.X.col(idx[j]);
  return X;
}

int cmd_estimate(const CommonOpts& o, const std::vector<std::string>& args) {
  apply_threads(o.threads);
  SurveyDataset ds = load(o);
  if (ds.B() < kMinRecommendedReplicates)
    std::cerr << "warning: only " << ds.B()
              << " replicate columns; variance estimates may be unstable\n";
  EstimatingFunction gf = family_by_name(o.family, ds);
  ELKind kind = el_kind_from_string(o.el);
  ParamSpace space = ParamSpace::unbounded(gf.p);
  SolverConfig cfg;

  MaximizeResult fit = maximize(kind, ds, gf, space, cfg);
  FitResult comp = sandwich(plugin_components(kind, ds, gf, fit.theta));

  TailMethod tm = o.method == "eigmc" ? TailMethod::EIGEN_MC
                  : o.method == "rs2" ? TailMethod::RS2
                                      : TailMethod::RS1;
  const bool logistic = o.family == "logistic";

  fs::create_directories(o.out_dir);
  std::ofstream out(fs::path(o.out_dir) / "estimates.csv");
  out << "term,estimate,se" << (logistic ? ",or" : "") << ",p_value\n";
  for (int j = 0; j < gf.p; ++j) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(1, gf.p);
    A(0, j) = 1.0;
    Eigen::VectorXd c0 = Eigen::VectorXd::Zero(1);
    TestResult t =
        lr_nested(kind, ds, gf, space, RFunction::affine_constraint(A, c0), tm,
                  o.mc_draws, o.seed, cfg);
    std::string term = j < static_cast<int>(ds.x_names.size())
                           ? ds.x_names[j]
                           : ("theta" + std::to_string(j + 1));
    if (o.family == "mean") term = "mean";
    out << term << ',' << fmt_g17(fit.theta[j]) << ',' << fmt_g17(comp.se[j]);
    if (logistic) out << ',' << fmt_g17(std::exp(fit.theta[j]));
    out << ',' << fmt_g6(t.p_value) << "\n";
  }
  write_manifest(o.out_dir, args,
                 {{"command", "estimate"},
                  {"seed", std::to_string(o.seed)},
                  {"el", o.el},
                  {"family", o.family},
                  {"method", o.method}});
  return 0;
}

int cmd_test(const CommonOpts& o, const std::vector<std::string>& hypotheses,
             const std::vector<std::string>& calib, bool boot_from_repweights,
             const std::vector<std::string>& args) {
  apply_threads(o.threads);
  if (hypotheses.empty()) throw UsageError("--hypothesis required");
  SurveyDataset ds = load(o);
  EstimatingFunction gf = family_by_name(o.family, ds);
  ELKind kind = el_kind_from_string(o.el);
  ParamSpace space = ParamSpace::unbounded(gf.p);
  SolverConfig cfg;

  const int k = static_cast<int>(hypotheses.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(k, gf.p);
  Eigen::VectorXd c(k);
  for (int r = 0; r < k; ++r) parse_hypothesis(hypotheses[r], gf.p, A, c, r);
  RFunction constraint = RFunction::affine_constraint(A, c);

  TestResult t;
  double critical = std::numeric_limits<double>::quiet_NaN();
  if (o.method == "eigmc" || o.method == "rs1" || o.method == "rs2") {
    TailMethod tm = o.method == "eigmc" ? TailMethod::EIGEN_MC
                    : o.method == "rs1" ? TailMethod::RS1
                                        : TailMethod::RS2;
    t = lr_nested(kind, ds, gf, space, constraint, tm, o.mc_draws, o.seed, cfg);
  } else if (o.method == "wald") {
    if (k != 1) throw UsageError("wald supports a single hypothesis row");
    MaximizeResult fit = maximize(kind, ds, gf, space, cfg);
    FitResult comp = sandwich(plugin_components(kind, ds, gf, fit.theta));
    t = wald_test(comp, A.row(0).transpose(), c[0]);
  } else if (o.method == "boot") {
    std::cerr << kBootCaveat << "\n";
    MaximizeResult fit = maximize(kind, ds, gf, space, cfg);
    MaximizeResult restr =
        maximize_restricted(kind, ds, gf, space, constraint, cfg);
    t.statistic = std::max(
        0.0, 2.0 * (fit.profile.log_ratio - restr.profile.log_ratio));
    BootstrapCritical bc;
    if (boot_from_repweights) {
      bc = bootstrap_critical_from_replicates(kind, ds, gf, space, o.alpha,
                                              cfg, constraint);
    } else {
      if (!ds.design_w)
        throw ValidationError(
            "bootstrap calibration needs a design-weight column in the "
            "schema (or --boot-from-repweights to consume the replicate "
            "columns as pre-built draws)");
      Eigen::MatrixXd Xcal = calib_matrix(ds, calib_indices(ds, calib));
      bc = bootstrap_critical_value(kind, ds, Xcal, gf, space, constraint,
                                    o.alpha, o.B, o.seed, cfg);
    }
    critical = bc.b_alpha;
    int ge = 0;
    for (double v : bc.lr)
      if (v >= t.statistic) ++ge;
    t.p_value = static_cast<double>(ge) / static_cast<double>(bc.lr.size());
    t.method = "boot";
    fill_rejections(t);
    t.reject_at[o.alpha] = t.statistic > bc.b_alpha;
  } else {
    throw UsageError("unknown method '" + o.method + "'");
  }

  fs::create_directories(o.out_dir);
  KvList kv = {{"statistic", fmt_g17(t.statistic)},
               {"method", t.method},
               {"p_value", fmt_g17(t.p_value)},
               {"el", o.el},
               {"alpha", fmt_g6(o.alpha)}};
  if (!std::isnan(critical)) kv.push_back({"critical_value", fmt_g17(critical)});
  for (int j = 0; j < t.eigenvalues.size(); ++j)
    kv.push_back({"eigenvalue_" + std::to_string(j + 1),
                  fmt_g17(t.eigenvalues[j])});
  write_kv_file((fs::path(o.out_dir) / "test.kv").string(), kv);

  std::ofstream out(fs::path(o.out_dir) / "test.csv");
  out << "statistic,method,p_value,eigenvalues\n";
  out << fmt_g17(t.statistic) << ',' << t.method << ',' << fmt_g17(t.p_value)
      << ",\"";
  for (int j = 0; j < t.eigenvalues.size(); ++j)
    out << (j ? ";" : "") << fmt_g17(t.eigenvalues[j]);
  out << "\"\n";
  write_manifest(o.out_dir, args,
                 {{"command", "test"},
                  {"seed", std::to_string(o.seed)},
                  {"method", o.method}});
  std::cout << "statistic=" << fmt_g6(t.statistic)
            << " p_value=" << fmt_g6(t.p_value) << "\n";
  return 0;
}

int cmd_quantile(const CommonOpts& o, double tau,
                 const std::vector<std::string>& args) {
  apply_threads(o.threads);
  SurveyDataset ds = load(o);
  ELKind kind = el_kind_from_string(o.el);
  EstimatingFunction gf = family_quantile(tau);
  SolverConfig cfg;

  CiResult ci;
  if (o.method == "wald") {
    ci = ci_woodruff(ds, tau, o.alpha);
  } else {
    DistSource src = o.method == "eigmc" ? DistSource::EIGEN_MC
                     : o.method == "rs2" ? DistSource::RS2
                     : o.method == "boot" ? DistSource::BOOTSTRAP
                                          : DistSource::RS1;
    if (o.method == "boot") std::cerr << kBootCaveat << "\n";
    ci = ci_invert(kind, ds, gf, o.alpha, src, o.mc_draws, o.seed, cfg);
  }
  fs::create_directories(o.out_dir);
  std::ofstream out(fs::path(o.out_dir) / "quantile.csv");
  out << "tau,point,lower,upper,alpha,el,method,lower_flag,upper_flag\n";
  out << tau << ',' << fmt_g17(ci.point) << ',' << fmt_g17(ci.lower) << ','
      << fmt_g17(ci.upper) << ',' << o.alpha << ',' << o.el << ',' << o.method
      << ',' << ci.lower_flagged << ',' << ci.upper_flagged << "\n";
  write_manifest(o.out_dir, args,
                 {{"command", "quantile"},
                  {"seed", std::to_string(o.seed)},
                  {"tau", fmt_g6(tau)}});
  std::cout << "quantile tau=" << tau << " point=" << fmt_g6(ci.point)
            << " ci=[" << fmt_g6(ci.lower) << ", " << fmt_g6(ci.upper)
            << "]\n";
  return 0;
}

int cmd_select(const CommonOpts& o, double scad_a, bool penalize_intercept,
               const std::vector<std::string>& args) {
  apply_threads(o.threads);
  SurveyDataset ds = load(o);
  EstimatingFunction gf = family_by_name(o.family, ds);
  ELKind kind = el_kind_from_string(o.el);
  ParamSpace space = ParamSpace::unbounded(gf.p);
  SolverConfig cfg;

  std::vector<bool> penalize(gf.p, true);
  // by convention the first x column is the constant term
  if (!penalize_intercept && gf.p > 0) penalize[0] = false;
  std::vector<double> grid = default_tau_grid(gf.p, ds.n());
  SelectionResult sel = select_tau(kind, ds, gf, space, grid, scad_a,
                                   penalize, cfg);

  fs::create_directories(o.out_dir);
  std::ofstream out(fs::path(o.out_dir) / "selection.csv");
  out << "term,estimate,selected\n";
  for (int j = 0; j < gf.p; ++j) {
    std::string term = j < static_cast<int>(ds.x_names.size())
                           ? ds.x_names[j]
                           : ("theta" + std::to_string(j + 1));
    bool sel_j = sel.theta_hat[j] != 0.0;
    out << term << ',' << fmt_g17(sel.theta_hat[j]) << ',' << (sel_j ? 1 : 0)
        << "\n";
  }
  std::ofstream path_out(fs::path(o.out_dir) / "tau_path.csv");
  path_out << "tau,bic,df\n";
  for (const auto& row : sel.criterion_path)
    path_out << fmt_g17(row[0]) << ',' << fmt_g17(row[1]) << ',' << row[2]
             << "\n";
  write_manifest(o.out_dir, args,
                 {{"command", "select"},
                  {"el", o.el},
                  {"tau_chosen", fmt_g17(sel.tau_chosen)}});
  std::cout << "selected " << sel.selected.size() << " of " << gf.p
            << " terms at tau=" << fmt_g6(sel.tau_chosen) << "\n";
  return 0;
}

int cmd_repweights(const CommonOpts& o, const std::vector<std::string>& calib,
                   const std::vector<std::string>& args) {
  apply_threads(o.threads);
  SurveyDataset ds = load(o);
  if (!ds.design_w)
    throw ValidationError("repweights needs a design_weight column in the schema");
  if (ds.B() > 0)
    throw UsageError("input already carries replication columns under prefix '" +
                     ds.rep_prefix + "'");
  Eigen::MatrixXd Xcal = calib_matrix(ds, calib_indices(ds, calib));
  ds.rep = make_replication_weights(*ds.design_w, Xcal, o.B, o.seed);
  if (ds.rep_prefix.empty()) ds.rep_prefix = "w_rep_";
  std::cerr << kBootCaveat << "\n";

  fs::create_directories(o.out_dir);
  std::string out_path = (fs::path(o.out_dir) / "augmented.csv").string();
  save_dataset(ds, out_path);
  write_manifest(o.out_dir, args,
                 {{"command", "repweights"},
                  {"seed", std::to_string(o.seed)},
                  {"B", std::to_string(o.B)}});
  std::cout << "wrote " << out_path << " with B=" << o.B << " columns\n";
  return 0;
}

int cmd_simulate(const CommonOpts& o, const std::string& descriptor,
                 const std::vector<std::string>& args) {
  apply_threads(o.threads);
  ExperimentSpec spec = parse_descriptor(descriptor);
  ExperimentResult res = run_experiment(spec);
  write_experiment_csv(res, o.out_dir);
  KvList kv = {{"command", "simulate"},
               {"descriptor", descriptor},
               {"name", spec.name},
               {"runs", std::to_string(spec.runs)},
               {"B", std::to_string(spec.B)},
               {"seed", std::to_string(spec.seed)}};
  write_manifest(o.out_dir, args, kv);
  std::cout << "experiment '" << spec.name << "' complete; tables in "
            << o.out_dir << "\n";
  return 0;
}

int run_cli(std::vector<std::string> args);

int cmd_replay(const std::string& manifest) {
  std::vector<std::string> args = read_manifest_args(manifest);
  return run_cli(std::move(args));
}

int run_cli(std::vector<std::string> args) {
  CLI::App app{"design-based empirical-likelihood inference for public-use survey files"};
  app.require_subcommand(1);

  CommonOpts o;
  std::vector<std::string> hypotheses, calib;
  double tau = 0.5, scad_a = 3.7;
  bool boot_from_repweights = false, penalize_intercept = false;
  std::string descriptor, manifest;

  auto add_common = [&](CLI::App* cmd, bool needs_data) {
    if (needs_data) {
      cmd->add_option("--data", o.data)->required();
      cmd->add_option("--schema", o.schema)->required();
    }
    cmd->add_option("--out-dir", o.out_dir);
    cmd->add_option("--seed", o.seed);
    cmd->add_option("--threads", o.threads);
    cmd->add_option("--alpha", o.alpha);
    cmd->add_option("--mc-draws", o.mc_draws);
    cmd->add_option("--B", o.B);
  };

  CLI::App* est = app.add_subcommand("estimate", "point estimates, SEs and per-term tests");
  add_common(est, true);
  est->add_option("--family", o.family);
  est->add_option("--el", o.el);
  est->add_option("--method", o.method);

  CLI::App* tst = app.add_subcommand("test", "linear-hypothesis tests");
  add_common(tst, true);
  tst->add_option("--family", o.family);
  tst->add_option("--el", o.el);
  tst->add_option("--method", o.method);
  tst->add_option("--hypothesis", hypotheses);
  tst->add_option("--calib", calib)->delimiter(',');
  tst->add_flag("--boot-from-repweights", boot_from_repweights);

  CLI::App* qnt = app.add_subcommand("quantile", "quantile confidence intervals");
  add_common(qnt, true);
  qnt->add_option("--el", o.el);
  qnt->add_option("--method", o.method);
  qnt->add_option("--tau", tau);

  CLI::App* sel = app.add_subcommand("select", "SCAD-penalized variable selection");
  add_common(sel, true);
  sel->add_option("--family", o.family);
  sel->add_option("--el", o.el);
  sel->add_option("--scad-a", scad_a);
  sel->add_flag("--penalize-intercept", penalize_intercept);

  CLI::App* rep = app.add_subcommand("repweights", "emit bootstrap replication-weight columns");
  add_common(rep, true);
  rep->add_option("--calib", calib)->delimiter(',');

  CLI::App* sim = app.add_subcommand("simulate", "run an experiment descriptor");
  add_common(sim, false);
  sim->add_option("--descriptor", descriptor)->required();

  CLI::App* rpl = app.add_subcommand("replay", "re-run a command from its manifest");
  rpl->add_option("--manifest", manifest)->required();

  std::vector<const char*> argv;
  argv.push_back("elsurv");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error: code=usage msg=\"" << e.what() << "\"\n";
    return 2;
  }

  if (est->parsed()) return cmd_estimate(o, args);
  if (tst->parsed())
    return cmd_test(o, hypotheses, calib, boot_from_repweights, args);
  if (qnt->parsed()) return cmd_quantile(o, tau, args);
  if (sel->parsed()) return cmd_select(o, scad_a, penalize_intercept, args);
  if (rep->parsed()) return cmd_repweights(o, calib, args);
  if (sim->parsed()) return cmd_simulate(o, descriptor, args);
  if (rpl->parsed()) return cmd_replay(manifest);
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return run_cli(std::move(args));
  } catch (const Error& e) {
    std::cerr << "error: code=" << e.code() << " msg=\"" << e.what() << "\"\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: code=internal msg=\"" << e.what() << "\"\n";
    return 4;
  }
}
