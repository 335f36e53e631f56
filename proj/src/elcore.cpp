#include "elsurv/elcore.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "elsurv/errors.hpp"

namespace elsurv {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

const char* to_string(ELKind kind) { return kind == ELKind::PEL ? "pel" : "sel"; }

ELKind el_kind_from_string(const std::string& s) {
  if (s == "pel" || s == "PEL") return ELKind::PEL;
  if (s == "sel" || s == "SEL") return ELKind::SEL;
  throw UsageError("unknown EL kind '" + s + "'");
}

ELParts make_parts(ELKind kind, const Eigen::MatrixXd& G,
                   const Eigen::VectorXd& w) {
  ELParts parts;
  parts.n = static_cast<int>(G.rows());
  if (kind == ELKind::PEL) {
    parts.U = G;
    parts.a = w / w.sum();
  } else {
    parts.U = G.array().colwise() * w.array();
    parts.a = Eigen::VectorXd::Constant(parts.n, 1.0 / parts.n);
  }
  return parts;
}

LambdaResult solve_lambda(const Eigen::MatrixXd& U, const Eigen::VectorXd& a,
                          int n, const SolverConfig& cfg) {
  const int m = static_cast<int>(U.rows());
  const int r = static_cast<int>(U.cols());
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(r);

  double umax = 0.0;
  for (int i = 0; i < m; ++i)
    if (a[i] > 0.0) umax = std::max(umax, U.row(i).norm());
  if (umax == 0.0) return {lambda, true, 0};

  const double floor = 1.0 / n;
  const double gtol = cfg.lambda_tol * (1.0 + umax);

  Eigen::VectorXd t = Eigen::VectorXd::Ones(m);  // t_i = 1 + lambda'u_i
  double h = 0.0;                                // sum_i a_i log t_i

  auto eval_h = [&](const Eigen::VectorXd& lam, Eigen::VectorXd& tout,
                    double& hout) -> bool {
    tout.noalias() = Eigen::VectorXd::Ones(m) + U * lam;
    hout = 0.0;
    for (int i = 0; i < m; ++i) {
      if (a[i] <= 0.0) continue;
      if (tout[i] <= floor) return false;
      hout += a[i] * std::log(tout[i]);
    }
    return true;
  };

  for (int iter = 1; iter <= cfg.max_inner; ++iter) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(r);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(r, r);
    for (int i = 0; i < m; ++i) {
      if (a[i] <= 0.0) continue;
      const double ai_t = a[i] / t[i];
      grad.noalias() += ai_t * U.row(i).transpose();
      H.noalias() += (ai_t / t[i]) * (U.row(i).transpose() * U.row(i));
    }
    if (grad.norm() <= gtol) return {lambda, true, iter - 1};

    Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    Eigen::VectorXd step;
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
      step = ldlt.solve(grad);
    } else {
      Eigen::MatrixXd Hr = H + 1e-10 * H.trace() * Eigen::MatrixXd::Identity(r, r);
      step = Hr.ldlt().solve(grad);
    }
    const double gd = grad.dot(step);

    bool accepted = false;
    double s = 1.0;
    for (int half = 0; half < 60; ++half) {
      Eigen::VectorXd lam_new = lambda + s * step;
      Eigen::VectorXd t_new(m);
      double h_new;
      if (eval_h(lam_new, t_new, h_new) &&
          h_new >= h + 1e-4 * s * gd - 1e-14 * (1.0 + std::fabs(h))) {
        lambda = lam_new;
        t = t_new;
        h = h_new;
        accepted = true;
        break;
      }
      s *= 0.5;
    }
    if (!accepted) break;
  }
  throw HullViolation("no feasible Lagrange multiplier within iteration budget");
}

ELProfile profile_parts(const ELParts& parts, const SolverConfig& cfg) {
  ELProfile prof;
  const int m = static_cast<int>(parts.U.rows());
  try {
    LambdaResult lr = solve_lambda(parts.U, parts.a, parts.n, cfg);
    prof.lambda = lr.lambda;
    prof.iters = lr.iters;
    prof.converged = lr.converged;
  } catch (const HullViolation&) {
    prof.lambda = Eigen::VectorXd::Zero(parts.U.cols());
    prof.p_hat = parts.a;
    prof.log_ratio = -kInf;
    prof.converged = false;
    return prof;
  }
  Eigen::VectorXd t = Eigen::VectorXd::Ones(m) + parts.U * prof.lambda;
  prof.p_hat.resize(m);
  double s = 0.0;
  for (int i = 0; i < m; ++i) {
    prof.p_hat[i] = parts.a[i] > 0.0 ? parts.a[i] / t[i] : 0.0;
    if (parts.a[i] > 0.0) s += parts.a[i] * std::log(t[i]);
  }
  prof.log_ratio = -static_cast<double>(parts.n) * s;
  return prof;
}

ELProfile profile_w(ELKind kind, const SurveyDataset& ds,
                    const EstimatingFunction& gf, const Eigen::VectorXd& theta,
                    const Eigen::VectorXd& weights, const SolverConfig& cfg) {
  Eigen::MatrixXd G = eval_all(ds, gf, theta);
  ELProfile prof = profile_parts(make_parts(kind, G, weights), cfg);
  prof.theta = theta;
  return prof;
}

ELProfile profile(ELKind kind, const SurveyDataset& ds,
                  const EstimatingFunction& gf, const Eigen::VectorXd& theta,
                  const SolverConfig& cfg) {
  return profile_w(kind, ds, gf, theta, ds.w, cfg);
}

Eigen::VectorXd profile_gradient(ELKind kind, const SurveyDataset& ds,
                                 const EstimatingFunction& gf,
                                 const Eigen::VectorXd& theta,
                                 const ELProfile& prof,
                                 const Eigen::VectorXd& weights) {
  const int n = ds.n();
  Eigen::MatrixXd G = eval_all(ds, gf, theta);
  Eigen::VectorXd c(n);
  if (kind == ELKind::PEL) {
    const double wsum = weights.sum();
    for (int i = 0; i < n; ++i) {
      double t = 1.0 + prof.lambda.dot(G.row(i));
      c[i] = n * (weights[i] / wsum) / t;
    }
  } else {
    for (int i = 0; i < n; ++i) {
      double t = 1.0 + weights[i] * prof.lambda.dot(G.row(i));
      c[i] = weights[i] / t;
    }
  }
  Eigen::MatrixXd M = weighted_jacobian_sum(ds, gf, theta, c);  // r x p
  return -(M.transpose() * prof.lambda);
}

namespace {

// negative log-EL-ratio, +inf outside the EL support
double neg_ratio(ELKind kind, const SurveyDataset& ds,
                 const EstimatingFunction& gf, const Eigen::VectorXd& theta,
                 const Eigen::VectorXd& weights, const SolverConfig& cfg,
                 Eigen::VectorXd* grad) {
  ELProfile prof = profile_w(kind, ds, gf, theta, weights, cfg);
  if (!prof.converged && std::isinf(prof.log_ratio)) return kInf;
  if (grad) *grad = -profile_gradient(kind, ds, gf, theta, prof, weights);
  return -prof.log_ratio;
}

struct BfgsOut {
  Eigen::VectorXd x;
  double f = 0.0;
  bool converged = false;
  int iters = 0;
};

BfgsOut bfgs_minimize(
    const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>& fg,
    Eigen::VectorXd x0, int max_iter, double gtol, double xtol) {
  const int d = static_cast<int>(x0.size());
  BfgsOut out;
  out.x = std::move(x0);
  Eigen::VectorXd g(d);
  out.f = fg(out.x, &g);
  if (std::isinf(out.f))
    throw NoConvergence("optimizer started outside the EL support");
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(d, d);

  for (int iter = 1; iter <= max_iter; ++iter) {
    out.iters = iter;
    if (g.lpNorm<Eigen::Infinity>() <= gtol * (1.0 + std::fabs(out.f))) {
      out.converged = true;
      return out;
    }
    Eigen::VectorXd dir = -(H * g);
    double gd = g.dot(dir);
    if (gd >= 0.0) {  // curvature lost; restart from steepest descent
      H.setIdentity();
      dir = -g;
      gd = g.dot(dir);
      if (gd >= 0.0) {
        out.converged = true;
        return out;
      }
    }
    double s = 1.0;
    bool accepted = false;
    Eigen::VectorXd x_new, g_new(d);
    double f_new = 0.0;
    for (int half = 0; half < 50; ++half) {
      x_new = out.x + s * dir;
      f_new = fg(x_new, nullptr);
      if (std::isfinite(f_new) && f_new <= out.f + 1e-4 * s * gd) {
        accepted = true;
        break;
      }
      s *= 0.5;
    }
    if (!accepted) {
      out.converged = g.lpNorm<Eigen::Infinity>() <=
                      std::sqrt(gtol) * (1.0 + std::fabs(out.f));
      return out;
    }
    f_new = fg(x_new, &g_new);
    Eigen::VectorXd sk = x_new - out.x;
    Eigen::VectorXd yk = g_new - g;
    double sy = sk.dot(yk);
    if (sy > 1e-12 * sk.norm() * yk.norm()) {
      Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
      Eigen::MatrixXd V = I - (sk * yk.transpose()) / sy;
      H = V * H * V.transpose() + (sk * sk.transpose()) / sy;
    }
    double step_size = sk.norm();
    out.x = x_new;
    out.f = f_new;
    g = g_new;
    if (step_size <= xtol * (1.0 + out.x.norm())) {
      out.converged = true;
      return out;
    }
  }
  return out;
}

// Gauss-Newton descent on ||sum_i v_i g_i(theta)|| restricted to
// theta = base + Z psi; used to find interior starting points.
Eigen::VectorXd gauss_newton_ee(const SurveyDataset& ds,
                                const EstimatingFunction& gf,
                                const Eigen::VectorXd& v,
                                const Eigen::VectorXd& base,
                                const Eigen::MatrixXd& Z,
                                Eigen::VectorXd psi, int max_iter) {
  auto F_at = [&](const Eigen::VectorXd& ps) {
    Eigen::VectorXd th = base + Z * ps;
    Eigen::MatrixXd G = eval_all(ds, gf, th);
    return Eigen::VectorXd(G.transpose() * v);
  };
  Eigen::VectorXd F = F_at(psi);
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd th = base + Z * psi;
    Eigen::MatrixXd J = weighted_jacobian_sum(ds, gf, th, v) * Z;  // r x m
    Eigen::VectorXd step =
        J.completeOrthogonalDecomposition().solve(-F);
    double s = 1.0;
    bool ok = false;
    for (int half = 0; half < 30; ++half) {
      Eigen::VectorXd psi_new = psi + s * step;
      Eigen::VectorXd F_new = F_at(psi_new);
      if (F_new.norm() <= (1.0 - 1e-4 * s) * F.norm()) {
        psi = psi_new;
        F = F_new;
        ok = true;
        break;
      }
      s *= 0.5;
    }
    if (!ok || step.norm() <= 1e-10 * (1.0 + psi.norm())) break;
  }
  return psi;
}

}  // namespace

Eigen::VectorXd solve_weighted_ee(const SurveyDataset& ds,
                                  const EstimatingFunction& gf,
                                  const Eigen::VectorXd& v,
                                  const ParamSpace& space,
                                  const SolverConfig& cfg,
                                  const Eigen::VectorXd* warm_start) {
  if (gf.r != gf.p)
    throw ValidationError("weighted estimating equations need r == p");
  if (!gf.smooth) {
    if (gf.p != 1)
      throw ValidationError("nonsmooth maximization supports scalar families only");
    Eigen::VectorXd th(1);
    th[0] = nonsmooth_step_maximizer(ds, gf, v);
    return th;
  }
  Eigen::VectorXd theta = warm_start ? *warm_start : space.initial;
  space.clamp(theta);
  Eigen::VectorXd F = eval_all(ds, gf, theta).transpose() * v;
  const double f_tol = 1e-12 * (1.0 + F.norm());

  for (int outer = 0; outer < cfg.max_outer; ++outer) {
    if (F.norm() <= f_tol) return theta;
    Eigen::MatrixXd J = weighted_jacobian_sum(ds, gf, theta, v);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
    if (!lu.isInvertible())
      throw SingularComponent("estimating-equation Jacobian is singular");
    Eigen::VectorXd step = lu.solve(-F);
    double s = 1.0;
    bool accepted = false;
    Eigen::VectorXd theta_new;
    for (int half = 0; half < 40; ++half) {
      theta_new = theta + s * step;
      space.clamp(theta_new);
      Eigen::VectorXd F_new = eval_all(ds, gf, theta_new).transpose() * v;
      if (F_new.norm() <= (1.0 - 1e-4 * s) * F.norm()) {
        theta = theta_new;
        F = F_new;
        accepted = true;
        break;
      }
      s *= 0.5;
    }
    if (!accepted) {
      if (F.norm() <= 1e-6 * (1.0 + f_tol / 1e-12)) return theta;
      throw NoConvergence("damped Newton stalled on the estimating equations");
    }
    if ((s * step).norm() <= cfg.theta_tol * (1.0 + theta.norm())) return theta;
  }
  throw NoConvergence("estimating-equation solver exceeded max_outer");
}

double nonsmooth_step_maximizer(const SurveyDataset& ds,
                                const EstimatingFunction& gf,
                                const Eigen::VectorXd& v) {
  const int n = ds.n();
  std::vector<double> ys(n);
  for (int i = 0; i < n; ++i) ys[i] = ds.Y(i, 0);
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());

  auto ee_sum = [&](double th) {
    Eigen::VectorXd theta(1);
    theta[0] = th;
    return eval_all(ds, gf, theta).col(0).dot(v);
  };
  // the weighted EE sum is nondecreasing in theta for indicator families
  int lo = 0, hi = static_cast<int>(ys.size()) - 1;
  if (ee_sum(ys[hi]) < 0.0) return ys[hi];
  while (lo < hi) {
    int mid = (lo + hi) / 2;
    if (ee_sum(ys[mid]) >= 0.0)
      hi = mid;
    else
      lo = mid + 1;
  }
  return ys[lo];
}

MaximizeResult maximize_w(ELKind kind, const SurveyDataset& ds,
                          const EstimatingFunction& gf, const ParamSpace& space,
                          const Eigen::VectorXd& weights,
                          const SolverConfig& cfg,
                          const Eigen::VectorXd* warm_start) {
  MaximizeResult res;
  if (gf.r == gf.p) {
    res.theta = solve_weighted_ee(ds, gf, weights, space, cfg, warm_start);
    res.profile = profile_w(kind, ds, gf, res.theta, weights, cfg);
    return res;
  }
  // over-identified case: quasi-Newton ascent with the envelope gradient
  Eigen::VectorXd start = warm_start ? *warm_start : space.initial;
  space.clamp(start);
  Eigen::MatrixXd Z = Eigen::MatrixXd::Identity(gf.p, gf.p);
  Eigen::VectorXd base = Eigen::VectorXd::Zero(gf.p);
  start = gauss_newton_ee(ds, gf, weights, base, Z, start, 25);
  auto fg = [&](const Eigen::VectorXd& th, Eigen::VectorXd* grad) {
    return neg_ratio(kind, ds, gf, th, weights, cfg, grad);
  };
  BfgsOut out = bfgs_minimize(fg, start, cfg.max_outer, 1e-8, cfg.theta_tol);
  if (!out.converged)
    throw NoConvergence("EL maximization did not converge");
  res.theta = out.x;
  res.profile = profile_w(kind, ds, gf, res.theta, weights, cfg);
  return res;
}

MaximizeResult maximize(ELKind kind, const SurveyDataset& ds,
                        const EstimatingFunction& gf, const ParamSpace& space,
                        const SolverConfig& cfg) {
  return maximize_w(kind, ds, gf, space, ds.w, cfg);
}

RFunction RFunction::affine_constraint(const Eigen::MatrixXd& A,
                                       const Eigen::VectorXd& c) {
  RFunction rf;
  rf.k = static_cast<int>(A.rows());
  rf.affine = true;
  rf.A = A;
  rf.c = c;
  rf.R = [A, c](const Eigen::VectorXd& th) { return Eigen::VectorXd(A * th - c); };
  rf.jac = [A](const Eigen::VectorXd&) { return A; };
  return rf;
}

MaximizeResult maximize_restricted_w(ELKind kind, const SurveyDataset& ds,
                                     const EstimatingFunction& gf,
                                     const ParamSpace& space,
                                     const RFunction& constraint,
                                     const Eigen::VectorXd& weights,
                                     const SolverConfig& cfg,
                                     const Eigen::VectorXd* warm_start) {
  const int p = gf.p;
  MaximizeResult res;

  if (constraint.affine) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
        constraint.A, Eigen::ComputeFullV | Eigen::ComputeThinU);
    double smax = svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
    int rank = 0;
    for (int j = 0; j < svd.singularValues().size(); ++j)
      if (svd.singularValues()[j] > 1e-12 * std::max(1.0, smax)) ++rank;
    Eigen::VectorXd theta_p = svd.solve(constraint.c);
    if ((constraint.A * theta_p - constraint.c).norm() >
        1e-8 * (1.0 + constraint.c.norm()))
      throw ValidationError("infeasible affine constraint");
    const int m = p - rank;
    if (m == 0) {
      res.theta = theta_p;
      res.profile = profile_w(kind, ds, gf, res.theta, weights, cfg);
      return res;
    }
    Eigen::MatrixXd Z = svd.matrixV().rightCols(m);  // orthonormal null basis

    Eigen::VectorXd psi0;
    if (warm_start)
      psi0 = Z.transpose() * (*warm_start - theta_p);
    else
      psi0 = Eigen::VectorXd::Zero(m);
    if (gf.r == gf.p)
      psi0 = gauss_newton_ee(ds, gf, weights, theta_p, Z, psi0, 30);

    auto fg = [&](const Eigen::VectorXd& psi, Eigen::VectorXd* grad) {
      Eigen::VectorXd th = theta_p + Z * psi;
      Eigen::VectorXd gth;
      double f = neg_ratio(kind, ds, gf, th, weights, cfg,
                           grad ? &gth : nullptr);
      if (grad && std::isfinite(f)) *grad = Z.transpose() * gth;
      return f;
    };
    BfgsOut out = bfgs_minimize(fg, psi0, cfg.max_outer, 1e-9, cfg.theta_tol);
    if (!out.converged)
      throw NoConvergence("restricted EL maximization did not converge");
    res.theta = theta_p + Z * out.x;
    res.profile = profile_w(kind, ds, gf, res.theta, weights, cfg);
    return res;
  }

  // nonlinear constraint: augmented Lagrangian around the unrestricted fit
  Eigen::VectorXd theta = warm_start
                              ? *warm_start
                              : maximize_w(kind, ds, gf, space, weights, cfg).theta;
  Eigen::VectorXd tau = Eigen::VectorXd::Zero(constraint.k);
  double mu = 10.0;
  double prev_viol = kInf;
  for (int round = 0; round < 8; ++round) {
    auto fg = [&](const Eigen::VectorXd& th, Eigen::VectorXd* grad) {
      Eigen::VectorXd gth;
      double f = neg_ratio(kind, ds, gf, th, weights, cfg,
                           grad ? &gth : nullptr);
      if (!std::isfinite(f)) return f;
      Eigen::VectorXd Rv = constraint.R(th);
      f += tau.dot(Rv) + 0.5 * mu * Rv.squaredNorm();
      if (grad) {
        Eigen::MatrixXd Phi = constraint.jac(th);
        *grad = gth + Phi.transpose() * (tau + mu * Rv);
      }
      return f;
    };
    BfgsOut out = bfgs_minimize(fg, theta, cfg.max_outer, 1e-9, cfg.theta_tol);
    theta = out.x;
    Eigen::VectorXd Rv = constraint.R(theta);
    double viol = Rv.lpNorm<Eigen::Infinity>();
    if (viol <= 1e-8) {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(constraint.jac(theta));
      double smax = svd.singularValues()[0];
      int rank = 0;
      for (int j = 0; j < svd.singularValues().size(); ++j)
        if (svd.singularValues()[j] > 1e-10 * std::max(1.0, smax)) ++rank;
      if (rank < constraint.k)
        throw RankDeficient("constraint Jacobian lost rank at the iterate");
      res.theta = theta;
      res.profile = profile_w(kind, ds, gf, res.theta, weights, cfg);
      return res;
    }
    tau += mu * Rv;
    if (viol > 0.25 * prev_viol) mu *= 10.0;
    prev_viol = viol;
  }
  throw NoConvergence("augmented Lagrangian did not satisfy the constraint");
}

MaximizeResult maximize_restricted(ELKind kind, const SurveyDataset& ds,
                                   const EstimatingFunction& gf,
                                   const ParamSpace& space,
                                   const RFunction& constraint,
                                   const SolverConfig& cfg) {
  return maximize_restricted_w(kind, ds, gf, space, constraint, ds.w, cfg);
}

}  // namespace elsurv
