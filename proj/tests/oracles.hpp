#pragma once

// Brute-force reference implementations used only by the test suite. None of
// them share numerical routines with the library: the lambda solver is a
// bisection, the EL evaluator works from first principles on tiny inputs, the
// quadratic-form tail uses the standard-library RNG, and the with-replacement
// variance is the closed form.

#include <optional>
#include <vector>

namespace oracle {

// root of sum_i w_i u_i / (1 + lambda u_i) = 0 by bisection on the feasible
// interval; nullopt when no sign change exists (zero outside the hull)
std::optional<double> lambda_bisection(const std::vector<double>& u,
                                       const std::vector<double>& w);

// textbook empirical-likelihood log ratio sum_i log(n p_i) for scalar
// constraint values v_i with equal weights; nullopt on hull violation
std::optional<double> classical_el_log_ratio(const std::vector<double>& v);

// P(sum_j delta_j Z_j^2 > q) by Monte Carlo with std::mt19937_64
double quadform_tail(const std::vector<double>& delta, double q, long draws,
                     unsigned seed);

// analytic variance of the Hansen-Hurwitz total estimator under n
// with-replacement draws with probabilities proportional to `size`
double hh_variance(const std::vector<double>& g, const std::vector<double>& size,
                   int n);

}  // namespace oracle
