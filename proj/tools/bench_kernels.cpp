// Times the OpenMP kernels against their serial references and checks that
// both produce identical output.
#include <omp.h>

#include <Eigen/Core>
#include <chrono>
#include <cstdio>

#include "elsurv/bootstrap.hpp"
#include "elsurv/eltest.hpp"
#include "elsurv/rng.hpp"
#include "elsurv/serial_ref.hpp"

using namespace elsurv;

namespace {

template <typename F>
double time_ms(F&& fn) {
  auto t0 = std::chrono::steady_clock::now();
  fn();
  auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  int threads = argc > 1 ? std::atoi(argv[1]) : omp_get_max_threads();
  omp_set_num_threads(threads);
  std::printf("threads: %d\n\n", threads);
  std::printf("%-28s %12s %12s %8s %s\n", "kernel", "serial (ms)", "omp (ms)",
              "speedup", "match");

  {
    Eigen::VectorXd eigs(3);
    eigs << 2.0, 1.0, 0.5;
    const int draws = 2000000;
    std::int64_t c_omp = 0, c_ser = 0;
    double t_omp = time_ms([&] {
      c_omp = quadform_exceed_count(eigs, 7.81, draws, 42);
    });
    double t_ser = time_ms([&] {
      c_ser = serial_ref::quadform_exceed_count(eigs, 7.81, draws, 42);
    });
    std::printf("%-28s %12.1f %12.1f %8.2f %s\n", "quadform_exceed_count",
                t_ser, t_omp, t_ser / t_omp, c_omp == c_ser ? "yes" : "NO");
  }

  {
    const int n = 400, B = 2000;
    Rng rng(7);
    Eigen::VectorXd d(n);
    Eigen::MatrixXd X(n, 2);
    for (int i = 0; i < n; ++i) {
      d[i] = 20.0 + 40.0 * rng.uniform();
      X(i, 0) = rng.bernoulli(0.5);
      X(i, 1) = rng.uniform();
    }
    Eigen::MatrixXd r_omp, r_ser;
    double t_omp = time_ms([&] { r_omp = make_replication_weights(d, X, B, 9); });
    double t_ser = time_ms([&] {
      r_ser = serial_ref::make_replication_weights(d, X, B, 9);
    });
    std::printf("%-28s %12.1f %12.1f %8.2f %s\n", "make_replication_weights",
                t_ser, t_omp, t_ser / t_omp,
                r_omp == r_ser ? "yes" : "NO");
  }
  return 0;
}
