#include "elsurv/serial_ref.hpp"

#include "elsurv/bootstrap.hpp"
#include "elsurv/rng.hpp"

namespace elsurv::serial_ref {

std::int64_t quadform_exceed_count(const Eigen::VectorXd& eigs, double stat,
                                   int draws, std::uint64_t seed) {
  const int k = static_cast<int>(eigs.size());
  std::int64_t count = 0;
  for (int i = 0; i < draws; ++i) {
    Rng rng(seed, static_cast<std::uint64_t>(i));
    double s = 0.0;
    for (int j = 0; j < k; ++j) {
      double z = rng.normal();
      s += eigs[j] * z * z;
    }
    if (s > stat) ++count;
  }
  return count;
}

std::vector<double> quadform_sample(const Eigen::VectorXd& eigs, int draws,
                                    std::uint64_t seed) {
  const int k = static_cast<int>(eigs.size());
  std::vector<double> out(draws);
  for (int i = 0; i < draws; ++i) {
    Rng rng(seed, static_cast<std::uint64_t>(i));
    double s = 0.0;
    for (int j = 0; j < k; ++j) {
      double z = rng.normal();
      s += eigs[j] * z * z;
    }
    out[i] = s;
  }
  return out;
}

Eigen::MatrixXd make_replication_weights(const Eigen::VectorXd& d,
                                         const Eigen::MatrixXd& Xcal, int B,
                                         std::uint64_t seed) {
  const int n = static_cast<int>(d.size());
  Eigen::MatrixXd rep(n, B);
  for (int b = 0; b < B; ++b) {
    Rng rng(seed, static_cast<std::uint64_t>(b));
    BootstrapDraw draw = draw_bootstrap(d, Xcal, rng);
    for (int i = 0; i < n; ++i) rep(i, b) = draw.counts[i] * draw.w_star[i];
  }
  return rep;
}

}  // namespace elsurv::serial_ref
