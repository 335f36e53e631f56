#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace elsurv::serial_ref {

// Plain-loop reference implementations of the OpenMP kernels. Tests assert
// bitwise equality with the parallel versions; the benchmark tool compares
// their throughput.
std::int64_t quadform_exceed_count(const Eigen::VectorXd& eigs, double stat,
                                   int draws, std::uint64_t seed);
std::vector<double> quadform_sample(const Eigen::VectorXd& eigs, int draws,
                                    std::uint64_t seed);
Eigen::MatrixXd make_replication_weights(const Eigen::VectorXd& d,
                                         const Eigen::MatrixXd& Xcal, int B,
                                         std::uint64_t seed);

}  // namespace elsurv::serial_ref
