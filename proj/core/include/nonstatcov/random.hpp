#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace nonstatcov {

using Rng = std::mt19937_64;

/// Independent, reproducible stream for (seed, stream). Replication r of a
/// Monte Carlo loop uses stream r, so results do not depend on scheduling.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x9e3779b9u};
  return Rng(seq);
}

inline Eigen::MatrixXd random_normal(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd out(rows, cols);
  // Column-major fill order is part of the reproducibility contract.
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = normal(rng);
  return out;
}

inline Eigen::VectorXd random_normal(Rng& rng, Eigen::Index n) {
  return random_normal(rng, n, 1).col(0);
}

}  // namespace nonstatcov
