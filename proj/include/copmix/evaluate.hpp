#pragma once

#include <Eigen/Core>
#include <map>
#include <span>
#include <vector>

#include "copmix/trace.hpp"

namespace copmix {

/// Pair-counting adjusted Rand index. Pair counts stay in exact integer
/// arithmetic until the final ratio. Throws DomainError on length mismatch
/// or fewer than two observations.
double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

/// Entry (i, j): fraction of recorded sweeps with observations i and j in
/// the same cluster.
Eigen::MatrixXd posterior_similarity(const ChainTrace &trace);

/// Sum over pairs i < j of |1{same cluster} - similarity(i, j)|.
double binder_loss(std::span<const int> labels, const Eigen::MatrixXd &similarity);

struct PointEstimate {
  std::vector<int> labels;
  std::size_t record_index = 0;  // earliest recorded sweep attaining the minimum
  double loss = 0.0;
};

/// Sampled partition minimising the Binder loss against the posterior
/// similarity; ties go to the earliest sweep.
PointEstimate map_partition(const ChainTrace &trace);

struct KPosterior {
  std::map<int, double> frequency;  // K -> fraction of recorded sweeps
  int mode = 0;                     // smallest K among the most frequent
  double mean = 0.0;
};

KPosterior k_posterior(const ChainTrace &trace);

/// Lower median (element at index (n - 1) / 2 of the sorted values).
double lower_median(std::vector<double> values);

/// One-sided sign test: P(X >= wins) for X ~ Binomial(wins + losses, 1/2).
/// Ties are dropped before calling.
double sign_test_p_value(std::size_t wins, std::size_t losses);

}  // namespace copmix
