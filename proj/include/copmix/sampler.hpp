#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "copmix/dataset.hpp"
#include "copmix/mixture.hpp"
#include "copmix/random.hpp"

namespace copmix {

struct ChainTrace;

/// Random-walk proposal settings. Step sizes are multipliers on a per-move
/// reference scale (see update_cluster_theta / update_cluster_latents).
struct MhTuning {
  double normal_step = 0.25;
  double beta_step = 0.25;
  double exponential_step = 0.25;
  double latent_step = 0.1;
  int adaptation_window = 50;
  double target_acceptance = 0.35;

  double theta_step(MarginFamily family) const;
  void validate() const;
};

struct SamplerOptions {
  MhTuning tuning;
  /// Replace every data likelihood term by 0, so the chain targets the prior.
  bool likelihood_off = false;
};

/// Log-scale multiplier of one proposal slot, adapted in batches during burn-in.
struct AdaptiveStep {
  double log_scale = 0.0;
  std::uint64_t window_accepted = 0;
  std::uint64_t window_proposed = 0;
  std::uint64_t batches = 0;

  void record(bool accepted) {
    ++window_proposed;
    if (accepted) ++window_accepted;
  }
  /// Robbins-Monro step on log_scale towards the target acceptance rate.
  void adapt(double target);
};

struct MoveCounters {
  std::uint64_t proposed = 0;
  std::uint64_t accepted = 0;

  double rate() const {
    return proposed == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(proposed);
  }
};

struct SweepStats {
  MoveCounters reassign;
  MoveCounters theta;
  MoveCounters latent;
};

/// A live mixture component: its parameters (with factored copulas), the
/// member observations, and their latent Gaussian vectors (row k belongs to
/// members[k]).
class Cluster {
 public:
  explicit Cluster(ClusterParams params) : density_(std::move(params)) {}

  const ClusterParams &params() const { return density_.params(); }
  const ClusterDensity &density() const { return density_; }
  void set_params(ClusterParams params) { density_ = ClusterDensity(std::move(params)); }

  std::size_t size() const { return members.size(); }

  std::vector<Eigen::Index> members;
  Eigen::MatrixXd latents;

 private:
  ClusterDensity density_;
};

struct SamplerState {
  ModelConfig config;
  std::vector<ClusterId> assignments;
  std::vector<std::size_t> slot;  // row of observation i inside its cluster
  std::map<ClusterId, Cluster> clusters;
  ClusterId next_id = 0;
  std::vector<std::array<AdaptiveStep, 2>> theta_steps;  // per dimension, per parameter
  std::vector<AdaptiveStep> latent_steps;                // per dimension
  Rng rng;
  std::uint64_t sweep = 0;
  SweepStats last_sweep;

  std::size_t num_clusters() const { return clusters.size(); }
  std::vector<int> canonical_partition() const { return canonical_labels(assignments); }
  /// Throws Error when the partition, member lists or latent blocks disagree.
  void check_invariants() const;
};

/// One cluster holding every observation, parameters from G0, latents set to
/// the normal scores of the data under those parameters.
SamplerState init_state(const Dataset &data, const ModelConfig &config, Rng rng);

/// Log acceptance ratio for moving a non-singleton into a fresh cluster.
double new_cluster_log_ratio(double lambda, std::size_t n, double loglik_new, double loglik_current);
/// Log acceptance ratio for moving a singleton into an existing cluster.
double join_cluster_log_ratio(double lambda, std::size_t n, double loglik_target,
                              double loglik_current);
/// Metropolis accept step for a log ratio; NaN is rejected.
bool mh_accept(double log_ratio, Rng &rng);

/// Reassignment pass: singleton/non-singleton Metropolis-Hastings moves.
void step_reassign_mh(SamplerState &state, const Eigen::MatrixXd &data, const SamplerOptions &options);
/// Gibbs resampling of non-singleton assignments among existing clusters.
void step_partial_gibbs(SamplerState &state, const Eigen::MatrixXd &data,
                        const SamplerOptions &options);

/// One random-walk update per margin parameter of cluster `id`, targeting the
/// meta-Gaussian likelihood under the correlation of the cluster latents
/// times the margin prior.
void update_cluster_theta(SamplerState &state, ClusterId id, const Eigen::MatrixXd &data,
                          const SamplerOptions &options);
/// One random-walk update per latent column of cluster `id`.
void update_cluster_latents(SamplerState &state, ClusterId id, const Eigen::MatrixXd &data,
                            const SamplerOptions &options);
/// Conjugate inverse-Wishart redraw of both view covariances.
void update_cluster_sigma(SamplerState &state, ClusterId id);

/// Reassignment, partial Gibbs, then per-cluster parameter updates. Proposal
/// scales adapt only when `adapt` is set.
void sweep(SamplerState &state, const Eigen::MatrixXd &data, const SamplerOptions &options,
           bool adapt);

/// Sum over observations of the log-likelihood under their cluster (0 when
/// the likelihood is switched off).
double total_loglik(const SamplerState &state, const Eigen::MatrixXd &data,
                    const SamplerOptions &options);

struct RunSchedule {
  std::uint64_t n_sweeps = 5000;
  std::uint64_t burn_in = 2000;
  std::uint64_t thin = 1;
  /// Parameter snapshots every this many recorded sweeps (0 disables).
  std::uint64_t snapshot_every = 100;

  void validate() const;
};

ChainTrace run(const Dataset &data, const ModelConfig &config, const SamplerOptions &options,
               const RunSchedule &schedule, std::uint64_t seed);

std::string serialize_state(const SamplerState &state);
SamplerState deserialize_state(const std::string &text);

}  // namespace copmix
