#include "copmix/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "copmix/json_io.hpp"
#include "copmix/trace.hpp"

namespace copmix {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Column range of one view inside a full row.
struct ViewRange {
  Eigen::Index begin;
  Eigen::Index size;
};

ViewRange view_range(const ViewLayout &layout, int view) {
  return view == 0 ? ViewRange{0, layout.p} : ViewRange{layout.p, layout.q};
}

double point_loglik_or_zero(const ClusterDensity &density, const Eigen::MatrixXd &data,
                            Eigen::Index i, const SamplerOptions &options) {
  if (options.likelihood_off) return 0.0;
  try {
    return density.point_loglik(data.row(i));
  } catch (const Error &) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

Eigen::RowVectorXd latent_row(const ClusterParams &params, const Eigen::MatrixXd &data,
                              Eigen::Index i) {
  Eigen::RowVectorXd z(data.cols());
  for (Eigen::Index j = 0; j < data.cols(); ++j) z(j) = normal_score(params.theta[j], data(i, j));
  return z;
}

void remove_member(SamplerState &state, Eigen::Index i) {
  auto it = state.clusters.find(state.assignments[i]);
  Cluster &c = it->second;
  const std::size_t pos = state.slot[i];
  const std::size_t last = c.members.size() - 1;
  if (pos != last) {
    c.members[pos] = c.members[last];
    c.latents.row(static_cast<Eigen::Index>(pos)) = c.latents.row(static_cast<Eigen::Index>(last));
    state.slot[c.members[pos]] = pos;
  }
  c.members.pop_back();
  c.latents.conservativeResize(static_cast<Eigen::Index>(last), Eigen::NoChange);
  if (c.members.empty()) state.clusters.erase(it);
}

void add_member(SamplerState &state, Eigen::Index i, ClusterId id, const Eigen::MatrixXd &data) {
  Cluster &c = state.clusters.at(id);
  const auto row = static_cast<Eigen::Index>(c.members.size());
  c.latents.conservativeResize(row + 1, data.cols());
  c.latents.row(row) = latent_row(c.params(), data, i);
  c.members.push_back(i);
  state.assignments[i] = id;
  state.slot[i] = static_cast<std::size_t>(row);
}

void move_member(SamplerState &state, Eigen::Index i, ClusterId to, const Eigen::MatrixXd &data) {
  remove_member(state, i);
  add_member(state, i, to, data);
}

ClusterId open_cluster(SamplerState &state, ClusterParams params) {
  const ClusterId id = state.next_id++;
  state.clusters.emplace(id, Cluster(std::move(params)));
  return id;
}

Eigen::MatrixXd member_rows(const Eigen::MatrixXd &data, const Cluster &c, const ViewRange &range) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(c.members.size()), range.size);
  for (std::size_t k = 0; k < c.members.size(); ++k) {
    out.row(static_cast<Eigen::Index>(k)) = data.row(c.members[k]).segment(range.begin, range.size);
  }
  return out;
}

// Copula log-density summed over the cluster, from the Gram matrix of the
// normal scores. -inf when the correlation cannot be factored.
double copula_sum(const Eigen::MatrixXd &corr, const Eigen::MatrixXd &gram, Eigen::Index n) {
  try {
    return GaussianCopula(CorrelationMatrix(corr)).log_density_sum(gram, n);
  } catch (const Error &) {
    return kNegInf;
  }
}

// Correlation of a latent block; empty optional when degenerate or near-singular.
std::optional<Eigen::MatrixXd> latent_correlation(const Eigen::MatrixXd &latents) {
  if (latents.cols() == 1) return Eigen::MatrixXd::Ones(1, 1);
  try {
    SampleCorrelation sc = corr_of_latents(latents);
    if (sc.near_singular) return std::nullopt;
    return std::move(sc.matrix);
  } catch (const DegenerateDataError &) {
    return std::nullopt;
  }
}

}  // namespace

double MhTuning::theta_step(MarginFamily family) const {
  switch (family) {
    case MarginFamily::normal:
      return normal_step;
    case MarginFamily::beta:
      return beta_step;
    case MarginFamily::exponential:
      return exponential_step;
  }
  return normal_step;
}

void MhTuning::validate() const {
  for (double s : {normal_step, beta_step, exponential_step, latent_step}) {
    if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("tuning: step sizes must be positive");
  }
  if (adaptation_window < 1) throw ConfigError("tuning: adaptation window must be >= 1");
  if (!(target_acceptance >= 0.2 && target_acceptance <= 0.5)) {
    throw ConfigError("tuning: target acceptance must lie in [0.2, 0.5]");
  }
}

void AdaptiveStep::adapt(double target) {
  if (window_proposed == 0) return;
  ++batches;
  const double rate = static_cast<double>(window_accepted) / static_cast<double>(window_proposed);
  const double gain = 2.0 / std::sqrt(static_cast<double>(batches));
  log_scale = std::clamp(log_scale + gain * (rate - target), -12.0, 6.0);
  window_accepted = 0;
  window_proposed = 0;
}

void SamplerState::check_invariants() const {
  const std::size_t n = assignments.size();
  if (slot.size() != n) throw Error("sampler state: slot table has wrong length");
  std::size_t total = 0;
  for (const auto &[id, c] : clusters) {
    if (c.members.empty()) throw Error("sampler state: empty cluster " + std::to_string(id));
    if (static_cast<std::size_t>(c.latents.rows()) != c.members.size()) {
      throw Error("sampler state: latent rows differ from cluster size");
    }
    for (std::size_t k = 0; k < c.members.size(); ++k) {
      const auto i = static_cast<std::size_t>(c.members[k]);
      if (i >= n || assignments[i] != id || slot[i] != k) {
        throw Error("sampler state: member table inconsistent for observation " + std::to_string(i));
      }
    }
    total += c.members.size();
  }
  if (total != n) throw Error("sampler state: cluster sizes do not sum to n");
}

SamplerState init_state(const Dataset &data, const ModelConfig &config, Rng rng) {
  config.validate();
  if (data.size() == 0) throw DegenerateDataError("init_state: dataset is empty");
  if (data.rows.cols() != config.layout.dim() || !(data.layout == config.layout)) {
    throw ConfigError("init_state: dataset dimensions do not match the model layout");
  }
  SamplerState state;
  state.config = config;
  state.rng = std::move(rng);
  state.theta_steps.resize(static_cast<std::size_t>(config.layout.dim()));
  state.latent_steps.resize(static_cast<std::size_t>(config.layout.dim()));
  const auto n = static_cast<std::size_t>(data.size());
  state.assignments.assign(n, 0);
  state.slot.assign(n, 0);
  const ClusterId id = open_cluster(state, draw_from_base(config, state.rng));
  for (Eigen::Index i = 0; i < data.size(); ++i) add_member(state, i, id, data.rows);
  return state;
}

double new_cluster_log_ratio(double lambda, std::size_t n, double loglik_new, double loglik_current) {
  return std::log(lambda) - std::log(static_cast<double>(n - 1)) + loglik_new - loglik_current;
}

double join_cluster_log_ratio(double lambda, std::size_t n, double loglik_target,
                              double loglik_current) {
  return std::log(static_cast<double>(n - 1)) - std::log(lambda) + loglik_target - loglik_current;
}

bool mh_accept(double log_ratio, Rng &rng) {
  if (std::isnan(log_ratio)) return false;
  if (log_ratio >= 0.0) return true;
  return std::log(uniform01(rng)) < log_ratio;
}

void step_reassign_mh(SamplerState &state, const Eigen::MatrixXd &data, const SamplerOptions &options) {
  const std::size_t n = state.assignments.size();
  if (n < 2) return;
  const double lambda = state.config.lambda;
  for (std::size_t ii = 0; ii < n; ++ii) {
    const auto i = static_cast<Eigen::Index>(ii);
    const ClusterId current = state.assignments[ii];
    const Cluster &here = state.clusters.at(current);
    ++state.last_sweep.reassign.proposed;
    if (here.size() > 1) {
      ClusterParams fresh = draw_from_base(state.config, state.rng);
      const ClusterDensity fresh_density(fresh);
      const double ll_new = point_loglik_or_zero(fresh_density, data, i, options);
      const double ll_cur = point_loglik_or_zero(here.density(), data, i, options);
      if (mh_accept(new_cluster_log_ratio(lambda, n, ll_new, ll_cur), state.rng)) {
        const ClusterId id = open_cluster(state, std::move(fresh));
        move_member(state, i, id, data);
        ++state.last_sweep.reassign.accepted;
      }
    } else {
      // Pick an existing cluster with probability n_{-i,c} / (n - 1): the
      // cluster of a uniformly chosen other observation.
      std::uniform_int_distribution<std::size_t> pick(0, n - 2);
      std::size_t k = pick(state.rng);
      if (k >= ii) ++k;
      const ClusterId target = state.assignments[k];
      const double ll_target =
          point_loglik_or_zero(state.clusters.at(target).density(), data, i, options);
      const double ll_cur = point_loglik_or_zero(here.density(), data, i, options);
      if (mh_accept(join_cluster_log_ratio(lambda, n, ll_target, ll_cur), state.rng)) {
        move_member(state, i, target, data);
        ++state.last_sweep.reassign.accepted;
      }
    }
  }
}

void step_partial_gibbs(SamplerState &state, const Eigen::MatrixXd &data,
                        const SamplerOptions &options) {
  const std::size_t n = state.assignments.size();
  std::vector<ClusterId> ids;
  std::vector<double> logw;
  for (std::size_t ii = 0; ii < n; ++ii) {
    const auto i = static_cast<Eigen::Index>(ii);
    const ClusterId current = state.assignments[ii];
    if (state.clusters.at(current).size() == 1) continue;
    if (state.clusters.size() == 1) continue;
    ids.clear();
    logw.clear();
    for (const auto &[id, c] : state.clusters) {
      const double count = static_cast<double>(c.size()) - (id == current ? 1.0 : 0.0);
      double w = std::log(count) + point_loglik_or_zero(c.density(), data, i, options);
      if (std::isnan(w)) w = kNegInf;
      ids.push_back(id);
      logw.push_back(w);
    }
    const double top = *std::max_element(logw.begin(), logw.end());
    if (!std::isfinite(top)) continue;
    double total = 0.0;
    for (double &w : logw) {
      w = std::exp(w - top);
      total += w;
    }
    double u = uniform01(state.rng) * total;
    std::size_t chosen = ids.size() - 1;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      u -= logw[k];
      if (u < 0.0) {
        chosen = k;
        break;
      }
    }
    if (ids[chosen] != current) move_member(state, i, ids[chosen], data);
  }
}

void update_cluster_theta(SamplerState &state, ClusterId id, const Eigen::MatrixXd &data,
                          const SamplerOptions &options) {
  Cluster &cluster = state.clusters.at(id);
  const ViewLayout layout = state.config.layout;
  const auto n_c = static_cast<Eigen::Index>(cluster.size());
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n_c));
  ClusterParams params = cluster.params();

  for (int view = 0; view < 2; ++view) {
    const ViewRange range = view_range(layout, view);
    const Eigen::MatrixXd x = member_rows(data, cluster, range);

    // Copula correlation for this step: correlation of the cluster latents,
    // or the stored one when the latents cannot provide a usable matrix.
    Eigen::MatrixXd corr;
    if (range.size == 1) {
      corr = Eigen::MatrixXd::Ones(1, 1);
    } else {
      auto latent_corr = n_c >= 2 ? latent_correlation(cluster.latents.middleCols(range.begin, range.size))
                                  : std::nullopt;
      const CovarianceMatrix &sigma = view == 0 ? params.sigma_x : params.sigma_y;
      corr = latent_corr ? *latent_corr : cov_to_corr(sigma).matrix();
    }
    std::optional<GaussianCopula> copula;
    if (!options.likelihood_off) {
      try {
        copula.emplace(CorrelationMatrix(corr));
      } catch (const Error &) {
        copula.emplace(view == 0 ? cov_to_corr(params.sigma_x) : cov_to_corr(params.sigma_y));
      }
    }

    Eigen::MatrixXd scores(n_c, range.size);
    Eigen::VectorXd margin_sums(range.size);
    auto column_terms = [&](const MarginParams &m, Eigen::Index jj, Eigen::VectorXd &col) {
      double lp = 0.0;
      for (Eigen::Index k = 0; k < n_c; ++k) {
        const double v = x(k, jj);
        lp += margin_logpdf(m, v);
        col(k) = normal_score(m, v);
      }
      return lp;
    };
    if (!options.likelihood_off) {
      for (Eigen::Index jj = 0; jj < range.size; ++jj) {
        Eigen::VectorXd col(n_c);
        margin_sums(jj) = column_terms(params.theta[range.begin + jj], jj, col);
        scores.col(jj) = col;
      }
    }
    Eigen::MatrixXd gram = options.likelihood_off ? Eigen::MatrixXd() : scores.transpose() * scores;

    for (Eigen::Index jj = 0; jj < range.size; ++jj) {
      const Eigen::Index j = range.begin + jj;
      const MarginSpec &spec = state.config.margins[static_cast<std::size_t>(j)];
      const MarginFamily family = spec.family;
      for (std::size_t k = 0; k < parameter_count(family); ++k) {
        AdaptiveStep &slot = state.theta_steps[static_cast<std::size_t>(j)][k];
        const MarginParams &current = params.theta[static_cast<std::size_t>(j)];
        const UnconstrainedParams coords = to_unconstrained(current);
        double reference = inv_sqrt_n;
        if (family == MarginFamily::normal && k == 0) {
          reference *= std::sqrt(std::get<NormalParams>(current).variance);
        }
        const double step = std::exp(slot.log_scale) * options.tuning.theta_step(family) * reference;
        UnconstrainedParams proposed_coords = coords;
        proposed_coords.values[k] += step * standard_normal(state.rng);
        const MarginParams proposed = from_unconstrained(family, proposed_coords);

        double log_ratio = 0.0;
        Eigen::VectorXd new_col(n_c);
        double new_margin_sum = 0.0;
        Eigen::MatrixXd new_gram;
        try {
          validate(proposed);
          log_ratio = prior_logpdf(spec.hyper, proposed) + log_jacobian(proposed_coords, family) -
                      prior_logpdf(spec.hyper, current) - log_jacobian(coords, family);
          if (!options.likelihood_off) {
            new_margin_sum = column_terms(proposed, jj, new_col);
            const Eigen::VectorXd cross = scores.transpose() * new_col;
            new_gram = gram;
            new_gram.row(jj) = cross.transpose();
            new_gram.col(jj) = cross;
            new_gram(jj, jj) = new_col.squaredNorm();
            log_ratio += copula->log_density_sum(new_gram, n_c) + new_margin_sum -
                         copula->log_density_sum(gram, n_c) - margin_sums(jj);
          }
        } catch (const Error &) {
          log_ratio = std::numeric_limits<double>::quiet_NaN();
        }
        const bool accepted = mh_accept(log_ratio, state.rng);
        slot.record(accepted);
        ++state.last_sweep.theta.proposed;
        if (accepted) {
          ++state.last_sweep.theta.accepted;
          params.theta[static_cast<std::size_t>(j)] = proposed;
          if (!options.likelihood_off) {
            scores.col(jj) = new_col;
            margin_sums(jj) = new_margin_sum;
            gram = std::move(new_gram);
          }
        }
      }
    }
  }
  cluster.set_params(std::move(params));
}

void update_cluster_latents(SamplerState &state, ClusterId id, const Eigen::MatrixXd &data,
                            const SamplerOptions &options) {
  Cluster &cluster = state.clusters.at(id);
  const auto n_c = static_cast<Eigen::Index>(cluster.size());
  if (n_c < 2) return;
  const ViewLayout layout = state.config.layout;
  const ClusterParams &params = cluster.params();
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n_c));

  for (int view = 0; view < 2; ++view) {
    const ViewRange range = view_range(layout, view);
    const Eigen::MatrixXd &sigma = (view == 0 ? params.sigma_x : params.sigma_y).matrix();
    const Eigen::MatrixXd sigma_inv =
        Eigen::LLT<Eigen::MatrixXd>(sigma).solve(Eigen::MatrixXd::Identity(range.size, range.size));
    const bool data_term = !options.likelihood_off && range.size > 1;

    Eigen::MatrixXd gram;
    if (data_term) {
      const Eigen::MatrixXd x = member_rows(data, cluster, range);
      Eigen::MatrixXd scores(n_c, range.size);
      for (Eigen::Index k = 0; k < n_c; ++k) {
        for (Eigen::Index jj = 0; jj < range.size; ++jj) {
          scores(k, jj) = normal_score(params.theta[range.begin + jj], x(k, jj));
        }
      }
      gram = scores.transpose() * scores;
    }
    auto target = [&](const Eigen::MatrixXd &latents) {
      const Eigen::MatrixXd lg = latents.transpose() * latents;
      double out = -0.5 * sigma_inv.cwiseProduct(lg).sum();
      if (data_term) {
        const auto corr = latent_correlation(latents);
        out += corr ? copula_sum(*corr, gram, n_c) : kNegInf;
      }
      return out;
    };

    Eigen::MatrixXd latents = cluster.latents.middleCols(range.begin, range.size);
    double current_target = target(latents);
    for (Eigen::Index jj = 0; jj < range.size; ++jj) {
      const Eigen::Index j = range.begin + jj;
      AdaptiveStep &slot = state.latent_steps[static_cast<std::size_t>(j)];
      const double step = std::exp(slot.log_scale) * options.tuning.latent_step *
                          std::sqrt(sigma(jj, jj)) * inv_sqrt_n;
      Eigen::MatrixXd proposal = latents;
      for (Eigen::Index k = 0; k < n_c; ++k) proposal(k, jj) += step * standard_normal(state.rng);
      const double proposed_target = target(proposal);
      double log_ratio;
      if (proposed_target == kNegInf) {
        log_ratio = kNegInf;
      } else if (current_target == kNegInf) {
        log_ratio = 0.0;
      } else {
        log_ratio = proposed_target - current_target;
      }
      const bool accepted = mh_accept(log_ratio, state.rng);
      slot.record(accepted);
      ++state.last_sweep.latent.proposed;
      if (accepted) {
        ++state.last_sweep.latent.accepted;
        latents = std::move(proposal);
        current_target = proposed_target;
      }
    }
    cluster.latents.middleCols(range.begin, range.size) = latents;
  }
}

void update_cluster_sigma(SamplerState &state, ClusterId id) {
  Cluster &cluster = state.clusters.at(id);
  const ViewLayout layout = state.config.layout;
  ClusterParams params = cluster.params();
  const auto n_c = static_cast<double>(cluster.size());
  for (int view = 0; view < 2; ++view) {
    const ViewRange range = view_range(layout, view);
    const auto latents = cluster.latents.middleCols(range.begin, range.size);
    Eigen::MatrixXd scale = Eigen::MatrixXd::Identity(range.size, range.size);
    scale.noalias() += latents.transpose() * latents;
    const double dof = static_cast<double>(range.size) + 1.0 + n_c;
    CovarianceMatrix drawn = sample_inv_wishart(CovarianceMatrix((scale + scale.transpose()) / 2.0), dof,
                                                state.rng);
    (view == 0 ? params.sigma_x : params.sigma_y) = std::move(drawn);
  }
  cluster.set_params(std::move(params));
}

void sweep(SamplerState &state, const Eigen::MatrixXd &data, const SamplerOptions &options,
           bool adapt) {
  state.last_sweep = SweepStats{};
  step_reassign_mh(state, data, options);
  step_partial_gibbs(state, data, options);
  std::vector<ClusterId> ids;
  ids.reserve(state.clusters.size());
  for (const auto &[id, c] : state.clusters) ids.push_back(id);
  for (ClusterId id : ids) {
    update_cluster_theta(state, id, data, options);
    update_cluster_latents(state, id, data, options);
    update_cluster_sigma(state, id);
  }
  ++state.sweep;
  if (adapt && state.sweep % static_cast<std::uint64_t>(options.tuning.adaptation_window) == 0) {
    for (auto &slots : state.theta_steps) {
      for (auto &s : slots) s.adapt(options.tuning.target_acceptance);
    }
    for (auto &s : state.latent_steps) s.adapt(options.tuning.target_acceptance);
  }
  if (!adapt) {
    // frozen scales: drop window counts so they never feed a later adaptation
    for (auto &slots : state.theta_steps) {
      for (auto &s : slots) s.window_accepted = s.window_proposed = 0;
    }
    for (auto &s : state.latent_steps) s.window_accepted = s.window_proposed = 0;
  }
}

double total_loglik(const SamplerState &state, const Eigen::MatrixXd &data,
                    const SamplerOptions &options) {
  if (options.likelihood_off) return 0.0;
  double total = 0.0;
  for (const auto &[id, c] : state.clusters) {
    for (Eigen::Index i : c.members) total += c.density().point_loglik(data.row(i));
  }
  return total;
}

void RunSchedule::validate() const {
  if (!(n_sweeps > burn_in)) throw ConfigError("schedule: n_sweeps must exceed burn_in");
  if (thin < 1) throw ConfigError("schedule: thin must be >= 1");
}

ChainTrace run(const Dataset &data, const ModelConfig &config, const SamplerOptions &options,
               const RunSchedule &schedule, std::uint64_t seed) {
  schedule.validate();
  options.tuning.validate();
  SamplerState state = init_state(data, config, Rng(seed));

  ChainTrace trace;
  trace.metadata = {{"seed", seed},
                    {"n", data.size()},
                    {"model", config},
                    {"tuning", options.tuning},
                    {"schedule", schedule},
                    {"likelihood_off", options.likelihood_off}};

  std::uint64_t recorded = 0;
  for (std::uint64_t s = 0; s < schedule.n_sweeps; ++s) {
    const bool burning = s < schedule.burn_in;
    sweep(state, data.rows, options, burning);
    if (burning || (s - schedule.burn_in) % schedule.thin != 0) continue;

    SweepRecord rec;
    rec.sweep = state.sweep;
    rec.labels = state.canonical_partition();
    rec.num_clusters = static_cast<int>(state.num_clusters());
    rec.loglik = total_loglik(state, data.rows, options);
    rec.reassign_acceptance = state.last_sweep.reassign.rate();
    rec.theta_acceptance = state.last_sweep.theta.rate();
    rec.latent_acceptance = state.last_sweep.latent.rate();
    trace.records.push_back(std::move(rec));

    if (schedule.snapshot_every > 0 && recorded % schedule.snapshot_every == 0) {
      // canonical order = order of first appearance in the assignment vector
      ParamSnapshot snap;
      snap.sweep = state.sweep;
      std::vector<ClusterId> order;
      for (ClusterId id : state.assignments) {
        if (std::find(order.begin(), order.end(), id) == order.end()) order.push_back(id);
      }
      for (ClusterId id : order) snap.clusters.push_back(state.clusters.at(id).params());
      trace.snapshots.push_back(std::move(snap));
    }
    ++recorded;
  }
  return trace;
}

std::string serialize_state(const SamplerState &state) {
  nlohmann::json j;
  j["config"] = state.config;
  j["assignments"] = state.assignments;
  j["next_id"] = state.next_id;
  j["sweep"] = state.sweep;
  std::ostringstream rng;
  rng << state.rng;
  j["rng"] = rng.str();
  nlohmann::json clusters = nlohmann::json::array();
  for (const auto &[id, c] : state.clusters) {
    clusters.push_back({{"id", id},
                        {"params", c.params()},
                        {"members", c.members},
                        {"latents", matrix_to_json(c.latents)}});
  }
  j["clusters"] = std::move(clusters);
  auto step_json = [](const AdaptiveStep &s) {
    return nlohmann::json{{"log_scale", s.log_scale},
                          {"accepted", s.window_accepted},
                          {"proposed", s.window_proposed},
                          {"batches", s.batches}};
  };
  nlohmann::json theta = nlohmann::json::array();
  for (const auto &slots : state.theta_steps) theta.push_back({step_json(slots[0]), step_json(slots[1])});
  j["theta_steps"] = std::move(theta);
  nlohmann::json latent = nlohmann::json::array();
  for (const auto &s : state.latent_steps) latent.push_back(step_json(s));
  j["latent_steps"] = std::move(latent);
  return j.dump();
}

SamplerState deserialize_state(const std::string &text) {
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    SamplerState state;
    state.config = j.at("config").get<ModelConfig>();
    state.assignments = j.at("assignments").get<std::vector<ClusterId>>();
    state.next_id = j.at("next_id").get<ClusterId>();
    state.sweep = j.at("sweep").get<std::uint64_t>();
    std::istringstream rng(j.at("rng").get<std::string>());
    rng >> state.rng;
    state.slot.assign(state.assignments.size(), 0);
    for (const auto &cj : j.at("clusters")) {
      const ClusterId id = cj.at("id").get<ClusterId>();
      Cluster c(cluster_params_from_json(cj.at("params")));
      c.members = cj.at("members").get<std::vector<Eigen::Index>>();
      c.latents = matrix_from_json(cj.at("latents"));
      for (std::size_t k = 0; k < c.members.size(); ++k) {
        state.slot.at(static_cast<std::size_t>(c.members[k])) = k;
      }
      state.clusters.emplace(id, std::move(c));
    }
    auto step_from = [](const nlohmann::json &s) {
      AdaptiveStep out;
      out.log_scale = s.at("log_scale").get<double>();
      out.window_accepted = s.at("accepted").get<std::uint64_t>();
      out.window_proposed = s.at("proposed").get<std::uint64_t>();
      out.batches = s.at("batches").get<std::uint64_t>();
      return out;
    };
    for (const auto &sj : j.at("theta_steps")) state.theta_steps.push_back({step_from(sj[0]), step_from(sj[1])});
    for (const auto &sj : j.at("latent_steps")) state.latent_steps.push_back(step_from(sj));
    state.check_invariants();
    return state;
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("sampler state: ") + e.what());
  }
}

}  // namespace copmix
