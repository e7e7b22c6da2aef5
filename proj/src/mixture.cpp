#include "copmix/mixture.hpp"

#include <cmath>
#include <unordered_map>

namespace copmix {

void ModelConfig::validate() const {
  layout.validate();
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("model: concentration lambda must be positive");
  }
  if (static_cast<Eigen::Index>(margins.size()) != layout.dim()) {
    throw ConfigError("model: expected " + std::to_string(layout.dim()) + " margin specs, got " +
                      std::to_string(margins.size()));
  }
  for (const auto &m : margins) {
    try {
      copmix::validate(m);
    } catch (const DomainError &e) {
      throw ConfigError(std::string("model: ") + e.what());
    }
  }
}

std::vector<int> canonical_labels(std::span<const ClusterId> assignments) {
  std::unordered_map<ClusterId, int> seen;
  std::vector<int> out;
  out.reserve(assignments.size());
  for (ClusterId id : assignments) {
    auto [it, inserted] = seen.try_emplace(id, static_cast<int>(seen.size()));
    out.push_back(it->second);
  }
  return out;
}

std::vector<int> canonical_labels(std::span<const int> labels) {
  std::unordered_map<int, int> seen;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int id : labels) {
    auto [it, inserted] = seen.try_emplace(id, static_cast<int>(seen.size()));
    out.push_back(it->second);
  }
  return out;
}

std::vector<std::size_t> cluster_sizes(std::span<const int> labels) {
  std::vector<std::size_t> sizes;
  for (int c : canonical_labels(labels)) {
    if (static_cast<std::size_t>(c) >= sizes.size()) sizes.resize(c + 1, 0);
    ++sizes[c];
  }
  return sizes;
}

double crp_log_prior(std::span<const int> labels, double lambda) {
  if (!(lambda > 0.0)) throw DomainError("crp_log_prior: lambda must be positive");
  const auto sizes = cluster_sizes(labels);
  const double n = static_cast<double>(labels.size());
  double out = static_cast<double>(sizes.size()) * std::log(lambda) + std::lgamma(lambda) -
               std::lgamma(lambda + n);
  for (std::size_t s : sizes) out += std::lgamma(static_cast<double>(s));
  return out;
}

ClusterParams draw_from_base(const ModelConfig &config, Rng &rng) {
  ClusterParams out;
  out.theta.reserve(config.margins.size());
  for (const auto &spec : config.margins) out.theta.push_back(prior_sample(spec.hyper, rng));
  const auto p = config.layout.p;
  const auto q = config.layout.q;
  out.sigma_x = sample_inv_wishart(CovarianceMatrix::identity(p), static_cast<double>(p + 1), rng);
  out.sigma_y = sample_inv_wishart(CovarianceMatrix::identity(q), static_cast<double>(q + 1), rng);
  return out;
}

ClusterDensity::ClusterDensity(const ClusterParams &params)
    : params_(params),
      copula_x_(cov_to_corr(params.sigma_x)),
      copula_y_(cov_to_corr(params.sigma_y)) {
  if (static_cast<Eigen::Index>(params.theta.size()) != params.sigma_x.dim() + params.sigma_y.dim()) {
    throw DomainError("cluster params: margin count does not match view dimensions");
  }
}

double cluster_loglik(const Eigen::MatrixXd &data, std::span<const Eigen::Index> rows,
                      const ClusterParams &params) {
  if (rows.empty()) return 0.0;
  const ClusterDensity density(params);
  double total = 0.0;
  for (Eigen::Index i : rows) total += density.point_loglik(data.row(i));
  return total;
}

ModelConfig gaussian_model(ViewLayout layout, double lambda, InverseGammaHyper variance_x,
                           InverseGammaHyper variance_y) {
  ModelConfig config;
  config.layout = layout;
  config.lambda = lambda;
  for (Eigen::Index j = 0; j < layout.dim(); ++j) {
    const InverseGammaHyper &v = j < layout.p ? variance_x : variance_y;
    NormalInverseGammaPrior prior;
    prior.variance_shape = v.shape;
    prior.variance_scale = v.scale;
    config.margins.push_back({MarginFamily::normal, prior});
  }
  return config;
}

}  // namespace copmix
