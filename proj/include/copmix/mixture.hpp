#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

#include "copmix/copula.hpp"
#include "copmix/margins.hpp"

namespace copmix {

/// Layout, one margin spec per dimension (view X first) and the DP
/// concentration.
struct ModelConfig {
  ViewLayout layout;
  std::vector<MarginSpec> margins;
  double lambda = 1.0;

  void validate() const;
};

/// Parameters of one mixture component. The copula correlation is derived:
/// P = block_diag(corr(sigma_x), corr(sigma_y)).
struct ClusterParams {
  std::vector<MarginParams> theta;
  CovarianceMatrix sigma_x = CovarianceMatrix::identity(1);
  CovarianceMatrix sigma_y = CovarianceMatrix::identity(1);

  ViewLayout layout() const { return {sigma_x.dim(), sigma_y.dim()}; }
  CorrelationMatrix correlation() const {
    return block_diag(cov_to_corr(sigma_x), cov_to_corr(sigma_y));
  }
};

/// Opaque, stable cluster handle. Never reused within a chain.
using ClusterId = std::uint64_t;

/// Relabels cluster handles to 0, 1, 2, ... in order of first appearance.
std::vector<int> canonical_labels(std::span<const ClusterId> assignments);
std::vector<int> canonical_labels(std::span<const int> labels);

/// Cluster sizes of a labelling, in canonical label order.
std::vector<std::size_t> cluster_sizes(std::span<const int> labels);

/// log CRP(labels | lambda) = K log(lambda) + sum_c log (n_c - 1)! + log G(lambda) - log G(lambda + n).
double crp_log_prior(std::span<const int> labels, double lambda);

/// Draw (theta, sigma_x, sigma_y) from G0: margins from their priors,
/// sigma_x ~ IW(I_p, p + 1), sigma_y ~ IW(I_q, q + 1).
ClusterParams draw_from_base(const ModelConfig &config, Rng &rng);

/// Cluster parameters with both view copulas factored, for repeated
/// evaluations of the per-point likelihood.
class ClusterDensity {
 public:
  explicit ClusterDensity(const ClusterParams &params);

  const ClusterParams &params() const { return params_; }
  const GaussianCopula &copula_x() const { return copula_x_; }
  const GaussianCopula &copula_y() const { return copula_y_; }

  /// View X (view == 0) or view Y (view == 1) meta-Gaussian log-density of a row.
  template <typename Derived>
  double view_loglik(const Eigen::MatrixBase<Derived> &row, int view) const {
    const auto p = params_.sigma_x.dim();
    const auto q = params_.sigma_y.dim();
    const std::span<const MarginParams> theta(params_.theta);
    if (view == 0) return meta_gaussian_logpdf(row.head(p), theta.subspan(0, p), copula_x_);
    return meta_gaussian_logpdf(row.tail(q), theta.subspan(p, q), copula_y_);
  }

  template <typename Derived>
  double point_loglik(const Eigen::MatrixBase<Derived> &row) const {
    if (row.size() != static_cast<Eigen::Index>(params_.theta.size())) {
      throw DomainError("point_loglik: row length does not match the cluster dimension");
    }
    const double lx = view_loglik(row, 0);
    if (lx == -std::numeric_limits<double>::infinity()) return lx;
    return lx + view_loglik(row, 1);
  }

 private:
  ClusterParams params_;
  GaussianCopula copula_x_;
  GaussianCopula copula_y_;
};

template <typename Derived>
double point_loglik(const Eigen::MatrixBase<Derived> &row, const ClusterParams &params) {
  return ClusterDensity(params).point_loglik(row);
}

/// Sum of point log-likelihoods over the selected rows; 0 for an empty selection.
double cluster_loglik(const Eigen::MatrixXd &data, std::span<const Eigen::Index> rows,
                      const ClusterParams &params);

struct InverseGammaHyper {
  double shape = 2.0;
  double scale = 1.0;
};

/// Configuration for all-normal margins (the Gaussian-mixture baseline) with
/// the given inverse-gamma variance priors per view.
ModelConfig gaussian_model(ViewLayout layout, double lambda, InverseGammaHyper variance_x,
                           InverseGammaHyper variance_y);

}  // namespace copmix
