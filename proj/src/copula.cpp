#include "copmix/copula.hpp"

#include <Eigen/Eigenvalues>

#include "copmix/special_functions.hpp"

namespace copmix {

Eigen::MatrixXd sample_gaussian_scores(Eigen::Index n, const CorrelationMatrix &corr, Rng &rng) {
  const Eigen::Index d = corr.dim();
  Eigen::MatrixXd white(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) white(i, j) = standard_normal(rng);
  }
  const Eigen::MatrixXd lower = Eigen::LLT<Eigen::MatrixXd>(corr.matrix()).matrixL();
  return white * lower.transpose();
}

Eigen::MatrixXd sample_meta_gaussian(Eigen::Index n, std::span<const MarginParams> margins,
                                     const CorrelationMatrix &corr, Rng &rng) {
  if (static_cast<Eigen::Index>(margins.size()) != corr.dim()) {
    throw DomainError("sample_meta_gaussian: margin count does not match correlation dimension");
  }
  Eigen::MatrixXd out = sample_gaussian_scores(n, corr, rng);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
      const double u = std::clamp(phi_cdf(out(i, j)), kCdfClamp, 1.0 - kCdfClamp);
      out(i, j) = margin_quantile(margins[j], u);
    }
  }
  return out;
}

Eigen::MatrixXd sample_wishart(const CovarianceMatrix &scale, double dof, Rng &rng) {
  const Eigen::Index d = scale.dim();
  if (!(dof > static_cast<double>(d) - 1.0)) {
    throw DomainError("wishart: degrees of freedom must exceed dim - 1");
  }
  Eigen::MatrixXd bartlett = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    bartlett(i, i) = std::sqrt(2.0 * gamma_shape_rate(rng, 0.5 * (dof - static_cast<double>(i)), 1.0));
    for (Eigen::Index j = 0; j < i; ++j) bartlett(i, j) = standard_normal(rng);
  }
  const Eigen::MatrixXd lower = Eigen::LLT<Eigen::MatrixXd>(scale.matrix()).matrixL();
  const Eigen::MatrixXd factor = lower * bartlett;
  Eigen::MatrixXd w = factor * factor.transpose();
  return (w + w.transpose()) / 2.0;
}

CovarianceMatrix sample_inv_wishart(const CovarianceMatrix &scale, double dof, Rng &rng) {
  const Eigen::Index d = scale.dim();
  if (!(dof > static_cast<double>(d) - 1.0)) {
    throw DomainError("inverse wishart: degrees of freedom must exceed dim - 1");
  }
  // Sigma^-1 = B B' with B = chol(scale^-1) * A, so Sigma = B^-T B^-1.
  const Eigen::MatrixXd scale_inv = Eigen::LLT<Eigen::MatrixXd>(scale.matrix()).solve(
      Eigen::MatrixXd::Identity(d, d));
  const Eigen::MatrixXd lower =
      Eigen::LLT<Eigen::MatrixXd>((scale_inv + scale_inv.transpose()) / 2.0).matrixL();
  Eigen::MatrixXd bartlett = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    bartlett(i, i) = std::sqrt(2.0 * gamma_shape_rate(rng, 0.5 * (dof - static_cast<double>(i)), 1.0));
    for (Eigen::Index j = 0; j < i; ++j) bartlett(i, j) = standard_normal(rng);
  }
  const Eigen::MatrixXd factor = lower * bartlett;
  const Eigen::MatrixXd factor_inv =
      factor.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(d, d));
  Eigen::MatrixXd sigma = factor_inv.transpose() * factor_inv;
  return CovarianceMatrix((sigma + sigma.transpose()) / 2.0);
}

CorrelationMatrix sample_corr_prior(Eigen::Index dim, Rng &rng) {
  if (dim < 1) throw DomainError("correlation prior: dimension must be positive");
  return cov_to_corr(
      sample_inv_wishart(CovarianceMatrix::identity(dim), static_cast<double>(dim + 1), rng));
}

CorrelationMatrix SampleCorrelation::checked() const {
  if (near_singular) throw MatrixError("sample correlation is near-singular");
  return CorrelationMatrix(matrix);
}

SampleCorrelation corr_of_latents(const Eigen::Ref<const Eigen::MatrixXd> &latents) {
  const Eigen::Index n = latents.rows();
  const Eigen::Index d = latents.cols();
  if (n < 2) throw DegenerateDataError("sample correlation needs at least two rows");
  const Eigen::MatrixXd centered = latents.rowwise() - latents.colwise().mean();
  Eigen::MatrixXd cov = centered.transpose() * centered;
  const Eigen::VectorXd var = cov.diagonal();
  for (Eigen::Index j = 0; j < d; ++j) {
    if (!(var(j) > 0.0) || !std::isfinite(var(j))) {
      throw DegenerateDataError("sample correlation: column " + std::to_string(j) +
                                " has zero variance");
    }
  }
  const Eigen::VectorXd inv_sd = var.cwiseSqrt().cwiseInverse();
  SampleCorrelation out;
  out.matrix = inv_sd.asDiagonal() * cov * inv_sd.asDiagonal();
  out.matrix = ((out.matrix + out.matrix.transpose()) / 2.0).cwiseMax(-1.0).cwiseMin(1.0);
  out.matrix.diagonal().setOnes();
  if (d == 1) return out;
  Eigen::VectorXd eig;
  if (d == 2) {
    const double r = std::abs(out.matrix(0, 1));
    eig = Eigen::Vector2d(1.0 - r, 1.0 + r);
  } else {
    eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(out.matrix, Eigen::EigenvaluesOnly)
              .eigenvalues();
  }
  const double lo = eig.minCoeff();
  out.condition_number =
      lo > 0.0 ? eig.maxCoeff() / lo : std::numeric_limits<double>::infinity();
  out.near_singular = !(out.condition_number <= kNearSingularCondition);
  return out;
}

}  // namespace copmix
