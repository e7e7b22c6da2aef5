#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <utility>

#include "copmix/errors.hpp"
#include "copmix/margins.hpp"
#include "copmix/random.hpp"

namespace copmix {

/// Dimensions of the two co-occurring views.
struct ViewLayout {
  Eigen::Index p = 1;
  Eigen::Index q = 1;

  Eigen::Index dim() const { return p + q; }
  void validate() const {
    if (p < 1 || q < 1) throw ConfigError("view layout: both views need at least one dimension");
  }
  bool operator==(const ViewLayout &) const = default;
};

namespace detail {

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
DenseMatrix<Scalar> checked_symmetric(DenseMatrix<Scalar> m, const char *what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw MatrixError(std::string(what) + ": matrix must be square and nonempty");
  }
  if (!m.allFinite()) throw MatrixError(std::string(what) + ": non-finite entry");
  const Scalar scale = std::max<Scalar>(Scalar(1), m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12) * scale) {
    throw MatrixError(std::string(what) + ": matrix is not symmetric");
  }
  DenseMatrix<Scalar> sym = (m + m.transpose()) / Scalar(2);
  if (Eigen::LLT<DenseMatrix<Scalar>>(sym).info() != Eigen::Success) {
    throw MatrixError(std::string(what) + ": matrix is not positive definite");
  }
  return sym;
}

}  // namespace detail

/// Symmetric positive-definite matrix. Validated once at construction.
template <typename Scalar>
class BasicCovarianceMatrix {
 public:
  using Matrix = detail::DenseMatrix<Scalar>;

  explicit BasicCovarianceMatrix(Matrix m)
      : m_(detail::checked_symmetric<Scalar>(std::move(m), "covariance")) {}

  static BasicCovarianceMatrix identity(Eigen::Index dim) {
    return BasicCovarianceMatrix(Matrix::Identity(dim, dim));
  }

  const Matrix &matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }
  Scalar operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

 private:
  Matrix m_;
};

/// Symmetric positive-definite matrix with unit diagonal.
template <typename Scalar>
class BasicCorrelationMatrix {
 public:
  using Matrix = detail::DenseMatrix<Scalar>;

  explicit BasicCorrelationMatrix(Matrix m)
      : m_(detail::checked_symmetric<Scalar>(std::move(m), "correlation")) {
    for (Eigen::Index i = 0; i < m_.rows(); ++i) {
      if (std::abs(m_(i, i) - Scalar(1)) > Scalar(1e-12)) {
        throw MatrixError("correlation: diagonal entries must equal 1");
      }
      m_(i, i) = Scalar(1);
    }
  }

  static BasicCorrelationMatrix identity(Eigen::Index dim) {
    return BasicCorrelationMatrix(Matrix::Identity(dim, dim));
  }

  const Matrix &matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }
  Scalar operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

 private:
  Matrix m_;
};

using CovarianceMatrix = BasicCovarianceMatrix<double>;
using CorrelationMatrix = BasicCorrelationMatrix<double>;

template <typename Scalar>
BasicCorrelationMatrix<Scalar> cov_to_corr(const BasicCovarianceMatrix<Scalar> &sigma) {
  const auto inv_sd = sigma.matrix().diagonal().cwiseSqrt().cwiseInverse().asDiagonal();
  detail::DenseMatrix<Scalar> corr = inv_sd * sigma.matrix() * inv_sd;
  corr.diagonal().setOnes();
  return BasicCorrelationMatrix<Scalar>(std::move(corr));
}

template <typename Scalar>
BasicCorrelationMatrix<Scalar> block_diag(const BasicCorrelationMatrix<Scalar> &px,
                                          const BasicCorrelationMatrix<Scalar> &py) {
  const Eigen::Index p = px.dim();
  const Eigen::Index q = py.dim();
  detail::DenseMatrix<Scalar> out = detail::DenseMatrix<Scalar>::Zero(p + q, p + q);
  out.topLeftCorner(p, p) = px.matrix();
  out.bottomRightCorner(q, q) = py.matrix();
  return BasicCorrelationMatrix<Scalar>(std::move(out));
}

/// Gaussian copula C_P with the Cholesky factor of P cached, so repeated
/// density evaluations cost one quadratic form each.
template <typename Scalar>
class BasicGaussianCopula {
 public:
  using Matrix = detail::DenseMatrix<Scalar>;

  explicit BasicGaussianCopula(const BasicCorrelationMatrix<Scalar> &corr) {
    Eigen::LLT<Matrix> llt(corr.matrix());
    if (llt.info() != Eigen::Success) {
      // one jitter retry, then give up
      llt.compute(corr.matrix() + Scalar(1e-10) * Matrix::Identity(corr.dim(), corr.dim()));
      if (llt.info() != Eigen::Success) {
        throw MatrixError("gaussian copula: correlation matrix is not positive definite");
      }
    }
    log_det_ = Scalar(2) * llt.matrixLLT().diagonal().array().log().sum();
    precision_minus_identity_ = llt.solve(Matrix::Identity(corr.dim(), corr.dim()));
    precision_minus_identity_.diagonal().array() -= Scalar(1);
  }

  Eigen::Index dim() const { return precision_minus_identity_.rows(); }
  Scalar log_det() const { return log_det_; }
  const Matrix &precision_minus_identity() const { return precision_minus_identity_; }

  /// -1/2 log|P| - 1/2 z'(P^-1 - I) z for a vector of normal scores.
  template <typename Derived>
  Scalar log_density(const Eigen::MatrixBase<Derived> &scores) const {
    return Scalar(-0.5) * log_det_ -
           Scalar(0.5) * scores.dot(precision_minus_identity_ * scores);
  }

  /// Sum of log_density over n score rows whose Gram matrix Z'Z is given.
  template <typename Derived>
  Scalar log_density_sum(const Eigen::MatrixBase<Derived> &gram, Eigen::Index n) const {
    return Scalar(-0.5) * Scalar(n) * log_det_ -
           Scalar(0.5) * precision_minus_identity_.cwiseProduct(gram).sum();
  }

 private:
  Scalar log_det_ = Scalar(0);
  Matrix precision_minus_identity_;
};

using GaussianCopula = BasicGaussianCopula<double>;

template <typename Derived, typename Scalar>
Scalar gaussian_copula_logdensity(const Eigen::MatrixBase<Derived> &scores,
                                  const BasicCorrelationMatrix<Scalar> &corr) {
  if (scores.size() != corr.dim()) throw DomainError("copula density: dimension mismatch");
  if (!scores.allFinite()) throw DomainError("copula density: non-finite normal score");
  return BasicGaussianCopula<Scalar>(corr).log_density(scores);
}

/// Normal scores probit(F_j(x_j)) of one observation.
template <typename Derived>
Eigen::VectorXd normal_scores(const Eigen::MatrixBase<Derived> &x,
                              std::span<const MarginParams> margins) {
  Eigen::VectorXd z(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) z(j) = normal_score(margins[j], x(j));
  return z;
}

/// Meta-Gaussian log-density with an already factored copula.
template <typename Derived>
double meta_gaussian_logpdf(const Eigen::MatrixBase<Derived> &x,
                            std::span<const MarginParams> margins, const GaussianCopula &copula) {
  if (x.size() != copula.dim() || static_cast<Eigen::Index>(margins.size()) != x.size()) {
    throw DomainError("meta-Gaussian density: dimension mismatch");
  }
  double margin_sum = 0.0;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    margin_sum += margin_logpdf(margins[j], x(j));
    if (margin_sum == -std::numeric_limits<double>::infinity()) return margin_sum;
  }
  return copula.log_density(normal_scores(x, margins)) + margin_sum;
}

template <typename Derived>
double meta_gaussian_logpdf(const Eigen::MatrixBase<Derived> &x,
                            std::span<const MarginParams> margins, const CorrelationMatrix &corr) {
  return meta_gaussian_logpdf(x, margins, GaussianCopula(corr));
}

/// n draws from N(0, P), one per row.
Eigen::MatrixXd sample_gaussian_scores(Eigen::Index n, const CorrelationMatrix &corr, Rng &rng);

/// n draws from the meta-Gaussian distribution, one per row.
Eigen::MatrixXd sample_meta_gaussian(Eigen::Index n, std::span<const MarginParams> margins,
                                     const CorrelationMatrix &corr, Rng &rng);

/// Wishart draw via the Bartlett decomposition.
Eigen::MatrixXd sample_wishart(const CovarianceMatrix &scale, double dof, Rng &rng);

/// IW(scale, dof): inverse of a Wishart(scale^-1, dof) draw. Requires dof > dim - 1.
CovarianceMatrix sample_inv_wishart(const CovarianceMatrix &scale, double dof, Rng &rng);

/// Marginally uniform correlation prior: normalised IW(I_d, d + 1) draw.
CorrelationMatrix sample_corr_prior(Eigen::Index dim, Rng &rng);

/// Sample correlation of the columns of a latent matrix, with its 2-norm
/// condition number. Matrices with condition number above
/// kNearSingularCondition are flagged; they may not even be positive definite.
struct SampleCorrelation {
  Eigen::MatrixXd matrix;
  double condition_number = 1.0;
  bool near_singular = false;

  /// Throws MatrixError when flagged.
  CorrelationMatrix checked() const;
};

inline constexpr double kNearSingularCondition = 1e8;

/// Throws DegenerateDataError for fewer than two rows or a constant column.
SampleCorrelation corr_of_latents(const Eigen::Ref<const Eigen::MatrixXd> &latents);

}  // namespace copmix
