#pragma once

// Independent reference computations used only by the tests.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

/// Multivariate normal log-density via an LU factorisation of the full
/// covariance, carried out in long double so the reference stays accurate
/// when the covariance is badly conditioned.
inline double mvn_logpdf(const Eigen::VectorXd &x, const Eigen::VectorXd &mean, const Eigen::MatrixXd &cov) {
  using Matrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  Eigen::FullPivLU<Matrix> lu(cov.cast<long double>());
  const Vector r = (x - mean).cast<long double>();
  const long double quad = r.dot(lu.solve(r));
  const long double d = static_cast<long double>(x.size());
  return static_cast<double>(-0.5L * d * std::log(2.0L * std::numbers::pi_v<long double>) -
                             0.5L * std::log(lu.determinant()) - 0.5L * quad);
}

/// Two-sided KS statistic of a sample against a continuous CDF.
inline double ks_statistic(std::vector<double> sample, const std::function<double(double)> &cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

/// Every set partition of {0..n-1} as restricted growth strings.
inline std::vector<std::vector<int>> set_partitions(int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> a(n, 0);
  std::function<void(int, int)> rec = [&](int i, int max_label) {
    if (i == n) {
      out.push_back(a);
      return;
    }
    for (int c = 0; c <= max_label + 1; ++c) {
      a[i] = c;
      rec(i + 1, std::max(max_label, c));
    }
  };
  if (n > 0) {
    a[0] = 0;
    rec(1, 0);
  }
  return out;
}

/// ARI from an explicit enumeration of all unordered pairs (Hubert-Arabie form).
inline double ari_by_pairs(const std::vector<int> &a, const std::vector<int> &b) {
  const std::size_t n = a.size();
  double both = 0, only_a = 0, only_b = 0, total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool sa = a[i] == a[j];
      const bool sb = b[i] == b[j];
      total += 1;
      if (sa && sb) both += 1;
      if (sa) only_a += 1;
      if (sb) only_b += 1;
    }
  }
  const double expected = only_a * only_b / total;
  const double maximum = 0.5 * (only_a + only_b);
  if (maximum == expected) return (both == only_a && both == only_b) ? 1.0 : 0.0;
  return (both - expected) / (maximum - expected);
}

}  // namespace oracle
