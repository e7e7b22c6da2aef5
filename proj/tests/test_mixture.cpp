#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "copmix/errors.hpp"
#include "copmix/mixture.hpp"
#include "oracles.hpp"

using namespace copmix;

namespace {

ModelConfig mixed_model(Eigen::Index p, Eigen::Index q) {
  ModelConfig c;
  c.layout = {p, q};
  for (Eigen::Index j = 0; j < p; ++j) c.margins.push_back(MarginSpec::with_default_prior(MarginFamily::normal));
  for (Eigen::Index j = 0; j < q; ++j) {
    c.margins.push_back(MarginSpec::with_default_prior(j % 2 == 0 ? MarginFamily::beta : MarginFamily::exponential));
  }
  return c;
}

}  // namespace

TEST_CASE("model config validation") {
  ModelConfig c = mixed_model(2, 2);
  CHECK_NOTHROW(c.validate());
  c.lambda = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = mixed_model(2, 2);
  c.margins.pop_back();
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("canonical labels") {
  const std::vector<ClusterId> ids{42, 7, 42, 9, 7};
  CHECK(canonical_labels(ids) == std::vector<int>{0, 1, 0, 2, 1});
  const std::vector<int> labels{3, 3, 1, 0};
  CHECK(canonical_labels(labels) == std::vector<int>{0, 0, 1, 2});
  CHECK(cluster_sizes(std::vector<int>{5, 2, 5, 5}) == std::vector<std::size_t>{3, 1});
}

TEST_CASE("CRP prior examples") {
  CHECK(crp_log_prior(std::vector<int>{0}, 1.0) == doctest::Approx(0.0));
  CHECK(crp_log_prior(std::vector<int>{0, 0}, 1.0) == doctest::Approx(std::log(0.5)));
  CHECK(crp_log_prior(std::vector<int>{0, 1}, 1.0) == doctest::Approx(std::log(0.5)));
  for (double lambda : {0.3, 1.0, 4.0}) {
    for (int n = 1; n <= 6; ++n) {
      double total = 0.0;
      for (const auto &part : oracle::set_partitions(n)) total += std::exp(crp_log_prior(part, lambda));
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  CHECK(oracle::set_partitions(4).size() == 15);
}

TEST_CASE("CRP prior is exchangeable") {
  std::vector<int> labels{0, 0, 1, 2, 1, 0, 3};
  const double base = crp_log_prior(labels, 1.7);
  std::sort(labels.begin(), labels.end());
  do {
    CHECK(crp_log_prior(labels, 1.7) == doctest::Approx(base).epsilon(1e-13));
  } while (std::next_permutation(labels.begin(), labels.end()));
}

TEST_CASE("expected cluster count under the CRP") {
  // Exact: sum over all partitions of K * CRP probability, versus sum lambda / (lambda + i).
  for (int n : {3, 5, 7}) {
    double ek = 0.0;
    for (const auto &part : oracle::set_partitions(n)) {
      const int k = *std::max_element(part.begin(), part.end()) + 1;
      ek += k * std::exp(crp_log_prior(part, 1.0));
    }
    double harmonic = 0.0;
    for (int i = 0; i < n; ++i) harmonic += 1.0 / (1.0 + i);
    CHECK(ek == doctest::Approx(harmonic).epsilon(1e-12));
  }
  // Monte Carlo seating for n = 3 against 11/6.
  Rng rng(43);
  const int draws = 100000;
  double sum = 0.0;
  for (int d = 0; d < draws; ++d) {
    std::vector<int> tables;
    for (int i = 0; i < 3; ++i) {
      const double u = uniform01(rng) * (i + 1.0);
      double acc = 0.0;
      bool seated = false;
      for (int &t : tables) {
        acc += t;
        if (u < acc) {
          ++t;
          seated = true;
          break;
        }
      }
      if (!seated) tables.push_back(1);
    }
    sum += static_cast<double>(tables.size());
  }
  CHECK(sum / draws == doctest::Approx(11.0 / 6.0).epsilon(0.01));
}

TEST_CASE("draws from the base measure") {
  Rng rng(47);
  const ModelConfig c1 = mixed_model(1, 1);
  const auto one = draw_from_base(c1, rng);
  CHECK(one.correlation().matrix().isIdentity(0.0));

  const ModelConfig c = mixed_model(3, 2);
  std::vector<double> r01;
  for (int i = 0; i < 10000; ++i) {
    const auto params = draw_from_base(c, rng);
    REQUIRE(params.theta.size() == 5);
    CHECK(params.layout() == c.layout);
    CHECK_NOTHROW(params.correlation());
    r01.push_back(cov_to_corr(params.sigma_x)(0, 1));
  }
  const auto uniform = [](double v) { return std::clamp((v + 1.0) / 2.0, 0.0, 1.0); };
  CHECK(oracle::ks_statistic(r01, uniform) < 0.02);
}

TEST_CASE("point likelihood decomposes over views") {
  Rng rng(53);
  const ModelConfig c = mixed_model(3, 2);
  for (int rep = 0; rep < 200; ++rep) {
    const auto params = draw_from_base(c, rng);
    const ClusterDensity density(params);
    Eigen::VectorXd row(5);
    row << standard_normal(rng), standard_normal(rng), standard_normal(rng), uniform01(rng),
        -std::log(uniform01(rng));
    const double joint = point_loglik(row, params);
    const double vx = meta_gaussian_logpdf(row.head(3), std::span(params.theta).subspan(0, 3), cov_to_corr(params.sigma_x));
    const double vy = meta_gaussian_logpdf(row.tail(2), std::span(params.theta).subspan(3, 2), cov_to_corr(params.sigma_y));
    CHECK(std::abs(joint - (vx + vy)) <= 1e-12 * std::max(1.0, std::abs(joint)));
    CHECK(density.point_loglik(row) == joint);
  }
  auto params = draw_from_base(c, rng);
  Eigen::VectorXd off(5);
  off << 0.0, 0.0, 0.0, 1.5, 1.0;
  CHECK(point_loglik(off, params) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("Gaussian margins give the multivariate normal density") {
  Rng rng(59);
  const ModelConfig c = gaussian_model({2, 2}, 1.0, {2.0, 1.0}, {2.0, 1.0});
  for (int rep = 0; rep < 100; ++rep) {
    const auto params = draw_from_base(c, rng);
    Eigen::VectorXd mean(4), sd(4);
    for (int j = 0; j < 4; ++j) {
      const auto &n = std::get<NormalParams>(params.theta[j]);
      mean(j) = n.mean;
      sd(j) = std::sqrt(n.variance);
    }
    const Eigen::MatrixXd cov = sd.asDiagonal() * params.correlation().matrix() * sd.asDiagonal();
    const Eigen::VectorXd x = mean + Eigen::VectorXd::NullaryExpr(4, [&] { return standard_normal(rng); });
    CHECK(point_loglik(x, params) == doctest::Approx(oracle::mvn_logpdf(x, mean, cov)).epsilon(1e-11));
  }
}

TEST_CASE("cluster likelihood") {
  Rng rng(61);
  const ModelConfig c = mixed_model(1, 1);
  const auto params = draw_from_base(c, rng);
  Eigen::MatrixXd data(4, 2);
  data << 0.1, 0.2, -0.5, 0.9, 1.3, 0.4, 0.0, 0.5;
  CHECK(cluster_loglik(data, std::vector<Eigen::Index>{}, params) == 0.0);
  CHECK(cluster_loglik(data, std::vector<Eigen::Index>{2}, params) ==
        doctest::Approx(point_loglik(data.row(2).transpose(), params)));
  const double a = cluster_loglik(data, std::vector<Eigen::Index>{0, 3}, params);
  const double b = cluster_loglik(data, std::vector<Eigen::Index>{1, 2}, params);
  CHECK(cluster_loglik(data, std::vector<Eigen::Index>{0, 1, 2, 3}, params) == doctest::Approx(a + b));
}
