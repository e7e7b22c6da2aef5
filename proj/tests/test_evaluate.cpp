#include <doctest.h>

#include <sstream>

#include "copmix/errors.hpp"
#include "copmix/evaluate.hpp"
#include "copmix/trace.hpp"
#include "oracles.hpp"

using namespace copmix;

namespace {

ChainTrace trace_of(const std::vector<std::vector<int>> &partitions) {
  ChainTrace t;
  std::uint64_t sweep = 1;
  for (const auto &p : partitions) {
    SweepRecord r;
    r.sweep = sweep++;
    r.labels = p;
    r.num_clusters = *std::max_element(p.begin(), p.end()) + 1;
    t.records.push_back(r);
  }
  return t;
}

}  // namespace

TEST_CASE("ARI examples") {
  const std::vector<int> a{1, 1, 2, 2}, b{1, 1, 2, 3};
  CHECK(adjusted_rand_index(a, a) == 1.0);
  CHECK(adjusted_rand_index(a, std::vector<int>{7, 7, 3, 3}) == 1.0);
  CHECK(adjusted_rand_index(a, b) == doctest::Approx(4.0 / 7.0).epsilon(1e-15));
  CHECK(adjusted_rand_index(std::vector<int>{1, 1, 1, 1}, b) == 0.0);
  CHECK(adjusted_rand_index(std::vector<int>{0, 0, 0}, std::vector<int>{0, 1, 2}) == 0.0);
  CHECK_THROWS_AS(adjusted_rand_index(a, std::vector<int>{1, 2}), DomainError);
  CHECK_THROWS_AS(adjusted_rand_index(std::vector<int>{1}, std::vector<int>{1}), DomainError);
}

TEST_CASE("ARI matches pair enumeration for every partition pair of five points") {
  const auto parts = oracle::set_partitions(5);
  REQUIRE(parts.size() == 52);
  int mismatches = 0, symmetric_failures = 0, bound_failures = 0;
  for (const auto &a : parts) {
    for (const auto &b : parts) {
      const double ari = adjusted_rand_index(a, b);
      if (std::abs(ari - oracle::ari_by_pairs(a, b)) > 1e-12) ++mismatches;
      if (ari != adjusted_rand_index(b, a)) ++symmetric_failures;
      if (ari > 1.0 || (ari == 1.0) != (a == b)) ++bound_failures;
    }
  }
  CHECK(mismatches == 0);
  CHECK(symmetric_failures == 0);
  CHECK(bound_failures == 0);
}

TEST_CASE("ARI is invariant under relabeling") {
  const std::vector<int> a{0, 1, 1, 2, 0, 2, 2, 1};
  const std::vector<int> b{0, 0, 1, 1, 2, 2, 3, 3};
  const std::vector<int> renamed{5, 9, 9, -2, 5, -2, -2, 9};
  CHECK(adjusted_rand_index(renamed, b) == adjusted_rand_index(a, b));
}

TEST_CASE("ARI uses exact counts for large n") {
  std::vector<int> a(200000), b(200000);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = static_cast<int>(i % 2);
    b[i] = static_cast<int>(i % 2 == 0 ? 0 : (i % 4 == 1 ? 1 : 2));
  }
  // exact rational value computed from the contingency table {100000 | 50000, 50000}
  CHECK(adjusted_rand_index(a, b) == doctest::Approx(0.7499984374824217).epsilon(1e-14));
  CHECK(adjusted_rand_index(a, a) == 1.0);
}

TEST_CASE("posterior similarity") {
  const auto t = trace_of({{0, 0, 1}, {0, 1, 1}, {0, 0, 0}, {0, 0, 1}});
  const Eigen::MatrixXd s = posterior_similarity(t);
  CHECK(s.diagonal().isOnes(0.0));
  CHECK(s(0, 1) == doctest::Approx(0.75));
  CHECK(s(1, 2) == doctest::Approx(0.5));
  CHECK(s(0, 2) == doctest::Approx(0.25));
  CHECK(s == s.transpose());
  CHECK(posterior_similarity(trace_of({{0, 1, 0}})) ==
        (Eigen::Matrix3d() << 1, 0, 1, 0, 1, 0, 1, 0, 1).finished());
  CHECK_THROWS_AS(posterior_similarity(ChainTrace{}), DomainError);
}

TEST_CASE("Binder point estimate") {
  // Toy trace: {01|2} three times, {0|12} once. Similarity: s01 = 3/4,
  // s12 = 1/4, s02 = 0. Binder loss is sum over pairs i<j of |1[c_i=c_j] - s_ij|:
  // {01|2}: 1/4 + 1/4 + 0 = 1/2; {0|12}: 3/4 + 3/4 + 0 = 3/2.
  const auto t = trace_of({{0, 1, 1}, {0, 0, 1}, {0, 0, 1}, {0, 0, 1}});
  const Eigen::MatrixXd s = posterior_similarity(t);
  CHECK(binder_loss(std::vector<int>{0, 0, 1}, s) == doctest::Approx(0.5));
  CHECK(binder_loss(std::vector<int>{0, 1, 1}, s) == doctest::Approx(1.5));
  const auto est = map_partition(t);
  CHECK(est.labels == std::vector<int>{0, 0, 1});
  CHECK(est.record_index == 1);
  CHECK(est.loss == doctest::Approx(0.5));
  for (const auto &r : t.records) CHECK(est.loss <= binder_loss(r.labels, s) + 1e-15);

  CHECK(map_partition(trace_of({{0, 1, 0}})).labels == std::vector<int>{0, 1, 0});
  // ties go to the earliest record
  const auto tie = map_partition(trace_of({{0, 1}, {0, 0}}));
  CHECK(tie.record_index == 0);
}

TEST_CASE("K posterior") {
  const auto t = trace_of({{0, 1, 0}, {0, 1, 0}, {0, 1, 1}, {0, 1, 2}});
  const auto k = k_posterior(t);
  CHECK(k.mode == 2);
  CHECK(k.frequency.at(2) == doctest::Approx(0.75));
  CHECK(k.frequency.at(3) == doctest::Approx(0.25));
  CHECK(k.mean == doctest::Approx(2.25));
  double total = 0.0;
  for (const auto &[kk, f] : k.frequency) total += f;
  CHECK(total == doctest::Approx(1.0));
  const auto constant = k_posterior(trace_of({{0, 0}, {0, 0}}));
  CHECK(constant.frequency.size() == 1);
  CHECK(constant.mode == 1);
}

TEST_CASE("medians and the sign test") {
  CHECK(lower_median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(lower_median({4.0, 1.0, 3.0, 2.0}) == 2.0);
  CHECK_THROWS(lower_median({}));
  CHECK(sign_test_p_value(5, 0) == doctest::Approx(1.0 / 32.0));
  CHECK(sign_test_p_value(0, 3) == doctest::Approx(1.0));
  // P(X >= 15) for X ~ Bin(20, 1/2) = 21700 / 2^20
  CHECK(sign_test_p_value(15, 5) == doctest::Approx(21700.0 / 1048576.0).epsilon(1e-12));
}

TEST_CASE("trace round trip through JSON Lines") {
  ChainTrace t = trace_of({{0, 0, 1}, {0, 1, 2}});
  t.records[0].loglik = -12.345678901234567;
  t.records[1].reassign_acceptance = 0.125;
  t.metadata["seed"] = 42;
  ClusterParams p;
  p.theta = {NormalParams{0.5, 2.0}, BetaParams{3.0, 1.0}};
  Eigen::MatrixXd s(1, 1);
  s << 2.5;
  p.sigma_x = CovarianceMatrix(s);
  t.snapshots.push_back({1, {p}});
  std::stringstream buf;
  write_trace(t, buf);
  const ChainTrace back = read_trace(buf);
  REQUIRE(back.records.size() == 2);
  CHECK(back.records[0].labels == t.records[0].labels);
  CHECK(back.records[0].loglik == t.records[0].loglik);
  CHECK(back.records[1].reassign_acceptance == 0.125);
  CHECK(back.metadata["seed"] == 42);
  REQUIRE(back.snapshots.size() == 1);
  CHECK(std::get<BetaParams>(back.snapshots[0].clusters[0].theta[1]).alpha == 3.0);
  CHECK(back.snapshots[0].clusters[0].sigma_x(0, 0) == 2.5);
  std::stringstream again;
  write_trace(back, again);
  std::stringstream first;
  write_trace(t, first);
  CHECK(again.str() == first.str());

  std::istringstream broken("{\"type\":\"header\",\"metadata\":{}}\nnot json\n");
  try {
    read_trace(broken);
    FAIL("expected a parse error");
  } catch (const ParseError &e) {
    CHECK(e.row() == 2);
  }
}
