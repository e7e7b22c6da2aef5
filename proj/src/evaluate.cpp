#include "copmix/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "copmix/errors.hpp"
#include "copmix/mixture.hpp"

namespace copmix {

namespace {

using Int = __int128;

Int pairs(Int m) { return m * (m - 1) / 2; }

}  // namespace

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw DomainError("adjusted_rand_index: labelings differ in length");
  if (a.size() < 2) throw DomainError("adjusted_rand_index: need at least two observations");
  const auto ca = canonical_labels(a);
  const auto cb = canonical_labels(b);
  std::map<std::pair<int, int>, Int> table;
  std::map<int, Int> rows;
  std::map<int, Int> cols;
  for (std::size_t i = 0; i < ca.size(); ++i) {
    ++table[{ca[i], cb[i]}];
    ++rows[ca[i]];
    ++cols[cb[i]];
  }
  Int index = 0;
  for (const auto &[cell, count] : table) index += pairs(count);
  Int sum_a = 0;
  for (const auto &[k, count] : rows) sum_a += pairs(count);
  Int sum_b = 0;
  for (const auto &[k, count] : cols) sum_b += pairs(count);
  const Int total = pairs(static_cast<Int>(a.size()));
  // ARI = (index - sa sb / N) / ((sa + sb) / 2 - sa sb / N), scaled by 2N.
  const Int numerator = 2 * (index * total - sum_a * sum_b);
  const Int denominator = (sum_a + sum_b) * total - 2 * sum_a * sum_b;
  if (denominator == 0) return ca == cb ? 1.0 : 0.0;
  return static_cast<double>(static_cast<long double>(numerator) / static_cast<long double>(denominator));
}

Eigen::MatrixXd posterior_similarity(const ChainTrace &trace) {
  if (trace.empty()) throw DomainError("posterior_similarity: trace has no records");
  const auto n = static_cast<Eigen::Index>(trace.records.front().labels.size());
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(n, n);
  for (const auto &rec : trace.records) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const int li = rec.labels[static_cast<std::size_t>(i)];
      for (Eigen::Index j = i + 1; j < n; ++j) {
        if (li == rec.labels[static_cast<std::size_t>(j)]) counts(i, j) += 1.0;
      }
    }
  }
  counts /= static_cast<double>(trace.records.size());
  Eigen::MatrixXd sim = counts + counts.transpose();
  sim.diagonal().setOnes();
  return sim;
}

double binder_loss(std::span<const int> labels, const Eigen::MatrixXd &similarity) {
  const auto n = static_cast<Eigen::Index>(labels.size());
  if (similarity.rows() != n || similarity.cols() != n) {
    throw DomainError("binder_loss: similarity matrix does not match the labeling");
  }
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double same = labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)] ? 1.0 : 0.0;
      loss += std::abs(same - similarity(i, j));
    }
  }
  return loss;
}

PointEstimate map_partition(const ChainTrace &trace) {
  const Eigen::MatrixXd sim = posterior_similarity(trace);
  // canonical labels make repeated partitions compare equal; score each once
  std::map<std::vector<int>, double> scored;
  PointEstimate best;
  bool have = false;
  for (std::size_t r = 0; r < trace.records.size(); ++r) {
    const auto &labels = trace.records[r].labels;
    auto it = scored.find(labels);
    if (it == scored.end()) it = scored.emplace(labels, binder_loss(labels, sim)).first;
    if (!have || it->second < best.loss) {
      best.labels = labels;
      best.loss = it->second;
      best.record_index = r;
      have = true;
    }
  }
  return best;
}

KPosterior k_posterior(const ChainTrace &trace) {
  if (trace.empty()) throw DomainError("k_posterior: trace has no records");
  KPosterior out;
  std::map<int, std::size_t> counts;
  double sum = 0.0;
  for (const auto &rec : trace.records) {
    ++counts[rec.num_clusters];
    sum += rec.num_clusters;
  }
  const double total = static_cast<double>(trace.records.size());
  std::size_t top = 0;
  for (const auto &[k, c] : counts) {
    out.frequency[k] = static_cast<double>(c) / total;
    if (c > top) {
      top = c;
      out.mode = k;
    }
  }
  out.mean = sum / total;
  return out;
}

double lower_median(std::vector<double> values) {
  if (values.empty()) throw DomainError("lower_median: no values");
  std::sort(values.begin(), values.end());
  return values[(values.size() - 1) / 2];
}

double sign_test_p_value(std::size_t wins, std::size_t losses) {
  const std::size_t n = wins + losses;
  if (n == 0) return 1.0;
  double p = 0.0;
  for (std::size_t k = wins; k <= n; ++k) {
    p += std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) -
                  static_cast<double>(n) * std::log(2.0));
  }
  return std::min(1.0, p);
}

}  // namespace copmix
