#pragma once

#include <cstdint>
#include <iosfwd>
#include <json.hpp>
#include <vector>

#include "copmix/mixture.hpp"

namespace copmix {

/// One recorded sweep.
struct SweepRecord {
  std::uint64_t sweep = 0;
  std::vector<int> labels;  // canonical: order of first appearance
  int num_clusters = 0;
  double loglik = 0.0;
  double reassign_acceptance = 0.0;
  double theta_acceptance = 0.0;
  double latent_acceptance = 0.0;
};

/// Full parameter state at a recorded sweep, clusters in canonical label order.
struct ParamSnapshot {
  std::uint64_t sweep = 0;
  std::vector<ClusterParams> clusters;
};

struct ChainTrace {
  nlohmann::json metadata = nlohmann::json::object();
  std::vector<SweepRecord> records;
  std::vector<ParamSnapshot> snapshots;

  bool empty() const { return records.empty(); }
  /// Throws Error when a record's K disagrees with its labels or lengths differ.
  void check_invariants() const;
};

/// JSON Lines: a header record, then one record per sweep or snapshot.
void write_trace(const ChainTrace &trace, std::ostream &out);
/// Throws ParseError (with the 1-based line number) on malformed input.
ChainTrace read_trace(std::istream &in);

}  // namespace copmix
