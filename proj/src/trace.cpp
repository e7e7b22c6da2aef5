#include "copmix/trace.hpp"

#include <istream>
#include <ostream>
#include <set>
#include <string>

#include "copmix/errors.hpp"
#include "copmix/json_io.hpp"

namespace copmix {

void ChainTrace::check_invariants() const {
  std::size_t n = records.empty() ? 0 : records.front().labels.size();
  for (const auto &r : records) {
    if (r.labels.size() != n) throw Error("trace: records disagree on the number of observations");
    const std::set<int> distinct(r.labels.begin(), r.labels.end());
    if (static_cast<int>(distinct.size()) != r.num_clusters) {
      throw Error("trace: K does not match the labels at sweep " + std::to_string(r.sweep));
    }
  }
}

void write_trace(const ChainTrace &trace, std::ostream &out) {
  out << nlohmann::json{{"type", "header"}, {"metadata", trace.metadata}}.dump() << '\n';
  std::size_t next_snapshot = 0;
  for (const auto &r : trace.records) {
    out << nlohmann::json{{"type", "sweep"},
                          {"sweep", r.sweep},
                          {"K", r.num_clusters},
                          {"loglik", r.loglik},
                          {"acceptance",
                           {{"reassign", r.reassign_acceptance},
                            {"theta", r.theta_acceptance},
                            {"latent", r.latent_acceptance}}},
                          {"labels", r.labels}}
               .dump()
        << '\n';
    while (next_snapshot < trace.snapshots.size() && trace.snapshots[next_snapshot].sweep == r.sweep) {
      const auto &s = trace.snapshots[next_snapshot++];
      nlohmann::json clusters = nlohmann::json::array();
      for (const auto &c : s.clusters) clusters.push_back(c);
      out << nlohmann::json{{"type", "params"}, {"sweep", s.sweep}, {"clusters", clusters}}.dump()
          << '\n';
    }
  }
  for (; next_snapshot < trace.snapshots.size(); ++next_snapshot) {
    const auto &s = trace.snapshots[next_snapshot];
    nlohmann::json clusters = nlohmann::json::array();
    for (const auto &c : s.clusters) clusters.push_back(c);
    out << nlohmann::json{{"type", "params"}, {"sweep", s.sweep}, {"clusters", clusters}}.dump() << '\n';
  }
}

ChainTrace read_trace(std::istream &in) {
  ChainTrace trace;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      const std::string type = j.at("type").get<std::string>();
      if (type == "header") {
        trace.metadata = j.at("metadata");
        have_header = true;
      } else if (type == "sweep") {
        SweepRecord r;
        r.sweep = j.at("sweep").get<std::uint64_t>();
        r.num_clusters = j.at("K").get<int>();
        r.loglik = j.at("loglik").get<double>();
        const auto &acc = j.at("acceptance");
        r.reassign_acceptance = acc.at("reassign").get<double>();
        r.theta_acceptance = acc.at("theta").get<double>();
        r.latent_acceptance = acc.at("latent").get<double>();
        r.labels = j.at("labels").get<std::vector<int>>();
        trace.records.push_back(std::move(r));
      } else if (type == "params") {
        ParamSnapshot s;
        s.sweep = j.at("sweep").get<std::uint64_t>();
        for (const auto &c : j.at("clusters")) s.clusters.push_back(cluster_params_from_json(c));
        trace.snapshots.push_back(std::move(s));
      } else {
        throw ParseError("trace: unknown record type '" + type + "'", line_no);
      }
    } catch (const nlohmann::json::exception &e) {
      throw ParseError(std::string("trace: ") + e.what(), line_no);
    } catch (const ConfigError &e) {
      throw ParseError(std::string("trace: ") + e.what(), line_no);
    } catch (const MatrixError &e) {
      throw ParseError(std::string("trace: ") + e.what(), line_no);
    }
  }
  if (!have_header) throw ParseError("trace: missing header record");
  try {
    trace.check_invariants();
  } catch (const ParseError &) {
    throw;
  } catch (const Error &e) {
    throw ParseError(e.what());
  }
  return trace;
}

}  // namespace copmix
