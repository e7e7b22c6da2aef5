#include "copmix/synthdata.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "copmix/errors.hpp"
#include "copmix/special_functions.hpp"

namespace copmix {

std::string_view to_string(Simulation which) { return which == Simulation::sim1 ? "sim1" : "sim2"; }

Simulation parse_simulation(std::string_view name) {
  if (name == "sim1") return Simulation::sim1;
  if (name == "sim2") return Simulation::sim2;
  throw ConfigError("unknown simulation '" + std::string(name) + "' (expected sim1 or sim2)");
}

void SimConfig::validate() const {
  if (n < 10) throw ConfigError("simulation: n must be at least 10");
  if (!(group_fraction > 0.0 && group_fraction < 1.0)) {
    throw ConfigError("simulation: group_fraction must lie strictly between 0 and 1");
  }
  if (!(inter_view_rho > -1.0 && inter_view_rho < 1.0)) {
    throw ConfigError("simulation: inter_view_rho must lie strictly between -1 and 1");
  }
  const auto first = static_cast<Eigen::Index>(std::ceil(group_fraction * static_cast<double>(n) - 1e-9));
  if (first < 1 || first >= n) throw ConfigError("simulation: group_fraction leaves a group empty");
  if (2 * first == n) throw ConfigError("simulation: groups must have unequal sizes");
}

std::vector<MarginParams> simulation_margins(Simulation which) {
  std::vector<MarginParams> out{NormalParams{0.0, 1.0}, NormalParams{0.0, 1.0}};
  if (which == Simulation::sim1) {
    out.push_back(BetaParams{3.0, 1.0});
    out.push_back(BetaParams{1.0, 10.0});
  } else {
    out.push_back(ExponentialParams{2.5});
    out.push_back(ExponentialParams{2.5});
  }
  return out;
}

std::pair<CorrelationMatrix, CorrelationMatrix> simulation_blocks(Simulation which) {
  Eigen::Matrix2d px;
  px << 1.0, 0.9, 0.9, 1.0;
  const double ry = which == Simulation::sim1 ? -0.5 : 0.9;
  Eigen::Matrix2d py;
  py << 1.0, ry, ry, 1.0;
  return {CorrelationMatrix(px), CorrelationMatrix(py)};
}

CorrelationMatrix generation_correlation(const SimConfig &config) {
  const auto [px, py] = simulation_blocks(config.which);
  const Eigen::Index p = px.dim();
  const Eigen::Index q = py.dim();
  Eigen::MatrixXd joint = Eigen::MatrixXd::Zero(p + q, p + q);
  joint.topLeftCorner(p, p) = px.matrix();
  joint.bottomRightCorner(q, q) = py.matrix();
  const Eigen::MatrixXd cross = config.inter_view_rho * px.matrix().col(0) * py.matrix().row(0);
  joint.topRightCorner(p, q) = cross;
  joint.bottomLeftCorner(q, p) = cross.transpose();
  try {
    return CorrelationMatrix(joint);
  } catch (const MatrixError &) {
    throw ConfigError("simulation: generating correlation is not positive definite for rho = " +
                      std::to_string(config.inter_view_rho));
  }
}

LinkedSample draw_linked_sample(const SimConfig &config, Rng &rng) {
  config.validate();
  const CorrelationMatrix corr = generation_correlation(config);
  const auto margins = simulation_margins(config.which);
  LinkedSample out;
  out.latent = sample_gaussian_scores(config.n, corr, rng);
  out.rows.resize(out.latent.rows(), out.latent.cols());
  for (Eigen::Index i = 0; i < out.latent.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.latent.cols(); ++j) {
      const double u = std::clamp(phi_cdf(out.latent(i, j)), kCdfClamp, 1.0 - kCdfClamp);
      out.rows(i, j) = margin_quantile(margins[static_cast<std::size_t>(j)], u);
    }
  }
  return out;
}

std::vector<int> split_groups(const Eigen::Ref<const Eigen::VectorXd> &key, double fraction) {
  const Eigen::Index n = key.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&key](Eigen::Index a, Eigen::Index b) { return key(a) < key(b); });
  const auto first = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  std::vector<int> labels(static_cast<std::size_t>(n), 2);
  for (std::size_t r = 0; r < first && r < order.size(); ++r) labels[static_cast<std::size_t>(order[r])] = 1;
  return labels;
}

Eigen::MatrixXd permute_within_groups(const Eigen::MatrixXd &rows, const ViewLayout &layout,
                                      const std::vector<int> &labels, Rng &rng) {
  Eigen::MatrixXd out = rows;
  for (int group : {1, 2}) {
    std::vector<Eigen::Index> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == group) members.push_back(static_cast<Eigen::Index>(i));
    }
    std::vector<Eigen::Index> source = members;
    std::shuffle(source.begin(), source.end(), rng);
    for (std::size_t k = 0; k < members.size(); ++k) {
      out.row(members[k]).tail(layout.q) = rows.row(source[k]).tail(layout.q);
    }
  }
  return out;
}

Dataset simulate(const SimConfig &config, Rng &rng) {
  const LinkedSample linked = draw_linked_sample(config, rng);
  const ViewLayout layout{2, 2};
  auto labels = split_groups(linked.latent.col(0), config.group_fraction);
  Dataset out;
  out.layout = layout;
  out.rows = permute_within_groups(linked.rows, layout, labels, rng);
  out.true_labels = std::move(labels);
  return out;
}

Dataset simulate(const SimConfig &config) {
  Rng rng(config.seed);
  return simulate(config, rng);
}

ModelConfig copula_model_for(Simulation which, double lambda) {
  ModelConfig config;
  config.layout = {2, 2};
  config.lambda = lambda;
  for (const auto &m : simulation_margins(which)) {
    config.margins.push_back(MarginSpec::with_default_prior(family_of(m)));
  }
  return config;
}

nlohmann::json sim_metadata(const SimConfig &config) {
  return {{"which", std::string(to_string(config.which))},
          {"n", config.n},
          {"group_fraction", config.group_fraction},
          {"inter_view_rho", config.inter_view_rho},
          {"seed", config.seed}};
}

SimConfig sim_config_from_json(const nlohmann::json &j) {
  if (!j.is_object()) throw ConfigError("simulation: expected an object");
  for (const auto &[key, value] : j.items()) {
    if (key != "which" && key != "n" && key != "group_fraction" && key != "inter_view_rho" &&
        key != "seed") {
      throw ConfigError("simulation: unknown field '" + key + "'");
    }
  }
  SimConfig c;
  try {
    if (j.contains("which")) c.which = parse_simulation(j.at("which").get<std::string>());
    if (j.contains("n")) c.n = j.at("n").get<Eigen::Index>();
    if (j.contains("group_fraction")) c.group_fraction = j.at("group_fraction").get<double>();
    if (j.contains("inter_view_rho")) c.inter_view_rho = j.at("inter_view_rho").get<double>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError(std::string("simulation: ") + e.what());
  }
  c.validate();
  return c;
}

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> expected_header(const ViewLayout &layout) {
  std::vector<std::string> h;
  for (Eigen::Index j = 1; j <= layout.p; ++j) h.push_back("x" + std::to_string(j));
  for (Eigen::Index j = 1; j <= layout.q; ++j) h.push_back("y" + std::to_string(j));
  return h;
}

std::vector<std::string> split_csv(const std::string &line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  std::size_t b = 0;
  while (b < s.size() && s[b] == ' ') ++b;
  return s.substr(b);
}

}  // namespace

void write_dataset(const Dataset &data, std::ostream &out) {
  const auto header = expected_header(data.layout);
  for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
  if (data.true_labels) out << ",label";
  out << '\n';
  for (Eigen::Index i = 0; i < data.rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.rows.cols(); ++j) {
      out << (j ? "," : "") << format_double(data.rows(i, j));
    }
    if (data.true_labels) out << ',' << (*data.true_labels)[static_cast<std::size_t>(i)];
    out << '\n';
  }
}

void write_dataset(const Dataset &data, const std::string &path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_dataset(data, out);
  if (!out) throw Error("write to '" + path + "' failed");
}

Dataset read_dataset(std::istream &in, const ViewLayout &layout) {
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) throw ParseError("dataset: file is empty");
  const auto header = split_csv(trim(line));
  const auto expected = expected_header(layout);
  bool with_label = false;
  if (header.size() == expected.size() + 1 && trim(header.back()) == "label") {
    with_label = true;
  } else if (header.size() != expected.size()) {
    throw ParseError("dataset: expected " + std::to_string(expected.size()) + " data columns, header has " +
                     std::to_string(header.size()), 1);
  }
  for (std::size_t k = 0; k < expected.size(); ++k) {
    if (trim(header[k]) != expected[k]) {
      throw ParseError("dataset: header column '" + trim(header[k]) + "' should be '" + expected[k] + "'",
                       1, k + 1);
    }
  }
  std::vector<double> values;
  std::vector<int> labels;
  std::size_t row = 1;
  const std::size_t width = expected.size() + (with_label ? 1 : 0);
  while (std::getline(in, line)) {
    ++row;
    line = trim(line);
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != width) {
      throw ParseError("dataset: expected " + std::to_string(width) + " cells, found " +
                       std::to_string(cells.size()), row);
    }
    for (std::size_t k = 0; k < width; ++k) {
      const std::string cell = trim(cells[k]);
      if (cell.empty()) throw ParseError("dataset: missing value", row, k + 1);
      if (with_label && k + 1 == width) {
        int label = 0;
        const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), label);
        if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
          throw ParseError("dataset: label '" + cell + "' is not an integer", row, k + 1);
        }
        labels.push_back(label);
        continue;
      }
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        throw ParseError("dataset: cell '" + cell + "' is not a finite number", row, k + 1);
      }
      values.push_back(v);
    }
  }
  const auto d = static_cast<Eigen::Index>(expected.size());
  const auto n = static_cast<Eigen::Index>(values.size()) / d;
  if (n == 0) throw ParseError("dataset: no data rows");
  Dataset out;
  out.layout = layout;
  out.rows = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), n, d);
  if (with_label) out.true_labels = std::move(labels);
  return out;
}

Dataset read_dataset(const std::string &path, const ViewLayout &layout) {
  std::ifstream in(path);
  if (!in) throw ParseError("dataset: cannot open '" + path + "'");
  return read_dataset(in, layout);
}

}  // namespace copmix
