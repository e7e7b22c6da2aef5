#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <json.hpp>
#include <string>
#include <vector>

#include "copmix/copula.hpp"
#include "copmix/dataset.hpp"
#include "copmix/mixture.hpp"

namespace copmix {

/// The two simulated two-view settings: Gaussian/beta and Gaussian/exponential.
enum class Simulation { sim1, sim2 };

std::string_view to_string(Simulation which);
Simulation parse_simulation(std::string_view name);

struct SimConfig {
  Simulation which = Simulation::sim1;
  Eigen::Index n = 200;
  double group_fraction = 0.65;
  double inter_view_rho = 0.95;
  std::uint64_t seed = 0;

  /// Throws ConfigError.
  void validate() const;
};

/// Generating margins (view X then view Y).
std::vector<MarginParams> simulation_margins(Simulation which);
/// Within-view correlation blocks (P_x, P_y).
std::pair<CorrelationMatrix, CorrelationMatrix> simulation_blocks(Simulation which);

/// Joint generating correlation of the latent scores: the intra-view blocks
/// linked through corr(z_x1, z_y1) = rho, with every other cross entry implied
/// by that single link (cross block rho * P_x e1 e1' P_y). Throws ConfigError
/// when the result is not positive definite.
CorrelationMatrix generation_correlation(const SimConfig &config);

/// n single-cluster meta-Gaussian draws together with their latent scores.
struct LinkedSample {
  Eigen::MatrixXd latent;
  Eigen::MatrixXd rows;
};

LinkedSample draw_linked_sample(const SimConfig &config, Rng &rng);

/// Group labels (1 or 2): the ceil(fraction * n) observations with the
/// smallest values of `key` form group 1.
std::vector<int> split_groups(const Eigen::Ref<const Eigen::VectorXd> &key, double fraction);

/// Permutes the view-Y part of the rows independently inside each group.
/// View X stays in place.
Eigen::MatrixXd permute_within_groups(const Eigen::MatrixXd &rows, const ViewLayout &layout,
                                      const std::vector<int> &labels, Rng &rng);

/// Full construction: linked sample, group split on z_x1, within-group
/// permutation of view Y. true_labels holds the group ids.
Dataset simulate(const SimConfig &config, Rng &rng);
Dataset simulate(const SimConfig &config);

/// Margin families of the generating model, with default priors.
ModelConfig copula_model_for(Simulation which, double lambda = 1.0);

nlohmann::json sim_metadata(const SimConfig &config);
SimConfig sim_config_from_json(const nlohmann::json &j);

/// CSV with header x1..xp,y1..yq[,label]. Values written in shortest
/// round-trip form.
void write_dataset(const Dataset &data, std::ostream &out);
void write_dataset(const Dataset &data, const std::string &path);
/// Throws ParseError with the 1-based row/column of the first problem.
Dataset read_dataset(std::istream &in, const ViewLayout &layout);
Dataset read_dataset(const std::string &path, const ViewLayout &layout);

}  // namespace copmix
