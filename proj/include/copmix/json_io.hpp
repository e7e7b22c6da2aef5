#pragma once

#include <json.hpp>

#include "copmix/margins.hpp"
#include "copmix/mixture.hpp"
#include "copmix/sampler.hpp"

// nlohmann::json conversions for the configuration and parameter types.
// from_json validates and throws ConfigError on malformed input.

namespace copmix {

void to_json(nlohmann::json &j, const MarginParams &params);
void from_json(const nlohmann::json &j, MarginParams &params);

void to_json(nlohmann::json &j, const MarginSpec &spec);
void from_json(const nlohmann::json &j, MarginSpec &spec);

void to_json(nlohmann::json &j, const ModelConfig &config);
void from_json(const nlohmann::json &j, ModelConfig &config);

void to_json(nlohmann::json &j, const ClusterParams &params);
ClusterParams cluster_params_from_json(const nlohmann::json &j);

void to_json(nlohmann::json &j, const MhTuning &tuning);
void from_json(const nlohmann::json &j, MhTuning &tuning);

void to_json(nlohmann::json &j, const RunSchedule &schedule);
void from_json(const nlohmann::json &j, RunSchedule &schedule);

nlohmann::json matrix_to_json(const Eigen::MatrixXd &m);
Eigen::MatrixXd matrix_from_json(const nlohmann::json &j);

}  // namespace copmix
