#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <json.hpp>
#include <span>
#include <optional>
#include <string>
#include <vector>

#include "copmix/dataset.hpp"
#include "copmix/mixture.hpp"
#include "copmix/sampler.hpp"
#include "copmix/synthdata.hpp"
#include "copmix/trace.hpp"

namespace copmix {

/// cm: copula mixture with the configured margin families; gm1 / gm2: the
/// all-normal Gaussian mixture with weak / strong view-Y variance priors.
enum class Method { cm, gm1, gm2 };

std::string_view to_string(Method method);
Method parse_method(std::string_view name);

/// A dataset file on disk (single replicate) or a simulation recipe.
struct DatasetSource {
  std::optional<std::filesystem::path> file;
  ViewLayout layout{2, 2};
  SimConfig simulation;

  bool simulated() const { return !file.has_value(); }
};

struct ExperimentConfig {
  DatasetSource dataset;
  std::vector<Method> methods{Method::cm, Method::gm1};
  /// Margin families and priors for the cm method. Defaults to the generating
  /// families of the simulation when absent.
  std::optional<ModelConfig> model;
  double lambda = 1.0;
  InverseGammaHyper gm_weak_variance{2.0, 1.0};
  InverseGammaHyper gm_strong_variance{10.0, 50.0};
  MhTuning tuning;
  RunSchedule schedule;
  std::size_t replicates = 1;
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
  std::filesystem::path out = "copmix_out";

  /// Parses and validates; unknown fields and inconsistent values raise ConfigError.
  static ExperimentConfig from_json(const nlohmann::json &j);
  /// Every field with defaults resolved.
  nlohmann::json to_json() const;
  void validate() const;
};

ExperimentConfig load_experiment_config(const std::filesystem::path &path);

/// Model configuration a method uses on data with the given layout.
ModelConfig model_for_method(const ExperimentConfig &config, Method method);

std::uint64_t simulate_seed(const ExperimentConfig &config, std::size_t replicate);
std::uint64_t fit_seed(const ExperimentConfig &config, std::size_t replicate, Method method);

std::filesystem::path dataset_path(const ExperimentConfig &config, std::size_t replicate);
std::filesystem::path trace_path(const ExperimentConfig &config, Method method, std::size_t replicate);

/// Writes one dataset CSV and metadata sidecar per replicate. Returns the CSV paths.
std::vector<std::filesystem::path> cmd_simulate(const ExperimentConfig &config);

struct FitSummary {
  Method method = Method::cm;
  std::size_t replicate = 0;
  int k_mode = 0;
  double mean_loglik = 0.0;
};

/// Runs the sampler on every replicate dataset and writes one trace file each.
std::vector<FitSummary> cmd_fit(const ExperimentConfig &config, Method method);

struct ReplicateResult {
  Method method = Method::cm;
  std::size_t replicate = 0;
  double ari = 0.0;
  int k_mode = 0;
  double k_mean = 0.0;
};

struct EvaluationReport {
  std::vector<Method> methods;
  std::vector<ReplicateResult> rows;

  /// Lower median of the per-replicate ARI of one method.
  double median_ari(Method method) const;
  /// method,replicate,ARI,K_mode
  std::string to_csv() const;
  /// Human-readable per-method summary.
  std::string summary() const;
};

/// Scores one trace against its truth: ARI of the Binder point estimate and
/// the K-posterior mode.
ReplicateResult evaluate_trace(const ChainTrace &trace, std::span<const int> truth, Method method,
                               std::size_t replicate);

/// Reads traces and truth labels from the output directory and writes
/// evaluation.csv and report.txt.
EvaluationReport cmd_evaluate(const ExperimentConfig &config);

/// simulate (when the source is a simulation), fit every method, evaluate.
EvaluationReport cmd_report(const ExperimentConfig &config);

/// Process exit code for an exception escaping a command: 2 configuration,
/// 3 data, 4 numerical failure, 1 anything else.
int exit_code_for(const std::exception &error);

/// Runs `task(k)` for k in [0, count) on up to `jobs` threads.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)> &task);

}  // namespace copmix
