#include "copmix/experiment.hpp"

#include <atomic>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "copmix/errors.hpp"
#include "copmix/evaluate.hpp"
#include "copmix/json_io.hpp"

namespace copmix {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Method method) {
  switch (method) {
    case Method::cm:
      return "cm";
    case Method::gm1:
      return "gm1";
    case Method::gm2:
      return "gm2";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "cm") return Method::cm;
  if (name == "gm1") return Method::gm1;
  if (name == "gm2") return Method::gm2;
  throw ConfigError("unknown method '" + std::string(name) + "' (expected cm, gm1 or gm2)");
}

namespace {

void check_keys(const json &j, std::initializer_list<const char *> allowed, const char *what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + ": expected an object");
  for (const auto &[key, value] : j.items()) {
    bool known = false;
    for (const char *a : allowed) known = known || key == a;
    if (!known) throw ConfigError(std::string(what) + ": unknown field '" + key + "'");
  }
}

template <typename T>
T get_or(const json &j, const char *key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception &) {
    throw ConfigError(std::string("field '") + key + "' has the wrong type");
  }
}

InverseGammaHyper inverse_gamma_from(const json &j, InverseGammaHyper fallback) {
  check_keys(j, {"shape", "scale"}, "inverse-gamma prior");
  InverseGammaHyper out{get_or(j, "shape", fallback.shape), get_or(j, "scale", fallback.scale)};
  if (!(out.shape > 0.0) || !(out.scale > 0.0)) {
    throw ConfigError("inverse-gamma prior: shape and scale must be positive");
  }
  return out;
}

std::string replicate_stem(std::size_t replicate) {
  std::ostringstream os;
  os << "rep_";
  os.width(3);
  os.fill('0');
  os << replicate;
  return os.str();
}

void ensure_directory(const fs::path &dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create directory '" + dir.string() + "': " + ec.message());
}

void write_text(const fs::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

void write_effective_config(const ExperimentConfig &config) {
  ensure_directory(config.out);
  write_text(config.out / "effective_config.json", config.to_json().dump(2) + "\n");
}

Dataset load_replicate(const ExperimentConfig &config, std::size_t replicate) {
  const fs::path path = dataset_path(config, replicate);
  return read_dataset(path.string(), config.dataset.layout);
}

}  // namespace

void ExperimentConfig::validate() const {
  dataset.layout.validate();
  if (dataset.simulated()) {
    dataset.simulation.validate();
    if (!(dataset.layout == ViewLayout{2, 2})) throw ConfigError("simulated datasets have layout p = q = 2");
  } else if (replicates != 1) {
    throw ConfigError("a dataset file provides exactly one replicate");
  }
  if (methods.empty()) throw ConfigError("at least one method is required");
  if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
  if (model) {
    model->validate();
    if (!(model->layout == dataset.layout)) throw ConfigError("model layout does not match the dataset");
  } else if (!dataset.simulated()) {
    for (Method m : methods) {
      if (m == Method::cm) throw ConfigError("method cm on a dataset file needs an explicit model");
    }
  }
  tuning.validate();
  schedule.validate();
  if (replicates < 1) throw ConfigError("replicates must be >= 1");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
}

ExperimentConfig ExperimentConfig::from_json(const json &j) {
  check_keys(j, {"dataset", "methods", "model", "lambda", "gm_weak_variance", "gm_strong_variance",
                 "tuning", "schedule", "replicates", "seed", "jobs", "out"},
             "experiment");
  ExperimentConfig c;
  if (j.contains("dataset")) {
    const json &d = j.at("dataset");
    check_keys(d, {"file", "p", "q", "simulate"}, "dataset");
    if (d.contains("file") == d.contains("simulate")) {
      throw ConfigError("dataset: give exactly one of 'file' or 'simulate'");
    }
    if (d.contains("file")) {
      c.dataset.file = fs::path(get_or<std::string>(d, "file", ""));
      c.dataset.layout = {get_or<Eigen::Index>(d, "p", 2), get_or<Eigen::Index>(d, "q", 2)};
    } else {
      c.dataset.simulation = sim_config_from_json(d.at("simulate"));
    }
  }
  if (j.contains("methods")) {
    c.methods.clear();
    for (const auto &m : j.at("methods")) {
      if (!m.is_string()) throw ConfigError("methods: expected strings");
      c.methods.push_back(parse_method(m.get<std::string>()));
    }
  }
  c.lambda = get_or(j, "lambda", c.lambda);
  if (j.contains("model")) {
    json model = j.at("model");
    if (!model.contains("lambda")) model["lambda"] = c.lambda;
    try {
      c.model = model.get<ModelConfig>();
    } catch (const json::exception &e) {
      throw ConfigError(std::string("model: ") + e.what());
    }
    c.lambda = c.model->lambda;
  }
  if (j.contains("gm_weak_variance")) {
    c.gm_weak_variance = inverse_gamma_from(j.at("gm_weak_variance"), c.gm_weak_variance);
  }
  if (j.contains("gm_strong_variance")) {
    c.gm_strong_variance = inverse_gamma_from(j.at("gm_strong_variance"), c.gm_strong_variance);
  }
  try {
    if (j.contains("tuning")) c.tuning = j.at("tuning").get<MhTuning>();
    if (j.contains("schedule")) c.schedule = j.at("schedule").get<RunSchedule>();
  } catch (const json::exception &e) {
    throw ConfigError(e.what());
  }
  c.replicates = get_or<std::size_t>(j, "replicates", c.replicates);
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
  c.jobs = get_or<std::size_t>(j, "jobs", c.jobs);
  c.out = fs::path(get_or<std::string>(j, "out", c.out.string()));
  c.validate();
  return c;
}

json ExperimentConfig::to_json() const {
  json j;
  if (dataset.file) {
    j["dataset"] = {{"file", dataset.file->string()}, {"p", dataset.layout.p}, {"q", dataset.layout.q}};
  } else {
    json sim = sim_metadata(dataset.simulation);
    sim.erase("seed");
    j["dataset"] = {{"simulate", sim}};
  }
  json methods_json = json::array();
  for (Method m : methods) methods_json.push_back(std::string(to_string(m)));
  j["methods"] = methods_json;
  j["lambda"] = lambda;
  if (model) {
    j["model"] = *model;
  } else if (dataset.simulated()) {
    j["model"] = model_for_method(*this, Method::cm);
  }
  j["gm_weak_variance"] = {{"shape", gm_weak_variance.shape}, {"scale", gm_weak_variance.scale}};
  j["gm_strong_variance"] = {{"shape", gm_strong_variance.shape}, {"scale", gm_strong_variance.scale}};
  j["tuning"] = tuning;
  j["schedule"] = schedule;
  j["replicates"] = replicates;
  j["seed"] = seed;
  j["jobs"] = jobs;
  j["out"] = out.string();
  return j;
}

ExperimentConfig load_experiment_config(const fs::path &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  try {
    return ExperimentConfig::from_json(json::parse(in));
  } catch (const json::parse_error &e) {
    throw ConfigError("config '" + path.string() + "': " + e.what());
  }
}

ModelConfig model_for_method(const ExperimentConfig &config, Method method) {
  const ViewLayout layout = config.dataset.layout;
  switch (method) {
    case Method::cm:
      if (config.model) return *config.model;
      if (!config.dataset.simulated()) throw ConfigError("method cm needs an explicit model");
      return copula_model_for(config.dataset.simulation.which, config.lambda);
    case Method::gm1:
      return gaussian_model(layout, config.lambda, config.gm_weak_variance, config.gm_weak_variance);
    case Method::gm2:
      return gaussian_model(layout, config.lambda, config.gm_weak_variance, config.gm_strong_variance);
  }
  throw ConfigError("unknown method");
}

std::uint64_t simulate_seed(const ExperimentConfig &config, std::size_t replicate) {
  return derive_seed(config.seed, replicate, "simulate");
}

std::uint64_t fit_seed(const ExperimentConfig &config, std::size_t replicate, Method method) {
  return derive_seed(config.seed, replicate, "fit/" + std::string(to_string(method)));
}

fs::path dataset_path(const ExperimentConfig &config, std::size_t replicate) {
  if (config.dataset.file) return *config.dataset.file;
  return config.out / "data" / (replicate_stem(replicate) + ".csv");
}

fs::path trace_path(const ExperimentConfig &config, Method method, std::size_t replicate) {
  return config.out / "traces" / std::string(to_string(method)) / (replicate_stem(replicate) + ".jsonl");
}

std::vector<fs::path> cmd_simulate(const ExperimentConfig &config) {
  config.validate();
  if (!config.dataset.simulated()) throw ConfigError("simulate: the dataset source is a file");
  ensure_directory(config.out / "data");
  write_effective_config(config);
  std::vector<fs::path> paths(config.replicates);
  parallel_for(config.replicates, config.jobs, [&](std::size_t r) {
    SimConfig sim = config.dataset.simulation;
    sim.seed = simulate_seed(config, r);
    const Dataset data = simulate(sim);
    paths[r] = dataset_path(config, r);
    write_dataset(data, paths[r].string());
    json meta = {{"simulation", sim_metadata(sim)}, {"master_seed", config.seed}, {"replicate", r}};
    fs::path sidecar = paths[r];
    sidecar.replace_extension(".json");
    write_text(sidecar, meta.dump(2) + "\n");
  });
  return paths;
}

std::vector<FitSummary> cmd_fit(const ExperimentConfig &config, Method method) {
  config.validate();
  const ModelConfig model = model_for_method(config, method);
  ensure_directory(trace_path(config, method, 0).parent_path());
  write_effective_config(config);
  SamplerOptions options;
  options.tuning = config.tuning;
  std::vector<FitSummary> summaries(config.replicates);
  parallel_for(config.replicates, config.jobs, [&](std::size_t r) {
    const Dataset data = load_replicate(config, r);
    if (data.rows.cols() != model.layout.dim()) {
      throw ConfigError("fit: model has " + std::to_string(model.layout.dim()) + " margins, data has " +
                        std::to_string(data.rows.cols()) + " columns");
    }
    ChainTrace trace = run(data, model, options, config.schedule, fit_seed(config, r, method));
    trace.metadata["method"] = std::string(to_string(method));
    trace.metadata["replicate"] = r;
    std::ostringstream text;
    write_trace(trace, text);
    write_text(trace_path(config, method, r), text.str());
    FitSummary s;
    s.method = method;
    s.replicate = r;
    s.k_mode = k_posterior(trace).mode;
    double sum = 0.0;
    for (const auto &rec : trace.records) sum += rec.loglik;
    s.mean_loglik = sum / static_cast<double>(trace.records.size());
    summaries[r] = s;
  });
  return summaries;
}

double EvaluationReport::median_ari(Method method) const {
  std::vector<double> values;
  for (const auto &r : rows) {
    if (r.method == method) values.push_back(r.ari);
  }
  return lower_median(std::move(values));
}

std::string EvaluationReport::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "method,replicate,ARI,K_mode\n";
  for (const auto &r : rows) {
    os << to_string(r.method) << ',' << r.replicate << ',' << r.ari << ',' << r.k_mode << '\n';
  }
  return os.str();
}

std::string EvaluationReport::summary() const {
  std::ostringstream os;
  os.precision(6);
  os << "method  replicates  median_ARI  K_mode_histogram  mean_K\n";
  for (Method m : methods) {
    std::map<int, std::size_t> modes;
    std::size_t count = 0;
    double k_mean = 0.0;
    for (const auto &r : rows) {
      if (r.method != m) continue;
      ++modes[r.k_mode];
      ++count;
      k_mean += r.k_mean;
    }
    if (count == 0) continue;
    os << to_string(m) << "  " << count << "  " << median_ari(m) << "  ";
    bool first = true;
    for (const auto &[k, c] : modes) {
      os << (first ? "" : ";") << "K" << k << ":" << c;
      first = false;
    }
    os << "  " << k_mean / static_cast<double>(count) << '\n';
  }
  os << "(median_ARI is the lower median for even replicate counts)\n";
  return os.str();
}

ReplicateResult evaluate_trace(const ChainTrace &trace, std::span<const int> truth, Method method,
                               std::size_t replicate) {
  const PointEstimate estimate = map_partition(trace);
  const KPosterior k = k_posterior(trace);
  ReplicateResult out;
  out.method = method;
  out.replicate = replicate;
  out.ari = adjusted_rand_index(estimate.labels, truth);
  out.k_mode = k.mode;
  out.k_mean = k.mean;
  return out;
}

EvaluationReport cmd_evaluate(const ExperimentConfig &config) {
  config.validate();
  EvaluationReport report;
  report.methods = config.methods;
  std::vector<std::vector<int>> truth(config.replicates);
  for (std::size_t r = 0; r < config.replicates; ++r) {
    const Dataset data = load_replicate(config, r);
    if (!data.true_labels) {
      throw ParseError("evaluate: dataset '" + dataset_path(config, r).string() + "' has no label column");
    }
    truth[r] = *data.true_labels;
  }
  for (Method m : config.methods) {
    std::vector<ReplicateResult> results(config.replicates);
    parallel_for(config.replicates, config.jobs, [&](std::size_t r) {
      const fs::path path = trace_path(config, m, r);
      std::ifstream in(path);
      if (!in) throw ParseError("evaluate: cannot open trace '" + path.string() + "'");
      const ChainTrace trace = read_trace(in);
      if (trace.records.front().labels.size() != truth[r].size()) {
        throw ParseError("evaluate: trace '" + path.string() + "' does not match its dataset size");
      }
      results[r] = evaluate_trace(trace, truth[r], m, r);
    });
    report.rows.insert(report.rows.end(), results.begin(), results.end());
  }
  ensure_directory(config.out);
  write_text(config.out / "evaluation.csv", report.to_csv());
  write_text(config.out / "report.txt", report.summary());
  return report;
}

EvaluationReport cmd_report(const ExperimentConfig &config) {
  if (config.dataset.simulated()) cmd_simulate(config);
  for (Method m : config.methods) cmd_fit(config, m);
  return cmd_evaluate(config);
}

int exit_code_for(const std::exception &error) {
  if (dynamic_cast<const ConfigError *>(&error) || dynamic_cast<const DomainError *>(&error)) return 2;
  if (dynamic_cast<const ParseError *>(&error) || dynamic_cast<const DegenerateDataError *>(&error)) {
    return 3;
  }
  if (dynamic_cast<const MatrixError *>(&error)) return 4;
  return 1;
}

void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)> &task) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t k = 0; k < count; ++k) task(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t k = next++; k < count; k = next++) {
      try {
        task(k);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(jobs, count); ++t) pool.emplace_back(worker);
  for (auto &t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace copmix
