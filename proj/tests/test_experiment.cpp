#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "copmix/errors.hpp"
#include "copmix/experiment.hpp"

using namespace copmix;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string &name) {
  const fs::path dir = fs::temp_directory_path() / ("copmix_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small_config(const fs::path &out, std::size_t replicates = 2) {
  json j = {{"dataset", {{"simulate", {{"which", "sim1"}, {"n", 40}}}}},
            {"schedule", {{"n_sweeps", 40}, {"burn_in", 10}, {"snapshot_every", 10}}},
            {"replicates", replicates},
            {"seed", 5},
            {"out", out.string()}};
  return ExperimentConfig::from_json(j);
}

int run_cli(const std::string &args) {
  const std::string cmd = std::string(COPMIX_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config parsing and validation") {
  const fs::path out = scratch("parse");
  const auto c = small_config(out);
  CHECK(c.replicates == 2);
  CHECK(c.methods == std::vector<Method>{Method::cm, Method::gm1});
  const json echoed = c.to_json();
  CHECK(echoed["schedule"]["thin"] == 1);
  CHECK(echoed["model"]["margins"].size() == 4);
  const auto again = ExperimentConfig::from_json(echoed);
  CHECK(again.to_json() == echoed);

  json bad = echoed;
  bad["schedule"]["burn_in"] = 40;
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad), ConfigError);
  bad = echoed;
  bad["unknown"] = 1;
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad), ConfigError);
  bad = echoed;
  bad["methods"] = {"km"};
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad), ConfigError);
  bad = echoed;
  bad["model"]["margins"][0]["family"] = "gamma";
  CHECK_THROWS(ExperimentConfig::from_json(bad));
}

TEST_CASE("methods map to model configurations") {
  const auto c = small_config(scratch("methods"));
  const auto cm = model_for_method(c, Method::cm);
  CHECK(cm.margins[2].family == MarginFamily::beta);
  const auto gm1 = model_for_method(c, Method::gm1);
  const auto gm2 = model_for_method(c, Method::gm2);
  for (const auto &m : gm1.margins) CHECK(m.family == MarginFamily::normal);
  const auto &weak = std::get<NormalInverseGammaPrior>(gm1.margins[2].hyper);
  const auto &strong = std::get<NormalInverseGammaPrior>(gm2.margins[2].hyper);
  CHECK(weak.variance_shape == 2.0);
  CHECK(weak.variance_scale == 1.0);
  CHECK(strong.variance_shape == 10.0);
  CHECK(strong.variance_scale == 50.0);
  CHECK(std::get<NormalInverseGammaPrior>(gm2.margins[0].hyper).variance_scale == 1.0);
}

TEST_CASE("seeds are derived per replicate and stage") {
  const auto c = small_config(scratch("seeds"));
  CHECK(simulate_seed(c, 0) != simulate_seed(c, 1));
  CHECK(fit_seed(c, 0, Method::cm) != fit_seed(c, 0, Method::gm1));
  CHECK(fit_seed(c, 0, Method::cm) != simulate_seed(c, 0));
  CHECK(simulate_seed(c, 3) == derive_seed(5, 3, "simulate"));
}

TEST_CASE("simulate writes one dataset per replicate, deterministically") {
  const fs::path out = scratch("simulate");
  auto c = small_config(out, 3);
  const auto paths = cmd_simulate(c);
  REQUIRE(paths.size() == 3);
  for (const auto &p : paths) {
    CHECK(fs::exists(p));
    CHECK(fs::exists(fs::path(p).replace_extension(".json")));
  }
  CHECK(slurp(paths[0]) != slurp(paths[1]));
  const std::string first = slurp(paths[2]);
  cmd_simulate(c);
  CHECK(slurp(paths[2]) == first);
  CHECK(fs::exists(out / "effective_config.json"));

  const fs::path bad_out = scratch("simulate_bad");
  json j = c.to_json();
  j["out"] = bad_out.string();
  j["dataset"]["simulate"]["group_fraction"] = 1.0;
  CHECK_THROWS_AS(ExperimentConfig::from_json(j), ConfigError);
  ExperimentConfig raw = small_config(bad_out);
  raw.dataset.simulation.group_fraction = 1.0;
  CHECK_THROWS_AS(cmd_simulate(raw), ConfigError);
  CHECK_FALSE(fs::exists(bad_out));
}

TEST_CASE("fit, evaluate and the full report") {
  const fs::path out = scratch("pipeline");
  auto c = small_config(out, 2);
  cmd_simulate(c);
  const auto fits = cmd_fit(c, Method::cm);
  REQUIRE(fits.size() == 2);
  CHECK(fits[0].k_mode >= 1);
  const std::string trace0 = slurp(trace_path(c, Method::cm, 0));
  cmd_fit(c, Method::cm);
  CHECK(slurp(trace_path(c, Method::cm, 0)) == trace0);
  cmd_fit(c, Method::gm1);
  const auto report = cmd_evaluate(c);
  CHECK(report.rows.size() == 4);
  const std::string csv = slurp(out / "evaluation.csv");
  CHECK(csv.rfind("method,replicate,ARI,K_mode\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  CHECK(fs::exists(out / "report.txt"));

  const fs::path out2 = scratch("pipeline2");
  auto c2 = c;
  c2.out = out2;
  cmd_report(c2);
  CHECK(slurp(out2 / "report.txt") == slurp(out / "report.txt"));
  CHECK(slurp(out2 / "evaluation.csv") == csv);
}

TEST_CASE("evaluation of perfect traces") {
  const fs::path out = scratch("perfect");
  auto c = small_config(out, 2);
  c.methods = {Method::cm};
  const auto paths = cmd_simulate(c);
  for (std::size_t r = 0; r < 2; ++r) {
    const Dataset d = read_dataset(paths[r].string(), c.dataset.layout);
    ChainTrace t;
    for (std::uint64_t s = 1; s <= 3; ++s) {
      SweepRecord rec;
      rec.sweep = s;
      rec.labels = canonical_labels(*d.true_labels);
      rec.num_clusters = 2;
      t.records.push_back(rec);
    }
    fs::create_directories(trace_path(c, Method::cm, r).parent_path());
    std::ofstream f(trace_path(c, Method::cm, r));
    write_trace(t, f);
  }
  const auto report = cmd_evaluate(c);
  for (const auto &row : report.rows) {
    CHECK(row.ari == 1.0);
    CHECK(row.k_mode == 2);
  }
  CHECK(report.median_ari(Method::cm) == 1.0);
}

TEST_CASE("evaluation needs truth labels") {
  const fs::path dir = scratch("nolabels");
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "data.csv");
    f << "x1,x2,y1,y2\n0.1,0.2,0.3,0.4\n0.5,0.6,0.7,0.8\n";
  }
  json j = {{"dataset", {{"file", (dir / "data.csv").string()}, {"p", 2}, {"q", 2}}},
            {"methods", {"gm1"}},
            {"schedule", {{"n_sweeps", 5}, {"burn_in", 1}}},
            {"out", (dir / "out").string()}};
  const auto c = ExperimentConfig::from_json(j);
  cmd_fit(c, Method::gm1);
  CHECK_THROWS_AS(cmd_evaluate(c), ParseError);
  json needs_model = j;
  needs_model["methods"] = {"cm"};
  CHECK_THROWS_AS(ExperimentConfig::from_json(needs_model), ConfigError);
}

TEST_CASE("dimension mismatch between model and data") {
  const fs::path dir = scratch("mismatch");
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "data.csv");
    f << "x1,y1\n0.1,0.2\n0.5,0.6\n";
  }
  json j = {{"dataset", {{"file", (dir / "data.csv").string()}, {"p", 2}, {"q", 2}}},
            {"methods", {"gm1"}},
            {"schedule", {{"n_sweeps", 5}, {"burn_in", 1}}},
            {"out", (dir / "out").string()}};
  const auto c = ExperimentConfig::from_json(j);
  CHECK_THROWS_AS(cmd_fit(c, Method::gm1), ParseError);
  json explicit_model = j;
  explicit_model["methods"] = {"cm"};
  explicit_model["model"] = {{"p", 1}, {"q", 1}, {"margins", {{{"family", "normal"}}, {{"family", "beta"}}}}};
  CHECK_THROWS_AS(ExperimentConfig::from_json(explicit_model), ConfigError);
}

TEST_CASE("exit codes") {
  CHECK(exit_code_for(ConfigError("x")) == 2);
  CHECK(exit_code_for(DomainError("x")) == 2);
  CHECK(exit_code_for(ParseError("x")) == 3);
  CHECK(exit_code_for(DegenerateDataError("x")) == 3);
  CHECK(exit_code_for(MatrixError("x")) == 4);
  CHECK(exit_code_for(std::runtime_error("x")) == 1);
}

TEST_CASE("command-line driver") {
  const fs::path dir = scratch("cli");
  fs::create_directories(dir);
  const fs::path cfg = dir / "config.json";
  {
    std::ofstream f(cfg);
    f << json{{"dataset", {{"simulate", {{"which", "sim2"}, {"n", 30}}}}},
              {"schedule", {{"n_sweeps", 20}, {"burn_in", 5}}},
              {"replicates", 2}}
             .dump();
  }
  const std::string base = "--config " + cfg.string() + " --out " + (dir / "out").string();
  CHECK(run_cli("simulate " + base + " --seed 3") == 0);
  CHECK(fs::exists(dir / "out" / "data" / "rep_001.csv"));
  CHECK(run_cli("fit " + base + " --seed 3 --method gm2 --jobs 2") == 0);
  CHECK(fs::exists(dir / "out" / "traces" / "gm2" / "rep_000.jsonl"));
  CHECK(run_cli("evaluate " + base + " --method gm2") == 0);
  CHECK(run_cli("report " + base + " --seed 4 --jobs 2") == 0);
  CHECK(run_cli("evaluate --config " + cfg.string() + " --method cm --out " + (dir / "empty").string()) == 3);
  CHECK(run_cli("fit --config " + (dir / "missing.json").string()) == 2);
  CHECK(run_cli("fit " + base + " --method km") == 2);
  CHECK(run_cli("") == 2);
  {
    std::ofstream f(dir / "bad.json");
    f << R"({"schedule": {"n_sweeps": 10, "burn_in": 10}})";
  }
  CHECK(run_cli("fit --config " + (dir / "bad.json").string()) == 2);
}

TEST_CASE("parallel_for runs every index once and propagates failures") {
  std::vector<int> hits(50, 0);
  parallel_for(50, 4, [&](std::size_t k) { hits[k] += 1; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t k) {
                    if (k == 7) throw MatrixError("boom");
                  }),
                  MatrixError);
}
