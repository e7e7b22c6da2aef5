#include "copmix/json_io.hpp"

#include "copmix/errors.hpp"

namespace copmix {

using nlohmann::json;

namespace {

template <typename T>
T field(const json &j, const char *key) {
  if (!j.is_object() || !j.contains(key)) {
    throw ConfigError(std::string("missing field '") + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception &) {
    throw ConfigError(std::string("field '") + key + "' has the wrong type");
  }
}

template <typename T>
T field_or(const json &j, const char *key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return field<T>(j, key);
}

void check_keys(const json &j, std::initializer_list<const char *> allowed, const char *what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + ": expected an object");
  for (const auto &[key, value] : j.items()) {
    bool known = false;
    for (const char *a : allowed) known = known || key == a;
    if (!known) throw ConfigError(std::string(what) + ": unknown field '" + key + "'");
  }
}

json gamma_json(const GammaHyper &g) { return {{"shape", g.shape}, {"rate", g.rate}}; }

GammaHyper gamma_from(const json &j, GammaHyper fallback) {
  check_keys(j, {"shape", "rate"}, "gamma prior");
  return {field_or(j, "shape", fallback.shape), field_or(j, "rate", fallback.rate)};
}

}  // namespace

void to_json(json &j, const MarginParams &params) {
  std::visit(
      [&j](const auto &p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, NormalParams>) {
          j = {{"family", "normal"}, {"mean", p.mean}, {"variance", p.variance}};
        } else if constexpr (std::is_same_v<T, BetaParams>) {
          j = {{"family", "beta"}, {"alpha", p.alpha}, {"beta", p.beta}};
        } else {
          j = {{"family", "exponential"}, {"rate", p.rate}};
        }
      },
      params);
}

void from_json(const json &j, MarginParams &params) {
  MarginFamily family;
  try {
    family = parse_margin_family(field<std::string>(j, "family"));
  } catch (const DomainError &e) {
    throw ConfigError(e.what());
  }
  switch (family) {
    case MarginFamily::normal:
      params = NormalParams{field<double>(j, "mean"), field<double>(j, "variance")};
      break;
    case MarginFamily::beta:
      params = BetaParams{field<double>(j, "alpha"), field<double>(j, "beta")};
      break;
    case MarginFamily::exponential:
      params = ExponentialParams{field<double>(j, "rate")};
      break;
  }
  try {
    validate(params);
  } catch (const DomainError &e) {
    throw ConfigError(e.what());
  }
}

void to_json(json &j, const MarginSpec &spec) {
  j = {{"family", std::string(to_string(spec.family))}};
  std::visit(
      [&j](const auto &h) {
        using T = std::decay_t<decltype(h)>;
        if constexpr (std::is_same_v<T, NormalInverseGammaPrior>) {
          j["prior"] = {{"mean_location", h.mean_location},
                        {"mean_precision_scale", h.mean_precision_scale},
                        {"variance_shape", h.variance_shape},
                        {"variance_scale", h.variance_scale}};
        } else if constexpr (std::is_same_v<T, BetaShapePrior>) {
          j["prior"] = {{"alpha", gamma_json(h.alpha)}, {"beta", gamma_json(h.beta)}};
        } else {
          j["prior"] = {{"rate", gamma_json(h.rate)}};
        }
      },
      spec.hyper);
}

void from_json(const json &j, MarginSpec &spec) {
  check_keys(j, {"family", "prior"}, "margin");
  try {
    spec = MarginSpec::with_default_prior(parse_margin_family(field<std::string>(j, "family")));
  } catch (const DomainError &e) {
    throw ConfigError(e.what());
  }
  if (j.contains("prior")) {
    const json &p = j.at("prior");
    switch (spec.family) {
      case MarginFamily::normal: {
        check_keys(p, {"mean_location", "mean_precision_scale", "variance_shape", "variance_scale"},
                   "normal prior");
        auto h = std::get<NormalInverseGammaPrior>(spec.hyper);
        h.mean_location = field_or(p, "mean_location", h.mean_location);
        h.mean_precision_scale = field_or(p, "mean_precision_scale", h.mean_precision_scale);
        h.variance_shape = field_or(p, "variance_shape", h.variance_shape);
        h.variance_scale = field_or(p, "variance_scale", h.variance_scale);
        spec.hyper = h;
        break;
      }
      case MarginFamily::beta: {
        check_keys(p, {"alpha", "beta"}, "beta prior");
        auto h = std::get<BetaShapePrior>(spec.hyper);
        if (p.contains("alpha")) h.alpha = gamma_from(p.at("alpha"), h.alpha);
        if (p.contains("beta")) h.beta = gamma_from(p.at("beta"), h.beta);
        spec.hyper = h;
        break;
      }
      case MarginFamily::exponential: {
        check_keys(p, {"rate"}, "exponential prior");
        auto h = std::get<ExponentialRatePrior>(spec.hyper);
        if (p.contains("rate")) h.rate = gamma_from(p.at("rate"), h.rate);
        spec.hyper = h;
        break;
      }
    }
  }
  try {
    validate(spec);
  } catch (const DomainError &e) {
    throw ConfigError(e.what());
  }
}

void to_json(json &j, const ModelConfig &config) {
  j = {{"p", config.layout.p}, {"q", config.layout.q}, {"lambda", config.lambda},
       {"margins", config.margins}};
}

void from_json(const json &j, ModelConfig &config) {
  check_keys(j, {"p", "q", "lambda", "margins"}, "model");
  config.layout.p = field<Eigen::Index>(j, "p");
  config.layout.q = field<Eigen::Index>(j, "q");
  config.lambda = field_or(j, "lambda", 1.0);
  config.margins = field<std::vector<MarginSpec>>(j, "margins");
  config.validate();
}

void to_json(json &j, const ClusterParams &params) {
  j = {{"theta", params.theta},
       {"sigma_x", matrix_to_json(params.sigma_x.matrix())},
       {"sigma_y", matrix_to_json(params.sigma_y.matrix())}};
}

ClusterParams cluster_params_from_json(const json &j) {
  ClusterParams out;
  out.theta = field<std::vector<MarginParams>>(j, "theta");
  out.sigma_x = CovarianceMatrix(matrix_from_json(j.at("sigma_x")));
  out.sigma_y = CovarianceMatrix(matrix_from_json(j.at("sigma_y")));
  return out;
}

void to_json(json &j, const MhTuning &t) {
  j = {{"normal_step", t.normal_step},
       {"beta_step", t.beta_step},
       {"exponential_step", t.exponential_step},
       {"latent_step", t.latent_step},
       {"adaptation_window", t.adaptation_window},
       {"target_acceptance", t.target_acceptance}};
}

void from_json(const json &j, MhTuning &t) {
  check_keys(j, {"normal_step", "beta_step", "exponential_step", "latent_step", "adaptation_window",
                 "target_acceptance"},
             "tuning");
  const MhTuning d;
  t.normal_step = field_or(j, "normal_step", d.normal_step);
  t.beta_step = field_or(j, "beta_step", d.beta_step);
  t.exponential_step = field_or(j, "exponential_step", d.exponential_step);
  t.latent_step = field_or(j, "latent_step", d.latent_step);
  t.adaptation_window = field_or(j, "adaptation_window", d.adaptation_window);
  t.target_acceptance = field_or(j, "target_acceptance", d.target_acceptance);
  t.validate();
}

void to_json(json &j, const RunSchedule &s) {
  j = {{"n_sweeps", s.n_sweeps}, {"burn_in", s.burn_in}, {"thin", s.thin},
       {"snapshot_every", s.snapshot_every}};
}

void from_json(const json &j, RunSchedule &s) {
  check_keys(j, {"n_sweeps", "burn_in", "thin", "snapshot_every"}, "schedule");
  const RunSchedule d;
  s.n_sweeps = field_or(j, "n_sweeps", d.n_sweeps);
  s.burn_in = field_or(j, "burn_in", d.burn_in);
  s.thin = field_or(j, "thin", d.thin);
  s.snapshot_every = field_or(j, "snapshot_every", d.snapshot_every);
  s.validate();
}

json matrix_to_json(const Eigen::MatrixXd &m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}

Eigen::MatrixXd matrix_from_json(const json &j) {
  const auto r = field<Eigen::Index>(j, "rows");
  const auto c = field<Eigen::Index>(j, "cols");
  const json &data = j.at("data");
  if (!data.is_array() || static_cast<Eigen::Index>(data.size()) != r) {
    throw ConfigError("matrix: row count mismatch");
  }
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    const json &row = data[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != c) {
      throw ConfigError("matrix: column count mismatch");
    }
    for (Eigen::Index k = 0; k < c; ++k) m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
  }
  return m;
}

}  // namespace copmix
