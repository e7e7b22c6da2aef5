#include "copmix/margins.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "copmix/errors.hpp"
#include "copmix/special_functions.hpp"

namespace copmix {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool positive_finite(double v) { return v > 0.0 && std::isfinite(v); }

double gamma_logpdf(const GammaHyper &g, double x) {
  if (!(x > 0.0)) return kNegInf;
  return g.shape * std::log(g.rate) - std::lgamma(g.shape) + (g.shape - 1.0) * std::log(x) -
         g.rate * x;
}

double beta_quantile(const BetaParams &p, double u) {
  // Safeguarded Newton iteration on the regularized incomplete beta.
  const double lbeta = log_beta_function(p.alpha, p.beta);
  double lo = 0.0;
  double hi = 1.0;
  double x = std::clamp(std::pow(u * p.alpha * std::exp(lbeta), 1.0 / p.alpha), 1e-12,
                        1.0 - 1e-12);
  if (!std::isfinite(x)) x = 0.5;
  for (int it = 0; it < 200; ++it) {
    const double f = incomplete_beta(p.alpha, p.beta, x) - u;
    if (f == 0.0) return x;
    if (f < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const double log_density =
        (p.alpha - 1.0) * std::log(x) + (p.beta - 1.0) * std::log1p(-x) - lbeta;
    double next = x - f / std::exp(log_density);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-16 * std::max(x, 1e-300) || hi - lo < 1e-300) {
      return next;
    }
    x = next;
  }
  return x;
}

}  // namespace

std::string_view to_string(MarginFamily family) {
  switch (family) {
    case MarginFamily::normal:
      return "normal";
    case MarginFamily::beta:
      return "beta";
    case MarginFamily::exponential:
      return "exponential";
  }
  return "unknown";
}

MarginFamily parse_margin_family(std::string_view name) {
  if (name == "normal") return MarginFamily::normal;
  if (name == "beta") return MarginFamily::beta;
  if (name == "exponential") return MarginFamily::exponential;
  throw DomainError("unknown margin family '" + std::string(name) + "'");
}

MarginSpec MarginSpec::with_default_prior(MarginFamily family) {
  switch (family) {
    case MarginFamily::normal:
      return {family, NormalInverseGammaPrior{}};
    case MarginFamily::beta:
      return {family, BetaShapePrior{}};
    case MarginFamily::exponential:
      return {family, ExponentialRatePrior{}};
  }
  throw DomainError("unknown margin family");
}

MarginFamily family_of(const MarginParams &params) {
  return std::visit(Overloaded{[](const NormalParams &) { return MarginFamily::normal; },
                               [](const BetaParams &) { return MarginFamily::beta; },
                               [](const ExponentialParams &) { return MarginFamily::exponential; }},
                    params);
}

MarginFamily family_of(const PriorHyper &hyper) {
  return std::visit(
      Overloaded{[](const NormalInverseGammaPrior &) { return MarginFamily::normal; },
                 [](const BetaShapePrior &) { return MarginFamily::beta; },
                 [](const ExponentialRatePrior &) { return MarginFamily::exponential; }},
      hyper);
}

void validate(const MarginParams &params) {
  std::visit(Overloaded{[](const NormalParams &p) {
                          if (!std::isfinite(p.mean) || !positive_finite(p.variance)) {
                            throw DomainError("normal margin: need finite mean and variance > 0");
                          }
                        },
                        [](const BetaParams &p) {
                          if (!positive_finite(p.alpha) || !positive_finite(p.beta)) {
                            throw DomainError("beta margin: need alpha > 0 and beta > 0");
                          }
                        },
                        [](const ExponentialParams &p) {
                          if (!positive_finite(p.rate)) {
                            throw DomainError("exponential margin: need rate > 0");
                          }
                        }},
             params);
}

void validate(const MarginSpec &spec) {
  if (family_of(spec.hyper) != spec.family) {
    throw DomainError("margin spec: prior does not belong to family " +
                      std::string(to_string(spec.family)));
  }
  auto check_gamma = [](const GammaHyper &g, const char *what) {
    if (!positive_finite(g.shape) || !positive_finite(g.rate)) {
      throw DomainError(std::string("gamma hyperparameters for ") + what + " must be positive");
    }
  };
  std::visit(Overloaded{[](const NormalInverseGammaPrior &h) {
                          if (!std::isfinite(h.mean_location) ||
                              !positive_finite(h.mean_precision_scale) ||
                              !positive_finite(h.variance_shape) ||
                              !positive_finite(h.variance_scale)) {
                            throw DomainError("normal-inverse-gamma hyperparameters must be positive");
                          }
                        },
                        [&](const BetaShapePrior &h) {
                          check_gamma(h.alpha, "beta alpha");
                          check_gamma(h.beta, "beta beta");
                        },
                        [&](const ExponentialRatePrior &h) { check_gamma(h.rate, "exponential rate"); }},
             spec.hyper);
}

double margin_cdf(const MarginParams &params, double x) {
  validate(params);
  return std::visit(
      Overloaded{[x](const NormalParams &p) { return phi_cdf((x - p.mean) / std::sqrt(p.variance)); },
                 [x](const BetaParams &p) { return incomplete_beta(p.alpha, p.beta, x); },
                 [x](const ExponentialParams &p) {
                   return x <= 0.0 ? 0.0 : -std::expm1(-p.rate * x);
                 }},
      params);
}

double margin_quantile(const MarginParams &params, double u) {
  validate(params);
  if (!(u > 0.0 && u < 1.0)) {
    throw DomainError("margin_quantile: probability must lie strictly inside (0, 1)");
  }
  return std::visit(
      Overloaded{[u](const NormalParams &p) { return p.mean + std::sqrt(p.variance) * probit(u); },
                 [u](const BetaParams &p) {
                   if (p.beta == 1.0) return std::pow(u, 1.0 / p.alpha);
                   if (p.alpha == 1.0) return -std::expm1(std::log1p(-u) / p.beta);
                   return beta_quantile(p, u);
                 },
                 [u](const ExponentialParams &p) { return -std::log1p(-u) / p.rate; }},
      params);
}

double margin_logpdf(const MarginParams &params, double x) {
  validate(params);
  return std::visit(
      Overloaded{[x](const NormalParams &p) {
                   return phi_logpdf((x - p.mean) / std::sqrt(p.variance)) - 0.5 * std::log(p.variance);
                 },
                 [x](const BetaParams &p) {
                   if (!(x > 0.0 && x < 1.0)) return kNegInf;
                   return (p.alpha - 1.0) * std::log(x) + (p.beta - 1.0) * std::log1p(-x) -
                          log_beta_function(p.alpha, p.beta);
                 },
                 [x](const ExponentialParams &p) {
                   if (x < 0.0) return kNegInf;
                   return std::log(p.rate) - p.rate * x;
                 }},
      params);
}

double normal_score(const MarginParams &params, double x) {
  if (const auto *p = std::get_if<NormalParams>(&params)) {
    validate(params);
    return (x - p->mean) / std::sqrt(p->variance);
  }
  const double u = std::clamp(margin_cdf(params, x), kCdfClamp, 1.0 - kCdfClamp);
  return probit(u);
}

MarginParams prior_sample(const PriorHyper &hyper, Rng &rng) {
  return std::visit(
      Overloaded{[&rng](const NormalInverseGammaPrior &h) -> MarginParams {
                   const double variance = 1.0 / gamma_shape_rate(rng, h.variance_shape, h.variance_scale);
                   const double sd = std::sqrt(variance / h.mean_precision_scale);
                   return NormalParams{h.mean_location + sd * standard_normal(rng), variance};
                 },
                 [&rng](const BetaShapePrior &h) -> MarginParams {
                   const double a = gamma_shape_rate(rng, h.alpha.shape, h.alpha.rate);
                   const double b = gamma_shape_rate(rng, h.beta.shape, h.beta.rate);
                   return BetaParams{a, b};
                 },
                 [&rng](const ExponentialRatePrior &h) -> MarginParams {
                   return ExponentialParams{gamma_shape_rate(rng, h.rate.shape, h.rate.rate)};
                 }},
      hyper);
}

double prior_logpdf(const PriorHyper &hyper, const MarginParams &params) {
  if (family_of(hyper) != family_of(params)) {
    throw DomainError("prior_logpdf: prior and parameters belong to different families");
  }
  return std::visit(
      Overloaded{[&params](const NormalInverseGammaPrior &h) {
                   const auto &p = std::get<NormalParams>(params);
                   if (!(p.variance > 0.0)) return kNegInf;
                   const double mean_var = p.variance / h.mean_precision_scale;
                   const double log_mean =
                       phi_logpdf((p.mean - h.mean_location) / std::sqrt(mean_var)) -
                       0.5 * std::log(mean_var);
                   const double log_var = h.variance_shape * std::log(h.variance_scale) -
                                          std::lgamma(h.variance_shape) -
                                          (h.variance_shape + 1.0) * std::log(p.variance) -
                                          h.variance_scale / p.variance;
                   return log_mean + log_var;
                 },
                 [&params](const BetaShapePrior &h) {
                   const auto &p = std::get<BetaParams>(params);
                   return gamma_logpdf(h.alpha, p.alpha) + gamma_logpdf(h.beta, p.beta);
                 },
                 [&params](const ExponentialRatePrior &h) {
                   return gamma_logpdf(h.rate, std::get<ExponentialParams>(params).rate);
                 }},
      hyper);
}

std::size_t parameter_count(MarginFamily family) {
  return family == MarginFamily::exponential ? 1 : 2;
}

UnconstrainedParams to_unconstrained(const MarginParams &params) {
  return std::visit(
      Overloaded{[](const NormalParams &p) { return UnconstrainedParams{{p.mean, std::log(p.variance)}, 2}; },
                 [](const BetaParams &p) {
                   return UnconstrainedParams{{std::log(p.alpha), std::log(p.beta)}, 2};
                 },
                 [](const ExponentialParams &p) { return UnconstrainedParams{{std::log(p.rate), 0.0}, 1}; }},
      params);
}

MarginParams from_unconstrained(MarginFamily family, const UnconstrainedParams &c) {
  switch (family) {
    case MarginFamily::normal:
      return NormalParams{c.values[0], std::exp(c.values[1])};
    case MarginFamily::beta:
      return BetaParams{std::exp(c.values[0]), std::exp(c.values[1])};
    case MarginFamily::exponential:
      return ExponentialParams{std::exp(c.values[0])};
  }
  throw DomainError("unknown margin family");
}

double log_jacobian(const UnconstrainedParams &c, MarginFamily family) {
  switch (family) {
    case MarginFamily::normal:
      return c.values[1];
    case MarginFamily::beta:
      return c.values[0] + c.values[1];
    case MarginFamily::exponential:
      return c.values[0];
  }
  return 0.0;
}

std::string describe(const MarginParams &params) {
  std::ostringstream os;
  os.precision(6);
  std::visit(Overloaded{[&os](const NormalParams &p) {
                          os << "normal(mean=" << p.mean << ", variance=" << p.variance << ")";
                        },
                        [&os](const BetaParams &p) {
                          os << "beta(alpha=" << p.alpha << ", beta=" << p.beta << ")";
                        },
                        [&os](const ExponentialParams &p) { os << "exponential(rate=" << p.rate << ")"; }},
             params);
  return os.str();
}

}  // namespace copmix
