#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <variant>

#include "copmix/random.hpp"

namespace copmix {

enum class MarginFamily { normal, beta, exponential };

std::string_view to_string(MarginFamily family);
/// Throws DomainError on unknown names.
MarginFamily parse_margin_family(std::string_view name);

struct NormalParams {
  double mean = 0.0;
  double variance = 1.0;
};

struct BetaParams {
  double alpha = 1.0;
  double beta = 1.0;
};

struct ExponentialParams {
  double rate = 1.0;
};

using MarginParams = std::variant<NormalParams, BetaParams, ExponentialParams>;

/// Gamma(shape, rate).
struct GammaHyper {
  double shape = 1.0;
  double rate = 1.0;
};

/// mean | variance ~ N(mean_location, variance / mean_precision_scale),
/// variance ~ InvGamma(variance_shape, variance_scale).
struct NormalInverseGammaPrior {
  double mean_location = 0.0;
  double mean_precision_scale = 0.1;
  double variance_shape = 2.0;
  double variance_scale = 1.0;
};

struct BetaShapePrior {
  GammaHyper alpha{1.0, 0.2};
  GammaHyper beta{1.0, 0.2};
};

struct ExponentialRatePrior {
  GammaHyper rate{2.0, 0.5};
};

using PriorHyper = std::variant<NormalInverseGammaPrior, BetaShapePrior, ExponentialRatePrior>;

/// Family of one margin together with the prior on its parameters.
struct MarginSpec {
  MarginFamily family = MarginFamily::normal;
  PriorHyper hyper = NormalInverseGammaPrior{};

  /// Spec with the default prior of the given family.
  static MarginSpec with_default_prior(MarginFamily family);
};

MarginFamily family_of(const MarginParams &params);
MarginFamily family_of(const PriorHyper &hyper);

/// Throws DomainError when a parameter leaves its domain.
void validate(const MarginParams &params);
/// Throws DomainError when a hyperparameter is not strictly positive or the
/// spec's family disagrees with its prior.
void validate(const MarginSpec &spec);

/// Probabilities handed to the probit are clamped to [kCdfClamp, 1 - kCdfClamp].
inline constexpr double kCdfClamp = 1e-15;

double margin_cdf(const MarginParams &params, double x);
/// Throws DomainError unless 0 < u < 1.
double margin_quantile(const MarginParams &params, double u);
/// -infinity outside the support.
double margin_logpdf(const MarginParams &params, double x);

/// Normal score probit(F(x)) with the CDF clamped away from 0 and 1. For the
/// normal family this is the exact standardisation (x - mean) / sd.
double normal_score(const MarginParams &params, double x);

MarginParams prior_sample(const PriorHyper &hyper, Rng &rng);
/// Log prior density of params in their natural parameterisation.
double prior_logpdf(const PriorHyper &hyper, const MarginParams &params);

/// Unconstrained coordinates used by random-walk proposals: the normal mean is
/// kept as is, every positive parameter is log-transformed.
struct UnconstrainedParams {
  std::array<double, 2> values{};
  std::size_t size = 0;
};

std::size_t parameter_count(MarginFamily family);
UnconstrainedParams to_unconstrained(const MarginParams &params);
MarginParams from_unconstrained(MarginFamily family, const UnconstrainedParams &coords);
/// log |d natural / d unconstrained|.
double log_jacobian(const UnconstrainedParams &coords, MarginFamily family);

std::string describe(const MarginParams &params);

}  // namespace copmix
