#pragma once

namespace copmix {

/// Standard normal CDF.
double phi_cdf(double z);

/// Standard normal log-density.
double phi_logpdf(double z);

/// Inverse standard normal CDF (Wichura's AS241, PPND16). Throws DomainError
/// unless 0 < u < 1; callers clamp boundary probabilities first.
double probit(double u);

/// Regularized incomplete beta function I_x(a, b), evaluated with a
/// modified-Lentz continued fraction.
double incomplete_beta(double a, double b, double x);

/// log B(a, b).
double log_beta_function(double a, double b);

}  // namespace copmix
