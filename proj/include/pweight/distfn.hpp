#pragma once

// Standard normal and one-degree-of-freedom noncentral chi-square tails.
//
// Everything here works in the upper tail so that probabilities near the
// genome-wide thresholds (1e-8 and below) keep full relative precision.

namespace pweight::distfn {

/// Standard normal density.
double density(double z) noexcept;

/// Upper tail 1 - Phi(z), evaluated without forming 1 - Phi(z).
/// Relative error is near machine precision until the result leaves the
/// normal double range (z above roughly 37.5).
double upper_tail(double z) noexcept;

/// Lower tail Phi(z) = upper_tail(-z).
inline double lower_tail(double z) noexcept { return upper_tail(-z); }

/// log(upper_tail(z)), finite for every finite z. Uses the Mills-ratio
/// continued fraction once the tail would underflow.
double log_upper_tail(double z) noexcept;

/// Inverse of upper_tail: the z with upper_tail(z) == p.
/// Throws DomainError unless 0 < p < 1.
double upper_quantile(double p);

/// Threshold z_t for t >= 0, extended to the closed interval: +inf at t == 0
/// and -inf at t >= 1. Used wherever a weight can push a level to 0 or past 1.
double threshold_quantile(double t);

/// P(chi2_1(lambda) > x) for x, lambda >= 0. Throws DomainError on negatives.
double noncentral_chisq1_upper_tail(double x, double lambda);

} // namespace pweight::distfn
