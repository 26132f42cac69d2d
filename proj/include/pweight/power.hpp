#pragma once

// Power of a weighted Bonferroni test at a single alternative, and its
// averages over configurations and mixtures.
//
// A hypothesis with weight w is tested at level alpha * w / m. Weight 0 gives
// an infinite cutoff (power 0); a level of 1 or more gives power 1.

#include "pweight/hypotheses.hpp"

#include <cstddef>
#include <functional>

namespace pweight::power {

/// P(T > z_{alpha w / m}) for T ~ N(xi, 1).
double power_one_sided(double xi, double w, double alpha, std::size_t m);

/// P(|T| > z_{alpha w / 2m}) for T ~ N(xi, 1).
double power_two_sided(double xi, double w, double alpha, std::size_t m);

double power(double xi, double w, double alpha, std::size_t m, Sidedness sidedness);

/// Mean power over the alternatives of `config` (xi_j > 0 one-sided,
/// xi_j != 0 two-sided). Throws DomainError when there are none.
double average_power(const EffectConfiguration& config, const WeightVector& weights,
                     double alpha);

using WeightFunction = std::function<double(double location)>;

/// Average power when effects follow the mixture Q and weights are a function
/// of location. The weight function must integrate to 1 against Q.
double average_power_mixture(const MixtureSpec& mixture, const WeightFunction& weight,
                             double alpha, std::size_t m);

/// Average power under the optimal weights rho_c (one-sided).
double oracle_power(const EffectConfiguration& config, double alpha);

} // namespace pweight::power
