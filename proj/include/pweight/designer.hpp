#pragma once

// Closed-form two-valued weight designs at the marginal effect z_{alpha/m}
// (the effect that has power 1/2 under unit weight).

#include "pweight/hypotheses.hpp"
#include "pweight/robustness.hpp"

#include <cstddef>

namespace pweight::designer {

using robustness::BinaryWeightScheme;

struct DesignResult {
    BinaryWeightScheme scheme;
    double target_power; // 1 - beta, reached at weight w1
    double min_power;    // power at weight w0
    double c_value;      // Q(z_{alpha/m} + z_{1-beta}) = alpha w1 / m
};

/// Maximize the minimum power while at least a fraction epsilon of the
/// hypotheses reach power 1 - beta. Throws DomainError when
/// alpha - epsilon c m <= 0.
DesignResult design_min_power(double epsilon, double beta, double alpha, std::size_t m);

/// Maximize the number of hypotheses at power 1 - beta while every
/// hypothesis keeps power at least delta. k = floor(m epsilon).
DesignResult design_max_count(double beta, double delta, double alpha, std::size_t m);

/// Normalized (epsilon, B) scheme; see BinaryWeightScheme::from_ratio.
BinaryWeightScheme binary_scheme(double epsilon, double B, std::size_t m);

/// True when the scheme's k is 0 or m, so only one weight value is used.
bool is_degenerate(const BinaryWeightScheme& scheme, std::size_t m);

/// Length-m weights: the first k entries at w1, the rest at w0, rescaled to
/// mean one (a no-op when epsilon m is integral).
WeightVector expand(const BinaryWeightScheme& scheme, std::size_t m);

} // namespace pweight::designer
