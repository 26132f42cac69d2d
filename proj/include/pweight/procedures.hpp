#pragma once

// Familywise- and false-discovery-controlling rejection procedures, plain and
// p-value weighted. A weighted procedure works on Q_j = P_j / w_j with
// Q_j = +inf when w_j = 0, so zero-weight hypotheses are never rejected.

#include "pweight/hypotheses.hpp"

#include <span>
#include <vector>

namespace pweight::procedures {

enum class Procedure { bonferroni, holm, bh };

/// Reject j iff P_j <= alpha * w_j / m.
RejectionSet weighted_bonferroni(const TestBattery& battery, const WeightVector& weights,
                                 double alpha);

/// Holm's weighted step-down: walk Q_j upward, rejecting while
/// Q_(i) <= alpha / (sum of weights not yet rejected).
RejectionSet weighted_holm(const TestBattery& battery, const WeightVector& weights,
                           double alpha);

/// Benjamini-Hochberg step-up at level alpha.
RejectionSet bh(const TestBattery& battery, double alpha);

/// Benjamini-Hochberg step-up applied to Q_j = P_j / w_j.
RejectionSet weighted_bh(const TestBattery& battery, const WeightVector& weights, double alpha);

// Overloads on bare p-value spans, for Monte Carlo loops that never build a
// TestBattery.
RejectionSet weighted_bonferroni(std::span<const double> p, const WeightVector& weights,
                                 double alpha);
RejectionSet weighted_holm(std::span<const double> p, const WeightVector& weights,
                           double alpha);
RejectionSet weighted_bh(std::span<const double> p, const WeightVector& weights, double alpha);
RejectionSet apply(Procedure procedure, std::span<const double> p, const WeightVector& weights,
                   double alpha);

/// Dispatches on `procedure`; bh uses weighted_bh.
RejectionSet apply(Procedure procedure, const TestBattery& battery, const WeightVector& weights,
                   double alpha);

/// Smallest level at which each hypothesis would be rejected by `procedure`
/// (adjusted p-values, capped at 1). rejected(alpha) == {j : q_j <= alpha}.
std::vector<double> adjusted_p_values(Procedure procedure, const TestBattery& battery,
                                      const WeightVector& weights);

/// Order of hypotheses by (key, original index).
std::vector<std::size_t> stable_order(std::span<const double> keys);

/// Asymptotic BH threshold for a two-group model with a common one-sided
/// alternative mean.
struct BHAsymptotic {
    double u_star = 0.0;    // largest positive root of H(u) = beta * u, 0 if none
    double beta_coef = 0.0; // (1/alpha - A0) / (1 - A0)
    double A0 = 0.0;        // null fraction m0 / m
    double alt_mean = 0.0;
    bool root_found = false;
    bool within_bounds = false; // alpha/m <= u_star <= alpha
    double residual = 0.0;      // |H(u*) - beta u*|
};

BHAsymptotic bh_asymptotic_threshold(double alt_mean, double A0, double alpha, std::size_t m);

} // namespace pweight::procedures
