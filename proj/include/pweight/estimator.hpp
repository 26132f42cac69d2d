#pragma once

// Grouped, data-driven weights. Each group's statistics are summarized by
// their mean and variance, a two-point mixture (null vs. effect xi) is fitted
// by the method of moments, and the optimal weights for the fitted effects
// are smoothed toward their group average.

#include "pweight/hypotheses.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pweight::estimator {

enum class Model { normal, chisq };

/// Classic chi-square estimator, or the one re-derived from the moments of
/// the noncentral chi-square mixture.
enum class ChisqVariant { classic, derived };

struct Moments {
    double Y;  // sample mean
    double S2; // unbiased sample variance
    std::size_t r;
};

/// Requires at least two statistics.
Moments group_moments(std::span<const double> stats);

struct MixtureFit {
    double pi_hat; // in [0, 1]
    double xi_hat; // 0 when a guard fails
};

/// pi = Y^2 / (Y^2 + S2 - 1), xi = Y / pi, kept only when pi > 1/r.
MixtureFit mom_normal(double Y, double S2, std::size_t r);

/// classic: xi^2 = (S2 + Y^2 + 3) / (Y - 1).
/// derived: xi^2 = (S2 + Y^2 - 3) / (Y - 1) - 6.
/// pi = (Y - 1) / xi^2; kept only when Y > 1 and 1/r < pi < (r - 1)/r.
MixtureFit mom_chisq(double Y, double S2, std::size_t r,
                     ChisqVariant variant = ChisqVariant::classic);

struct GroupEstimate {
    std::string group_id;
    std::size_t r_k;
    double Y_k;
    double S2_k;
    double pi_hat;
    double xi_hat;
};

struct SmoothedWeights {
    double gamma_smooth;
    double c;                        // normalizing constant, NaN on fallback
    std::vector<GroupEstimate> groups;
    std::vector<double> raw;         // w(xi_hat_k) per group
    std::vector<double> smoothed;    // per group, after renormalization
    WeightVector per_test;
    std::vector<std::string> warnings;
};

struct EstimatorOptions {
    Model model = Model::normal;
    ChisqVariant variant = ChisqVariant::classic;
    double gamma_smooth = 0.05;
    double alpha = 0.05;
};

/// Groups with fewer than this many tests trigger a warning.
inline constexpr std::size_t kRecommendedGroupSize = 20;

/// Uses the battery's statistics when present, otherwise z = Qinv(p). The
/// chisq model works on the squared statistics.
SmoothedWeights weights_from_groups(const TestBattery& battery, const EstimatorOptions& options);

/// Same, on bare statistics and 0-based group labels (K = max label + 1).
SmoothedWeights weights_from_groups(std::span<const double> stats,
                                    std::span<const std::size_t> groups,
                                    const EstimatorOptions& options);

struct PipelineConfig {
    std::size_t n_groups = 20;
    std::size_t group_size = 500;
    // Groups [0, n_enriched) carry signals: a fraction signal_fraction of
    // their tests has mean signal_mean.
    std::size_t n_enriched = 0;
    double signal_fraction = 0.0;
    double signal_mean = 0.0;
    EstimatorOptions options;
};

struct PipelineResult {
    std::uint64_t reps;
    std::uint64_t any_false; // replicates with at least one false rejection
    double fwer;
    double se;               // binomial SE at the estimate
    double bound;            // alpha + 3 sqrt(alpha (1 - alpha) / reps)
    double mean_true_weighted;
    double mean_true_unweighted;
    double frac_weighted_ge; // replicates with weighted T >= unweighted T
};

/// Monte Carlo of the full pipeline: draw statistics, estimate weights from
/// the same data, then weighted Bonferroni.
PipelineResult fwer_of_estimated_weights(const PipelineConfig& config, std::size_t reps,
                                         std::uint64_t seed, unsigned threads = 0);

} // namespace pweight::estimator
