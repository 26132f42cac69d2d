#include "pweight/estimator.hpp"

#include "pweight/distfn.hpp"
#include "pweight/error.hpp"
#include "pweight/optimal.hpp"
#include "pweight/procedures.hpp"
#include "pweight/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>

namespace pweight::estimator {

namespace {

void check_r(std::size_t r)
{
    if (r < 2) {
        throw DomainError("group needs at least 2 statistics");
    }
}

// p-values of 0 or 1 would give infinite statistics.
double z_from_p(double p)
{
    constexpr double kEdge = 1e-300;
    return distfn::upper_quantile(std::clamp(p, kEdge, 1.0 - 1e-16));
}

SmoothedWeights estimate(std::span<const double> stats, std::span<const std::size_t> groups,
                         std::span<const std::string> names, const EstimatorOptions& options);

} // namespace

Moments group_moments(std::span<const double> stats)
{
    check_r(stats.size());
    const double r = static_cast<double>(stats.size());
    double mean = 0.0;
    for (double t : stats) {
        mean += t;
    }
    mean /= r;
    double ss = 0.0;
    for (double t : stats) {
        ss += (t - mean) * (t - mean);
    }
    return {mean, ss / (r - 1.0), stats.size()};
}

MixtureFit mom_normal(double Y, double S2, std::size_t r)
{
    check_r(r);
    const double denom = Y * Y + S2 - 1.0;
    if (!(denom > 0.0)) {
        return {0.0, 0.0};
    }
    const double pi = Y * Y / denom;
    if (!(pi > 1.0 / static_cast<double>(r))) {
        return {std::clamp(pi, 0.0, 1.0), 0.0};
    }
    const double xi = Y / pi;
    return {std::min(pi, 1.0), xi};
}

MixtureFit mom_chisq(double Y, double S2, std::size_t r, ChisqVariant variant)
{
    check_r(r);
    if (!(Y > 1.0)) {
        return {0.0, 0.0};
    }
    const double xi2 = variant == ChisqVariant::classic
                           ? (S2 + Y * Y + 3.0) / (Y - 1.0)
                           : (S2 + Y * Y - 3.0) / (Y - 1.0) - 6.0;
    if (!(xi2 > 0.0) || !std::isfinite(xi2)) {
        return {0.0, 0.0};
    }
    const double pi = (Y - 1.0) / xi2;
    const double rd = static_cast<double>(r);
    if (!(pi > 1.0 / rd && pi < (rd - 1.0) / rd)) {
        return {std::clamp(pi, 0.0, 1.0), 0.0};
    }
    return {pi, std::sqrt(xi2)};
}

SmoothedWeights weights_from_groups(std::span<const double> stats,
                                    std::span<const std::size_t> groups,
                                    const EstimatorOptions& options)
{
    const std::size_t K =
        groups.empty() ? 0 : *std::max_element(groups.begin(), groups.end()) + 1;
    std::vector<std::string> names(K);
    for (std::size_t k = 0; k < K; ++k) {
        names[k] = std::to_string(k);
    }
    return estimate(stats, groups, names, options);
}

namespace {

SmoothedWeights estimate(std::span<const double> stats, std::span<const std::size_t> groups,
                         std::span<const std::string> names, const EstimatorOptions& options)
{
    if (stats.size() != groups.size()) {
        throw ContractError("statistics and group labels differ in length");
    }
    if (stats.empty()) {
        throw DomainError("no statistics");
    }
    if (!(options.gamma_smooth >= 0.0 && options.gamma_smooth <= 1.0)) {
        throw DomainError("smoothing gamma must lie in [0, 1]");
    }
    if (!(options.alpha > 0.0 && options.alpha < 1.0)) {
        throw DomainError("alpha must lie in (0, 1)");
    }
    const std::size_t m = stats.size();
    const std::size_t K = names.size();
    std::vector<std::vector<double>> members(K);
    for (std::size_t j = 0; j < m; ++j) {
        const double t = stats[j];
        members[groups[j]].push_back(options.model == Model::chisq ? t * t : t);
    }

    SmoothedWeights out{options.gamma_smooth,
                        std::numeric_limits<double>::quiet_NaN(),
                        {},
                        {},
                        {},
                        WeightVector::unit(m),
                        {}};
    std::vector<MixtureAtom> atoms;
    bool any_effect = false;
    for (std::size_t k = 0; k < K; ++k) {
        const auto& g = members[k];
        GroupEstimate est{names[k], g.size(), 0.0, 0.0, 0.0, 0.0};
        if (g.empty()) {
            throw DomainError("group " + est.group_id + " is empty");
        }
        if (g.size() < 2) {
            out.warnings.push_back("group " + est.group_id +
                                   " has a single test; its effect is set to 0");
        } else {
            if (g.size() < kRecommendedGroupSize) {
                out.warnings.push_back("group " + est.group_id + " has only " +
                                       std::to_string(g.size()) +
                                       " tests; estimates are unreliable below " +
                                       std::to_string(kRecommendedGroupSize));
            }
            const auto mom = group_moments(g);
            est.Y_k = mom.Y;
            est.S2_k = mom.S2;
            const auto fit = options.model == Model::normal
                                 ? mom_normal(mom.Y, mom.S2, mom.r)
                                 : mom_chisq(mom.Y, mom.S2, mom.r, options.variant);
            est.pi_hat = fit.pi_hat;
            est.xi_hat = fit.xi_hat;
        }
        // A negative normal-model effect gets no one-sided weight.
        est.xi_hat = std::max(0.0, est.xi_hat);
        any_effect = any_effect || est.xi_hat > optimal::kTinyEffect;
        atoms.push_back({static_cast<double>(g.size()) / static_cast<double>(m),
                         est.xi_hat > optimal::kTinyEffect ? est.xi_hat : 0.0});
        out.groups.push_back(std::move(est));
    }

    if (!any_effect) {
        out.warnings.push_back("no group has a positive estimated effect; using unit weights");
        out.raw.assign(K, 1.0);
        out.smoothed.assign(K, 1.0);
        return out;
    }

    // Masses r_k / m can miss 1 by rounding; fold the slack into the largest.
    double total = 0.0;
    for (const auto& a : atoms) {
        total += a.mass;
    }
    std::max_element(atoms.begin(), atoms.end(), [](const auto& a, const auto& b) {
        return a.mass < b.mass;
    })->mass += 1.0 - total;

    const auto sol = optimal::solve_c_mixture(MixtureSpec(atoms), options.alpha, m);
    out.c = sol.c;
    out.raw = sol.atom_weights;

    double mean_raw = 0.0;
    for (double w : out.raw) {
        mean_raw += w;
    }
    mean_raw /= static_cast<double>(K);
    const double gamma = options.gamma_smooth;
    out.smoothed.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        out.smoothed[k] = (1.0 - gamma) * out.raw[k] + gamma * mean_raw;
    }

    std::vector<double> per_test(m);
    for (std::size_t j = 0; j < m; ++j) {
        per_test[j] = out.smoothed[groups[j]];
    }
    out.per_test = WeightVector::normalize(std::move(per_test));
    for (auto& w : out.smoothed) {
        w *= out.per_test.scale_factor();
    }
    return out;
}

} // namespace

SmoothedWeights weights_from_groups(const TestBattery& battery, const EstimatorOptions& options)
{
    if (!battery.has_groups()) {
        throw ContractError("battery has no group column");
    }
    std::vector<double> stats;
    if (battery.has_statistics()) {
        const auto s = battery.statistics();
        stats.assign(s.begin(), s.end());
    } else {
        stats.reserve(battery.size());
        for (double p : battery.p_values()) {
            stats.push_back(z_from_p(p));
        }
    }
    return estimate(stats, battery.group_index(), battery.group_names(), options);
}

PipelineResult fwer_of_estimated_weights(const PipelineConfig& config, std::size_t reps,
                                         std::uint64_t seed, unsigned threads)
{
    if (config.n_groups == 0 || config.group_size < 2) {
        throw DomainError("pipeline: need groups of at least 2 tests");
    }
    if (config.n_enriched > config.n_groups) {
        throw DomainError("pipeline: more enriched groups than groups");
    }
    if (!(config.signal_fraction >= 0.0 && config.signal_fraction <= 1.0)) {
        throw DomainError("pipeline: signal fraction must lie in [0, 1]");
    }
    if (reps == 0) {
        throw DomainError("pipeline: reps must be positive");
    }
    const std::size_t m = config.n_groups * config.group_size;
    const auto n_signal_per_group = static_cast<std::size_t>(
        std::llround(config.signal_fraction * static_cast<double>(config.group_size)));

    std::vector<std::size_t> groups(m);
    auto truth = std::make_unique<bool[]>(m);
    for (std::size_t j = 0; j < m; ++j) {
        groups[j] = j / config.group_size;
        truth[j] = groups[j] < config.n_enriched && j % config.group_size < n_signal_per_group;
    }
    const std::span<const bool> is_alt(truth.get(), m);
    const double alpha = config.options.alpha;

    std::vector<MCOutcome> weighted(reps), plain(reps);
    simulate::parallel_for(reps, threads, [&](std::size_t r) {
        auto rng = simulate::make_rng(seed, r);
        std::normal_distribution<double> normal(0.0, 1.0);
        std::vector<double> stats(m), p(m);
        for (std::size_t j = 0; j < m; ++j) {
            stats[j] = normal(rng) + (is_alt[j] ? config.signal_mean : 0.0);
            p[j] = config.options.model == Model::chisq
                       ? distfn::noncentral_chisq1_upper_tail(stats[j] * stats[j], 0.0)
                       : distfn::upper_tail(stats[j]);
        }
        const auto est = weights_from_groups(stats, groups, config.options);
        weighted[r] = tally(procedures::weighted_bonferroni(p, est.per_test, alpha), is_alt);
        plain[r] = tally(procedures::weighted_bonferroni(p, WeightVector::unit(m), alpha),
                         is_alt);
    });

    PipelineResult out{};
    out.reps = reps;
    std::uint64_t ge = 0;
    for (std::size_t r = 0; r < reps; ++r) {
        out.any_false += weighted[r].false_positives > 0 ? 1 : 0;
        out.mean_true_weighted += static_cast<double>(weighted[r].true_positives);
        out.mean_true_unweighted += static_cast<double>(plain[r].true_positives);
        ge += weighted[r].true_positives >= plain[r].true_positives ? 1 : 0;
    }
    const double n = static_cast<double>(reps);
    out.fwer = static_cast<double>(out.any_false) / n;
    out.se = std::sqrt(out.fwer * (1.0 - out.fwer) / n);
    out.bound = simulate::fwer_bound(alpha, reps);
    out.mean_true_weighted /= n;
    out.mean_true_unweighted /= n;
    out.frac_weighted_ge = static_cast<double>(ge) / n;
    return out;
}

} // namespace pweight::estimator
