#include "pweight/procedures.hpp"

#include "pweight/distfn.hpp"
#include "pweight/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace pweight::procedures {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_alpha(double alpha)
{
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw DomainError("alpha must lie in (0, 1)");
    }
}

void check_inputs(std::span<const double> p, const WeightVector& weights, double alpha)
{
    check_alpha(alpha);
    if (weights.size() != p.size()) {
        throw ContractError("weights and battery differ in length");
    }
}

std::vector<double> weighted_p(std::span<const double> p, const WeightVector& weights)
{
    std::vector<double> q(p.size());
    for (std::size_t j = 0; j < q.size(); ++j) {
        q[j] = weights[j] > 0.0 ? p[j] / weights[j] : kInf;
    }
    return q;
}

// Step-up on arbitrary keys: reject every key <= the largest key_(i) with
// key_(i) <= alpha * i / m.
RejectionSet step_up(std::span<const double> keys, double alpha)
{
    const std::size_t m = keys.size();
    const auto order = stable_order(keys);
    double cutoff = -1.0;
    for (std::size_t i = m; i-- > 0;) {
        const double key = keys[order[i]];
        if (key <= alpha * static_cast<double>(i + 1) / static_cast<double>(m)) {
            cutoff = key;
            break;
        }
    }
    std::vector<std::size_t> rejected;
    for (std::size_t j = 0; j < m; ++j) {
        if (keys[j] <= cutoff) {
            rejected.push_back(j);
        }
    }
    return RejectionSet(std::move(rejected), m);
}

// Remaining weight before each step of the Holm walk, capped at the budget m.
std::vector<double> holm_remaining(const WeightVector& weights,
                                   std::span<const std::size_t> order)
{
    const std::size_t m = order.size();
    std::vector<double> remaining(m);
    double suffix = 0.0;
    for (std::size_t i = m; i-- > 0;) {
        suffix += weights[order[i]];
        remaining[i] = std::min(suffix, static_cast<double>(m));
    }
    return remaining;
}

} // namespace

std::vector<std::size_t> stable_order(std::span<const double> keys)
{
    std::vector<std::size_t> order(keys.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
    return order;
}

RejectionSet weighted_bonferroni(std::span<const double> p, const WeightVector& weights,
                                 double alpha)
{
    check_inputs(p, weights, alpha);
    const double m = static_cast<double>(p.size());
    std::vector<std::size_t> rejected;
    for (std::size_t j = 0; j < p.size(); ++j) {
        if (weights[j] > 0.0 && p[j] <= alpha * weights[j] / m) {
            rejected.push_back(j);
        }
    }
    return RejectionSet(std::move(rejected), p.size());
}

RejectionSet weighted_holm(std::span<const double> p, const WeightVector& weights, double alpha)
{
    check_inputs(p, weights, alpha);
    const auto q = weighted_p(p, weights);
    const auto order = stable_order(q);
    const auto remaining = holm_remaining(weights, order);

    std::vector<std::size_t> rejected;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const std::size_t j = order[i];
        if (!(remaining[i] > 0.0) || !(q[j] * remaining[i] <= alpha)) {
            break;
        }
        rejected.push_back(j);
    }
    return RejectionSet(std::move(rejected), p.size());
}

RejectionSet weighted_bh(std::span<const double> p, const WeightVector& weights, double alpha)
{
    check_inputs(p, weights, alpha);
    const auto q = weighted_p(p, weights);
    return step_up(q, alpha);
}

RejectionSet apply(Procedure procedure, std::span<const double> p, const WeightVector& weights,
                   double alpha)
{
    switch (procedure) {
    case Procedure::bonferroni:
        return weighted_bonferroni(p, weights, alpha);
    case Procedure::holm:
        return weighted_holm(p, weights, alpha);
    case Procedure::bh:
        return weighted_bh(p, weights, alpha);
    }
    throw ContractError("unknown procedure");
}

RejectionSet weighted_bonferroni(const TestBattery& battery, const WeightVector& weights,
                                 double alpha)
{
    return weighted_bonferroni(battery.p_values(), weights, alpha);
}

RejectionSet weighted_holm(const TestBattery& battery, const WeightVector& weights, double alpha)
{
    return weighted_holm(battery.p_values(), weights, alpha);
}

RejectionSet bh(const TestBattery& battery, double alpha)
{
    check_alpha(alpha);
    return step_up(battery.p_values(), alpha);
}

RejectionSet weighted_bh(const TestBattery& battery, const WeightVector& weights, double alpha)
{
    return weighted_bh(battery.p_values(), weights, alpha);
}

RejectionSet apply(Procedure procedure, const TestBattery& battery, const WeightVector& weights,
                   double alpha)
{
    return apply(procedure, battery.p_values(), weights, alpha);
}

std::vector<double> adjusted_p_values(Procedure procedure, const TestBattery& battery,
                                      const WeightVector& weights)
{
    if (weights.size() != battery.size()) {
        throw ContractError("weights and battery differ in length");
    }
    const std::size_t m = battery.size();
    const auto q = weighted_p(battery.p_values(), weights);
    std::vector<double> adj(m, 1.0);

    switch (procedure) {
    case Procedure::bonferroni:
        for (std::size_t j = 0; j < m; ++j) {
            adj[j] = std::min(1.0, q[j] * static_cast<double>(m));
        }
        break;
    case Procedure::holm: {
        const auto order = stable_order(q);
        const auto remaining = holm_remaining(weights, order);
        double running = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double step = remaining[i] > 0.0 ? q[order[i]] * remaining[i] : kInf;
            running = std::max(running, std::min(1.0, step));
            adj[order[i]] = running;
        }
        break;
    }
    case Procedure::bh: {
        const auto order = stable_order(q);
        double running = 1.0;
        for (std::size_t i = m; i-- > 0;) {
            const double step = q[order[i]] * static_cast<double>(m) / static_cast<double>(i + 1);
            running = std::min(running, std::min(1.0, step));
            adj[order[i]] = running;
        }
        break;
    }
    }
    return adj;
}

BHAsymptotic bh_asymptotic_threshold(double alt_mean, double A0, double alpha, std::size_t m)
{
    check_alpha(alpha);
    if (!(A0 > 0.0 && A0 < 1.0)) {
        throw DomainError("bh_asymptotic_threshold: A0 must lie in (0, 1)");
    }
    if (!(alt_mean > 0.0) || !std::isfinite(alt_mean)) {
        throw DomainError("bh_asymptotic_threshold: alternative mean must be positive");
    }
    if (m == 0) {
        throw DomainError("bh_asymptotic_threshold: m must be positive");
    }

    BHAsymptotic out;
    out.A0 = A0;
    out.alt_mean = alt_mean;
    out.beta_coef = (1.0 / alpha - A0) / (1.0 - A0);

    // H is the alternative p-value CDF; g has a trivial root at 0 that the
    // grid never visits.
    const auto g = [&](double u) {
        return distfn::upper_tail(distfn::threshold_quantile(u) - alt_mean) - out.beta_coef * u;
    };

    constexpr int kGrid = 512;
    const double log_lo = std::log(1e-16);
    const double log_hi = 0.0;
    double lo = 0.0, hi = 0.0;
    double prev_u = std::exp(log_lo);
    double prev_g = g(prev_u);
    for (int k = 1; k <= kGrid; ++k) {
        const double u = std::exp(log_lo + (log_hi - log_lo) * k / kGrid);
        const double gu = g(u);
        if (prev_g > 0.0 && gu <= 0.0) {
            lo = prev_u;
            hi = u;
            out.root_found = true;
        }
        prev_u = u;
        prev_g = gu;
    }
    if (!out.root_found) {
        return out;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        (g(mid) > 0.0 ? lo : hi) = mid;
    }
    out.u_star = std::fabs(g(lo)) <= std::fabs(g(hi)) ? lo : hi;
    out.residual = std::fabs(g(out.u_star));
    out.within_bounds = out.u_star >= alpha / static_cast<double>(m) && out.u_star <= alpha;
    return out;
}

} // namespace pweight::procedures
