#include "pweight/power.hpp"

#include "pweight/distfn.hpp"
#include "pweight/error.hpp"
#include "pweight/optimal.hpp"

#include <cmath>

namespace pweight::power {

namespace {

void check(double w, double alpha, std::size_t m)
{
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw DomainError("alpha must lie in (0, 1)");
    }
    if (m == 0) {
        throw DomainError("m must be positive");
    }
    if (!(w >= 0.0)) {
        throw DomainError("weight must be nonnegative");
    }
}

} // namespace

double power_one_sided(double xi, double w, double alpha, std::size_t m)
{
    check(w, alpha, m);
    const double level = alpha * w / static_cast<double>(m);
    if (level <= 0.0) {
        return 0.0;
    }
    if (level >= 1.0) {
        return 1.0;
    }
    return distfn::upper_tail(distfn::upper_quantile(level) - xi);
}

double power_two_sided(double xi, double w, double alpha, std::size_t m)
{
    check(w, alpha, m);
    const double level = alpha * w / static_cast<double>(m);
    if (level <= 0.0) {
        return 0.0;
    }
    if (level >= 1.0) {
        return 1.0;
    }
    const double z = distfn::upper_quantile(0.5 * level);
    return distfn::upper_tail(z - xi) + distfn::upper_tail(z + xi);
}

double power(double xi, double w, double alpha, std::size_t m, Sidedness sidedness)
{
    return sidedness == Sidedness::one_sided ? power_one_sided(xi, w, alpha, m)
                                             : power_two_sided(xi, w, alpha, m);
}

double average_power(const EffectConfiguration& config, const WeightVector& weights,
                     double alpha)
{
    const std::size_t m = config.size();
    if (weights.size() != m) {
        throw ContractError("average_power: weights and configuration differ in length");
    }
    const std::size_t m1 = config.m1();
    if (m1 == 0) {
        throw DomainError("average_power: configuration has no alternatives");
    }
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        if (config.is_alternative(j)) {
            total += power(config.means()[j], weights[j], alpha, m, config.sidedness());
        }
    }
    return total / static_cast<double>(m1);
}

double average_power_mixture(const MixtureSpec& mixture, const WeightFunction& weight,
                             double alpha, std::size_t m)
{
    double budget = 0.0;
    double alt_mass = 0.0;
    double total = 0.0;
    for (const auto& atom : mixture.atoms()) {
        const double w = weight(atom.location);
        budget += atom.mass * w;
        if (atom.location > 0.0 && atom.mass > 0.0) {
            alt_mass += atom.mass;
            total += atom.mass * power_one_sided(atom.location, w, alpha, m);
        }
    }
    if (!(alt_mass > 0.0)) {
        throw DomainError("average_power_mixture: no mass on positive effects");
    }
    if (std::fabs(budget - 1.0) > WeightVector::kMeanTolerance) {
        throw ContractError("average_power_mixture: weight function integrates to " +
                            format_real(budget) + ", not 1");
    }
    return total / alt_mass;
}

double oracle_power(const EffectConfiguration& config, double alpha)
{
    return optimal::solve_c(config, alpha).oracle_power;
}

} // namespace pweight::power
