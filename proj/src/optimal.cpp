#include "pweight/optimal.hpp"

#include "pweight/distfn.hpp"
#include "pweight/error.hpp"
#include "pweight/rootfind.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace pweight::optimal {

namespace {

void check_level(double alpha, std::size_t m)
{
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw DomainError("alpha must lie in (0, 1)");
    }
    if (m == 0) {
        throw DomainError("m must be positive");
    }
}

// Power at effect xi under the weight rho_c(xi).
double power_at_optimum(double xi, double c)
{
    return xi > kTinyEffect ? distfn::upper_tail(c / xi - 0.5 * xi) : 0.0;
}

// Finds c with sum_i mass_i * rho_c(loc_i) = 1. `atoms` is any range of
// (mass, location) pairs; nothing is allocated.
template <class Atoms>
double solve_normalization(const Atoms& atoms, double alpha, std::size_t m)
{
    double effective_mass = 0.0;
    for (const auto& [mass, loc] : atoms) {
        if (loc > kTinyEffect) {
            effective_mass += mass;
        }
    }
    if (!(effective_mass > 0.0)) {
        throw DomainError("solve_c: no positive effects to carry the weight budget");
    }
    // rho_c <= m / alpha, so the budget is reachable only with enough mass.
    if (effective_mass * static_cast<double>(m) / alpha < 1.0) {
        throw DomainError("solve_c: positive-effect mass below alpha / m; budget unreachable");
    }

    const auto excess = [&](double c) {
        double total = 0.0;
        for (const auto& [mass, loc] : atoms) {
            total += mass * rho(loc, c, alpha, m);
        }
        return total - 1.0;
    };

    constexpr double kLimit = 1e300;
    double lo = 0.0, hi = 0.0;
    if (excess(0.0) > 0.0) {
        hi = 1.0;
        while (excess(hi) > 0.0) {
            lo = hi;
            hi *= 2.0;
            if (hi > kLimit) {
                throw DomainError("solve_c: failed to bracket c from above");
            }
        }
    } else {
        lo = -1.0;
        while (excess(lo) < 0.0) {
            hi = lo;
            lo *= 2.0;
            if (lo < -kLimit) {
                throw DomainError("solve_c: failed to bracket c from below");
            }
        }
    }
    return rootfind::bisect(excess, lo, hi);
}

struct ConfigAtoms {
    std::span<const double> means;
    double mass;

    struct Iter {
        const double* p;
        double mass;
        std::pair<double, double> operator*() const { return {mass, *p}; }
        Iter& operator++()
        {
            ++p;
            return *this;
        }
        bool operator!=(const Iter& o) const { return p != o.p; }
    };
    Iter begin() const { return {means.data(), mass}; }
    Iter end() const { return {means.data() + means.size(), mass}; }
};

struct MixtureAtoms {
    std::span<const MixtureAtom> atoms;

    struct Iter {
        const MixtureAtom* p;
        std::pair<double, double> operator*() const { return {p->mass, p->location}; }
        Iter& operator++()
        {
            ++p;
            return *this;
        }
        bool operator!=(const Iter& o) const { return p != o.p; }
    };
    Iter begin() const { return {atoms.data()}; }
    Iter end() const { return {atoms.data() + atoms.size()}; }
};

} // namespace

double rho(double xi, double c, double alpha, std::size_t m)
{
    if (!(xi > kTinyEffect)) {
        return 0.0;
    }
    const double scale = static_cast<double>(m) / alpha;
    const double arg = 0.5 * xi + c / xi;
    if (arg < 30.0) {
        return scale * distfn::upper_tail(arg);
    }
    // Far tail: combine in log space so the scale cannot rescue an underflow.
    return std::exp(std::log(scale) + distfn::log_upper_tail(arg));
}

OptimalWeightSolution solve_c(const EffectConfiguration& config, double alpha)
{
    const std::size_t m = config.size();
    check_level(alpha, m);
    if (config.m1() == 0) {
        throw DomainError("solve_c: configuration has no alternatives");
    }
    if (config.sidedness() != Sidedness::one_sided) {
        throw DomainError("solve_c: optimal weights are defined for one-sided effects");
    }
    const auto means = config.means();
    const double c = solve_normalization(ConfigAtoms{means, 1.0 / static_cast<double>(m)},
                                         alpha, m);

    std::vector<double> w(m);
    double total = 0.0;
    double power_total = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        w[j] = rho(means[j], c, alpha, m);
        total += w[j];
        if (means[j] > 0.0) {
            power_total += power_at_optimum(means[j], c);
        }
    }
    const double residual = std::fabs(total / static_cast<double>(m) - 1.0);
    return OptimalWeightSolution{c, WeightVector(std::move(w)),
                                 power_total / static_cast<double>(config.m1()), residual};
}

MixtureWeightSolution solve_c_mixture(const MixtureSpec& mixture, double alpha, std::size_t m)
{
    check_level(alpha, m);
    const double c = solve_normalization(MixtureAtoms{mixture.atoms()}, alpha, m);

    MixtureWeightSolution out{c, {}, 0.0, 0.0};
    double budget = 0.0;
    double alt_mass = 0.0;
    double power_total = 0.0;
    for (const auto& atom : mixture.atoms()) {
        const double w = rho(atom.location, c, alpha, m);
        out.atom_weights.push_back(w);
        budget += atom.mass * w;
        if (atom.location > 0.0) {
            alt_mass += atom.mass;
            power_total += atom.mass * power_at_optimum(atom.location, c);
        }
    }
    out.residual = std::fabs(budget - 1.0);
    out.oracle_power = alt_mass > 0.0 ? power_total / alt_mass : 0.0;
    return out;
}

std::vector<double> equivalent_cutoffs(const OptimalWeightSolution& solution,
                                       const EffectConfiguration& config)
{
    std::vector<double> t(config.size(), std::numeric_limits<double>::infinity());
    for (std::size_t j = 0; j < config.size(); ++j) {
        const double xi = config.means()[j];
        if (xi > kTinyEffect) {
            t[j] = 0.5 * xi + solution.c / xi;
        }
    }
    return t;
}

DiscontinuityExample discontinuity_example(std::size_t m, double alpha, double a, double gamma,
                                           double K, double c)
{
    check_level(alpha, m);
    if (!(a > 0.0 && gamma > 0.0 && a + gamma <= 1.0)) {
        throw DomainError("discontinuity_example: need a > 0, gamma > 0, a + gamma <= 1");
    }
    if (!(K > 0.0)) {
        throw DomainError("discontinuity_example: need K > 0");
    }
    if (!(c > 0.0)) {
        throw DomainError("discontinuity_example: need c > 0");
    }
    const double md = static_cast<double>(m);
    const double level_a = alpha / (md * (gamma * K + a));
    const double level_b = K * alpha / (md * (gamma * K + a));
    if (!(level_a > 0.0 && level_a < 0.5)) {
        throw DomainError("discontinuity_example: alpha / (m (gamma K + a)) must lie in (0, 1/2)");
    }
    if (!(level_b > 0.0 && level_b < 0.5)) {
        throw DomainError(
            "discontinuity_example: K alpha / (m (gamma K + a)) must lie in (0, 1/2)");
    }

    DiscontinuityExample out{};
    out.A = distfn::upper_quantile(level_a);
    out.B = distfn::upper_quantile(level_b);
    if (out.A * out.A < 2.0 * c) {
        throw DomainError("discontinuity_example: A^2 >= 2c violated");
    }
    if (out.B * out.B < 2.0 * c) {
        throw DomainError("discontinuity_example: B^2 >= 2c violated");
    }
    out.xi = out.A + std::sqrt(out.A * out.A - 2.0 * c);
    // B - sqrt(B^2 - 2c) written without cancellation.
    out.u = 2.0 * c / (out.B + std::sqrt(out.B * out.B - 2.0 * c));

    const MixtureSpec q({{1.0 - a, 0.0}, {a, out.xi}});
    const MixtureSpec qt({{1.0 - a - gamma, 0.0}, {gamma, out.u}, {a, out.xi}});
    const auto sol_q = solve_c_mixture(q, alpha, m);
    const auto sol_qt = solve_c_mixture(qt, alpha, m);

    out.w_on_xi_under_Q = sol_q.atom_weights[1];
    out.w_on_u_under_Qtilde = sol_qt.atom_weights[1];
    out.w_on_xi_under_Qtilde = sol_qt.atom_weights[2];
    out.ratio = out.w_on_xi_under_Q / out.w_on_xi_under_Qtilde;
    out.c_solved = sol_qt.c;
    out.ks_distance = ks_distance(q, qt);
    return out;
}

} // namespace pweight::optimal
