#include "pweight/designer.hpp"

#include "pweight/distfn.hpp"
#include "pweight/error.hpp"
#include "pweight/power.hpp"

#include <cmath>
#include <limits>

namespace pweight::designer {

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

void check_beta(double beta)
{
    if (!(beta > 0.0 && beta < 0.5)) {
        throw DomainError("beta must lie in (0, 1/2)");
    }
}

// Level at which the marginal effect z_{alpha/m} has power 1 - beta.
double level_for_power(double beta, double alpha, std::size_t m)
{
    const double z1 = distfn::upper_quantile(alpha / static_cast<double>(m));
    // z_{1-beta} = -z_beta
    return distfn::upper_tail(z1 - distfn::upper_quantile(beta));
}

} // namespace

DesignResult design_min_power(double epsilon, double beta, double alpha, std::size_t m)
{
    check_level(alpha, m);
    check_beta(beta);
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
        throw DomainError("design_min_power: epsilon must lie in (0, 1)");
    }
    const double md = static_cast<double>(m);
    const double c = level_for_power(beta, alpha, m);
    const double slack = alpha - epsilon * c * md;
    if (!(slack > 0.0)) {
        throw DomainError(
            "design_min_power: infeasible, alpha - epsilon c m <= 0 (too many hypotheses "
            "demanded at power 1 - beta)");
    }
    const double B = c * md * (1.0 - epsilon) / slack;

    DesignResult out{};
    out.scheme = BinaryWeightScheme::from_ratio(epsilon, B, m);
    out.c_value = c;
    out.target_power = 1.0 - beta;
    const double z1 = distfn::upper_quantile(alpha / md);
    out.min_power = power::power_one_sided(z1, out.scheme.w0, alpha, m);
    return out;
}

DesignResult design_max_count(double beta, double delta, double alpha, std::size_t m)
{
    check_level(alpha, m);
    check_beta(beta);
    if (!(delta >= 0.0 && delta < 1.0 - beta)) {
        throw DomainError("design_max_count: delta must lie in [0, 1 - beta)");
    }
    const double md = static_cast<double>(m);
    const double z1 = distfn::upper_quantile(alpha / md);
    const double c = level_for_power(beta, alpha, m);
    const double w1 = md / alpha * c;
    const double w0 =
        delta > 0.0 ? md / alpha * distfn::upper_tail(z1 + distfn::upper_quantile(delta)) : 0.0;
    if (!(w0 < 1.0 && w1 > 1.0)) {
        throw DomainError("design_max_count: infeasible, requires w0 < 1 < w1");
    }

    DesignResult out{};
    out.scheme.w1 = w1;
    out.scheme.w0 = w0;
    out.scheme.epsilon = (1.0 - w0) / (w1 - w0);
    out.scheme.B = w0 > 0.0 ? w1 / w0 : std::numeric_limits<double>::infinity();
    out.scheme.k = static_cast<std::size_t>(std::floor(md * out.scheme.epsilon));
    out.c_value = c;
    out.target_power = 1.0 - beta;
    out.min_power = power::power_one_sided(z1, w0, alpha, m);
    return out;
}

BinaryWeightScheme binary_scheme(double epsilon, double B, std::size_t m)
{
    return BinaryWeightScheme::from_ratio(epsilon, B, m);
}

bool is_degenerate(const BinaryWeightScheme& scheme, std::size_t m)
{
    return scheme.k == 0 || scheme.k >= m;
}

WeightVector expand(const BinaryWeightScheme& scheme, std::size_t m)
{
    if (m == 0) {
        throw DomainError("expand: m must be positive");
    }
    std::vector<double> w(m, scheme.w0);
    for (std::size_t j = 0; j < std::min(scheme.k, m); ++j) {
        w[j] = scheme.w1;
    }
    return WeightVector::normalize(std::move(w));
}

} // namespace pweight::designer
