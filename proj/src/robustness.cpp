#include "pweight/robustness.hpp"

#include "pweight/distfn.hpp"
#include "pweight/error.hpp"
#include "pweight/power.hpp"
#include "pweight/rootfind.hpp"

#include <cmath>
#include <limits>

namespace pweight::robustness {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_level(double alpha, std::size_t m)
{
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw DomainError("alpha must lie in (0, 1)");
    }
    if (m == 0) {
        throw DomainError("m must be positive");
    }
}

double z_of(double level)
{
    return distfn::threshold_quantile(level);
}

} // namespace

BinaryWeightScheme BinaryWeightScheme::from_ratio(double epsilon, double B, std::size_t m)
{
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
        throw DomainError("binary scheme: epsilon must lie in (0, 1)");
    }
    if (!(B >= 1.0)) {
        throw DomainError("binary scheme: B must be at least 1");
    }
    BinaryWeightScheme s{};
    s.epsilon = epsilon;
    s.B = B;
    if (std::isinf(B)) {
        s.w1 = 1.0 / epsilon;
        s.w0 = 0.0;
    } else {
        const double denom = epsilon * B + (1.0 - epsilon);
        s.w1 = B / denom;
        s.w0 = 1.0 / denom;
    }
    s.k = static_cast<std::size_t>(std::llround(epsilon * static_cast<double>(m)));
    return s;
}

double robustness_two_point(double B, double epsilon, double xi, double alpha, std::size_t m)
{
    check_level(alpha, m);
    const auto s = BinaryWeightScheme::from_ratio(epsilon, B, m);
    return power::power_one_sided(xi, s.w1, alpha, m) + power::power_one_sided(xi, s.w0, alpha, m) -
           2.0 * power::power_one_sided(xi, 1.0, alpha, m);
}

WorstCaseCondition worst_case_condition(double xi, double b, double B, double alpha,
                                        std::size_t m)
{
    check_level(alpha, m);
    if (!(b >= 0.0 && b <= 1.0 && B >= 1.0)) {
        throw DomainError("worst_case_condition: need 0 <= b <= 1 <= B");
    }
    const double md = static_cast<double>(m);
    const double phi_B = distfn::lower_tail(z_of(alpha * B / md) - xi);
    const double phi_b = distfn::lower_tail(z_of(alpha * b / md) - xi);
    const double phi_1 = distfn::lower_tail(z_of(alpha / md) - xi);
    WorstCaseCondition out{};
    out.R_bB = phi_B + phi_b - 2.0 * phi_1;
    out.robust = out.R_bB <= 0.0;
    out.Delta = phi_1 - phi_B;
    return out;
}

double safe_zone_bound(double B, double alpha, std::size_t m)
{
    check_level(alpha, m);
    if (!(B >= 2.0)) {
        throw DomainError("safe_zone_bound: requires B >= 2");
    }
    const double md = static_cast<double>(m);
    if (!(B * alpha / md < 1.0)) {
        throw DomainError("safe_zone_bound: requires B alpha / m < 1");
    }
    const double z1 = distfn::upper_quantile(alpha / md);
    const double zB = distfn::upper_quantile(B * alpha / md);
    return z1 - 1.0 / (z1 - zB);
}

Turnaround turnaround(double epsilon, double alpha, std::size_t m, std::optional<double> xi)
{
    check_level(alpha, m);
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
        throw DomainError("turnaround: epsilon must lie in (0, 1)");
    }
    const double effect = xi.value_or(distfn::upper_quantile(alpha / static_cast<double>(m)));
    const auto R = [&](double B) { return robustness_two_point(B, epsilon, effect, alpha, m); };

    constexpr double kBracketLimit = 1e12;
    Turnaround out{};
    double hi = 2.0;
    while (hi <= kBracketLimit && !(R(hi) < 0.0)) {
        hi *= 2.0;
    }
    out.finite = hi <= kBracketLimit;
    const double search_hi = out.finite ? hi : kBracketLimit;

    // R is unimodal on [1, search_hi].
    const auto [b_star, r_star] = rootfind::golden_max(R, 1.0, search_hi, 1e-8);
    out.B_star = b_star;
    out.R_at_Bstar = r_star;

    if (!out.finite) {
        out.B0 = kInf;
        return out;
    }
    const double lo = r_star > 0.0 ? b_star : 1.0;
    out.B0 = rootfind::bisect(R, lo, hi);
    return out;
}

WorstCaseReport misspec_worst_case(double xi, double a, double gamma, double alpha,
                                   std::size_t m, bool restrict_u)
{
    check_level(alpha, m);
    const double t = alpha / static_cast<double>(m);
    if (!(xi > 0.0) || !std::isfinite(xi)) {
        throw DomainError("misspec_worst_case: xi must be positive");
    }
    if (!(a > 0.0 && gamma > 0.0)) {
        throw DomainError("misspec_worst_case: a and gamma must be positive");
    }
    if (!(t <= gamma + a && gamma + a <= 1.0)) {
        throw DomainError("misspec_worst_case: requires alpha/m <= gamma + a <= 1");
    }

    WorstCaseReport out{};
    out.xi = xi;
    out.xi0 = z_of(t / (gamma + a));
    const double z1 = distfn::upper_quantile(t);

    const double q = alpha * (1.0 - a) / (static_cast<double>(m) * gamma);
    if (q > 0.0 && q < 1.0) {
        const double zq = distfn::upper_quantile(q);
        if (z1 * z1 >= zq * zq) {
            out.xi_star = z1 + std::sqrt(z1 * z1 - zq * zq);
        }
    }

    // gamma Q(sqrt(2c)) + a Q(xi/2 + c/xi) = alpha/m, decreasing in c >= 0.
    const auto r = [&](double c) {
        return gamma * distfn::upper_tail(std::sqrt(2.0 * c)) +
               a * distfn::upper_tail(0.5 * xi + c / xi) - t;
    };
    if (r(0.0) < 0.0) {
        throw DomainError(
            "misspec_worst_case: gamma/2 + a Q(xi/2) < alpha/m, no nonnegative c* exists");
    }
    double hi = 1.0;
    while (r(hi) > 0.0) {
        hi *= 2.0;
        if (hi > 1e300) {
            throw DomainError("misspec_worst_case: failed to bracket c*");
        }
    }
    out.c_star = rootfind::bisect(r, 0.0, hi);
    out.C_of_xi = xi <= out.xi0 ? xi * out.xi0 - 0.5 * xi * xi : out.c_star;

    double c_worst = out.c_star;
    out.u_star = std::sqrt(2.0 * out.c_star);
    if (restrict_u) {
        c_worst = out.C_of_xi;
        if (xi <= out.xi0) {
            out.u_star = xi;
        }
    }
    out.inf_power = distfn::upper_tail(c_worst / xi - 0.5 * xi);
    out.bonf_power = distfn::upper_tail(z1 - xi);
    out.oracle_power = power::power_one_sided(xi, 1.0 / a, alpha, m);
    out.beats_bonf = out.inf_power >= out.bonf_power - 1e-12;
    return out;
}

std::vector<WorstCaseReport> worst_case_power_curves(double a, double gamma, double alpha,
                                                     std::size_t m,
                                                     const std::vector<double>& xi_grid,
                                                     bool restrict_u)
{
    std::vector<WorstCaseReport> rows;
    rows.reserve(xi_grid.size());
    for (double xi : xi_grid) {
        rows.push_back(misspec_worst_case(xi, a, gamma, alpha, m, restrict_u));
    }
    return rows;
}

} // namespace pweight::robustness
