#pragma once

// How much power weighting wins or loses when the weights are wrong.

#include <cstddef>
#include <optional>
#include <vector>

namespace pweight::robustness {

/// Two-valued weights: a fraction epsilon of hypotheses gets raw weight B,
/// the rest raw weight 1, normalized to mean one.
struct BinaryWeightScheme {
    double epsilon;
    double B;  // raw up-weight ratio w1 / w0 (may be +inf when w0 == 0)
    double w1; // B / (epsilon B + 1 - epsilon)
    double w0; // 1 / (epsilon B + 1 - epsilon)
    std::size_t k;

    /// Normalized scheme from (epsilon, B); k = round(epsilon m).
    static BinaryWeightScheme from_ratio(double epsilon, double B, std::size_t m);
};

/// Gain at w1 minus loss at w0 for one alternative with mean xi:
/// pi(xi, w1) + pi(xi, w0) - 2 pi(xi, 1).
double robustness_two_point(double B, double epsilon, double xi, double alpha, std::size_t m);

struct WorstCaseCondition {
    double R_bB;  // Phi(z_{aB/m} - xi) + Phi(z_{ab/m} - xi) - 2 Phi(z_{a/m} - xi)
    bool robust;  // R_bB <= 0, i.e. the least favorable gain covers the worst loss
    double Delta; // Phi(z_{a/m} - xi) - Phi(z_{aB/m} - xi)
};

/// b is the minimum weight, B the smallest weight above one.
WorstCaseCondition worst_case_condition(double xi, double b, double B, double alpha,
                                        std::size_t m);

/// z_{alpha/m} - 1 / (z_{alpha/m} - z_{B alpha/m}); requires B >= 2.
double safe_zone_bound(double B, double alpha, std::size_t m);

struct Turnaround {
    double B0;         // root of R(., epsilon) beyond its maximum; +inf if none below 1e12
    double B_star;     // argmax of R(., epsilon)
    double R_at_Bstar;
    bool finite;
};

/// Turnaround analysis of R(B, epsilon) at effect xi (the marginal effect
/// z_{alpha/m} when xi is not given).
Turnaround turnaround(double epsilon, double alpha, std::size_t m,
                      std::optional<double> xi = std::nullopt);

struct WorstCaseReport {
    double xi;
    double xi0;                   // z_{alpha / (m (gamma + a))}
    std::optional<double> xi_star; // z_{a/m} + sqrt(z_{a/m}^2 - z_q^2), q = alpha(1-a)/(m gamma)
    double C_of_xi;               // sup over 0 <= u <= xi of c(u)
    double c_star;                // root of gamma Q(sqrt(2c)) + a Q(xi/2 + c/xi) = alpha/m
    double u_star;                // least favorable u under the chosen restriction
    double inf_power;             // power at xi under the least favorable weights
    double bonf_power;            // Q(z_{alpha/m} - xi)
    double oracle_power;          // power at xi with weight 1/a
    bool beats_bonf;              // inf_power >= bonf_power - 1e-12
};

/// Worst-case power at xi when gamma m nulls are mistaken for alternatives
/// with mean u, optionally restricting 0 <= u <= xi.
WorstCaseReport misspec_worst_case(double xi, double a, double gamma, double alpha,
                                   std::size_t m, bool restrict_u);

/// One row per xi of misspec_worst_case.
std::vector<WorstCaseReport> worst_case_power_curves(double a, double gamma, double alpha,
                                                     std::size_t m,
                                                     const std::vector<double>& xi_grid,
                                                     bool restrict_u);

} // namespace pweight::robustness
