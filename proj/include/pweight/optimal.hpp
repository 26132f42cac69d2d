#pragma once

// Average-power-optimal weights.
//
// For known effects xi_j the weights maximizing average power under the
// mean-one budget form the one-parameter family
//
//     rho_c(xi) = (m / alpha) * upper_tail(xi / 2 + c / xi)   for xi > 0, else 0,
//
// with c chosen so the weights average one. Testing P_j <= alpha rho_c(xi_j) / m
// is the same as rejecting when T_j > xi_j / 2 + c / xi_j.

#include "pweight/hypotheses.hpp"

#include <cstddef>
#include <vector>

namespace pweight::optimal {

/// Effects at or below this are treated as nulls (weight 0).
inline constexpr double kTinyEffect = 1e-12;

/// Target for |mean weight - 1| after the c solve.
inline constexpr double kResidualTolerance = 1e-10;

double rho(double xi, double c, double alpha, std::size_t m);

struct OptimalWeightSolution {
    double c;
    WeightVector weights;
    double oracle_power;
    double residual; // |mean(rho_c) - 1|
};

/// Solves mean_j rho_c(xi_j) = 1 by bracketing and bisection.
/// Throws DomainError when no effect exceeds kTinyEffect.
OptimalWeightSolution solve_c(const EffectConfiguration& config, double alpha);

struct MixtureWeightSolution {
    double c;
    std::vector<double> atom_weights; // rho_c at each atom, in atom order
    double oracle_power;              // mass-weighted over positive atoms
    double residual;                  // |sum mass * rho_c - 1|
};

/// Same normalization with the mixture's masses in place of 1/m.
MixtureWeightSolution solve_c_mixture(const MixtureSpec& mixture, double alpha, std::size_t m);

/// Cutoffs t_j = xi_j / 2 + c / xi_j (+inf for non-positive effects).
std::vector<double> equivalent_cutoffs(const OptimalWeightSolution& solution,
                                       const EffectConfiguration& config);

/// Two nearby effect distributions whose optimal weights differ wildly:
/// Q = (1-a) d0 + a d_xi and Qt = (1-a-gamma) d0 + gamma d_u + a d_xi, with
/// xi and u placed so that c is the normalizing constant under Qt.
struct DiscontinuityExample {
    double A;
    double B;
    double u;
    double xi;
    double w_on_xi_under_Q;
    double w_on_xi_under_Qtilde;
    double w_on_u_under_Qtilde;
    double ratio;       // w_on_xi_under_Q / w_on_xi_under_Qtilde
    double c_solved;    // normalizing constant recovered for Qt
    double ks_distance; // sup |Q - Qt|
};

/// Throws DomainError naming the violated condition when the construction is
/// infeasible.
DiscontinuityExample discontinuity_example(std::size_t m, double alpha, double a, double gamma,
                                           double K, double c);

} // namespace pweight::optimal
