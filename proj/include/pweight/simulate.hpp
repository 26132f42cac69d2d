#pragma once

// Monte Carlo harness: synthetic linkage-trace genomes, association tests
// that borrow weights from the trace, and familywise error checks.
//
// Every replicate draws from its own generator, seeded from (seed, replicate)
// alone, so results do not depend on the number of threads.

#include "pweight/hypotheses.hpp"
#include "pweight/procedures.hpp"

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

namespace pweight::simulate {

using Rng = std::mt19937_64;

/// splitmix64 finalizer applied to (seed, stream).
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

Rng make_rng(std::uint64_t seed, std::uint64_t stream);

/// Hardware concurrency, at least 1.
unsigned default_threads() noexcept;

/// Runs fn(i) for i in [0, n) on up to `threads` workers (0 = default).
/// The first exception thrown by any call is rethrown after all workers stop.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn)
{
    if (threads == 0) {
        threads = default_threads();
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) {
                    return;
                }
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                    next.store(n);
                    return;
                }
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

/// Estimated proportion with a 3-standard-error interval.
struct Proportion {
    std::uint64_t successes = 0;
    std::uint64_t trials = 0;
    double estimate = 0.0;
    double se = 0.0; // sqrt(p (1 - p) / n) at the estimate
    double lo = 0.0;
    double hi = 0.0;

    static Proportion from_counts(std::uint64_t successes, std::uint64_t trials);
};

/// alpha + 3 sqrt(alpha (1 - alpha) / reps): the acceptance bound for an
/// estimated FWER whose true value is at most alpha.
double fwer_bound(double alpha, std::uint64_t reps);

// ---------------------------------------------------------------------------
// Synthetic genome

struct GenomeConfig {
    std::size_t n_chrom = 23;
    std::size_t positions_per_chrom = 2000;
    std::size_t n_linkage_signals = 20; // at most one per chromosome
    std::size_t n_assoc = 10000;
    std::size_t n_assoc_signals = 20;   // at most n_linkage_signals
    double signal_mean = 3.5;
    double trace_correlation_length = 25.0; // positions; AR(1) phi = exp(-1/length)
    double bump_height = 3.0;
    double bump_half_width = 150.0; // positions

    double phi() const;
    void validate() const;
};

struct LinkageVariant {
    std::size_t chrom;
    std::size_t position;
};

struct AssocTest {
    std::size_t chrom;
    std::size_t position;
    double stat;
    bool is_signal;
};

struct LinkageStudy {
    GenomeConfig config;
    std::uint64_t seed = 0;
    std::vector<std::vector<double>> trace;      // [chrom][position]
    std::vector<std::vector<double>> trace_mean; // deterministic bump mu(s)
    std::vector<LinkageVariant> variants;
    std::vector<AssocTest> tests; // ordered by (chrom, position)
    std::vector<std::size_t> signal_indices;

    std::size_t m() const noexcept { return tests.size(); }
    double trace_at(const AssocTest& test) const { return trace[test.chrom][test.position]; }
    std::vector<double> p_values() const;
    std::vector<bool> truth() const;
    TestBattery battery() const;
};

/// Throws DomainError when the configuration cannot be realized.
LinkageStudy synth_genome(const GenomeConfig& config, std::uint64_t seed);

/// Tests whose trace value reaches the genome-wide top-epsilon quantile.
std::vector<bool> upweighted_tests(const LinkageStudy& study, double epsilon);

/// Raw weight B on upweighted tests, 1 elsewhere, normalized to mean one with
/// the realized fraction of upweighted tests.
WeightVector trace_to_binary_weights(const LinkageStudy& study, double epsilon, double B);

MCOutcome run_experiment(const LinkageStudy& study, const WeightVector& weights, double alpha,
                         procedures::Procedure procedure);

// ---------------------------------------------------------------------------
// Power surface over (epsilon, B)

struct SurfaceCell {
    double epsilon;
    double B;
    double mean_discoveries; // true positives per replicate
    double se_discoveries;
    double mean_power;       // mean of T / m1
    double mean_false_positives;
    Proportion fwer;         // P(F > 0)
};

struct SimReport {
    std::size_t reps = 0;
    double alpha = 0.0;
    std::vector<SurfaceCell> cells; // epsilon-major, B-minor
    // Per-cell, per-replicate tallies, same order as cells.
    std::vector<std::vector<MCOutcome>> outcomes;

    const SurfaceCell& cell(std::size_t eps_index, std::size_t b_index,
                            std::size_t n_b) const
    {
        return cells[eps_index * n_b + b_index];
    }
};

/// One fresh genome per replicate, shared by every grid cell of that
/// replicate (common random numbers).
SimReport power_surface(const GenomeConfig& config, const std::vector<double>& epsilon_grid,
                        const std::vector<double>& B_grid, std::size_t reps, double alpha,
                        std::uint64_t seed, procedures::Procedure procedure,
                        unsigned threads = 0);

// ---------------------------------------------------------------------------
// FWER under the complete null

enum class WeightMode {
    unit,
    fixed,          // caller-supplied vector
    random,         // one exponential draw per hypothesis, normalized (fixed across reps)
    extreme,        // first weight m - (m - 1) 1e-6, rest 1e-6
    data_dependent, // W_j = exp(c V_j - c^2 / 2), V_j ~ N(0, 1) independent of P_j
};

struct WeightSpec {
    WeightMode mode = WeightMode::unit;
    std::vector<double> fixed;
    double lognormal_c = 1.0;
};

/// The weight vector a non-data-dependent spec resolves to.
WeightVector resolve_weights(const WeightSpec& spec, std::size_t m, std::uint64_t seed);

struct FwerEstimate {
    Proportion fwer;
    double bound; // fwer_bound(alpha, reps)
    bool within_bound;
};

/// Requires reps >= 1000. Data-dependent weights only pair with Bonferroni.
FwerEstimate fwer_mc(procedures::Procedure procedure, const WeightSpec& spec, std::size_t m,
                     double alpha, std::size_t reps, std::uint64_t seed, unsigned threads = 0);

} // namespace pweight::simulate
