#include "pweight/simulate.hpp"

#include "pweight/distfn.hpp"
#include "pweight/error.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <string>

namespace pweight::simulate {

namespace {

void check_alpha(double alpha)
{
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw DomainError("alpha must lie in (0, 1)");
    }
}

// std::vector<bool> cannot hand out a span.
class TruthFlags {
public:
    explicit TruthFlags(const LinkageStudy& study)
        : data_(std::make_unique<bool[]>(study.m())), n_(study.m())
    {
        for (std::size_t j = 0; j < n_; ++j) {
            data_[j] = study.tests[j].is_signal;
        }
    }
    std::span<const bool> span() const noexcept { return {data_.get(), n_}; }

private:
    std::unique_ptr<bool[]> data_;
    std::size_t n_;
};

// Distance-weighted triangle of height h and half-width hw centred at 0.
double bump(double distance, double h, double hw)
{
    return h * std::max(0.0, 1.0 - std::fabs(distance) / hw);
}

} // namespace

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) noexcept
{
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Rng make_rng(std::uint64_t seed, std::uint64_t stream)
{
    return Rng(stream_seed(seed, stream));
}

unsigned default_threads() noexcept
{
    return std::max(1u, std::thread::hardware_concurrency());
}

Proportion Proportion::from_counts(std::uint64_t successes, std::uint64_t trials)
{
    if (trials == 0) {
        throw DomainError("Proportion: no trials");
    }
    Proportion p;
    p.successes = successes;
    p.trials = trials;
    p.estimate = static_cast<double>(successes) / static_cast<double>(trials);
    p.se = std::sqrt(p.estimate * (1.0 - p.estimate) / static_cast<double>(trials));
    p.lo = std::max(0.0, p.estimate - 3.0 * p.se);
    p.hi = std::min(1.0, p.estimate + 3.0 * p.se);
    return p;
}

double fwer_bound(double alpha, std::uint64_t reps)
{
    return alpha + 3.0 * std::sqrt(alpha * (1.0 - alpha) / static_cast<double>(reps));
}

// ---------------------------------------------------------------------------

double GenomeConfig::phi() const
{
    return std::exp(-1.0 / trace_correlation_length);
}

void GenomeConfig::validate() const
{
    if (n_chrom == 0 || positions_per_chrom < 2 || n_assoc == 0) {
        throw DomainError("genome: chromosome, position and test counts must be positive");
    }
    if (n_linkage_signals > n_chrom) {
        throw DomainError("genome: more linkage signals than chromosomes (one per chromosome)");
    }
    if (n_assoc_signals > n_linkage_signals) {
        throw DomainError("genome: association signals must sit at linkage variants");
    }
    if (n_assoc_signals > n_assoc) {
        throw DomainError("genome: more association signals than tests");
    }
    if (n_assoc < n_chrom && n_assoc_signals > 0) {
        throw DomainError("genome: every chromosome needs at least one association test");
    }
    if (!(trace_correlation_length > 0.0) || !std::isfinite(trace_correlation_length)) {
        throw DomainError("genome: correlation length must be positive");
    }
    if (!(bump_half_width > 0.0) || !(bump_height >= 0.0) || !std::isfinite(signal_mean)) {
        throw DomainError("genome: bump half-width must be positive, height nonnegative");
    }
}

std::vector<double> LinkageStudy::p_values() const
{
    std::vector<double> p(tests.size());
    for (std::size_t j = 0; j < p.size(); ++j) {
        p[j] = distfn::upper_tail(tests[j].stat);
    }
    return p;
}

std::vector<bool> LinkageStudy::truth() const
{
    std::vector<bool> t(tests.size());
    for (std::size_t j = 0; j < t.size(); ++j) {
        t[j] = tests[j].is_signal;
    }
    return t;
}

TestBattery LinkageStudy::battery() const
{
    std::vector<std::string> ids;
    std::vector<double> stats;
    ids.reserve(tests.size());
    stats.reserve(tests.size());
    for (const auto& t : tests) {
        ids.push_back("chr" + std::to_string(t.chrom + 1) + ":" + std::to_string(t.position));
        stats.push_back(t.stat);
    }
    return TestBattery(std::move(ids), p_values(), std::move(stats));
}

LinkageStudy synth_genome(const GenomeConfig& config, std::uint64_t seed)
{
    config.validate();
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t P = config.positions_per_chrom;

    LinkageStudy study;
    study.config = config;
    study.seed = seed;

    std::vector<std::size_t> chroms(config.n_chrom);
    std::iota(chroms.begin(), chroms.end(), std::size_t{0});
    std::shuffle(chroms.begin(), chroms.end(), rng);
    chroms.resize(config.n_linkage_signals);
    std::sort(chroms.begin(), chroms.end());
    std::uniform_int_distribution<std::size_t> pos_dist(0, P - 1);
    for (std::size_t c : chroms) {
        study.variants.push_back({c, pos_dist(rng)});
    }

    const double phi = config.phi();
    const double innovation_sd = std::sqrt(1.0 - phi * phi);
    study.trace.assign(config.n_chrom, std::vector<double>(P));
    study.trace_mean.assign(config.n_chrom, std::vector<double>(P, 0.0));
    for (const auto& v : study.variants) {
        auto& mu = study.trace_mean[v.chrom];
        for (std::size_t s = 0; s < P; ++s) {
            mu[s] += bump(static_cast<double>(s) - static_cast<double>(v.position),
                          config.bump_height, config.bump_half_width);
        }
    }
    for (std::size_t c = 0; c < config.n_chrom; ++c) {
        double x = normal(rng);
        for (std::size_t s = 0; s < P; ++s) {
            if (s > 0) {
                x = phi * x + innovation_sd * normal(rng);
            }
            study.trace[c][s] = study.trace_mean[c][s] + x;
        }
    }

    const std::size_t base = config.n_assoc / config.n_chrom;
    const std::size_t extra = config.n_assoc % config.n_chrom;
    std::vector<std::size_t> first_test(config.n_chrom + 1, 0);
    for (std::size_t c = 0; c < config.n_chrom; ++c) {
        const std::size_t count = base + (c < extra ? 1 : 0);
        std::vector<std::size_t> positions(count);
        for (auto& p : positions) {
            p = pos_dist(rng);
        }
        std::sort(positions.begin(), positions.end());
        first_test[c] = study.tests.size();
        for (std::size_t p : positions) {
            study.tests.push_back({c, p, 0.0, false});
        }
    }
    first_test[config.n_chrom] = study.tests.size();

    for (std::size_t i = 0; i < config.n_assoc_signals; ++i) {
        const auto& v = study.variants[i];
        std::size_t best = first_test[v.chrom];
        if (best == first_test[v.chrom + 1]) {
            throw DomainError("genome: chromosome " + std::to_string(v.chrom + 1) +
                              " carries a variant but no association test");
        }
        for (std::size_t j = best; j < first_test[v.chrom + 1]; ++j) {
            const auto d = [&](std::size_t k) {
                const auto a = study.tests[k].position;
                return a > v.position ? a - v.position : v.position - a;
            };
            if (d(j) < d(best)) {
                best = j;
            }
        }
        study.tests[best].is_signal = true;
    }
    for (std::size_t j = 0; j < study.tests.size(); ++j) {
        auto& t = study.tests[j];
        t.stat = normal(rng) + (t.is_signal ? config.signal_mean : 0.0);
        if (t.is_signal) {
            study.signal_indices.push_back(j);
        }
    }
    return study;
}

std::vector<bool> upweighted_tests(const LinkageStudy& study, double epsilon)
{
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
        throw DomainError("epsilon must lie in (0, 1)");
    }
    std::vector<double> all;
    for (const auto& chrom : study.trace) {
        all.insert(all.end(), chrom.begin(), chrom.end());
    }
    const auto rank = static_cast<std::size_t>(
        std::ceil(epsilon * static_cast<double>(all.size())));
    const std::size_t k = std::clamp<std::size_t>(rank, 1, all.size()) - 1;
    std::nth_element(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(),
                     std::greater<>());
    const double threshold = all[k];

    std::vector<bool> up(study.tests.size());
    for (std::size_t j = 0; j < up.size(); ++j) {
        up[j] = study.trace_at(study.tests[j]) >= threshold;
    }
    return up;
}

namespace {

WeightVector binary_from_flags(const std::vector<bool>& up, double B)
{
    if (!(B >= 1.0) || !std::isfinite(B)) {
        throw DomainError("B must be finite and at least 1");
    }
    const double m = static_cast<double>(up.size());
    const double k = static_cast<double>(std::count(up.begin(), up.end(), true));
    const double eps = k / m;
    const double denom = eps * B + (1.0 - eps);
    std::vector<double> w(up.size());
    for (std::size_t j = 0; j < w.size(); ++j) {
        w[j] = (up[j] ? B : 1.0) / denom;
    }
    return WeightVector::normalize(std::move(w));
}

} // namespace

WeightVector trace_to_binary_weights(const LinkageStudy& study, double epsilon, double B)
{
    return binary_from_flags(upweighted_tests(study, epsilon), B);
}

MCOutcome run_experiment(const LinkageStudy& study, const WeightVector& weights, double alpha,
                         procedures::Procedure procedure)
{
    if (weights.size() != study.m()) {
        throw ContractError("run_experiment: weights and study differ in length");
    }
    const auto p = study.p_values();
    const TruthFlags truth(study);
    return tally(procedures::apply(procedure, p, weights, alpha), truth.span());
}

SimReport power_surface(const GenomeConfig& config, const std::vector<double>& epsilon_grid,
                        const std::vector<double>& B_grid, std::size_t reps, double alpha,
                        std::uint64_t seed, procedures::Procedure procedure, unsigned threads)
{
    check_alpha(alpha);
    config.validate();
    if (epsilon_grid.empty() || B_grid.empty()) {
        throw DomainError("power_surface: grids must be nonempty");
    }
    if (reps == 0) {
        throw DomainError("power_surface: reps must be positive");
    }
    for (double e : epsilon_grid) {
        if (!(e > 0.0 && e < 1.0)) {
            throw DomainError("power_surface: epsilon must lie in (0, 1)");
        }
    }
    for (double b : B_grid) {
        if (!(b >= 1.0) || !std::isfinite(b)) {
            throw DomainError("power_surface: B must be finite and at least 1");
        }
    }

    const std::size_t n_cells = epsilon_grid.size() * B_grid.size();
    SimReport report;
    report.reps = reps;
    report.alpha = alpha;
    report.outcomes.assign(n_cells, std::vector<MCOutcome>(reps));

    parallel_for(reps, threads, [&](std::size_t r) {
        const auto study = synth_genome(config, stream_seed(seed, r));
        const auto p = study.p_values();
        const TruthFlags truth(study);
        for (std::size_t e = 0; e < epsilon_grid.size(); ++e) {
            const auto up = upweighted_tests(study, epsilon_grid[e]);
            for (std::size_t b = 0; b < B_grid.size(); ++b) {
                const auto w = binary_from_flags(up, B_grid[b]);
                report.outcomes[e * B_grid.size() + b][r] =
                    tally(procedures::apply(procedure, p, w, alpha), truth.span());
            }
        }
    });

    for (std::size_t e = 0; e < epsilon_grid.size(); ++e) {
        for (std::size_t b = 0; b < B_grid.size(); ++b) {
            const auto& rows = report.outcomes[e * B_grid.size() + b];
            double sum = 0.0, sum_sq = 0.0, power = 0.0, fp = 0.0;
            std::uint64_t any_false = 0;
            for (const auto& o : rows) {
                const double t = static_cast<double>(o.true_positives);
                sum += t;
                sum_sq += t * t;
                power += o.m1 > 0 ? t / static_cast<double>(o.m1) : 0.0;
                fp += static_cast<double>(o.false_positives);
                any_false += o.false_positives > 0 ? 1 : 0;
            }
            const double n = static_cast<double>(reps);
            const double mean = sum / n;
            const double var = reps > 1 ? (sum_sq - n * mean * mean) / (n - 1.0) : 0.0;
            SurfaceCell cell{};
            cell.epsilon = epsilon_grid[e];
            cell.B = B_grid[b];
            cell.mean_discoveries = mean;
            cell.se_discoveries = std::sqrt(std::max(0.0, var) / n);
            cell.mean_power = power / n;
            cell.mean_false_positives = fp / n;
            cell.fwer = Proportion::from_counts(any_false, reps);
            report.cells.push_back(cell);
        }
    }
    return report;
}

// ---------------------------------------------------------------------------

WeightVector resolve_weights(const WeightSpec& spec, std::size_t m, std::uint64_t seed)
{
    if (m == 0) {
        throw DomainError("m must be positive");
    }
    switch (spec.mode) {
    case WeightMode::unit:
        return WeightVector::unit(m);
    case WeightMode::fixed:
        if (spec.fixed.size() != m) {
            throw ContractError("fixed weights must have length m");
        }
        return WeightVector(spec.fixed);
    case WeightMode::random: {
        // Stream index past any replicate stream.
        auto rng = make_rng(seed, ~std::uint64_t{0});
        std::exponential_distribution<double> exp1(1.0);
        std::vector<double> w(m);
        for (auto& x : w) {
            x = exp1(rng);
        }
        return WeightVector::normalize(std::move(w));
    }
    case WeightMode::extreme: {
        constexpr double kTiny = 1e-6;
        std::vector<double> w(m, kTiny);
        w[0] = static_cast<double>(m) - static_cast<double>(m - 1) * kTiny;
        return WeightVector::normalize(std::move(w));
    }
    case WeightMode::data_dependent:
        throw ContractError("data-dependent weights are drawn per replicate");
    }
    throw ContractError("unknown weight mode");
}

FwerEstimate fwer_mc(procedures::Procedure procedure, const WeightSpec& spec, std::size_t m,
                     double alpha, std::size_t reps, std::uint64_t seed, unsigned threads)
{
    check_alpha(alpha);
    if (m == 0) {
        throw DomainError("m must be positive");
    }
    if (reps < 1000) {
        throw DomainError("fwer_mc: reps must be at least 1000");
    }
    const bool data_dependent = spec.mode == WeightMode::data_dependent;
    if (data_dependent && procedure != procedures::Procedure::bonferroni) {
        throw ContractError("fwer_mc: data-dependent weights require Bonferroni");
    }
    const std::optional<WeightVector> fixed =
        data_dependent ? std::nullopt : std::optional(resolve_weights(spec, m, seed));

    std::vector<char> any_false(reps, 0);
    parallel_for(reps, threads, [&](std::size_t r) {
        auto rng = make_rng(seed, r);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::vector<double> p(m);
        for (auto& x : p) {
            x = unif(rng);
        }
        if (data_dependent) {
            // Bonferroni with unnormalized weights of expectation one.
            std::normal_distribution<double> normal(0.0, 1.0);
            const double c = spec.lognormal_c;
            const double level = alpha / static_cast<double>(m);
            for (std::size_t j = 0; j < m; ++j) {
                const double w = std::exp(c * normal(rng) - 0.5 * c * c);
                if (p[j] <= level * w) {
                    any_false[r] = 1;
                }
            }
            return;
        }
        any_false[r] = procedures::apply(procedure, p, *fixed, alpha).empty() ? 0 : 1;
    });

    const auto hits =
        static_cast<std::uint64_t>(std::count(any_false.begin(), any_false.end(), 1));
    FwerEstimate out;
    out.fwer = Proportion::from_counts(hits, reps);
    out.bound = fwer_bound(alpha, reps);
    out.within_bound = out.fwer.estimate <= out.bound;
    return out;
}

} // namespace pweight::simulate
