#pragma once

// Core domain types shared by every module, plus their TSV representations.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pweight {

enum class Sidedness { one_sided, two_sided };

/// Vector of standardized mean shifts xi_j (test statistic T_j ~ N(xi_j, 1)).
/// One-sided truth: hypothesis j is an alternative iff xi_j > 0.
/// Two-sided truth: iff xi_j != 0.
class EffectConfiguration {
public:
    explicit EffectConfiguration(std::vector<double> means,
                                 Sidedness sidedness = Sidedness::one_sided);

    std::span<const double> means() const noexcept { return means_; }
    Sidedness sidedness() const noexcept { return sidedness_; }
    std::size_t size() const noexcept { return means_.size(); }

    bool is_alternative(std::size_t j) const noexcept;
    std::size_t m1() const noexcept;
    std::size_t m0() const noexcept { return size() - m1(); }

private:
    std::vector<double> means_;
    Sidedness sidedness_;
};

/// m p-values with identifiers, optional z statistics and optional group labels.
class TestBattery {
public:
    TestBattery(std::vector<std::string> ids, std::vector<double> p_values,
                std::optional<std::vector<double>> statistics = std::nullopt,
                std::optional<std::vector<std::string>> groups = std::nullopt,
                Sidedness sidedness = Sidedness::one_sided);

    /// Battery with ids "1".."m" built from bare p-values.
    static TestBattery from_p_values(std::vector<double> p_values);

    std::size_t size() const noexcept { return p_values_.size(); }
    std::span<const std::string> ids() const noexcept { return ids_; }
    std::span<const double> p_values() const noexcept { return p_values_; }
    double p(std::size_t j) const noexcept { return p_values_[j]; }

    bool has_statistics() const noexcept { return statistics_.has_value(); }
    std::span<const double> statistics() const;

    bool has_groups() const noexcept { return !group_names_.empty(); }
    /// Group index per test, indexing group_names().
    std::span<const std::size_t> group_index() const noexcept { return group_index_; }
    /// Distinct labels in order of first appearance.
    std::span<const std::string> group_names() const noexcept { return group_names_; }
    /// The raw label of test j.
    const std::string& group_label(std::size_t j) const;

    Sidedness sidedness() const noexcept { return sidedness_; }

private:
    std::vector<std::string> ids_;
    std::vector<double> p_values_;
    std::optional<std::vector<double>> statistics_;
    std::vector<std::size_t> group_index_;
    std::vector<std::string> group_names_;
    Sidedness sidedness_;
};

/// Nonnegative weights with mean one (the weighting budget).
class WeightVector {
public:
    static constexpr double kMeanTolerance = 1e-9;

    /// Takes weights that already average one; throws ContractError otherwise.
    explicit WeightVector(std::vector<double> weights);

    /// Rescales any nonnegative vector with positive sum to mean one.
    static WeightVector normalize(std::vector<double> raw);
    static WeightVector unit(std::size_t m);

    std::span<const double> values() const noexcept { return weights_; }
    double operator[](std::size_t j) const noexcept { return weights_[j]; }
    std::size_t size() const noexcept { return weights_.size(); }
    double mean() const noexcept;

    /// Factor applied by normalize(); 1 for the checked constructor.
    double scale_factor() const noexcept { return scale_; }

private:
    WeightVector(std::vector<double> weights, double scale);

    std::vector<double> weights_;
    double scale_ = 1.0;
};

/// Sorted, duplicate-free 0-based indices of rejected hypotheses.
class RejectionSet {
public:
    RejectionSet() = default;
    RejectionSet(std::vector<std::size_t> indices, std::size_t m);

    std::span<const std::size_t> indices() const noexcept { return indices_; }
    std::size_t size() const noexcept { return indices_.size(); }
    bool empty() const noexcept { return indices_.empty(); }
    bool contains(std::size_t j) const noexcept;
    bool is_subset_of(const RejectionSet& other) const noexcept;

    friend bool operator==(const RejectionSet&, const RejectionSet&) = default;

private:
    std::vector<std::size_t> indices_;
};

struct MixtureAtom {
    double mass;
    double location;
};

/// Finite discrete distribution of effect sizes.
class MixtureSpec {
public:
    static constexpr double kMassTolerance = 1e-12;

    explicit MixtureSpec(std::vector<MixtureAtom> atoms);

    std::span<const MixtureAtom> atoms() const noexcept { return atoms_; }
    std::size_t size() const noexcept { return atoms_.size(); }

    /// Empirical distribution of a configuration (one atom per distinct mean).
    static MixtureSpec empirical(const EffectConfiguration& config);

    /// P(X <= x).
    double cdf(double x) const noexcept;

private:
    std::vector<MixtureAtom> atoms_;
};

/// Kolmogorov-Smirnov distance sup_x |F(x) - G(x)| between two mixtures.
double ks_distance(const MixtureSpec& a, const MixtureSpec& b);

/// 2x2 tally of one multiple-testing run.
struct MCOutcome {
    std::uint64_t false_positives = 0; // F
    std::uint64_t true_positives = 0;  // T
    std::uint64_t rejections = 0;      // S
    std::uint64_t m0 = 0;
    std::uint64_t m1 = 0;

    bool consistent() const noexcept
    {
        return rejections == false_positives + true_positives && false_positives <= m0 &&
               true_positives <= m1;
    }
};

/// Tallies a rejection set against a truth indicator (true = alternative).
MCOutcome tally(const RejectionSet& rejected, std::span<const bool> is_alternative);

struct ConsistencyViolation {
    std::size_t index;
    double p_value;
    double expected;
};

/// Compares p-values with the tail probability of the attached statistics:
/// upper_tail(T) for one-sided batteries, chi-square_1 tail of T^2 for
/// two-sided ones. Throws ContractError if the battery has no statistics.
std::vector<ConsistencyViolation> consistency_check(const TestBattery& battery,
                                                    double tolerance = 1e-9);

// ---------------------------------------------------------------------------
// TSV files

/// Shortest round-trip decimal representation is not required; 17
/// significant digits always reproduce the double exactly.
std::string format_real(double x);

TestBattery read_battery(std::istream& in, const std::string& source,
                         Sidedness sidedness = Sidedness::one_sided);
TestBattery load_battery(const std::string& path, Sidedness sidedness = Sidedness::one_sided);
void write_battery(std::ostream& out, const TestBattery& battery);
void save_battery(const std::string& path, const TestBattery& battery);

struct NamedValues {
    std::vector<std::string> ids;
    std::vector<double> values;
};

/// `id<TAB>weight` rows. Values are returned raw (nonnegativity is checked).
NamedValues read_weights(std::istream& in, const std::string& source);
NamedValues load_weights(const std::string& path);
void write_weights(std::ostream& out, std::span<const std::string> ids,
                   const WeightVector& weights);

/// Reorders weights to follow the battery's ids. Throws ContractError when an
/// id is missing or the counts differ.
std::vector<double> align_to_battery(const TestBattery& battery, const NamedValues& weights);

/// `id<TAB>mean` rows.
NamedValues read_means(std::istream& in, const std::string& source);
NamedValues load_means(const std::string& path);

/// `mass<TAB>location` rows.
MixtureSpec read_mixture(std::istream& in, const std::string& source);
MixtureSpec load_mixture(const std::string& path);

} // namespace pweight
