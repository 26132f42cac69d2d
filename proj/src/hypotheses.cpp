#include "pweight/hypotheses.hpp"

#include "pweight/distfn.hpp"
#include "pweight/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <unordered_map>

namespace pweight {

// ---------------------------------------------------------------------------
// EffectConfiguration

EffectConfiguration::EffectConfiguration(std::vector<double> means, Sidedness sidedness)
    : means_(std::move(means)), sidedness_(sidedness)
{
    if (means_.empty()) {
        throw DomainError("EffectConfiguration: need at least one hypothesis");
    }
    for (double xi : means_) {
        if (!std::isfinite(xi)) {
            throw DomainError("EffectConfiguration: means must be finite");
        }
    }
}

bool EffectConfiguration::is_alternative(std::size_t j) const noexcept
{
    return sidedness_ == Sidedness::one_sided ? means_[j] > 0.0 : means_[j] != 0.0;
}

std::size_t EffectConfiguration::m1() const noexcept
{
    std::size_t n = 0;
    for (std::size_t j = 0; j < means_.size(); ++j) {
        n += is_alternative(j) ? 1 : 0;
    }
    return n;
}

// ---------------------------------------------------------------------------
// TestBattery

TestBattery::TestBattery(std::vector<std::string> ids, std::vector<double> p_values,
                         std::optional<std::vector<double>> statistics,
                         std::optional<std::vector<std::string>> groups, Sidedness sidedness)
    : ids_(std::move(ids)),
      p_values_(std::move(p_values)),
      statistics_(std::move(statistics)),
      sidedness_(sidedness)
{
    const std::size_t m = p_values_.size();
    if (ids_.size() != m) {
        throw ContractError("TestBattery: ids and p-values differ in length");
    }
    if (statistics_ && statistics_->size() != m) {
        throw ContractError("TestBattery: statistics and p-values differ in length");
    }
    if (groups && groups->size() != m) {
        throw ContractError("TestBattery: groups and p-values differ in length");
    }
    std::set<std::string_view> seen;
    for (std::size_t j = 0; j < m; ++j) {
        if (!(p_values_[j] >= 0.0 && p_values_[j] <= 1.0)) {
            throw DomainError("TestBattery: p-value of '" + ids_[j] + "' outside [0, 1]");
        }
        if (!seen.insert(ids_[j]).second) {
            throw ContractError("TestBattery: duplicate id '" + ids_[j] + "'");
        }
    }
    if (groups) {
        std::unordered_map<std::string, std::size_t> lookup;
        group_index_.reserve(m);
        for (const auto& label : *groups) {
            auto [it, inserted] = lookup.try_emplace(label, group_names_.size());
            if (inserted) {
                group_names_.push_back(label);
            }
            group_index_.push_back(it->second);
        }
    }
}

TestBattery TestBattery::from_p_values(std::vector<double> p_values)
{
    std::vector<std::string> ids(p_values.size());
    for (std::size_t j = 0; j < ids.size(); ++j) {
        ids[j] = std::to_string(j + 1);
    }
    return TestBattery(std::move(ids), std::move(p_values));
}

std::span<const double> TestBattery::statistics() const
{
    if (!statistics_) {
        throw ContractError("TestBattery: no statistics attached");
    }
    return *statistics_;
}

const std::string& TestBattery::group_label(std::size_t j) const
{
    if (!has_groups()) {
        throw ContractError("TestBattery: no group labels attached");
    }
    return group_names_[group_index_[j]];
}

// ---------------------------------------------------------------------------
// WeightVector

namespace {

void require_nonnegative(const std::vector<double>& w)
{
    for (double x : w) {
        if (!(x >= 0.0) || !std::isfinite(x)) {
            throw ContractError("WeightVector: weights must be finite and nonnegative");
        }
    }
}

double mean_of(std::span<const double> w)
{
    return std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size());
}

} // namespace

WeightVector::WeightVector(std::vector<double> weights, double scale)
    : weights_(std::move(weights)), scale_(scale)
{
}

WeightVector::WeightVector(std::vector<double> weights) : weights_(std::move(weights))
{
    if (weights_.empty()) {
        throw ContractError("WeightVector: empty");
    }
    require_nonnegative(weights_);
    const double mean = mean_of(weights_);
    if (std::fabs(mean - 1.0) > kMeanTolerance) {
        throw ContractError("WeightVector: weights must average 1 (mean is " +
                            format_real(mean) + ")");
    }
}

WeightVector WeightVector::normalize(std::vector<double> raw)
{
    if (raw.empty()) {
        throw ContractError("WeightVector: empty");
    }
    require_nonnegative(raw);
    const double mean = mean_of(raw);
    if (!(mean > 0.0)) {
        throw ContractError("WeightVector: cannot normalize an all-zero vector");
    }
    const double scale = 1.0 / mean;
    for (double& x : raw) {
        x *= scale;
    }
    return WeightVector(std::move(raw), scale);
}

WeightVector WeightVector::unit(std::size_t m)
{
    return WeightVector(std::vector<double>(m, 1.0));
}

double WeightVector::mean() const noexcept
{
    return mean_of(weights_);
}

// ---------------------------------------------------------------------------
// RejectionSet

RejectionSet::RejectionSet(std::vector<std::size_t> indices, std::size_t m)
    : indices_(std::move(indices))
{
    std::sort(indices_.begin(), indices_.end());
    indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
    if (!indices_.empty() && indices_.back() >= m) {
        throw ContractError("RejectionSet: index out of range");
    }
}

bool RejectionSet::contains(std::size_t j) const noexcept
{
    return std::binary_search(indices_.begin(), indices_.end(), j);
}

bool RejectionSet::is_subset_of(const RejectionSet& other) const noexcept
{
    return std::includes(other.indices_.begin(), other.indices_.end(), indices_.begin(),
                         indices_.end());
}

// ---------------------------------------------------------------------------
// MixtureSpec

MixtureSpec::MixtureSpec(std::vector<MixtureAtom> atoms) : atoms_(std::move(atoms))
{
    if (atoms_.empty()) {
        throw DomainError("MixtureSpec: no atoms");
    }
    double total = 0.0;
    for (const auto& a : atoms_) {
        if (!(a.mass >= 0.0 && a.mass <= 1.0) || !std::isfinite(a.location)) {
            throw DomainError("MixtureSpec: masses must lie in [0, 1], locations finite");
        }
        total += a.mass;
    }
    if (std::fabs(total - 1.0) > kMassTolerance) {
        throw DomainError("MixtureSpec: masses sum to " + format_real(total) + ", not 1");
    }
}

MixtureSpec MixtureSpec::empirical(const EffectConfiguration& config)
{
    std::map<double, std::size_t> counts;
    for (double xi : config.means()) {
        ++counts[xi];
    }
    const double m = static_cast<double>(config.size());
    std::vector<MixtureAtom> atoms;
    atoms.reserve(counts.size());
    for (auto [loc, n] : counts) {
        atoms.push_back({static_cast<double>(n) / m, loc});
    }
    return MixtureSpec(std::move(atoms));
}

double MixtureSpec::cdf(double x) const noexcept
{
    double acc = 0.0;
    for (const auto& a : atoms_) {
        if (a.location <= x) {
            acc += a.mass;
        }
    }
    return acc;
}

double ks_distance(const MixtureSpec& a, const MixtureSpec& b)
{
    // Both CDFs are step functions, so the supremum is attained at a jump.
    double d = 0.0;
    for (const auto* spec : {&a, &b}) {
        for (const auto& atom : spec->atoms()) {
            d = std::max(d, std::fabs(a.cdf(atom.location) - b.cdf(atom.location)));
        }
    }
    return d;
}

MCOutcome tally(const RejectionSet& rejected, std::span<const bool> is_alternative)
{
    MCOutcome out;
    for (bool alt : is_alternative) {
        (alt ? out.m1 : out.m0) += 1;
    }
    for (std::size_t j : rejected.indices()) {
        (is_alternative[j] ? out.true_positives : out.false_positives) += 1;
    }
    out.rejections = rejected.size();
    return out;
}

std::vector<ConsistencyViolation> consistency_check(const TestBattery& battery, double tolerance)
{
    const auto stats = battery.statistics();
    std::vector<ConsistencyViolation> out;
    for (std::size_t j = 0; j < battery.size(); ++j) {
        const double t = stats[j];
        const double expected = battery.sidedness() == Sidedness::one_sided
                                    ? distfn::upper_tail(t)
                                    : distfn::noncentral_chisq1_upper_tail(t * t, 0.0);
        if (!(std::fabs(battery.p(j) - expected) <= tolerance)) {
            out.push_back({j, battery.p(j), expected});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// TSV

std::string format_real(double x)
{
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

struct TsvReader {
    std::istream& in;
    const std::string& source;
    std::size_t line_no = 0;

    // Next non-blank, non-comment line split on tabs; false at end of input.
    bool next(std::vector<std::string>& fields)
    {
        std::string line;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') {
                line.pop_back();
            }
            if (line.empty() || line.front() == '#') {
                continue;
            }
            fields.clear();
            std::size_t start = 0;
            for (;;) {
                const auto tab = line.find('\t', start);
                fields.push_back(line.substr(start, tab - start));
                if (tab == std::string::npos) {
                    break;
                }
                start = tab + 1;
            }
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& what) const
    {
        throw ParseError(source, line_no, what);
    }

    double real(const std::string& field, const char* column) const
    {
        double v = 0.0;
        const char* first = field.data();
        const char* last = first + field.size();
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last || field.empty() || std::isnan(v)) {
            fail(std::string("column '") + column + "': not a number: '" + field + "'");
        }
        return v;
    }
};

std::ifstream open_input(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError(path, 0, "cannot open file");
    }
    return in;
}

std::ofstream open_output(const std::string& path)
{
    std::ofstream out(path);
    if (!out) {
        throw ParseError(path, 0, "cannot open file for writing");
    }
    return out;
}

// Reads a two-column `key<TAB>value` file with the given header names.
NamedValues read_two_columns(std::istream& in, const std::string& source, const char* key,
                             const char* value, bool nonnegative)
{
    TsvReader reader{in, source};
    std::vector<std::string> f;
    if (!reader.next(f)) {
        reader.fail("empty file");
    }
    if (f.size() != 2 || f[0] != key || f[1] != value) {
        reader.fail(std::string("expected header '") + key + "\\t" + value + "'");
    }
    NamedValues out;
    std::set<std::string> seen;
    while (reader.next(f)) {
        if (f.size() != 2) {
            reader.fail("expected 2 columns, found " + std::to_string(f.size()));
        }
        const double v = reader.real(f[1], value);
        if (nonnegative && !(v >= 0.0 && std::isfinite(v))) {
            reader.fail(std::string(value) + " must be finite and nonnegative");
        }
        if (!seen.insert(f[0]).second) {
            reader.fail("duplicate id '" + f[0] + "'");
        }
        out.ids.push_back(f[0]);
        out.values.push_back(v);
    }
    if (out.ids.empty()) {
        reader.fail("no data rows");
    }
    return out;
}

} // namespace

TestBattery read_battery(std::istream& in, const std::string& source, Sidedness sidedness)
{
    TsvReader reader{in, source};
    std::vector<std::string> f;
    if (!reader.next(f)) {
        reader.fail("empty file");
    }
    int col_id = -1, col_p = -1, col_stat = -1, col_group = -1;
    for (std::size_t c = 0; c < f.size(); ++c) {
        int* slot = f[c] == "id"      ? &col_id
                    : f[c] == "p"     ? &col_p
                    : f[c] == "stat"  ? &col_stat
                    : f[c] == "group" ? &col_group
                                      : nullptr;
        if (slot == nullptr || *slot != -1) {
            reader.fail("unexpected or repeated header column '" + f[c] + "'");
        }
        *slot = static_cast<int>(c);
    }
    if (col_id != 0 || col_p != 1) {
        reader.fail("header must start with 'id\\tp'");
    }

    std::vector<std::string> ids;
    std::vector<double> p;
    std::vector<double> stats;
    std::vector<std::string> groups;
    std::set<std::string> seen;
    const std::size_t ncol = f.size();
    while (reader.next(f)) {
        if (f.size() != ncol) {
            reader.fail("expected " + std::to_string(ncol) + " columns, found " +
                        std::to_string(f.size()));
        }
        if (f[0].empty()) {
            reader.fail("empty id");
        }
        if (!seen.insert(f[0]).second) {
            reader.fail("duplicate id '" + f[0] + "'");
        }
        const double pv = reader.real(f[1], "p");
        if (!(pv >= 0.0 && pv <= 1.0)) {
            reader.fail("p-value outside [0, 1]: " + f[1]);
        }
        ids.push_back(f[0]);
        p.push_back(pv);
        if (col_stat >= 0) {
            const double t = reader.real(f[col_stat], "stat");
            if (!std::isfinite(t)) {
                reader.fail("statistic must be finite");
            }
            stats.push_back(t);
        }
        if (col_group >= 0) {
            groups.push_back(f[col_group]);
        }
    }
    if (ids.empty()) {
        reader.fail("no data rows");
    }
    std::optional<std::vector<double>> st;
    if (col_stat >= 0) {
        st = std::move(stats);
    }
    std::optional<std::vector<std::string>> gr;
    if (col_group >= 0) {
        gr = std::move(groups);
    }
    return TestBattery(std::move(ids), std::move(p), std::move(st), std::move(gr), sidedness);
}

TestBattery load_battery(const std::string& path, Sidedness sidedness)
{
    auto in = open_input(path);
    return read_battery(in, path, sidedness);
}

void write_battery(std::ostream& out, const TestBattery& battery)
{
    out << "id\tp";
    if (battery.has_statistics()) {
        out << "\tstat";
    }
    if (battery.has_groups()) {
        out << "\tgroup";
    }
    out << '\n';
    for (std::size_t j = 0; j < battery.size(); ++j) {
        out << battery.ids()[j] << '\t' << format_real(battery.p(j));
        if (battery.has_statistics()) {
            out << '\t' << format_real(battery.statistics()[j]);
        }
        if (battery.has_groups()) {
            out << '\t' << battery.group_label(j);
        }
        out << '\n';
    }
}

void save_battery(const std::string& path, const TestBattery& battery)
{
    auto out = open_output(path);
    write_battery(out, battery);
}

NamedValues read_weights(std::istream& in, const std::string& source)
{
    return read_two_columns(in, source, "id", "weight", true);
}

NamedValues load_weights(const std::string& path)
{
    auto in = open_input(path);
    return read_weights(in, path);
}

void write_weights(std::ostream& out, std::span<const std::string> ids,
                   const WeightVector& weights)
{
    if (ids.size() != weights.size()) {
        throw ContractError("write_weights: ids and weights differ in length");
    }
    out << "id\tweight\n";
    for (std::size_t j = 0; j < ids.size(); ++j) {
        out << ids[j] << '\t' << format_real(weights[j]) << '\n';
    }
}

std::vector<double> align_to_battery(const TestBattery& battery, const NamedValues& weights)
{
    if (weights.ids.size() != battery.size()) {
        throw ContractError("weights cover " + std::to_string(weights.ids.size()) +
                            " ids but the battery has " + std::to_string(battery.size()));
    }
    std::unordered_map<std::string_view, double> by_id;
    for (std::size_t j = 0; j < weights.ids.size(); ++j) {
        by_id.emplace(weights.ids[j], weights.values[j]);
    }
    std::vector<double> out;
    out.reserve(battery.size());
    for (const auto& id : battery.ids()) {
        auto it = by_id.find(id);
        if (it == by_id.end()) {
            throw ContractError("no weight for id '" + id + "'");
        }
        out.push_back(it->second);
    }
    return out;
}

NamedValues read_means(std::istream& in, const std::string& source)
{
    return read_two_columns(in, source, "id", "mean", false);
}

NamedValues load_means(const std::string& path)
{
    auto in = open_input(path);
    return read_means(in, path);
}

MixtureSpec read_mixture(std::istream& in, const std::string& source)
{
    TsvReader reader{in, source};
    std::vector<std::string> f;
    if (!reader.next(f)) {
        reader.fail("empty file");
    }
    if (f.size() != 2 || f[0] != "mass" || f[1] != "location") {
        reader.fail("expected header 'mass\\tlocation'");
    }
    std::vector<MixtureAtom> atoms;
    while (reader.next(f)) {
        if (f.size() != 2) {
            reader.fail("expected 2 columns, found " + std::to_string(f.size()));
        }
        const double mass = reader.real(f[0], "mass");
        const double loc = reader.real(f[1], "location");
        if (!(mass >= 0.0 && mass <= 1.0)) {
            reader.fail("mass outside [0, 1]");
        }
        atoms.push_back({mass, loc});
    }
    if (atoms.empty()) {
        reader.fail("no data rows");
    }
    try {
        return MixtureSpec(std::move(atoms));
    } catch (const DomainError& e) {
        reader.fail(e.what());
    }
}

MixtureSpec load_mixture(const std::string& path)
{
    auto in = open_input(path);
    return read_mixture(in, path);
}

} // namespace pweight
