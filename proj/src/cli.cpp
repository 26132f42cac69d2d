#include "pweight/cli.hpp"

#include "pweight/designer.hpp"
#include "pweight/distfn.hpp"
#include "pweight/error.hpp"
#include "pweight/estimator.hpp"
#include "pweight/hypotheses.hpp"
#include "pweight/optimal.hpp"
#include "pweight/power.hpp"
#include "pweight/procedures.hpp"
#include "pweight/robustness.hpp"
#include "pweight/simulate.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

namespace pweight::cli {

namespace {

using procedures::Procedure;

std::string fmt(double x)
{
    return format_real(x);
}

double parse_number(const std::string& text)
{
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    while (first < last && *first == ' ') {
        ++first;
    }
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) {
        throw DomainError("not a number: '" + text + "'");
    }
    return v;
}

void write_rows(std::ostream& out, const std::vector<std::string>& header,
                const std::vector<std::vector<double>>& rows)
{
    for (std::size_t i = 0; i < header.size(); ++i) {
        out << (i ? "\t" : "") << header[i];
    }
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << (i ? "\t" : "") << fmt(row[i]);
        }
        out << '\n';
    }
}

std::ofstream open_output(const std::string& path)
{
    std::ofstream f(path);
    if (!f) {
        throw DomainError("cannot write " + path);
    }
    return f;
}

Sidedness sidedness_of(bool two_sided)
{
    return two_sided ? Sidedness::two_sided : Sidedness::one_sided;
}

void add_alpha(CLI::App* app, double& alpha)
{
    app->add_option("--alpha", alpha, "FWER level, in (0, 1)")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
}

// Every command writes to `out`; callbacks run after parsing succeeds.
struct Commands {
    explicit Commands(std::ostream& o) : out(o) {}

    std::ostream& out;

    double alpha = 0.05;
    std::size_t m = 1000;
    std::uint64_t seed = 0;
    unsigned threads = 0;

    std::string battery_path, weights_path, means_path, mixture_path, report_path,
        weights_out_path;
    bool two_sided = false;

    double epsilon = 0.05, B = 10.0, xi = 0.0, w = 1.0, c = 0.0;
    std::optional<double> xi_opt;
    std::string c_list = "-1,0,1,2,4";
    std::string xi_grid = "0:8:81", eps_grid = "0.01,0.05,0.1,0.2", B_grid = "1:50:50";
    double a = 0.1, gamma = 0.1, K = 1000.0, beta = 0.2, delta = 0.0;
    bool restrict_u = false;

    std::string model = "normal", variant = "classic";
    double smooth = 0.05;

    simulate::GenomeConfig genome;
    std::size_t reps = 100;
    std::string procedure = "bonferroni", weight_mode = "unit";
    double lognormal_c = 1.0;

    // -----------------------------------------------------------------------

    void run_test(Procedure proc)
    {
        const auto battery = load_battery(battery_path, sidedness_of(two_sided));
        const auto weights =
            weights_path.empty()
                ? WeightVector::unit(battery.size())
                : WeightVector(align_to_battery(battery, load_weights(weights_path)));
        const auto rejected = procedures::apply(proc, battery, weights, alpha);
        const auto adjusted = procedures::adjusted_p_values(proc, battery, weights);
        out << "id\tp\tweight\tadjusted\trejected\n";
        for (std::size_t j = 0; j < battery.size(); ++j) {
            out << battery.ids()[j] << '\t' << fmt(battery.p(j)) << '\t' << fmt(weights[j])
                << '\t' << fmt(adjusted[j]) << '\t' << (rejected.contains(j) ? 1 : 0) << '\n';
        }
        out << "# rejections\t" << rejected.size() << '\n';
    }

    void run_weights_optimal()
    {
        const auto means = load_means(means_path);
        const EffectConfiguration config(means.values);
        const auto sol = optimal::solve_c(config, alpha);
        write_weights(out, means.ids, sol.weights);
        out << "# c\t" << fmt(sol.c) << "\toracle_power\t" << fmt(sol.oracle_power)
            << "\tresidual\t" << fmt(sol.residual) << '\n';
    }

    void run_weights_family()
    {
        std::vector<double> cs = parse_grid(c_list);
        if (!mixture_path.empty()) {
            cs = {optimal::solve_c_mixture(load_mixture(mixture_path), alpha, m).c};
        }
        const auto grid = parse_grid(xi_grid);
        std::vector<std::vector<double>> rows;
        for (double cv : cs) {
            std::vector<double> ws;
            double top = 0.0;
            for (double x : grid) {
                ws.push_back(optimal::rho(x, cv, alpha, m));
                top = std::max(top, ws.back());
            }
            for (std::size_t i = 0; i < grid.size(); ++i) {
                rows.push_back({grid[i], cv, ws[i], top > 0.0 ? ws[i] / top : 0.0});
            }
        }
        write_rows(out, {"xi", "c", "weight", "normalized"}, rows);
    }

    void run_power_curve()
    {
        std::vector<std::vector<double>> rows;
        for (double x : parse_grid(xi_grid)) {
            rows.push_back({x, power::power(x, w, alpha, m, sidedness_of(two_sided))});
        }
        write_rows(out, {"xi", "power"}, rows);
    }

    void run_power_average()
    {
        const auto means = load_means(means_path);
        const EffectConfiguration config(means.values, sidedness_of(two_sided));
        WeightVector weights = WeightVector::unit(config.size());
        if (!weights_path.empty()) {
            const auto named = load_weights(weights_path);
            if (named.ids != means.ids) {
                throw ContractError("weights and means must list the same ids in the same order");
            }
            weights = WeightVector(named.values);
        }
        out << "average_power\t" << fmt(power::average_power(config, weights, alpha)) << '\n';
        if (!two_sided) {
            out << "oracle_power\t" << fmt(power::oracle_power(config, alpha)) << '\n';
        }
    }

    void run_two_point()
    {
        const double x = xi_opt.value_or(distfn::upper_quantile(alpha / static_cast<double>(m)));
        std::vector<std::vector<double>> rows;
        for (double b : parse_grid(B_grid)) {
            rows.push_back({b, robustness::robustness_two_point(b, epsilon, x, alpha, m)});
        }
        write_rows(out, {"B", "R"}, rows);
    }

    void run_worst_case()
    {
        const auto rows = robustness::worst_case_power_curves(a, gamma, alpha, m,
                                                              parse_grid(xi_grid), restrict_u);
        out << "xi\txi0\txi_star\tC\tc_star\tu_star\tinf_power\tbonf_power\toracle_power\t"
               "beats_bonf\n";
        for (const auto& r : rows) {
            out << fmt(r.xi) << '\t' << fmt(r.xi0) << '\t'
                << (r.xi_star ? fmt(*r.xi_star) : std::string("nan")) << '\t' << fmt(r.C_of_xi)
                << '\t' << fmt(r.c_star) << '\t' << fmt(r.u_star) << '\t' << fmt(r.inf_power)
                << '\t' << fmt(r.bonf_power) << '\t' << fmt(r.oracle_power) << '\t'
                << (r.beats_bonf ? 1 : 0) << '\n';
        }
    }

    void run_turnaround()
    {
        out << "epsilon\tB0\tB_star\tR_at_B_star\n";
        for (double e : parse_grid(eps_grid)) {
            const auto t = robustness::turnaround(e, alpha, m, xi_opt);
            out << fmt(e) << '\t' << fmt(t.B0) << '\t' << fmt(t.B_star) << '\t'
                << fmt(t.R_at_Bstar) << '\n';
        }
    }

    void run_safe_zone()
    {
        std::vector<std::vector<double>> rows;
        for (double b : parse_grid(B_grid)) {
            rows.push_back({b, robustness::safe_zone_bound(b, alpha, m)});
        }
        write_rows(out, {"B", "xi_bound"}, rows);
    }

    void emit_design(const designer::DesignResult& d)
    {
        write_rows(out, {"epsilon", "B", "w1", "w0", "k", "target_power", "min_power", "c"},
                   {{d.scheme.epsilon, d.scheme.B, d.scheme.w1, d.scheme.w0,
                     static_cast<double>(d.scheme.k), d.target_power, d.min_power, d.c_value}});
        if (!weights_out_path.empty()) {
            const auto weights = designer::expand(d.scheme, m);
            std::vector<std::string> ids(m);
            for (std::size_t j = 0; j < m; ++j) {
                ids[j] = std::to_string(j + 1);
            }
            auto f = open_output(weights_out_path);
            write_weights(f, ids, weights);
        }
    }

    void run_estimate()
    {
        const auto battery = load_battery(battery_path);
        estimator::EstimatorOptions opts;
        if (model == "normal") {
            opts.model = estimator::Model::normal;
        } else if (model == "chisq") {
            opts.model = estimator::Model::chisq;
        } else {
            throw DomainError("--model must be normal or chisq");
        }
        if (variant == "classic") {
            opts.variant = estimator::ChisqVariant::classic;
        } else if (variant == "derived") {
            opts.variant = estimator::ChisqVariant::derived;
        } else {
            throw DomainError("--mom-variant must be classic or derived");
        }
        opts.gamma_smooth = smooth;
        opts.alpha = alpha;
        const auto est = estimator::weights_from_groups(battery, opts);
        write_weights(out, battery.ids(), est.per_test);
        out << "# c\t" << fmt(est.c) << '\n';
        for (const auto& warning : est.warnings) {
            out << "# warning\t" << warning << '\n';
        }
        if (!report_path.empty()) {
            auto f = open_output(report_path);
            f << "group_id\tr\tY\tS2\tpi_hat\txi_hat\traw_w\tsmoothed_w\n";
            for (std::size_t k = 0; k < est.groups.size(); ++k) {
                const auto& g = est.groups[k];
                f << g.group_id << '\t' << g.r_k << '\t' << fmt(g.Y_k) << '\t' << fmt(g.S2_k)
                  << '\t' << fmt(g.pi_hat) << '\t' << fmt(g.xi_hat) << '\t' << fmt(est.raw[k])
                  << '\t' << fmt(est.smoothed[k]) << '\n';
            }
        }
    }

    void run_genome()
    {
        const auto study = simulate::synth_genome(genome, seed);
        const auto up = simulate::upweighted_tests(study, epsilon);
        const auto weights = simulate::trace_to_binary_weights(study, epsilon, B);
        out << "chrom\tposition\ttrace\tupweighted\tweight\tstat\tp\tsignal\n";
        for (std::size_t j = 0; j < study.m(); ++j) {
            const auto& t = study.tests[j];
            out << t.chrom + 1 << '\t' << t.position << '\t' << fmt(study.trace_at(t)) << '\t'
                << (up[j] ? 1 : 0) << '\t' << fmt(weights[j]) << '\t' << fmt(t.stat) << '\t'
                << fmt(distfn::upper_tail(t.stat)) << '\t' << (t.is_signal ? 1 : 0) << '\n';
        }
        if (!report_path.empty()) {
            auto f = open_output(report_path);
            f << "chrom\tposition\ttrace\ttrace_mean\n";
            for (std::size_t ch = 0; ch < study.trace.size(); ++ch) {
                for (std::size_t s = 0; s < study.trace[ch].size(); ++s) {
                    f << ch + 1 << '\t' << s << '\t' << fmt(study.trace[ch][s]) << '\t'
                      << fmt(study.trace_mean[ch][s]) << '\n';
                }
            }
        }
    }

    void run_surface()
    {
        genome.n_assoc = m;
        const auto report = simulate::power_surface(genome, parse_grid(eps_grid),
                                                    parse_grid(B_grid), reps, alpha, seed,
                                                    parse_procedure(procedure), threads);
        out << "epsilon\tB\tmean_discoveries\tse_discoveries\tmean_power\tmean_false_positives"
               "\tfwer\tfwer_lo\tfwer_hi\n";
        for (const auto& cell : report.cells) {
            out << fmt(cell.epsilon) << '\t' << fmt(cell.B) << '\t' << fmt(cell.mean_discoveries)
                << '\t' << fmt(cell.se_discoveries) << '\t' << fmt(cell.mean_power) << '\t'
                << fmt(cell.mean_false_positives) << '\t' << fmt(cell.fwer.estimate) << '\t'
                << fmt(cell.fwer.lo) << '\t' << fmt(cell.fwer.hi) << '\n';
        }
    }

    void run_fwer()
    {
        simulate::WeightSpec spec;
        if (weight_mode == "unit") {
            spec.mode = simulate::WeightMode::unit;
        } else if (weight_mode == "random") {
            spec.mode = simulate::WeightMode::random;
        } else if (weight_mode == "extreme") {
            spec.mode = simulate::WeightMode::extreme;
        } else if (weight_mode == "data-dependent") {
            spec.mode = simulate::WeightMode::data_dependent;
            spec.lognormal_c = lognormal_c;
        } else if (weight_mode == "file") {
            if (weights_path.empty()) {
                throw DomainError("--weight-mode file requires --weights");
            }
            spec.mode = simulate::WeightMode::fixed;
            spec.fixed = load_weights(weights_path).values;
        } else {
            throw DomainError(
                "--weight-mode must be unit, random, extreme, data-dependent or file");
        }
        const auto est = simulate::fwer_mc(parse_procedure(procedure), spec, m, alpha, reps,
                                           seed, threads);
        write_rows(out, {"reps", "fwer", "se", "lo", "hi", "bound", "within_bound"},
                   {{static_cast<double>(est.fwer.trials), est.fwer.estimate, est.fwer.se,
                     est.fwer.lo, est.fwer.hi, est.bound, est.within_bound ? 1.0 : 0.0}});
    }

    void run_discontinuity()
    {
        const auto d = optimal::discontinuity_example(m, alpha, a, gamma, K, c);
        write_rows(out,
                   {"A", "B", "u", "xi", "w_xi_Q", "w_xi_Qtilde", "w_u_Qtilde", "ratio",
                    "c_solved", "ks_distance"},
                   {{d.A, d.B, d.u, d.xi, d.w_on_xi_under_Q, d.w_on_xi_under_Qtilde,
                     d.w_on_u_under_Qtilde, d.ratio, d.c_solved, d.ks_distance}});
    }

    static Procedure parse_procedure(const std::string& name)
    {
        if (name == "bonferroni") {
            return Procedure::bonferroni;
        }
        if (name == "holm") {
            return Procedure::holm;
        }
        if (name == "bh") {
            return Procedure::bh;
        }
        throw DomainError("--procedure must be bonferroni, holm or bh");
    }
};

void add_m(CLI::App* app, std::size_t& m, const char* what = "number of hypotheses")
{
    app->add_option("--m", m, what)->capture_default_str()->check(CLI::PositiveNumber);
}

void add_genome_flags(CLI::App* app, simulate::GenomeConfig& g)
{
    app->add_option("--n-chrom", g.n_chrom, "chromosomes")->capture_default_str();
    app->add_option("--positions", g.positions_per_chrom, "trace positions per chromosome")
        ->capture_default_str();
    app->add_option("--linkage-signals", g.n_linkage_signals,
                    "planted linkage variants, one per chromosome")
        ->capture_default_str();
    app->add_option("--assoc-signals", g.n_assoc_signals,
                    "association signals at linkage variants")
        ->capture_default_str();
    app->add_option("--signal-mean", g.signal_mean, "mean of signal statistics (z units)")
        ->capture_default_str();
    app->add_option("--corr-length", g.trace_correlation_length,
                    "trace correlation length (positions)")
        ->capture_default_str();
    app->add_option("--bump-height", g.bump_height, "trace mean at a variant (z units)")
        ->capture_default_str();
    app->add_option("--bump-half-width", g.bump_half_width, "trace bump half-width (positions)")
        ->capture_default_str();
}

void add_seed(CLI::App* app, std::uint64_t& seed, unsigned& threads)
{
    app->add_option("--seed", seed, "random seed (required)")->required();
    app->add_option("--threads", threads, "worker threads, 0 = all cores (output unaffected)")
        ->capture_default_str();
}

} // namespace

std::vector<double> parse_grid(const std::string& text)
{
    std::vector<double> grid;
    if (std::count(text.begin(), text.end(), ':') == 2) {
        const auto p1 = text.find(':');
        const auto p2 = text.find(':', p1 + 1);
        const double lo = parse_number(text.substr(0, p1));
        const double hi = parse_number(text.substr(p1 + 1, p2 - p1 - 1));
        const double n = parse_number(text.substr(p2 + 1));
        if (!(n >= 1.0) || n != std::floor(n)) {
            throw DomainError("grid '" + text + "': point count must be a positive integer");
        }
        const auto count = static_cast<std::size_t>(n);
        for (std::size_t i = 0; i < count; ++i) {
            grid.push_back(count == 1 ? lo
                                      : lo + (hi - lo) * static_cast<double>(i) /
                                                 static_cast<double>(count - 1));
        }
        return grid;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        grid.push_back(parse_number(item));
    }
    if (grid.empty()) {
        throw DomainError("empty grid");
    }
    return grid;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    Commands cmd(out);
    CLI::App app{"Weighted multiple testing: procedures, optimal weights, robustness, "
                 "designs, estimation and simulation",
                 "pweight"};
    app.require_subcommand(1);

    // test
    auto* test = app.add_subcommand("test", "apply a (weighted) testing procedure");
    test->require_subcommand(1);
    for (const auto& [name, proc] : {std::pair{"bonferroni", Procedure::bonferroni},
                                     std::pair{"holm", Procedure::holm},
                                     std::pair{"bh", Procedure::bh}}) {
        auto* sub = test->add_subcommand(name, std::string("weighted ") + name);
        sub->add_option("--battery", cmd.battery_path, "battery TSV (id, p[, stat][, group])")
            ->required();
        sub->add_option("--weights", cmd.weights_path, "weights TSV (id, weight); unit if absent");
        add_alpha(sub, cmd.alpha);
        sub->add_flag("--two-sided", cmd.two_sided, "p-values are two-sided");
        sub->callback([&cmd, p = proc] { cmd.run_test(p); });
    }

    // weights
    auto* weights = app.add_subcommand("weights", "average-power-optimal weights");
    weights->require_subcommand(1);
    auto* w_opt = weights->add_subcommand("optimal", "optimal weights for known effects");
    w_opt->add_option("--means", cmd.means_path, "means TSV (id, mean)")->required();
    add_alpha(w_opt, cmd.alpha);
    w_opt->callback([&] { cmd.run_weights_optimal(); });
    auto* w_fam = weights->add_subcommand("family", "optimal weight function over an effect grid");
    auto* c_opt = w_fam->add_option("--c-list", cmd.c_list, "normalizing constants: a,b,c or lo:hi:n")
                      ->capture_default_str();
    w_fam->add_option("--mixture", cmd.mixture_path,
                      "mixture TSV (mass, location); solves for c instead of --c-list")
        ->excludes(c_opt);
    w_fam->add_option("--xi-grid", cmd.xi_grid, "effects: a,b,c or lo:hi:n")
        ->capture_default_str();
    add_alpha(w_fam, cmd.alpha);
    add_m(w_fam, cmd.m);
    w_fam->callback([&] { cmd.run_weights_family(); });

    // power
    auto* pw = app.add_subcommand("power", "power of weighted Bonferroni");
    pw->require_subcommand(1);
    auto* pw_curve = pw->add_subcommand("curve", "power as a function of the effect");
    pw_curve->add_option("--weight", cmd.w, "weight")->capture_default_str();
    pw_curve->add_option("--xi-grid", cmd.xi_grid, "effects: a,b,c or lo:hi:n")
        ->capture_default_str();
    pw_curve->add_flag("--two-sided", cmd.two_sided, "two-sided test");
    add_alpha(pw_curve, cmd.alpha);
    add_m(pw_curve, cmd.m);
    pw_curve->callback([&] { cmd.run_power_curve(); });
    auto* pw_avg = pw->add_subcommand("average", "average power over a configuration");
    pw_avg->add_option("--means", cmd.means_path, "means TSV (id, mean)")->required();
    pw_avg->add_option("--weights", cmd.weights_path, "weights TSV; unit if absent");
    pw_avg->add_flag("--two-sided", cmd.two_sided, "two-sided tests");
    add_alpha(pw_avg, cmd.alpha);
    pw_avg->callback([&] { cmd.run_power_average(); });

    // robustness
    auto* rob = app.add_subcommand("robustness", "gain and loss from wrong weights");
    rob->require_subcommand(1);
    auto* r_two = rob->add_subcommand("two-point", "R(B, epsilon) over a B grid");
    r_two->add_option("--epsilon", cmd.epsilon, "upweighted fraction")->capture_default_str();
    r_two->add_option("--B-grid", cmd.B_grid, "raw weight ratios")->capture_default_str();
    r_two->add_option("--xi", cmd.xi_opt, "effect (default z_{alpha/m})");
    add_alpha(r_two, cmd.alpha);
    add_m(r_two, cmd.m);
    r_two->callback([&] { cmd.run_two_point(); });
    auto* r_worst = rob->add_subcommand("worst-case", "worst-case power under misspecification");
    r_worst->add_option("--a", cmd.a, "fraction of true alternatives")->capture_default_str();
    r_worst->add_option("--gamma", cmd.gamma, "fraction of mistaken nulls")
        ->capture_default_str();
    r_worst->add_option("--xi-grid", cmd.xi_grid, "effects")->capture_default_str();
    r_worst->add_flag("--restrict", cmd.restrict_u, "restrict 0 <= u <= xi");
    add_alpha(r_worst, cmd.alpha);
    add_m(r_worst, cmd.m);
    r_worst->callback([&] { cmd.run_worst_case(); });
    auto* r_turn = rob->add_subcommand("turnaround", "turnaround point B0 per epsilon");
    r_turn->add_option("--eps-grid", cmd.eps_grid, "upweighted fractions")
        ->capture_default_str();
    r_turn->add_option("--xi", cmd.xi_opt, "effect (default z_{alpha/m})");
    add_alpha(r_turn, cmd.alpha);
    add_m(r_turn, cmd.m);
    r_turn->callback([&] { cmd.run_turnaround(); });
    auto* r_safe = rob->add_subcommand("safe-zone", "effect bound below which weighting is safe");
    r_safe->add_option("--B-grid", cmd.B_grid, "weight ratios, each >= 2")
        ->capture_default_str();
    add_alpha(r_safe, cmd.alpha);
    add_m(r_safe, cmd.m);
    r_safe->callback([&] { cmd.run_safe_zone(); });

    // design
    auto* des = app.add_subcommand("design", "two-valued weight designs");
    des->require_subcommand(1);
    auto* d_min = des->add_subcommand("min-power", "maximize the minimum power");
    d_min->add_option("--epsilon", cmd.epsilon, "fraction reaching power 1 - beta")
        ->capture_default_str();
    d_min->add_option("--beta", cmd.beta, "type II error at w1, in (0, 1/2)")
        ->capture_default_str();
    d_min->add_option("--weights-out", cmd.weights_out_path, "write expanded weights TSV");
    add_alpha(d_min, cmd.alpha);
    add_m(d_min, cmd.m);
    d_min->callback([&] {
        cmd.emit_design(designer::design_min_power(cmd.epsilon, cmd.beta, cmd.alpha, cmd.m));
    });
    auto* d_max = des->add_subcommand("max-count", "maximize the count at power 1 - beta");
    d_max->add_option("--beta", cmd.beta, "type II error at w1, in (0, 1/2)")
        ->capture_default_str();
    d_max->add_option("--delta", cmd.delta, "minimum power everywhere, in [0, 1 - beta)")
        ->capture_default_str();
    d_max->add_option("--weights-out", cmd.weights_out_path, "write expanded weights TSV");
    add_alpha(d_max, cmd.alpha);
    add_m(d_max, cmd.m);
    d_max->callback([&] {
        cmd.emit_design(designer::design_max_count(cmd.beta, cmd.delta, cmd.alpha, cmd.m));
    });

    // estimate
    auto* est = app.add_subcommand("estimate", "grouped weights estimated from the data");
    est->add_option("--battery", cmd.battery_path, "battery TSV with a group column")
        ->required();
    est->add_option("--model", cmd.model, "normal or chisq")->capture_default_str();
    est->add_option("--mom-variant", cmd.variant, "chisq estimator: classic or derived")
        ->capture_default_str();
    est->add_option("--smooth", cmd.smooth, "smoothing gamma in [0, 1]")->capture_default_str();
    est->add_option("--report", cmd.report_path, "write per-group report TSV");
    add_alpha(est, cmd.alpha);
    est->callback([&] { cmd.run_estimate(); });

    // simulate
    auto* sim = app.add_subcommand("simulate", "Monte Carlo experiments");
    sim->require_subcommand(1);
    auto* s_gen = sim->add_subcommand("genome", "one synthetic study, dumped per test");
    add_genome_flags(s_gen, cmd.genome);
    s_gen->add_option("--n-assoc", cmd.genome.n_assoc, "association tests")
        ->capture_default_str();
    s_gen->add_option("--epsilon", cmd.epsilon, "upweighted trace fraction")
        ->capture_default_str();
    s_gen->add_option("--B", cmd.B, "raw weight ratio")->capture_default_str();
    s_gen->add_option("--trace-out", cmd.report_path, "write full trace TSV");
    add_seed(s_gen, cmd.seed, cmd.threads);
    s_gen->callback([&] { cmd.run_genome(); });
    auto* s_surf = sim->add_subcommand("surface", "discoveries over an (epsilon, B) grid");
    add_genome_flags(s_surf, cmd.genome);
    add_m(s_surf, cmd.m, "association tests");
    s_surf->add_option("--reps", cmd.reps, "replicates")->capture_default_str();
    s_surf->add_option("--eps-grid", cmd.eps_grid, "upweighted fractions")
        ->capture_default_str();
    s_surf->add_option("--B-grid", cmd.B_grid, "raw weight ratios")->capture_default_str();
    s_surf->add_option("--procedure", cmd.procedure, "bonferroni, holm or bh")
        ->capture_default_str();
    add_alpha(s_surf, cmd.alpha);
    add_seed(s_surf, cmd.seed, cmd.threads);
    s_surf->callback([&] { cmd.run_surface(); });
    auto* s_fwer = sim->add_subcommand("fwer", "familywise error under the complete null");
    add_m(s_fwer, cmd.m);
    s_fwer->add_option("--reps", cmd.reps, "replicates, at least 1000")->capture_default_str();
    s_fwer->add_option("--procedure", cmd.procedure, "bonferroni, holm or bh")
        ->capture_default_str();
    s_fwer->add_option("--weight-mode", cmd.weight_mode,
                       "unit, random, extreme, data-dependent or file")
        ->capture_default_str();
    s_fwer->add_option("--weights", cmd.weights_path, "weights TSV for --weight-mode file");
    s_fwer->add_option("--lognormal-c", cmd.lognormal_c,
                       "spread of data-dependent weights exp(c V - c^2/2)")
        ->capture_default_str();
    add_alpha(s_fwer, cmd.alpha);
    add_seed(s_fwer, cmd.seed, cmd.threads);
    s_fwer->callback([&] { cmd.run_fwer(); });

    // example
    auto* ex = app.add_subcommand("example", "worked examples");
    ex->require_subcommand(1);
    auto* ex_disc = ex->add_subcommand("discontinuity",
                                       "nearby effect distributions with very different weights");
    add_m(ex_disc, cmd.m);
    add_alpha(ex_disc, cmd.alpha);
    ex_disc->add_option("--a", cmd.a, "alternative fraction")->capture_default_str();
    ex_disc->add_option("--gamma", cmd.gamma, "perturbing fraction")->capture_default_str();
    ex_disc->add_option("--K", cmd.K, "perturbation scale")->capture_default_str();
    ex_disc->add_option("--c", cmd.c, "normalizing constant")->default_val(0.1);
    ex_disc->callback([&] { cmd.run_discontinuity(); });

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(std::move(reversed));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const ContractError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

} // namespace pweight::cli
