#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dips/closed_form_statistics.hpp"
#include "dips/exchangeable_pair.hpp"
#include "dips/kernel_decomposition.hpp"
#include "dips/permutation_transforms.hpp"
#include "dips/rng.hpp"
#include "dips/run_config.hpp"
#include "dips/simulation.hpp"
#include "dips/stein_normal.hpp"

namespace dips::cli {

namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// Writes to a temporary sibling and renames, so a failure leaves no partial file.
void write_file(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw UsageError("cannot write '" + path + "'");
        f << text;
        if (!f) throw UsageError("cannot write '" + path + "'");
    }
    std::filesystem::rename(tmp, path);
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty())
        out << text;
    else
        write_file(path, text);
}

// Flag values are kept as text and applied through RunConfig::set, so flags and
// config files share one parser and one error list.
struct Override {
    std::string section;
    std::string key;
    std::string value;
    CLI::Option* opt = nullptr;
    bool is_flag = false;
    bool flag_value = false;
};

class Overrides {
public:
    void text(CLI::App* app, const std::string& name, const std::string& section, const std::string& key,
              const std::string& help) {
        auto& o = *items_.emplace_back(std::make_unique<Override>());
        o.section = section;
        o.key = key;
        o.opt = app->add_option(name, o.value, help);
    }
    void flag(CLI::App* app, const std::string& name, const std::string& section, const std::string& key,
              const std::string& help) {
        auto& o = *items_.emplace_back(std::make_unique<Override>());
        o.section = section;
        o.key = key;
        o.is_flag = true;
        o.opt = app->add_flag(name, o.flag_value, help);
    }
    void apply(RunConfig& c, std::vector<std::string>& problems) const {
        for (const auto& o : items_) {
            if (o->opt->count() == 0) continue;
            try {
                c.set(o->section, o->key, o->is_flag ? (o->flag_value ? "true" : "false") : o->value);
            } catch (const ConfigError& e) {
                problems.insert(problems.end(), e.problems().begin(), e.problems().end());
            }
        }
    }
    bool given(const std::string& section, const std::string& key) const {
        for (const auto& o : items_)
            if (o->section == section && o->key == key && o->opt->count() > 0) return true;
        return false;
    }

private:
    std::vector<std::unique_ptr<Override>> items_;
};

void statistic_options(CLI::App* app, Overrides& ov) {
    ov.text(app, "--builtin,--kind", "statistic", "kind", "descents | inversions | mww | chatterjee");
    ov.text(app, "--n", "statistic", "n", "permutation size");
    ov.text(app, "--n1", "statistic", "n1", "mww first sample size");
    ov.text(app, "--n2", "statistic", "n2", "mww second sample size");
    ov.text(app, "--normalization", "statistic", "normalization", "variance_exact | paper_literal");
}

struct Globals {
    std::string config;
    Overrides ov;
};

// Config file, then flags; every problem is reported together.
RunConfig resolve(const Globals& g, const std::function<void(RunConfig&)>& fill = {}, bool needs_statistic = false) {
    RunConfig c;
    std::vector<std::string> problems;
    if (!g.config.empty()) {
        try {
            c = RunConfig::load_file(g.config);
        } catch (const ConfigError& e) {
            problems.insert(problems.end(), e.problems().begin(), e.problems().end());
        }
    }
    g.ov.apply(c, problems);
    if (fill) fill(c);
    try {
        c.validate(needs_statistic);
    } catch (const ConfigError& e) {
        problems.insert(problems.end(), e.problems().begin(), e.problems().end());
    }
    if (!problems.empty()) throw ConfigError(problems);
    return c;
}

void default_mww_split(RunConfig& c) {
    if (c.kind != "mww" || (c.n1 > 0 && c.n2 > 0)) return;
    if (c.n1 > 0 && c.n > c.n1) c.n2 = c.n - c.n1;
    else if (c.n2 > 0 && c.n > c.n2) c.n1 = c.n - c.n2;
    else if (c.n >= 2) {
        c.n1 = c.n / 2;
        c.n2 = c.n - c.n1;
    }
}

json residuals_json(const MarginalResiduals& m) {
    return {{"a_rows", m.a_rows}, {"a_cols", m.a_cols}, {"b_marginals", m.b_marginals}, {"sum_a2", m.sum_a2}};
}

json check_json(const ClosedFormCheck& c) {
    return {{"scale", c.scale},
            {"max_deviation", c.max_deviation},
            {"max_reconstruct", c.max_reconstruct},
            {"permutations", c.permutations},
            {"agree", c.agree()}};
}

// ---- decompose ----

struct DecomposeArgs {
    std::string kernel;
    bool exact = false;
};

int cmd_decompose(const Globals& g, const DecomposeArgs& a, const RunConfig& cfg_in, std::ostream& out) {
    RunConfig cfg = cfg_in;
    json report;
    std::optional<StatisticSpec> spec;
    std::optional<Kernel4> kernel;
    if (!a.kernel.empty()) {
        if (g.ov.given("statistic", "kind")) throw UsageError("give either --kernel or --builtin, not both");
        try {
            kernel = read_kernel_file(a.kernel);
        } catch (const std::exception& e) {
            throw UsageError(std::string("kernel file: ") + e.what());
        }
        report["source"] = "kernel";
        report["kernel_file"] = a.kernel;
    } else {
        if (!g.ov.given("statistic", "kind") && g.config.empty()) throw UsageError("decompose needs --kernel or --builtin");
        default_mww_split(cfg);
        spec = cfg.statistic_spec();
        if (spec->n > kMaxDenseN)
            throw UsageError("n=" + std::to_string(spec->n) + " exceeds the dense cap " + std::to_string(kMaxDenseN));
        kernel = build_kernel(*spec);
        report["source"] = "builtin";
        report["statistic"] = to_string(spec->kind);
        report["normalization"] = to_string(spec->normalization);
        if (spec->kind == StatisticKind::mww) {
            report["n1"] = spec->n1;
            report["n2"] = spec->n2;
        }
    }
    const NormalizedDips dips = normalize(*kernel);
    const int n = dips.n;
    if (a.exact && n > kMaxExactAssignmentN)
        throw UsageError("--exact needs n <= " + std::to_string(kMaxExactAssignmentN));
    report["n"] = n;
    report["sigma"] = dips.sigma;
    report["sigma2"] = dips.sigma * dips.sigma;
    report["a_is_zero"] = dips.a_is_zero;
    report["mean_shift"] = dips.mean_shift;
    report["marginal_residuals"] = residuals_json(marginal_residuals(dips));
    report["delta"] = to_json(boundedness_delta(dips, a.exact));

    double worst = 0.0;
    std::size_t checked = 0;
    auto rec = [&](const Permutation& p) {
        worst = std::max(worst, reconstruct_check(*kernel, dips, p));
        ++checked;
    };
    if (n <= 7) {
        for_each_permutation(n, rec);
    } else {
        Engine rng = substream(cfg.seed, 0);
        std::vector<int> v(static_cast<std::size_t>(n));
        for (int s = 0; s < 200; ++s) {
            std::iota(v.begin(), v.end(), 0);
            shuffle_forward(v, rng);
            rec(Permutation(v));
        }
    }
    report["reconstruct"] = {{"max_residual", worst}, {"permutations", checked}};

    if (spec) {
        report["closed_form"] = check_json(closed_form_check(*spec, 7, 200, cfg.seed));
        if (spec->kind == StatisticKind::descents) {
            const auto d = descent_scale_candidates(n);
            report["descent_scales"] = {{"literal_sd", d.literal_sd},
                                        {"exact_sd", d.exact_sd},
                                        {"stated_sigma2", d.stated_sigma2},
                                        {"eta_sigma2", d.eta_sigma2},
                                        {"displayed_coefficient", d.displayed_coefficient}};
        }
    }
    emit(report.dump(2) + "\n", cfg.out, out);
    return kOk;
}

// ---- simulate ----

int cmd_simulate(const RunConfig& cfg_in, std::ostream& out, std::ostream& err) {
    RunConfig cfg = cfg_in;
    default_mww_split(cfg);
    const StatisticSpec spec = cfg.statistic_spec();
    const std::vector<double> grid = cfg.simulation_grid();
    TailRatioTable table =
        tail_ratio_table(spec, grid, cfg.num_samples, cfg.seed, cfg.workers, cfg.allow_beyond_cap);
    table.snapped = cfg.snap_lattice;

    std::ostringstream csv;
    table.write_csv(csv);
    json meta = table.meta();
    meta["range_cap"] = z_cap(spec);
    meta["max_abs_ratio_error"] = table.max_abs_ratio_error();
    meta["config"] = cfg.to_json();

    const std::string summary = to_string(spec.kind) + " n=" + std::to_string(spec.n) + " samples=" +
                                std::to_string(cfg.num_samples) + " grid_points=" + std::to_string(grid.size()) +
                                " max|ratio-1|=" + fmt17(table.max_abs_ratio_error()) + "\n";
    if (cfg.out.empty()) {
        out << csv.str();
        err << summary;
    } else {
        write_file(cfg.out + ".csv", csv.str());
        write_file(cfg.out + ".json", meta.dump(2) + "\n");
        out << summary;
    }
    return kOk;
}

// ---- verify ----

struct VerifyArgs {
    std::string suite;
    std::string kernel;
    int count = 100;
    std::uint64_t audit_samples = 100000;
};

struct Check {
    std::string name;
    bool passed = false;
    json detail;
};

std::vector<StatisticSpec> builtins_for(const RunConfig& cfg, const Globals& g, int n) {
    std::vector<StatisticSpec> out;
    const Normalization m = parse_normalization(cfg.normalization);
    if (g.ov.given("statistic", "kind")) {
        RunConfig c = cfg;
        c.n = n;
        default_mww_split(c);
        out.push_back(c.statistic_spec());
        return out;
    }
    out.push_back(StatisticSpec::descents(n, m));
    out.push_back(StatisticSpec::inversions(n, m));
    out.push_back(StatisticSpec::mww(n / 2, n - n / 2, m));
    out.push_back(StatisticSpec::chatterjee(n, m));
    return out;
}

std::string label(const StatisticSpec& s) {
    std::string l = to_string(s.kind) + " n=" + std::to_string(s.n);
    if (s.kind == StatisticKind::mww) l += " n1=" + std::to_string(s.n1) + " n2=" + std::to_string(s.n2);
    return l;
}

std::vector<Permutation> test_permutations(int n, int count, std::uint64_t seed) {
    std::vector<Permutation> perms;
    if (n <= 6) {
        for_each_permutation(n, [&](const Permutation& p) { perms.push_back(p); });
        return perms;
    }
    Engine rng = substream(seed, 1);
    for (int c = 0; c < count; ++c) perms.push_back(sample_permutation(rng, n));
    return perms;
}

std::vector<Check> suite_pair_identity(const RunConfig& cfg, const Globals& g, const VerifyArgs& a) {
    const int n = cfg.n > 0 ? cfg.n : 6;
    std::vector<Check> checks;
    for (const auto& spec : builtins_for(cfg, g, n)) {
        const NormalizedDips dips = closed_form_ab(spec);
        double worst = 0.0;
        std::size_t tested = 0;
        for (const auto& p : test_permutations(n, a.count, cfg.seed)) {
            const ConditionalMean c = conditional_mean_d(dips, p);
            worst = std::max(worst, std::abs(c.lhs - c.rhs) / std::max(1.0, std::abs(evaluate(dips, p))));
            ++tested;
        }
        checks.push_back({"pair-identity " + label(spec), worst <= 1e-10,
                          {{"permutations", tested}, {"max_scaled_error", worst}}});
    }
    return checks;
}

std::vector<TransformSpec> lemma4_specs(int n) {
    std::vector<TransformSpec> specs;
    specs.push_back({{SingleStep{1, 2 % n}}});
    if (n >= 3) specs.push_back({{PairStep{0, 1, 2, 0}}});
    if (n >= 4) specs.push_back({{PairStep{0, 1, 2, 0}, SingleStep{2, 1}}});
    if (n >= 5) specs.push_back({{PairStep{0, 1, 2, 0}, PairStep{2, 3, 1, 3}}});
    if (n >= 6) specs.push_back({{SingleStep{4, 5}, PairStep{0, 1, 2, 0}, PairStep{2, 3, 1, 3}}});
    return specs;
}

std::vector<Check> suite_lemma4(const RunConfig& cfg) {
    const int n = cfg.n > 0 ? cfg.n : 5;
    if (n < 2 || n > 7) throw UsageError("lemma4 needs 2 <= n <= 7");
    std::vector<Check> checks;
    for (const auto& spec : lemma4_specs(n)) {
        const FiberReport r = fiber_uniformity_test(n, spec);
        checks.push_back({"lemma4 n=" + std::to_string(n) + " " + spec.to_string(), r.passed, to_json(r)});
    }
    return checks;
}

Check moment_check(const std::string& name, double mean, double mean_ref, double var, double var_ref) {
    const bool ok = std::abs(mean - mean_ref) <= 1e-10 * std::max(1.0, std::abs(mean_ref)) &&
                    std::abs(var - var_ref) <= 1e-10 * std::max(1.0, std::abs(var_ref));
    return {name, ok, {{"mean", mean}, {"mean_expected", mean_ref}, {"variance", var}, {"variance_expected", var_ref}}};
}

std::vector<Check> suite_moments(const RunConfig& cfg) {
    const int n = cfg.n > 0 ? cfg.n : 6;
    if (n < 2 || n > kMaxEnumerationN) throw UsageError("moments needs 2 <= n <= " + std::to_string(kMaxEnumerationN));
    const double m = n;
    const int n1 = n / 2, n2 = n - n / 2;
    std::vector<Check> checks;

    const auto des = exact_distribution(StatisticSpec::descents(n));
    checks.push_back(moment_check("descents n=" + std::to_string(n), des.raw_mean(), (m - 1) / 2, des.raw_variance(),
                                  (m + 1) / 12));
    const auto inv = exact_distribution(StatisticSpec::inversions(n));
    checks.push_back(moment_check("inversions n=" + std::to_string(n), inv.raw_mean(), m * (m - 1) / 4,
                                  inv.raw_variance(), m * (m - 1) * (2 * m + 5) / 72));
    const auto mww = exact_distribution(StatisticSpec::mww(n1, n2));
    checks.push_back(moment_check("mww n1=" + std::to_string(n1) + " n2=" + std::to_string(n2), mww.raw_mean(),
                                  n1 * n2 / 2.0, mww.raw_variance(), n1 * n2 * (m + 1) / 12));
    const auto osc = exact_distribution(StatisticSpec::chatterjee(n));
    checks.push_back({"chatterjee oscillation mean n=" + std::to_string(n),
                      std::abs(osc.raw_mean() - (m * m - 1) / 3) <= 1e-10 * m * m,
                      {{"mean", osc.raw_mean()},
                       {"mean_expected", (m * m - 1) / 3},
                       {"normalized_variance", osc.variance()}}});

    const auto eul = eulerian_distribution(StatisticSpec::descents(n));
    double diff = 0.0;
    for (std::size_t t = 0; t < des.pmf.size(); ++t) diff = std::max(diff, std::abs(des.pmf[t] - eul.pmf[t]));
    checks.push_back({"descents enumeration vs eulerian n=" + std::to_string(n),
                      des.pmf.size() == eul.pmf.size() && diff <= 1e-15, {{"max_pmf_difference", diff}}});

    const auto lit = exact_distribution(StatisticSpec::descents(n, Normalization::paper_literal));
    checks.push_back({"descent normalization arbitration n=" + std::to_string(n),
                      std::abs(des.variance() - 1) <= 1e-10,
                      {{"variance_exact_var", des.variance()},
                       {"paper_literal_var", lit.variance()},
                       {"unit_variance_mode", std::abs(des.variance() - 1) <= 1e-10 ? "variance_exact" : "none"}}});
    return checks;
}

std::vector<Check> suite_reconstruct(const RunConfig& cfg, const Globals& g, const VerifyArgs& a) {
    std::vector<Check> checks;
    if (!a.kernel.empty()) {
        Kernel4 k = [&] {
            try {
                return read_kernel_file(a.kernel);
            } catch (const std::exception& e) {
                throw UsageError(std::string("kernel file: ") + e.what());
            }
        }();
        const NormalizedDips dips = normalize(k);
        const double scale = std::max(1.0, k.max_abs());
        double worst = 0.0;
        std::size_t tested = 0;
        for (const auto& p : test_permutations(k.n(), a.count, cfg.seed)) {
            worst = std::max(worst, reconstruct_check(k, dips, p));
            ++tested;
        }
        const auto mr = marginal_residuals(dips);
        const bool ok = worst <= 1e-10 * scale && mr.b_marginals <= 1e-12 * scale;
        checks.push_back({"reconstruct " + a.kernel, ok,
                          {{"max_residual", worst}, {"permutations", tested}, {"marginals", residuals_json(mr)}}});
        return checks;
    }
    const int n = cfg.n > 0 ? cfg.n : 5;
    for (const auto& spec : builtins_for(cfg, g, n)) {
        const ClosedFormCheck c = closed_form_check(spec, 8, a.count, cfg.seed);
        checks.push_back({"reconstruct " + label(spec), c.agree(), check_json(c)});
    }
    return checks;
}

std::vector<Check> suite_exchangeability(const RunConfig& cfg, const Globals& g) {
    const int n = cfg.n > 0 ? cfg.n : 4;
    if (n < 2 || n > 6) throw UsageError("exchangeability needs 2 <= n <= 6");
    std::vector<Check> checks;
    for (const auto& spec : builtins_for(cfg, g, n)) {
        const ExchangeabilityReport r = exchangeability_check(closed_form_ab(spec));
        checks.push_back({"exchangeability " + label(spec), r.passed(), to_json(r)});
    }
    return checks;
}

std::vector<Check> suite_audit(const RunConfig& cfg, const Globals& g, const VerifyArgs& a) {
    const int n = cfg.n > 0 ? cfg.n : 50;
    std::vector<Check> checks;
    for (const auto& spec : builtins_for(cfg, g, n)) {
        const NormalizedDips dips = closed_form_ab(spec);
        const DeltaReport d = boundedness_delta(dips, false);
        const AuditReport r = pair_bounds_audit(dips, d.delta, a.audit_samples, cfg.seed);
        json detail = to_json(r);
        detail["delta_report"] = to_json(d);
        checks.push_back({"audit " + label(spec), r.passed(), detail});
    }
    return checks;
}

int cmd_verify(const Globals& g, const VerifyArgs& a, const RunConfig& cfg, std::ostream& out) {
    std::vector<Check> checks;
    auto add = [&](std::vector<Check> c) { checks.insert(checks.end(), c.begin(), c.end()); };
    const bool all = a.suite == "all";
    if (all || a.suite == "pair-identity") add(suite_pair_identity(cfg, g, a));
    if (all || a.suite == "lemma4") add(suite_lemma4(cfg));
    if (all || a.suite == "moments") add(suite_moments(cfg));
    if (all || a.suite == "reconstruct") add(suite_reconstruct(cfg, g, a));
    if (all || a.suite == "exchangeability") add(suite_exchangeability(cfg, g));
    if (all || a.suite == "audit") add(suite_audit(cfg, g, a));

    bool passed = true;
    json list = json::array();
    for (const auto& c : checks) {
        passed = passed && c.passed;
        list.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    }
    const json report{{"suite", a.suite}, {"passed", passed}, {"checks", list}};
    emit(report.dump(2) + "\n", cfg.out, out);
    return passed ? kOk : kVerifyFailed;
}

// ---- envelope ----

int cmd_envelope(const Globals& g, bool as_csv, const RunConfig& cfg_in, std::ostream& out) {
    RunConfig cfg = cfg_in;
    EnvelopeParams p;
    std::string delta_source = "config";
    if (cfg.delta) {
        p.delta = *cfg.delta;
        p.n = cfg.kind == "mww" && cfg.n == 0 ? cfg.n1 + cfg.n2 : cfg.n;
    } else {
        if (!g.ov.given("statistic", "kind") && g.config.empty())
            throw UsageError("envelope needs --delta or a statistic (--builtin) to derive it");
        default_mww_split(cfg);
        const StatisticSpec spec = cfg.statistic_spec();
        p.delta = boundedness_delta(closed_form_ab(spec), false).delta;
        p.n = spec.n;
        delta_source = "boundedness_delta(" + to_string(spec.kind) + ")";
    }
    if (p.n < 1) throw ConfigError({"statistic.n: envelope needs n >= 1"});
    p.theta = cfg.theta;
    p.c1 = cfg.c1;
    p.delta1_c = cfg.delta1_c;
    p.validate();

    const double tau = tau_theta(p);
    const ApplicationDeltas app = application_deltas(p.n, p.delta, p.delta1_c);
    const double tau0 = tau0_theta(
        tau, p.delta, [&](double t) { return app.delta1(t); }, [&](double) { return app.delta2(); }, p.theta);
    const std::vector<double> zs = cfg.z_list.empty() ? std::vector<double>{0, 0.5, 1, 1.5, 2} : cfg.z_list;
    const std::vector<double> ts = cfg.t_list.empty() ? std::vector<double>{0.5, 1} : cfg.t_list;
    const double t_max = std::min(tau, 1 / p.delta);

    json md = json::array(), mgf = json::array(), thm6 = json::array();
    std::ostringstream csv;
    csv << "quantity,x,value,out_of_range\n";
    for (double z : zs) {
        const bool out_of_range = z < 0 || z > tau;
        const double v = md_bound_formula(p, z);
        md.push_back({{"z", z}, {"envelope", out_of_range ? json(nullptr) : json(v)}, {"out_of_range", out_of_range}});
        csv << "md_bound," << fmt17(z) << "," << (out_of_range ? "" : fmt17(v)) << "," << (out_of_range ? 1 : 0)
            << "\n";
        const double b = thm6_bound(z, p.delta, app.delta1(z), app.delta2(), p.theta);
        thm6.push_back({{"z", z}, {"bound", b}});
        csv << "thm6_bound," << fmt17(z) << "," << fmt17(b) << ",0\n";
    }
    for (double t : ts) {
        const bool out_of_range = t < 0 || t > t_max;
        const double v = mgf_envelope(t, p.delta, app.delta1(t), app.delta2());
        mgf.push_back({{"t", t},
                       {"delta1", app.delta1(t)},
                       {"delta2", app.delta2()},
                       {"envelope", out_of_range ? json(nullptr) : json(v)},
                       {"out_of_range", out_of_range}});
        csv << "mgf_envelope," << fmt17(t) << "," << (out_of_range ? "" : fmt17(v)) << "," << (out_of_range ? 1 : 0)
            << "\n";
    }
    const json report{{"params",
                       {{"n", p.n},
                        {"delta", p.delta},
                        {"delta_source", delta_source},
                        {"theta", p.theta},
                        {"c1", p.c1},
                        {"delta1_c", p.delta1_c}}},
                      {"tau", tau},
                      {"tau0", tau0},
                      {"md_bound", md},
                      {"thm6_bound", thm6},
                      {"mgf_envelope", mgf},
                      {"config", cfg.to_json()}};
    emit(as_csv ? csv.str() : report.dump(2) + "\n", cfg.out, out);
    return kOk;
}

// ---- stats ----

struct StatsArgs {
    std::string perm;
    std::string csv;
    bool header = false;
};

int cmd_stats(const Globals& g, const StatsArgs& a, std::ostream& out) {
    if (a.perm.empty() == a.csv.empty()) throw UsageError("stats needs exactly one of --perm or --csv");
    json report;
    if (!a.csv.empty()) {
        const RunConfig cfg = resolve(g, [](RunConfig& c) {
            if (c.kind == "descents") c.kind = "chatterjee";
        });
        if (parse_statistic_kind(cfg.kind) != StatisticKind::chatterjee_oscillation)
            throw UsageError("--csv input is for the chatterjee statistic");
        std::ifstream in(a.csv);
        if (!in) throw UsageError("cannot open '" + a.csv + "'");
        const auto [x, y] = read_xy_csv(in, a.header);
        const Permutation r = chatterjee_ranks(x, y);
        const StatisticSpec spec = StatisticSpec::chatterjee(static_cast<int>(x.size()));
        report = {{"statistic", "chatterjee"},
                  {"n", spec.n},
                  {"xi", chatterjee_xi(x, y)},
                  {"ranks", r.one_based()},
                  {"oscillation", oscillation(r)},
                  {"value", statistic_value(spec, r)}};
        emit(report.dump(2) + "\n", cfg.out, out);
        return kOk;
    }
    const Permutation p = [&] {
        try {
            return Permutation::parse(a.perm);
        } catch (const std::exception& e) {
            throw UsageError(std::string("--perm: ") + e.what());
        }
    }();
    const RunConfig cfg = resolve(
        g,
        [&](RunConfig& c) {
            if (c.n == 0) c.n = p.size();
            default_mww_split(c);
        },
        true);
    const StatisticSpec spec = cfg.statistic_spec();
    if (spec.n != p.size()) throw UsageError("--perm has length " + std::to_string(p.size()) + ", n is " + std::to_string(spec.n));
    report = {{"statistic", to_string(spec.kind)},
              {"n", spec.n},
              {"normalization", to_string(spec.normalization)},
              {"perm", p.one_based()},
              {"raw", raw_statistic(spec, p)},
              {"value", statistic_value(spec, p)}};
    if (spec.kind == StatisticKind::mww) {
        report["n1"] = spec.n1;
        report["n2"] = spec.n2;
    }
    emit(report.dump(2) + "\n", cfg.out, out);
    return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Double-indexed permutation statistics: decomposition, verification and tail simulation", "dips"};
    app.fallthrough();
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config, "config file (key=value sections, or a JSON sidecar)");
    g.ov.text(&app, "--seed", "simulation", "seed", "root seed");
    g.ov.text(&app, "--workers", "simulation", "workers", "worker threads");
    g.ov.text(&app, "--out", "output", "out", "output path (simulate: prefix for .csv and .json)");

    auto* dec = app.add_subcommand("decompose", "normalize a kernel and report its decomposition");
    DecomposeArgs dec_args;
    dec->add_option("--kernel", dec_args.kernel, "kernel file: 'n=<int>' then n^4 reals");
    dec->add_flag("--exact", dec_args.exact, "exact row bound by assignment (n <= 12)");
    Overrides& ov = g.ov;
    statistic_options(dec, ov);

    auto* sim = app.add_subcommand("simulate", "Monte Carlo tail-ratio table");
    statistic_options(sim, ov);
    ov.text(sim, "--samples", "simulation", "num_samples", "number of permutations");
    ov.text(sim, "--z-max", "simulation", "z_max", "largest z, or auto_n16");
    ov.text(sim, "--z-points", "simulation", "z_points", "grid points from 0 to z-max");
    ov.text(sim, "--z-grid", "simulation", "z_grid", "explicit comma-separated grid");
    ov.flag(sim, "--allow-beyond-cap", "simulation", "allow_beyond_cap", "permit z past the range cap");
    ov.flag(sim, "--snap-lattice", "simulation", "snap_lattice", "move z to midpoints between lattice values");

    auto* ver = app.add_subcommand("verify", "deterministic verification suites");
    VerifyArgs ver_args;
    ver->add_option("suite", ver_args.suite, "suite")
        ->required()
        ->check(CLI::IsMember({"pair-identity", "lemma4", "moments", "reconstruct", "exchangeability", "audit", "all"}));
    statistic_options(ver, ov);
    ver->add_option("--kernel", ver_args.kernel, "kernel file for the reconstruct suite");
    ver->add_option("--count", ver_args.count, "random permutations when n is too large to enumerate")
        ->check(CLI::PositiveNumber);
    ver->add_option("--audit-samples", ver_args.audit_samples, "samples for the audit suite");

    auto* env = app.add_subcommand("envelope", "bound envelopes for given constants");
    bool env_csv = false;
    statistic_options(env, ov);
    ov.text(env, "--delta", "envelope", "delta", "boundedness scale (default: derived from the statistic)");
    ov.text(env, "--theta", "envelope", "theta", "theta");
    ov.text(env, "--c1", "envelope", "c1", "constant in front of the moderate-deviation envelope");
    ov.text(env, "--delta1-c", "envelope", "delta1_c", "constant inside delta1(t)");
    ov.text(env, "--z", "envelope", "z", "z values");
    ov.text(env, "--t", "envelope", "t", "t values for the MGF envelope");
    env->add_flag("--csv", env_csv, "print a CSV table instead of JSON");

    auto* st = app.add_subcommand("stats", "statistic of one permutation or of (x,y) data");
    StatsArgs st_args;
    statistic_options(st, ov);
    st->add_option("--perm", st_args.perm, "1-based permutation, e.g. 2,1,3");
    st->add_option("--csv", st_args.csv, "two-column x,y file (chatterjee)");
    st->add_flag("--header", st_args.header, "skip the first CSV line");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (dec->parsed()) return cmd_decompose(g, dec_args, resolve(g), out);
        if (sim->parsed()) return cmd_simulate(resolve(g, default_mww_split, true), out, err);
        if (ver->parsed()) return cmd_verify(g, ver_args, resolve(g), out);
        if (env->parsed()) return cmd_envelope(g, env_csv, resolve(g), out);
        if (st->parsed()) return cmd_stats(g, st_args, out);
    } catch (const ConfigError& e) {
        for (const auto& p : e.problems()) err << "config: " << p << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}

}  // namespace dips::cli
