#include "dips/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "dips/stein_normal.hpp"

namespace dips {

Permutation sample_permutation(Engine& rng, int n) {
    if (n < 1) throw std::invalid_argument("permutation size must be positive");
    std::vector<int> v(static_cast<std::size_t>(n));
    std::iota(v.begin(), v.end(), 0);
    shuffle_forward(v, rng);
    return Permutation(std::move(v));
}

Interval wilson_interval(std::uint64_t k, std::uint64_t m, double z) {
    if (m == 0 || k > m) throw std::invalid_argument("wilson interval needs 0 <= k <= m, m > 0");
    const double md = static_cast<double>(m);
    const double p = static_cast<double>(k) / md;
    const double z2 = z * z;
    const double denom = 1 + z2 / md;
    const double center = (p + z2 / (2 * md)) / denom;
    const double half = z * std::sqrt(p * (1 - p) / md + z2 / (4 * md * md)) / denom;
    // the bounds are exactly 0 and 1 at the extremes
    return {k == 0 ? 0.0 : std::max(0.0, center - half), k == m ? 1.0 : std::min(1.0, center + half)};
}

double ExactDistribution::tail(double z) const {
    double s = 0.0;
    for (std::size_t t = 0; t < values.size(); ++t)
        if (values[t] > z) s += pmf[t];
    return s;
}

double ExactDistribution::mean() const {
    double s = 0.0;
    for (std::size_t t = 0; t < values.size(); ++t) s += pmf[t] * values[t];
    return s;
}

double ExactDistribution::variance() const {
    const double m = mean();
    double s = 0.0;
    for (std::size_t t = 0; t < values.size(); ++t) s += pmf[t] * (values[t] - m) * (values[t] - m);
    return s;
}

double ExactDistribution::mgf(double t) const {
    double s = 0.0;
    for (std::size_t u = 0; u < values.size(); ++u) s += pmf[u] * std::exp(t * values[u]);
    return s;
}

double ExactDistribution::raw_mean() const {
    double s = 0.0;
    for (std::size_t t = 0; t < raw.size(); ++t) s += pmf[t] * static_cast<double>(raw[t]);
    return s;
}

double ExactDistribution::raw_variance() const {
    const double m = raw_mean();
    double s = 0.0;
    for (std::size_t t = 0; t < raw.size(); ++t) {
        const double d = static_cast<double>(raw[t]) - m;
        s += pmf[t] * d * d;
    }
    return s;
}

std::vector<std::pair<double, double>> ExactDistribution::support() const {
    std::vector<std::pair<double, double>> s;
    for (std::size_t t = 0; t < values.size(); ++t) s.emplace_back(values[t], pmf[t]);
    std::sort(s.begin(), s.end());
    return s;
}

namespace {

ExactDistribution from_counts(const StatisticSpec& spec, const std::vector<std::uint64_t>& counts, std::uint64_t total) {
    ExactDistribution d;
    d.spec = spec;
    d.total = total;
    for (std::size_t r = 0; r < counts.size(); ++r) {
        if (counts[r] == 0) continue;
        d.raw.push_back(static_cast<std::int64_t>(r));
        d.values.push_back(normalize_raw(spec, static_cast<std::int64_t>(r)));
        d.counts.push_back(counts[r]);
        d.pmf.push_back(static_cast<double>(counts[r]) / static_cast<double>(total));
    }
    return d;
}

}  // namespace

ExactDistribution exact_distribution(const StatisticSpec& spec) {
    spec.validate();
    if (spec.n > kMaxEnumerationN) {
        throw std::invalid_argument("enumeration capped at n=" + std::to_string(kMaxEnumerationN));
    }
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(max_raw_statistic(spec)) + 1, 0);
    std::uint64_t total = 0;
    for_each_permutation(spec.n, [&](const Permutation& p) {
        ++counts[static_cast<std::size_t>(raw_statistic(spec, p))];
        ++total;
    });
    return from_counts(spec, counts, total);
}

ExactDistribution eulerian_distribution(const StatisticSpec& spec) {
    spec.validate();
    if (spec.kind != StatisticKind::descents) throw std::invalid_argument("Eulerian recurrence is for descents only");
    const int n = spec.n;
    if (n <= 20) {
        std::vector<std::uint64_t> a{1};
        for (int m = 2; m <= n; ++m) {
            std::vector<std::uint64_t> b(static_cast<std::size_t>(m), 0);
            for (int k = 0; k < m; ++k) {
                if (k < m - 1) b[static_cast<std::size_t>(k)] += static_cast<std::uint64_t>(k + 1) * a[static_cast<std::size_t>(k)];
                if (k >= 1) b[static_cast<std::size_t>(k)] += static_cast<std::uint64_t>(m - k) * a[static_cast<std::size_t>(k - 1)];
            }
            a = std::move(b);
        }
        return from_counts(spec, a, factorial(n));
    }
    std::vector<double> p{1.0};
    for (int m = 2; m <= n; ++m) {
        std::vector<double> q(static_cast<std::size_t>(m), 0.0);
        for (int k = 0; k < m; ++k) {
            if (k < m - 1) q[static_cast<std::size_t>(k)] += (k + 1) * p[static_cast<std::size_t>(k)];
            if (k >= 1) q[static_cast<std::size_t>(k)] += (m - k) * p[static_cast<std::size_t>(k - 1)];
            q[static_cast<std::size_t>(k)] /= m;
        }
        p = std::move(q);
    }
    ExactDistribution d;
    d.spec = spec;
    for (int k = 0; k < n; ++k) {
        d.raw.push_back(k);
        d.values.push_back(normalize_raw(spec, k));
        d.pmf.push_back(p[static_cast<std::size_t>(k)]);
    }
    return d;
}

double RawHistogram::mean() const {
    double s = 0.0;
    for (std::size_t r = 0; r < counts.size(); ++r)
        if (counts[r]) s += static_cast<double>(counts[r]) * normalize_raw(spec, static_cast<std::int64_t>(r));
    return s / static_cast<double>(samples);
}

double RawHistogram::variance() const {
    const double m = mean();
    double s = 0.0;
    for (std::size_t r = 0; r < counts.size(); ++r) {
        if (!counts[r]) continue;
        const double d = normalize_raw(spec, static_cast<std::int64_t>(r)) - m;
        s += static_cast<double>(counts[r]) * d * d;
    }
    return s / static_cast<double>(samples - 1);
}

void simulate_block(const StatisticSpec& spec, std::uint64_t seed, std::uint64_t block, std::uint64_t samples,
                    std::vector<std::uint64_t>& counts) {
    const int n = spec.n;
    Engine rng = substream(seed, block);
    std::vector<int> v(static_cast<std::size_t>(n));
    std::vector<char> is_x(static_cast<std::size_t>(n));
    for (std::uint64_t s = 0; s < samples; ++s) {
        std::iota(v.begin(), v.end(), 0);
        shuffle_forward(v, rng);
        std::int64_t raw = 0;
        switch (spec.kind) {
            case StatisticKind::descents:
                for (int i = 0; i + 1 < n; ++i) raw += v[static_cast<std::size_t>(i)] > v[static_cast<std::size_t>(i + 1)];
                break;
            case StatisticKind::chatterjee_oscillation:
                for (int i = 0; i + 1 < n; ++i) raw += std::abs(v[static_cast<std::size_t>(i)] - v[static_cast<std::size_t>(i + 1)]);
                break;
            case StatisticKind::mww: {
                for (int i = 0; i < n; ++i) is_x[static_cast<std::size_t>(v[static_cast<std::size_t>(i)])] = i < spec.n1;
                std::int64_t seen = 0;
                for (int val = 0; val < n; ++val) {
                    if (is_x[static_cast<std::size_t>(val)])
                        ++seen;
                    else
                        raw += seen;
                }
                break;
            }
            case StatisticKind::inversions: raw = inversions(Permutation(v)); break;
        }
        ++counts[static_cast<std::size_t>(raw)];
    }
}

RawHistogram simulate(const StatisticSpec& spec, std::uint64_t num_samples, std::uint64_t seed, int workers) {
    spec.validate();
    if (workers < 1) throw std::invalid_argument("workers must be at least 1");
    const std::size_t bins = static_cast<std::size_t>(max_raw_statistic(spec)) + 1;
    const std::uint64_t blocks = (num_samples + kBlockSamples - 1) / kBlockSamples;
    std::vector<std::vector<std::uint64_t>> partial(static_cast<std::size_t>(workers),
                                                    std::vector<std::uint64_t>(bins, 0));
    auto run = [&](int w) {
        for (std::uint64_t b = static_cast<std::uint64_t>(w); b < blocks; b += static_cast<std::uint64_t>(workers)) {
            const std::uint64_t len = std::min(kBlockSamples, num_samples - b * kBlockSamples);
            simulate_block(spec, seed, b, len, partial[static_cast<std::size_t>(w)]);
        }
    };
    if (workers == 1) {
        run(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(run, w);
        for (auto& t : pool) t.join();
    }
    RawHistogram h;
    h.spec = spec;
    h.samples = num_samples;
    h.counts.assign(bins, 0);
    for (const auto& p : partial)
        for (std::size_t r = 0; r < bins; ++r) h.counts[r] += p[r];
    return h;
}

double z_cap(const StatisticSpec& spec) {
    spec.validate();
    const double m = spec.kind == StatisticKind::mww ? std::min(spec.n1, spec.n2) : spec.n;
    return std::pow(m, 1.0 / 6.0);
}

std::vector<double> default_z_grid(const StatisticSpec& spec, int points, double step) {
    if (points < 1 || !(step > 0)) throw std::invalid_argument("grid needs points >= 1 and step > 0");
    const double cap = z_cap(spec);
    std::vector<double> g;
    for (int t = 0; t < points; ++t) {
        const double z = t * step;
        if (z > cap) break;
        g.push_back(z);
    }
    return g;
}

std::vector<double> snap_to_lattice(const StatisticSpec& spec, const std::vector<double>& grid) {
    const AffineMap m = statistic_affine(spec);
    std::vector<double> out;
    for (double z : grid) {
        const double target = m.center + m.scale * z;
        const double h = m.scale > 0 ? std::floor(target + 0.5) + 0.5 : std::ceil(target - 0.5) - 0.5;
        const double zs = (h - m.center) / m.scale;
        if (out.empty() || zs > out.back()) out.push_back(zs);
    }
    return out;
}

Interval TailRow::abs_error_ci() const {
    const double a = std::abs(ratio_lo - 1), b = std::abs(ratio_hi - 1);
    if (ratio_lo <= 1 && 1 <= ratio_hi) return {0.0, std::max(a, b)};
    return {std::min(a, b), std::max(a, b)};
}

namespace {

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

void TailRatioTable::write_csv(std::ostream& out) const {
    out << "z,tail_emp,tail_lo,tail_hi,tail_normal,ratio,ratio_lo,ratio_hi\n";
    for (const auto& r : rows) {
        out << fmt17(r.z) << ',' << fmt17(r.tail_emp) << ',' << fmt17(r.tail_lo) << ',' << fmt17(r.tail_hi) << ','
            << fmt17(r.tail_normal) << ',' << fmt17(r.ratio) << ',' << fmt17(r.ratio_lo) << ',' << fmt17(r.ratio_hi)
            << '\n';
    }
}

nlohmann::json TailRatioTable::meta() const {
    nlohmann::json z = nlohmann::json::array();
    for (const auto& r : rows) z.push_back(r.z);
    nlohmann::json m{{"n", spec.n},
                     {"statistic", to_string(spec.kind)},
                     {"normalization", to_string(spec.normalization)},
                     {"num_samples", num_samples},
                     {"seed", seed},
                     {"workers", workers},
                     {"z_grid", z},
                     {"lattice_snapped", snapped},
                     {"block_samples", kBlockSamples},
                     {"rng", "xoshiro256++, block b keyed by splitmix64(seed, b)"},
                     {"ci", "wilson 95%"}};
    if (spec.kind == StatisticKind::mww) {
        m["n1"] = spec.n1;
        m["n2"] = spec.n2;
    }
    return m;
}

double TailRatioTable::max_abs_ratio_error() const {
    double m = 0.0;
    for (const auto& r : rows) m = std::max(m, std::abs(r.ratio - 1));
    return m;
}

void validate_z_grid(const StatisticSpec& spec, const std::vector<double>& grid, bool allow_beyond_cap) {
    if (grid.empty()) throw std::invalid_argument("empty z grid");
    const double cap = z_cap(spec);
    for (std::size_t t = 0; t < grid.size(); ++t) {
        const double z = grid[t];
        if (!std::isfinite(z) || z < 0) throw std::invalid_argument("z grid values must be finite and >= 0");
        if (t > 0 && !(z > grid[t - 1])) throw std::invalid_argument("z grid must be strictly increasing");
        if (!allow_beyond_cap && z > cap + 1e-12) {
            throw std::invalid_argument("z=" + fmt17(z) + " exceeds the range cap " + fmt17(cap) +
                                        " (override explicitly to allow)");
        }
    }
}

TailRatioTable tail_table_from_histogram(const RawHistogram& hist, const std::vector<double>& z_grid) {
    if (z_grid.empty()) throw std::invalid_argument("empty z grid");
    TailRatioTable t;
    t.spec = hist.spec;
    t.num_samples = hist.samples;
    for (double z : z_grid) {
        TailRow r;
        r.z = z;
        for (std::size_t raw = 0; raw < hist.counts.size(); ++raw)
            if (hist.counts[raw] && normalize_raw(hist.spec, static_cast<std::int64_t>(raw)) > z) r.exceed += hist.counts[raw];
        r.tail_emp = static_cast<double>(r.exceed) / static_cast<double>(hist.samples);
        const Interval ci = wilson_interval(r.exceed, hist.samples);
        r.tail_lo = ci.lo;
        r.tail_hi = ci.hi;
        r.tail_normal = normal_sf(z);
        r.ratio = r.tail_emp / r.tail_normal;
        r.ratio_lo = r.tail_lo / r.tail_normal;
        r.ratio_hi = r.tail_hi / r.tail_normal;
        t.rows.push_back(r);
    }
    return t;
}

TailRatioTable tail_ratio_table(const StatisticSpec& spec, const std::vector<double>& z_grid, std::uint64_t num_samples,
                                std::uint64_t seed, int workers, bool allow_beyond_cap) {
    validate_z_grid(spec, z_grid, allow_beyond_cap);
    if (num_samples < 10000) throw std::invalid_argument("tail tables need at least 10^4 samples");
    TailRatioTable t = tail_table_from_histogram(simulate(spec, num_samples, seed, workers), z_grid);
    t.seed = seed;
    t.workers = workers;
    return t;
}

MgfEstimate mgf_from_histogram(const RawHistogram& hist, double t) {
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t raw = 0; raw < hist.counts.size(); ++raw) {
        if (!hist.counts[raw]) continue;
        const double e = std::exp(t * normalize_raw(hist.spec, static_cast<std::int64_t>(raw)));
        const double c = static_cast<double>(hist.counts[raw]);
        s1 += c * e;
        s2 += c * e * e;
    }
    const double m = static_cast<double>(hist.samples);
    MgfEstimate out;
    out.estimate = s1 / m;
    const double var = std::max(0.0, (s2 - m * out.estimate * out.estimate) / (m - 1));
    out.std_error = std::sqrt(var / m);
    if (t == 0.0) {
        out.estimate = 1.0;
        out.std_error = 0.0;
    }
    return out;
}

MgfEstimate mgf_estimate(const StatisticSpec& spec, double t, std::uint64_t num_samples, std::uint64_t seed,
                         int workers) {
    if (num_samples < 2) throw std::invalid_argument("mgf estimate needs at least 2 samples");
    return mgf_from_histogram(simulate(spec, num_samples, seed, workers), t);
}

ScaledError scaled_error(const TailRatioTable& table) {
    ScaledError e;
    e.n = table.spec.n;
    const double rn = std::sqrt(static_cast<double>(e.n));
    bool first = true;
    for (const auto& r : table.rows) {
        const double w = rn / (1 + r.z * r.z * r.z);
        const double mid = 0.5 * (r.ratio_lo + r.ratio_hi);
        const double c = std::abs(mid - 1) * w;
        if (first || c > e.c) {
            e.c = c;
            e.c_halfwidth = 0.5 * (r.ratio_hi - r.ratio_lo) * w;
            e.z_at_max = r.z;
            first = false;
        }
    }
    return e;
}

ScaledError scaled_error_exact(const ExactDistribution& dist, const std::vector<double>& z_grid) {
    ScaledError e;
    e.n = dist.spec.n;
    const double rn = std::sqrt(static_cast<double>(e.n));
    bool first = true;
    for (double z : z_grid) {
        const double c = std::abs(dist.tail(z) / normal_sf(z) - 1) * rn / (1 + z * z * z);
        if (first || c > e.c) {
            e.c = c;
            e.z_at_max = z;
            first = false;
        }
    }
    return e;
}

ConvergenceScan convergence_scan(const std::vector<StatisticSpec>& specs, const std::vector<double>& base_grid,
                                 std::uint64_t num_samples, std::uint64_t seed, int workers) {
    for (std::size_t t = 1; t < specs.size(); ++t) {
        if (!(specs[t].n > specs[t - 1].n)) throw std::invalid_argument("convergence scan needs increasing n");
    }
    ConvergenceScan scan;
    for (const auto& spec : specs) {
        std::vector<double> grid;
        const double cap = z_cap(spec);
        for (double z : base_grid)
            if (z <= cap) grid.push_back(z);
        scan.tables.push_back(tail_ratio_table(spec, grid, num_samples, seed, workers));
        scan.errors.push_back(scaled_error(scan.tables.back()));
    }
    return scan;
}

}  // namespace dips
