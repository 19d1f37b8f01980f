#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "dips/closed_form_statistics.hpp"
#include "dips/permutation.hpp"
#include "dips/rng.hpp"

namespace dips {

inline constexpr std::uint64_t kBlockSamples = 1u << 16;
inline constexpr int kMaxEnumerationN = 8;
inline constexpr double kWilsonZ = 1.959963984540054;

Permutation sample_permutation(Engine& rng, int n);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

// 95% Wilson score interval for k successes in m trials.
Interval wilson_interval(std::uint64_t k, std::uint64_t m, double z = kWilsonZ);

// Distribution of the statistic: integer raw values with their normalized images.
struct ExactDistribution {
    StatisticSpec spec;
    std::vector<std::int64_t> raw;         // ascending
    std::vector<double> values;            // normalize_raw(spec, raw[t])
    std::vector<double> pmf;
    std::vector<std::uint64_t> counts;     // empty when only probabilities are known
    std::uint64_t total = 0;               // n! for enumeration

    double tail(double z) const;           // P(W > z)
    double mean() const;
    double variance() const;
    double mgf(double t) const;
    double raw_mean() const;
    double raw_variance() const;
    // Normalized values sorted ascending with their probabilities.
    std::vector<std::pair<double, double>> support() const;
};

// Full enumeration of S_n, n <= kMaxEnumerationN.
ExactDistribution exact_distribution(const StatisticSpec& spec);
// Eulerian recurrence A(n,k) = (k+1)A(n-1,k) + (n-k)A(n-1,k-1), in probabilities (counts kept for n <= 20).
ExactDistribution eulerian_distribution(const StatisticSpec& spec);

// Integer histogram of the raw statistic over num_samples uniform permutations.
struct RawHistogram {
    StatisticSpec spec;
    std::vector<std::uint64_t> counts;  // index = raw value
    std::uint64_t samples = 0;

    double mean() const;      // of the normalized statistic
    double variance() const;  // unbiased
};

// One substream block: samples drawn from substream(seed, block).
void simulate_block(const StatisticSpec& spec, std::uint64_t seed, std::uint64_t block, std::uint64_t samples,
                    std::vector<std::uint64_t>& counts);

// Blocks of kBlockSamples, block b seeded by (seed, b); counts added, so any worker count gives the same result.
RawHistogram simulate(const StatisticSpec& spec, std::uint64_t num_samples, std::uint64_t seed, int workers);

// {0, step, 2 step, ...} up to the range cap n^{1/6} (min(n1,n2)^{1/6} for mww), at most `points` entries.
double z_cap(const StatisticSpec& spec);
std::vector<double> default_z_grid(const StatisticSpec& spec, int points = 5, double step = 0.5);
// Moves each z to the midpoint between neighbouring lattice values of the statistic.
std::vector<double> snap_to_lattice(const StatisticSpec& spec, const std::vector<double>& grid);

struct TailRow {
    double z = 0.0;
    std::uint64_t exceed = 0;
    double tail_emp = 0.0;
    double tail_lo = 0.0;
    double tail_hi = 0.0;
    double tail_normal = 0.0;
    double ratio = 0.0;
    double ratio_lo = 0.0;
    double ratio_hi = 0.0;

    // Interval for |ratio - 1| induced by the ratio interval.
    Interval abs_error_ci() const;
};

struct TailRatioTable {
    StatisticSpec spec;
    std::uint64_t num_samples = 0;
    std::uint64_t seed = 0;
    int workers = 1;
    bool snapped = false;
    std::vector<TailRow> rows;

    void write_csv(std::ostream& out) const;
    nlohmann::json meta() const;
    double max_abs_ratio_error() const;
};

void validate_z_grid(const StatisticSpec& spec, const std::vector<double>& grid, bool allow_beyond_cap);

TailRatioTable tail_table_from_histogram(const RawHistogram& hist, const std::vector<double>& z_grid);
TailRatioTable tail_ratio_table(const StatisticSpec& spec, const std::vector<double>& z_grid,
                                std::uint64_t num_samples, std::uint64_t seed, int workers,
                                bool allow_beyond_cap = false);

struct MgfEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

MgfEstimate mgf_from_histogram(const RawHistogram& hist, double t);
MgfEstimate mgf_estimate(const StatisticSpec& spec, double t, std::uint64_t num_samples, std::uint64_t seed,
                         int workers = 1);

struct ScaledError {
    int n = 0;
    double c = 0.0;            // max_z |ratio - 1| sqrt(n) / (1 + z^3), CI midpoints
    double c_halfwidth = 0.0;  // scaled CI half-width at the maximizing z
    double z_at_max = 0.0;
};

// n in the scaling is spec.n (n1 + n2 for mww).
ScaledError scaled_error(const TailRatioTable& table);
ScaledError scaled_error_exact(const ExactDistribution& dist, const std::vector<double>& z_grid);

struct ConvergenceScan {
    std::vector<TailRatioTable> tables;
    std::vector<ScaledError> errors;
};

// Each spec gets the base grid truncated at its own range cap.
ConvergenceScan convergence_scan(const std::vector<StatisticSpec>& specs, const std::vector<double>& base_grid,
                                 std::uint64_t num_samples, std::uint64_t seed, int workers);

}  // namespace dips
