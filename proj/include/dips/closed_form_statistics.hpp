#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dips/kernel_decomposition.hpp"
#include "dips/permutation.hpp"

namespace dips {

enum class StatisticKind { descents, inversions, mww, chatterjee_oscillation };
enum class Normalization { paper_literal, variance_exact };

std::string to_string(StatisticKind kind);
std::string to_string(Normalization mode);
StatisticKind parse_statistic_kind(const std::string& text);
Normalization parse_normalization(const std::string& text);

struct StatisticSpec {
    StatisticKind kind = StatisticKind::descents;
    int n = 0;
    int n1 = 0;  // mww only
    int n2 = 0;
    Normalization normalization = Normalization::variance_exact;

    // Throws std::invalid_argument.
    void validate() const;

    static StatisticSpec descents(int n, Normalization m = Normalization::variance_exact);
    static StatisticSpec inversions(int n, Normalization m = Normalization::variance_exact);
    static StatisticSpec mww(int n1, int n2, Normalization m = Normalization::variance_exact);
    static StatisticSpec chatterjee(int n, Normalization m = Normalization::variance_exact);
};

std::int64_t descents(const Permutation& perm);
std::int64_t inversions(const Permutation& perm);
std::int64_t oscillation(const Permutation& perm);
std::int64_t mww_count(const Permutation& perm, int n1, int n2);

// Ranks r_1..r_n of y after ordering the pairs by x, as a permutation. Throws on ties.
Permutation chatterjee_ranks(std::span<const double> x, std::span<const double> y);
double chatterjee_xi(std::span<const double> x, std::span<const double> y);

// Two numeric columns (x,y); the first line is skipped when has_header is set.
std::pair<std::vector<double>, std::vector<double>> read_xy_csv(std::istream& in, bool has_header);

// Integer statistic behind the spec: Des, Inv, mww count or oscillation.
std::int64_t raw_statistic(const StatisticSpec& spec, const Permutation& perm);

// W = (raw - center) / scale
struct AffineMap {
    double center = 0.0;
    double scale = 1.0;
    double apply(double raw) const noexcept { return (raw - center) / scale; }
};

AffineMap statistic_affine(const StatisticSpec& spec);
// Normalized statistic from its integer form; statistic_value and the simulator share it.
double normalize_raw(const StatisticSpec& spec, std::int64_t raw);
double statistic_value(const StatisticSpec& spec, const Permutation& perm);
// Upper bound on raw_statistic over S_n.
std::int64_t max_raw_statistic(const StatisticSpec& spec);

Kernel4 build_kernel(const StatisticSpec& spec);
NormalizedDips closed_form_ab(const StatisticSpec& spec);

// sum_{i,j} xi(i,j,pi(i),pi(j)) for build_kernel(spec), without building the kernel.
double kernel_statistic(const StatisticSpec& spec, const Permutation& perm);

// Centered distance matrix a_{kl} = (alpha_kl - alpha_k. - alpha_.l + alpha_..) / B(n), alpha = |k-l|.
Matrix chatterjee_a(int n);
double chatterjee_b2(int n);

// Generic normalization of build_kernel(spec) against closed_form_ab(spec).
struct ClosedFormCheck {
    double scale = 0.0;            // least-squares factor: generic ~ scale * closed form
    double max_deviation = 0.0;    // entrywise, after scaling
    double max_reconstruct = 0.0;  // |kernel_statistic - (sigma W + mean_shift)| over the permutations checked
    std::size_t permutations = 0;
    bool agree(double tol = 1e-10) const noexcept {
        return scale > 0 && max_deviation <= tol && max_reconstruct <= tol;
    }
};

// All of S_n when n <= max_enumerate, otherwise `samples` random permutations from `seed`.
ClosedFormCheck closed_form_check(const StatisticSpec& spec, int max_enumerate = 8, int samples = 200,
                                  std::uint64_t seed = 1);

// The competing descent scales, reported side by side.
struct DescentScaleCandidates {
    double literal_sd;             // sqrt((n+1)/6), divides Des - (n-1)/2
    double exact_sd;               // sqrt((n+1)/12)
    double stated_sigma2;          // 2(n+1)/3, in units of 2 Des - (n-1)
    double eta_sigma2;             // sum eta*^2/(n-1) = 2(n+1)/(3n)
    double displayed_coefficient;  // sqrt(6/(n+1)) multiplying eta*, xi*
};

DescentScaleCandidates descent_scale_candidates(int n);

}  // namespace dips
