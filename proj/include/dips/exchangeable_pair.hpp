#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "dips/kernel_decomposition.hpp"
#include "dips/permutation.hpp"

namespace dips {

struct PairSample {
    Permutation perm;
    int i_idx = 0;
    int j_idx = 1;
    double w = 0.0;
    double w_prime = 0.0;
    double d = 0.0;
    double delta = 0.0;  // w - w_prime
    double r = 0.0;
    double lambda = 0.0;
};

Permutation swap_pair(const Permutation& perm, int i_idx, int j_idx);

// D = a(I,pi(I)) - a(I,pi(J)) + sum_{s not in {I,J}} [b(I,s,pi(I),pi(s)) - b(I,s,pi(J),pi(s))]
double d_statistic(const NormalizedDips& dips, const Permutation& perm, int i_idx, int j_idx);

// R = (1/(n-1)) sum_i a(i,pi(i)) - (1/(n-1)) sum_i b(i,i,pi(i),pi(i))
double r_statistic(const NormalizedDips& dips, const Permutation& perm);

// W - W' in O(n) from the terms that touch positions I and J.
double swap_difference(const NormalizedDips& dips, const Permutation& perm, int i_idx, int j_idx);

PairSample make_pair_sample(const NormalizedDips& dips, const Permutation& perm, int i_idx, int j_idx);

struct ConditionalMean {
    double lhs = 0.0;  // average of D over all ordered pairs (I,J)
    double rhs = 0.0;  // (W + R)/n
};

ConditionalMean conditional_mean_d(const NormalizedDips& dips, const Permutation& perm);

// Exact checks over every (pi, I, J) with I != J; n <= 6.
struct ExchangeabilityReport {
    std::uint64_t triples = 0;
    bool exchangeable = false;          // multiset of (W, W') equals multiset of (W', W)
    double max_antisymmetry = 0.0;      // |D(pi, I, J) + D(pi', I, J)|
    double second_moment_lhs = 0.0;     // (1/(2 lambda)) E[D Delta]
    double second_moment_rhs = 0.0;     // E[W^2] + E[R W]
    bool passed(double tol = 1e-10) const noexcept {
        return exchangeable && max_antisymmetry <= tol &&
               std::abs(second_moment_lhs - second_moment_rhs) <= tol * std::max(1.0, std::abs(second_moment_rhs));
    }
};

nlohmann::json to_json(const ExchangeabilityReport& r);
ExchangeabilityReport exchangeability_check(const NormalizedDips& dips);

struct AuditViolation {
    Permutation perm;
    int i_idx;
    int j_idx;
    double abs_d;
    double abs_delta;
};

struct AuditReport {
    double delta = 0.0;
    double max_abs_d = 0.0;
    double max_abs_delta = 0.0;
    std::uint64_t samples = 0;
    std::vector<AuditViolation> violations;  // first few witnesses
    std::uint64_t violation_count = 0;
    bool passed() const noexcept { return violation_count == 0; }
};

nlohmann::json to_json(const AuditReport& r);

// Checks |D| <= 4 delta and |W - W'| <= 16 delta on random (pi, I, J).
AuditReport pair_bounds_audit(const NormalizedDips& dips, double delta, std::uint64_t num_samples,
                              std::uint64_t seed);

}  // namespace dips
