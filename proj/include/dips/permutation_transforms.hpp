#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "dips/permutation.hpp"

namespace dips {

struct SingleStep {
    int i;
    int k;
};

struct PairStep {
    int i;
    int j;
    int k;
    int l;
};

using TransformStep = std::variant<SingleStep, PairStep>;

// Chain of conditioning transforms; steps[0] acts on sigma first.
struct TransformSpec {
    std::vector<TransformStep> steps;

    // Positions must be pairwise distinct, values pairwise distinct, all in [0, n).
    void validate(int n) const;
    // (position, value) constraints imposed by the chain.
    std::vector<std::pair<int, int>> constraints() const;
    std::string to_string() const;  // 1-based
};

// sigma if sigma(i) = k, else sigma o tau_{i, sigma^-1(k)}
Permutation transform_single(const Permutation& sigma, int i, int k);

enum class PairCase { a1_i_to_l, a2_j_to_k, a3_both_crossed, a4_otherwise };
PairCase pair_case(const Permutation& sigma, int i, int j, int k, int l);

// Result maps i -> k and j -> l.
Permutation transform_pair(const Permutation& sigma, int i, int j, int k, int l);

Permutation transform_composed(const Permutation& sigma, const TransformSpec& spec);

struct FiberReport {
    int n = 0;
    int fixed = 0;
    std::size_t fiber_size = 0;
    std::size_t expected_count = 0;
    std::size_t distinct_outputs = 0;
    std::size_t min_count = 0;
    std::size_t max_count = 0;
    std::size_t constraint_failures = 0;
    std::map<std::string, std::size_t> counts;  // output (1-based) -> hits
    bool passed = false;
};

nlohmann::json to_json(const FiberReport& r);

// Enumerates all n! inputs (n <= 7) and checks exact equidistribution over the fiber.
FiberReport fiber_uniformity_test(int n, const TransformSpec& spec);

}  // namespace dips
