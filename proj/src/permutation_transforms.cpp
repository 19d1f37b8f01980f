#include "dips/permutation_transforms.hpp"

#include <set>
#include <stdexcept>

namespace dips {

namespace {

// Right-composition sigma o tau_{a,b}: exchanges the images of a and b.
void compose_transposition(std::vector<int>& s, int a, int b) {
    std::swap(s[static_cast<std::size_t>(a)], s[static_cast<std::size_t>(b)]);
}

void check_index(int x, int n, const char* what) {
    if (x < 0 || x >= n) throw std::out_of_range(std::string(what) + " out of range");
}

}  // namespace

void TransformSpec::validate(int n) const {
    std::set<int> pos, val;
    auto add = [&](int p, int v) {
        check_index(p, n, "position");
        check_index(v, n, "value");
        if (!pos.insert(p).second) throw std::invalid_argument("transform chain fixes a position twice");
        if (!val.insert(v).second) throw std::invalid_argument("transform chain targets a value twice");
    };
    for (const auto& st : steps) {
        if (const auto* s = std::get_if<SingleStep>(&st)) {
            add(s->i, s->k);
        } else {
            const auto& p = std::get<PairStep>(st);
            if (p.i == p.j || p.k == p.l) throw std::invalid_argument("pair transform needs i != j and k != l");
            add(p.i, p.k);
            add(p.j, p.l);
        }
    }
}

std::vector<std::pair<int, int>> TransformSpec::constraints() const {
    std::vector<std::pair<int, int>> c;
    for (const auto& st : steps) {
        if (const auto* s = std::get_if<SingleStep>(&st)) {
            c.emplace_back(s->i, s->k);
        } else {
            const auto& p = std::get<PairStep>(st);
            c.emplace_back(p.i, p.k);
            c.emplace_back(p.j, p.l);
        }
    }
    return c;
}

std::string TransformSpec::to_string() const {
    std::string out;
    for (const auto& st : steps) {
        if (!out.empty()) out += " then ";
        if (const auto* s = std::get_if<SingleStep>(&st)) {
            out += "P^" + std::to_string(s->i + 1) + "_" + std::to_string(s->k + 1);
        } else {
            const auto& p = std::get<PairStep>(st);
            out += "P^{" + std::to_string(p.i + 1) + "," + std::to_string(p.j + 1) + "}_{" + std::to_string(p.k + 1) +
                   "," + std::to_string(p.l + 1) + "}";
        }
    }
    return out.empty() ? "identity" : out;
}

Permutation transform_single(const Permutation& sigma, int i, int k) {
    const int n = sigma.size();
    check_index(i, n, "position");
    check_index(k, n, "value");
    if (sigma[i] == k) return sigma;
    const Permutation inv = sigma.inverse();
    std::vector<int> s(sigma.values().begin(), sigma.values().end());
    compose_transposition(s, i, inv[k]);
    return Permutation(std::move(s));
}

PairCase pair_case(const Permutation& sigma, int i, int j, int k, int l) {
    const bool il = sigma[i] == l, jk = sigma[j] == k;
    if (il && !jk) return PairCase::a1_i_to_l;
    if (!il && jk) return PairCase::a2_j_to_k;
    if (il && jk) return PairCase::a3_both_crossed;
    return PairCase::a4_otherwise;
}

Permutation transform_pair(const Permutation& sigma, int i, int j, int k, int l) {
    const int n = sigma.size();
    check_index(i, n, "position");
    check_index(j, n, "position");
    check_index(k, n, "value");
    check_index(l, n, "value");
    if (i == j || k == l) throw std::invalid_argument("pair transform needs i != j and k != l");
    const Permutation inv = sigma.inverse();
    std::vector<int> s(sigma.values().begin(), sigma.values().end());
    // sigma o t1 o t2 o t3 is applied as t1, t2, t3 on the image array.
    switch (pair_case(sigma, i, j, k, l)) {
        case PairCase::a1_i_to_l:
            compose_transposition(s, i, inv[k]);
            compose_transposition(s, j, inv[k]);
            break;
        case PairCase::a2_j_to_k:
            compose_transposition(s, j, inv[l]);
            compose_transposition(s, i, inv[l]);
            break;
        case PairCase::a3_both_crossed:
            compose_transposition(s, i, inv[k]);
            compose_transposition(s, j, inv[l]);
            compose_transposition(s, i, j);
            break;
        case PairCase::a4_otherwise:
            compose_transposition(s, i, inv[k]);
            compose_transposition(s, j, inv[l]);
            break;
    }
    return Permutation(std::move(s));
}

Permutation transform_composed(const Permutation& sigma, const TransformSpec& spec) {
    spec.validate(sigma.size());
    Permutation out = sigma;
    for (const auto& st : spec.steps) {
        if (const auto* s = std::get_if<SingleStep>(&st)) {
            out = transform_single(out, s->i, s->k);
        } else {
            const auto& p = std::get<PairStep>(st);
            out = transform_pair(out, p.i, p.j, p.k, p.l);
        }
    }
    return out;
}

nlohmann::json to_json(const FiberReport& r) {
    return {{"n", r.n},
            {"fixed", r.fixed},
            {"fiber_size", r.fiber_size},
            {"expected_count", r.expected_count},
            {"distinct_outputs", r.distinct_outputs},
            {"min_count", r.min_count},
            {"max_count", r.max_count},
            {"constraint_failures", r.constraint_failures},
            {"counts", r.counts},
            {"passed", r.passed}};
}

FiberReport fiber_uniformity_test(int n, const TransformSpec& spec) {
    if (n < 1 || n > 7) throw std::invalid_argument("fiber test enumerates S_n for 1 <= n <= 7");
    spec.validate(n);
    const auto cons = spec.constraints();
    FiberReport r;
    r.n = n;
    r.fixed = static_cast<int>(cons.size());
    r.fiber_size = factorial(n - r.fixed);
    r.expected_count = factorial(n) / r.fiber_size;
    std::map<Permutation, std::size_t> hist;
    for_each_permutation(n, [&](const Permutation& sigma) {
        const Permutation out = transform_composed(sigma, spec);
        for (const auto& [p, v] : cons) {
            if (out[p] != v) {
                ++r.constraint_failures;
                break;
            }
        }
        ++hist[out];
    });
    r.distinct_outputs = hist.size();
    r.min_count = hist.empty() ? 0 : hist.begin()->second;
    for (const auto& [p, c] : hist) {
        r.min_count = std::min(r.min_count, c);
        r.max_count = std::max(r.max_count, c);
        r.counts[p.to_string()] = c;
    }
    r.passed = r.constraint_failures == 0 && r.distinct_outputs == r.fiber_size && r.min_count == r.expected_count &&
               r.max_count == r.expected_count;
    return r;
}

}  // namespace dips
