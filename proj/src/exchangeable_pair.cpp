#include "dips/exchangeable_pair.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dips/rng.hpp"

namespace dips {

namespace {

void check_pair(const NormalizedDips& dips, const Permutation& perm, int i, int j) {
    if (perm.size() != dips.n) throw std::invalid_argument("permutation length does not match the statistic");
    if (i == j) throw std::invalid_argument("swap positions must differ");
    if (i < 0 || j < 0 || i >= dips.n || j >= dips.n) throw std::out_of_range("swap position out of range");
}

double a_at(const NormalizedDips& dips, int i, int k) { return dips.a_is_zero ? 0.0 : dips.a(i, k); }

// Every term of W that involves position I or J, with values pi_i at I and pi_j at J.
double touching_terms(const NormalizedDips& d, const Permutation& p, int I, int J, int pi_i, int pi_j) {
    double s = a_at(d, I, pi_i) + a_at(d, J, pi_j);
    for (int t = 0; t < d.n; ++t) {
        if (t == I || t == J) continue;
        const int v = p[t];
        s += d.b(I, t, pi_i, v) + d.b(t, I, v, pi_i) + d.b(J, t, pi_j, v) + d.b(t, J, v, pi_j);
    }
    return s + d.b(I, J, pi_i, pi_j) + d.b(J, I, pi_j, pi_i);
}

}  // namespace

Permutation swap_pair(const Permutation& perm, int i_idx, int j_idx) {
    if (i_idx == j_idx) throw std::invalid_argument("swap positions must differ");
    return perm.swapped(i_idx, j_idx);
}

double d_statistic(const NormalizedDips& dips, const Permutation& perm, int I, int J) {
    check_pair(dips, perm, I, J);
    const int pi = perm[I], pj = perm[J];
    double plus = 0.0, minus = 0.0;
    for (int s = 0; s < dips.n; ++s) {
        if (s == I || s == J) continue;
        plus += dips.b(I, s, pi, perm[s]);
        minus += dips.b(I, s, pj, perm[s]);
    }
    return (a_at(dips, I, pi) - a_at(dips, I, pj)) + (plus - minus);
}

double r_statistic(const NormalizedDips& dips, const Permutation& perm) {
    if (perm.size() != dips.n) throw std::invalid_argument("permutation length does not match the statistic");
    double lin = 0.0, diag = 0.0;
    for (int i = 0; i < dips.n; ++i) {
        lin += a_at(dips, i, perm[i]);
        diag += dips.b(i, i, perm[i], perm[i]);
    }
    return (lin - diag) / (dips.n - 1);
}

double swap_difference(const NormalizedDips& dips, const Permutation& perm, int I, int J) {
    check_pair(dips, perm, I, J);
    return touching_terms(dips, perm, I, J, perm[I], perm[J]) - touching_terms(dips, perm, I, J, perm[J], perm[I]);
}

PairSample make_pair_sample(const NormalizedDips& dips, const Permutation& perm, int I, int J) {
    check_pair(dips, perm, I, J);
    PairSample s;
    s.perm = perm;
    s.i_idx = I;
    s.j_idx = J;
    s.w = evaluate(dips, perm);
    s.w_prime = evaluate(dips, swap_pair(perm, I, J));
    s.d = d_statistic(dips, perm, I, J);
    s.delta = s.w - s.w_prime;
    s.r = r_statistic(dips, perm);
    s.lambda = 1.0 / dips.n;
    return s;
}

ConditionalMean conditional_mean_d(const NormalizedDips& dips, const Permutation& perm) {
    const int n = dips.n;
    if (perm.size() != n) throw std::invalid_argument("permutation length does not match the statistic");
    double total = 0.0;
    for (int I = 0; I < n; ++I)
        for (int J = 0; J < n; ++J)
            if (I != J) total += d_statistic(dips, perm, I, J);
    ConditionalMean c;
    c.lhs = total / (static_cast<double>(n) * (n - 1));
    c.rhs = (evaluate(dips, perm) + r_statistic(dips, perm)) / n;
    return c;
}

ExchangeabilityReport exchangeability_check(const NormalizedDips& dips) {
    const int n = dips.n;
    if (n < 2 || n > 6) throw std::invalid_argument("exchangeability enumeration needs 2 <= n <= 6");
    ExchangeabilityReport rep;
    std::vector<std::pair<double, double>> forward, backward;
    double sum_dd = 0.0, sum_w2 = 0.0, sum_rw = 0.0;
    for_each_permutation(n, [&](const Permutation& p) {
        const double w = evaluate(dips, p);
        const double r = r_statistic(dips, p);
        for (int I = 0; I < n; ++I)
            for (int J = 0; J < n; ++J) {
                if (I == J) continue;
                const Permutation q = p.swapped(I, J);
                const double wq = evaluate(dips, q);
                const double d = d_statistic(dips, p, I, J);
                forward.emplace_back(w, wq);
                backward.emplace_back(wq, w);
                rep.max_antisymmetry = std::max(rep.max_antisymmetry, std::abs(d + d_statistic(dips, q, I, J)));
                sum_dd += d * (w - wq);
                sum_w2 += w * w;
                sum_rw += r * w;
                ++rep.triples;
            }
    });
    std::sort(forward.begin(), forward.end());
    std::sort(backward.begin(), backward.end());
    rep.exchangeable = forward == backward;
    const double m = static_cast<double>(rep.triples);
    rep.second_moment_lhs = n / 2.0 * sum_dd / m;
    rep.second_moment_rhs = (sum_w2 + sum_rw) / m;
    return rep;
}

nlohmann::json to_json(const ExchangeabilityReport& r) {
    return {{"triples", r.triples},
            {"exchangeable", r.exchangeable},
            {"max_antisymmetry", r.max_antisymmetry},
            {"second_moment_lhs", r.second_moment_lhs},
            {"second_moment_rhs", r.second_moment_rhs},
            {"passed", r.passed()}};
}

nlohmann::json to_json(const AuditReport& r) {
    nlohmann::json v = nlohmann::json::array();
    for (const auto& w : r.violations) {
        v.push_back({{"perm", w.perm.one_based()},
                     {"i", w.i_idx + 1},
                     {"j", w.j_idx + 1},
                     {"abs_d", w.abs_d},
                     {"abs_delta", w.abs_delta}});
    }
    return {{"delta", r.delta},
            {"max_abs_d", r.max_abs_d},
            {"max_abs_delta", r.max_abs_delta},
            {"samples", r.samples},
            {"violation_count", r.violation_count},
            {"violations", v}};
}

AuditReport pair_bounds_audit(const NormalizedDips& dips, double delta, std::uint64_t num_samples, std::uint64_t seed) {
    const int n = dips.n;
    if (n < 2) throw std::invalid_argument("audit needs n >= 2");
    if (!(delta >= 0)) throw std::invalid_argument("delta must be nonnegative");
    AuditReport rep;
    rep.delta = delta;
    rep.samples = num_samples;
    Engine rng = substream(seed, 0);
    std::vector<int> v(static_cast<std::size_t>(n));
    const double slack = 1e-12 * std::max(1.0, delta);
    for (std::uint64_t s = 0; s < num_samples; ++s) {
        std::iota(v.begin(), v.end(), 0);
        shuffle_forward(v, rng);
        const Permutation p(v);
        const int I = uniform_int(rng, 0, n - 1);
        int J = uniform_int(rng, 0, n - 2);
        if (J >= I) ++J;
        const double d = std::abs(d_statistic(dips, p, I, J));
        const double dd = std::abs(swap_difference(dips, p, I, J));
        rep.max_abs_d = std::max(rep.max_abs_d, d);
        rep.max_abs_delta = std::max(rep.max_abs_delta, dd);
        if (d > 4 * delta + slack || dd > 16 * delta + slack) {
            ++rep.violation_count;
            if (rep.violations.size() < 10) rep.violations.push_back({p, I, J, d, dd});
        }
    }
    return rep;
}

}  // namespace dips
