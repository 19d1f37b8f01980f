#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "dips/closed_form_statistics.hpp"
#include "dips/exchangeable_pair.hpp"
#include "dips/simulation.hpp"

using namespace dips;

namespace {

NormalizedDips zero_dips(int n) {
    return normalize(Kernel4::from_function(n, [](int, int, int, int) { return 0.0; }));
}

std::vector<StatisticSpec> builtins(int n) {
    return {StatisticSpec::descents(n), StatisticSpec::inversions(n), StatisticSpec::mww(n / 2, n - n / 2),
            StatisticSpec::chatterjee(n)};
}

}  // namespace

TEST_CASE("swap_pair") {
    CHECK(swap_pair(Permutation::identity(3), 0, 1) == Permutation::parse("2,1,3"));
    const Permutation p = Permutation::parse("3,1,4,2");
    CHECK(swap_pair(swap_pair(p, 1, 3), 1, 3) == p);
    CHECK_THROWS(swap_pair(p, 2, 2));
}

TEST_CASE("d_statistic") {
    const NormalizedDips z = zero_dips(4);
    CHECK(d_statistic(z, Permutation::identity(4), 0, 1) == 0.0);

    // term-by-term summation of the displayed D at n=3
    const NormalizedDips d = closed_form_ab(StatisticSpec::descents(3));
    const Permutation id = Permutation::identity(3);
    const double brute = d.a(0, 0) - d.a(0, 1) + d.b(0, 2, 0, 2) - d.b(0, 2, 1, 2);
    CHECK(d_statistic(d, id, 0, 1) == doctest::Approx(brute).epsilon(1e-15));
    CHECK_THROWS(d_statistic(d, id, 1, 1));
}

TEST_CASE("swap_difference matches full evaluation") {
    for (const auto& s : builtins(9)) {
        const NormalizedDips d = closed_form_ab(s);
        Engine rng = substream(2, 0);
        for (int t = 0; t < 30; ++t) {
            const Permutation p = sample_permutation(rng, 9);
            const int I = uniform_int(rng, 0, 8);
            const int J = (I + 1 + uniform_int(rng, 0, 7)) % 9;
            const PairSample ps = make_pair_sample(d, p, I, J);
            CHECK(ps.delta == ps.w - ps.w_prime);
            CHECK(swap_difference(d, p, I, J) == doctest::Approx(ps.delta).epsilon(1e-12).scale(1));
            CHECK(ps.lambda == doctest::Approx(1.0 / 9));
        }
    }
}

TEST_CASE("conditional mean identity") {
    const NormalizedDips z = zero_dips(4);
    const ConditionalMean c0 = conditional_mean_d(z, Permutation::identity(4));
    CHECK(c0.lhs == 0.0);
    CHECK(c0.rhs == 0.0);

    const NormalizedDips des = closed_form_ab(StatisticSpec::descents(5));
    Engine rng = substream(8, 0);
    for (int t = 0; t < 50; ++t) {
        const Permutation p = sample_permutation(rng, 5);
        const ConditionalMean c = conditional_mean_d(des, p);
        CHECK(std::abs(c.lhs - c.rhs) <= 1e-10);
    }
    const NormalizedDips ch = closed_form_ab(StatisticSpec::chatterjee(6));
    const Permutation id = Permutation::identity(6);
    const ConditionalMean c = conditional_mean_d(ch, id);
    CHECK(std::abs(c.lhs - c.rhs) <= 1e-10);
    double diag = 0.0;
    for (int i = 0; i < 6; ++i) diag += ch.b(i, i, i, i);
    CHECK(r_statistic(ch, id) == doctest::Approx(-diag / 5).epsilon(1e-13).scale(1));

    // a generic normalized kernel obeys it too
    Engine kr = substream(9, 0);
    const Kernel4 k = Kernel4::from_function(5, [&](int, int, int, int) {
        return static_cast<double>(bounded(kr, 1000)) / 500.0 - 1;
    });
    const NormalizedDips g = normalize(k);
    for_each_permutation(5, [&](const Permutation& p) {
        const ConditionalMean cm = conditional_mean_d(g, p);
        CHECK(std::abs(cm.lhs - cm.rhs) <= 1e-10 * std::max(1.0, std::abs(evaluate(g, p))));
    });
}

TEST_CASE("exact exchangeability, antisymmetry and second moment") {
    for (int n : {3, 4, 5}) {
        for (const auto& s : builtins(n)) {
            const ExchangeabilityReport r = exchangeability_check(closed_form_ab(s));
            INFO(to_string(s.kind) << " n=" << n);
            CHECK(r.triples == factorial(n) * n * (n - 1));
            CHECK(r.exchangeable);
            CHECK(r.max_antisymmetry == 0.0);
            CHECK(r.second_moment_lhs == doctest::Approx(r.second_moment_rhs).epsilon(1e-10));
        }
    }
    CHECK_THROWS(exchangeability_check(closed_form_ab(StatisticSpec::descents(7))));
}

TEST_CASE("pair bounds audit") {
    const AuditReport z = pair_bounds_audit(zero_dips(5), 0.0, 1000, 1);
    CHECK(z.max_abs_d == 0.0);
    CHECK(z.max_abs_delta == 0.0);
    CHECK(z.passed());

    const NormalizedDips des = closed_form_ab(StatisticSpec::descents(50));
    const AuditReport r = pair_bounds_audit(des, boundedness_delta(des, false).delta, 100000, 3);
    CHECK(r.passed());
    CHECK(r.samples == 100000);

    const NormalizedDips mw = closed_form_ab(StatisticSpec::mww(25, 25));
    CHECK(pair_bounds_audit(mw, boundedness_delta(mw, false).delta, 100000, 4).passed());

    // an undersized delta is caught with witnesses
    const AuditReport bad = pair_bounds_audit(des, 1e-3, 2000, 5);
    CHECK(!bad.passed());
    CHECK(!bad.violations.empty());
    CHECK(bad.violations.size() <= 10);
    const auto j = to_json(bad);
    CHECK(j.contains("violations"));
    CHECK(j.contains("max_abs_delta"));
}
