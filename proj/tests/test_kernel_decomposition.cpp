#include <doctest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "dips/closed_form_statistics.hpp"
#include "dips/kernel_decomposition.hpp"
#include "dips/rng.hpp"
#include "dips/simulation.hpp"

using namespace dips;

namespace {

Kernel4 random_kernel(int n, std::uint64_t seed) {
    Engine rng = substream(seed, 0);
    return Kernel4::from_function(n, [&](int, int, int, int) {
        return static_cast<double>(bounded(rng, 2000001)) / 1e6 - 1.0;
    });
}

Kernel4 descent_kernel(int n) {
    return Kernel4::from_function(n, [](int i, int j, int k, int l) {
        return (i < j && k - 1 == l ? 1.0 : 0.0) - (i < j && k + 1 == l ? 1.0 : 0.0);
    });
}

double max_diff(const DenseArray4& x, const DenseArray4& y) {
    double m = 0.0;
    for (std::size_t t = 0; t < x.data().size(); ++t) m = std::max(m, std::abs(x.data()[t] - y.data()[t]));
    return m;
}

}  // namespace

TEST_CASE("kernel validation and io") {
    CHECK_THROWS(Kernel4::from_function(1, [](int, int, int, int) { return 0.0; }));
    CHECK_THROWS(Kernel4::from_function(kMaxDenseN + 1, [](int, int, int, int) { return 0.0; }));
    CHECK_THROWS(Kernel4::from_function(2, [](int, int, int, int) { return std::nan(""); }));

    const Kernel4 k = random_kernel(3, 5);
    std::stringstream ss;
    write_kernel(ss, k);
    const Kernel4 back = read_kernel(ss);
    CHECK(max_diff(k.values(), back.values()) == 0.0);

    std::istringstream short_in("n=2\n1 2 3");
    CHECK_THROWS(read_kernel(short_in));
    std::istringstream bad_header("m=2\n");
    CHECK_THROWS(read_kernel(bad_header));
    std::istringstream junk("n=2\n" + std::string(15, '1') + " x");
    CHECK_THROWS(read_kernel(junk));
}

TEST_CASE("marginal_average") {
    const Kernel4 c = Kernel4::from_function(3, [](int, int, int, int) { return 2.5; });
    CHECK(marginal_average(c, {1, std::nullopt, 2, std::nullopt}) == doctest::Approx(2.5));
    const Kernel4 l = Kernel4::from_function(2, [](int, int, int, int l) { return l + 1.0; });
    CHECK(marginal_average(l, {0, 0, 0, std::nullopt}) == doctest::Approx(1.5));
    const Kernel4 osc = Kernel4::from_function(3, [](int, int, int k, int l) { return std::abs(k - l) * 1.0; });
    CHECK(marginal_average(osc, {std::nullopt, std::nullopt, std::nullopt, std::nullopt}) ==
          doctest::Approx(8.0 / 9).epsilon(1e-14));
    CHECK_THROWS(marginal_average(osc, {3, std::nullopt, std::nullopt, std::nullopt}));
}

TEST_CASE("center_kernel") {
    SUBCASE("constants vanish") {
        const Kernel4 c = Kernel4::from_function(4, [](int, int, int, int) { return 3.0; });
        CHECK(center_kernel(c).values().max_abs() <= 1e-14);
    }
    SUBCASE("mean-zero product kernel is fixed") {
        const std::vector<double> u{1, -1, 0}, v{2, -1, -1}, w{0.5, 0.5, -1}, x{-3, 1, 2};
        const Kernel4 k = Kernel4::from_function(3, [&](int i, int j, int k, int l) { return u[i] * v[j] * w[k] * x[l]; });
        CHECK(max_diff(center_kernel(k).values(), k.values()) <= 1e-13);
    }
    SUBCASE("random kernel: marginals, idempotence, linearity") {
        const Kernel4 k = random_kernel(4, 11), h = random_kernel(4, 12);
        const CenteredKernel ck = center_kernel(k);
        CHECK(max_marginal_sum(ck.values()) <= 1e-12);
        const CenteredKernel twice = center_kernel(Kernel4(ck.values()));
        CHECK(max_diff(twice.values(), ck.values()) <= 1e-12);
        const Kernel4 mix = Kernel4::from_function(4, [&](int i, int j, int a, int b) {
            return 1.5 * k(i, j, a, b) - 0.25 * h(i, j, a, b);
        });
        const CenteredKernel cm = center_kernel(mix), ch = center_kernel(h);
        double m = 0.0;
        for (std::size_t t = 0; t < cm.values().data().size(); ++t)
            m = std::max(m, std::abs(cm.values().data()[t] - (1.5 * ck.values().data()[t] - 0.25 * ch.values().data()[t])));
        CHECK(m <= 1e-12);
    }
}

TEST_CASE("eta_from_kernel") {
    const Kernel4 z = Kernel4::from_function(3, [](int, int, int, int) { return 0.0; });
    const EtaPair ez = eta_from_kernel(z, center_kernel(z));
    CHECK(ez.eta.max_abs() == 0.0);
    CHECK(ez.eta_star.max_abs() == 0.0);

    for (int n : {3, 5, 7}) {
        const Kernel4 d = descent_kernel(n);
        const EtaPair e = eta_from_kernel(d, center_kernel(d));
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) {
                const double expect = (n - 2.0 * (i + 1) + 1) / n * ((k == n - 1 ? 1.0 : 0.0) - (k == 0 ? 1.0 : 0.0));
                CHECK(e.eta_star(i, k) == doctest::Approx(expect).epsilon(1e-12));
            }
        for (int i = 0; i < n; ++i) {
            CHECK(std::abs(e.eta_star.row_mean(i)) <= 1e-14);
            CHECK(std::abs(e.eta_star.col_mean(i)) <= 1e-14);
        }
    }
    const Kernel4 chat = build_kernel(StatisticSpec::chatterjee(5));
    CHECK(eta_from_kernel(chat, center_kernel(chat)).eta_star.max_abs() <= 1e-12);
    CHECK_THROWS(eta_from_kernel(descent_kernel(4), center_kernel(descent_kernel(3))));
}

TEST_CASE("normalize") {
    SUBCASE("constant kernel") {
        const NormalizedDips d = normalize(Kernel4::from_function(3, [](int, int, int, int) { return 2.0; }));
        CHECK(d.a_is_zero);
        CHECK(d.sigma == 1.0);
        CHECK(d.b.to_dense().max_abs() <= 1e-14);
        for_each_permutation(3, [&](const Permutation& p) { CHECK(std::abs(evaluate(d, p)) <= 1e-13); });
    }
    SUBCASE("descent kernel n=3") {
        const NormalizedDips d = normalize(descent_kernel(3));
        CHECK(d.sigma * d.sigma == doctest::Approx(8.0 / 9).epsilon(1e-14));
        CHECK(d.a.max_abs() == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
        CHECK(!d.a_is_zero);
    }
    SUBCASE("random kernels satisfy the invariants") {
        for (int n = 3; n <= 6; ++n) {
            const NormalizedDips d = normalize(random_kernel(n, 100 + n));
            const MarginalResiduals m = marginal_residuals(d);
            CHECK(m.a_rows <= 1e-12);
            CHECK(m.a_cols <= 1e-12);
            CHECK(m.b_marginals <= 1e-12);
            CHECK(m.sum_a2 == doctest::Approx(n - 1.0).epsilon(1e-10));
        }
    }
}

TEST_CASE("evaluate and reconstruct") {
    const Kernel4 k = random_kernel(3, 21);
    const NormalizedDips d = normalize(k);
    for_each_permutation(3, [&](const Permutation& p) {
        double raw = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) raw += k(i, j, p[i], p[j]);
        CHECK(evaluate(d, p) == doctest::Approx((raw - d.mean_shift) / d.sigma).epsilon(1e-12));
    });
    CHECK_THROWS(evaluate(d, Permutation::identity(4)));

    const Kernel4 k5 = random_kernel(5, 22);
    const NormalizedDips d5 = normalize(k5);
    Engine rng = substream(3, 0);
    for (int t = 0; t < 100; ++t) CHECK(reconstruct_check(k5, d5, sample_permutation(rng, 5)) <= 1e-10 * 25);

    const Kernel4 dk = descent_kernel(4);
    for_each_permutation(4, [&](const Permutation& p) { CHECK(reconstruct_check(dk, p) <= 1e-12); });

    const Kernel4 zero = Kernel4::from_function(3, [](int, int, int, int) { return 0.0; });
    CHECK(reconstruct_check(zero, Permutation::identity(3)) == 0.0);
}

TEST_CASE("mean of evaluate is the diagonal term") {
    // E W = sum_{i,k} b(i,i,k,k) / (n(n-1)); the diagonal of b survives the centering.
    for (int n = 3; n <= 6; ++n) {
        const NormalizedDips d = normalize(random_kernel(n, 300 + n));
        double total = 0.0, diag = 0.0;
        for_each_permutation(n, [&](const Permutation& p) { total += evaluate(d, p); });
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) diag += d.b(i, i, k, k);
        CHECK(total / factorial(n) == doctest::Approx(diag / (n * (n - 1.0))).epsilon(1e-10));
    }
    double total = 0.0;
    const NormalizedDips des = normalize(descent_kernel(5));
    for_each_permutation(5, [&](const Permutation& p) { total += evaluate(des, p); });
    CHECK(std::abs(total / 120) <= 1e-12);
}

TEST_CASE("boundedness_delta") {
    SUBCASE("zero b") {
        const NormalizedDips d = normalize(Kernel4::from_function(4, [](int, int, int, int) { return 1.0; }));
        const DeltaReport r = boundedness_delta(d, true);
        CHECK(r.delta == doctest::Approx(0.0));
    }
    SUBCASE("exact row never exceeds the relaxed bound") {
        for (std::uint64_t s = 0; s < 5; ++s) {
            Engine rng = substream(s, 9);
            const Kernel4 k = Kernel4::from_function(6, [&](int, int, int, int) {
                return bounded(rng, 10) < 2 ? static_cast<double>(bounded(rng, 1000)) / 100.0 : 0.0;
            });
            const DeltaReport r = boundedness_delta(normalize(k), true);
            REQUIRE(r.delta_row_exact.has_value());
            CHECK(*r.delta_row_exact <= r.delta_row_relaxed + 1e-12);
            CHECK(r.delta >= std::max({r.delta_a, r.delta_b, r.delta_row_relaxed, r.delta_cross}) - 1e-15);
        }
    }
    SUBCASE("exact solve refused past the cap") {
        const NormalizedDips d = closed_form_ab(StatisticSpec::descents(13));
        CHECK_THROWS_AS(boundedness_delta(d, true), std::invalid_argument);
        CHECK_NOTHROW(boundedness_delta(d, false));
    }
    SUBCASE("dense and separable storage agree") {
        const StatisticSpec spec = StatisticSpec::mww(3, 4);
        const NormalizedDips sep = closed_form_ab(spec);
        NormalizedDips dense = sep;
        dense.b = sep.b.to_dense();
        const DeltaReport a = boundedness_delta(sep, true), b = boundedness_delta(dense, true);
        CHECK(a.delta_b == doctest::Approx(b.delta_b).epsilon(1e-12));
        CHECK(a.delta_row_relaxed == doctest::Approx(b.delta_row_relaxed).epsilon(1e-12));
        CHECK(a.delta_cross == doctest::Approx(b.delta_cross).epsilon(1e-12));
        CHECK(*a.delta_row_exact == doctest::Approx(*b.delta_row_exact).epsilon(1e-12));
    }
    SUBCASE("descents: a, b and row terms shrink like n^-1/2, cross grows like n^1/2") {
        std::vector<double> la, lb, lr, lc, ln;
        for (int n : {25, 100, 400}) {
            const DeltaReport r = boundedness_delta(closed_form_ab(StatisticSpec::descents(n)), false);
            if (n == 100) {
                CHECK(r.delta_a <= 10 / std::sqrt(n));
                CHECK(r.delta_b <= 10 / std::sqrt(n));
                CHECK(r.delta_row_relaxed <= 10 / std::sqrt(n));
            }
            ln.push_back(std::log(n));
            la.push_back(std::log(r.delta_a));
            lb.push_back(std::log(r.delta_b));
            lr.push_back(std::log(r.delta_row_relaxed));
            lc.push_back(std::log(r.delta_cross));
        }
        auto slope = [&](const std::vector<double>& y) { return (y[2] - y[0]) / (ln[2] - ln[0]); };
        CHECK(std::abs(slope(la) + 0.5) <= 0.1);
        CHECK(std::abs(slope(lb) + 0.5) <= 0.1);
        CHECK(std::abs(slope(lr) + 0.5) <= 0.1);
        CHECK(std::abs(slope(lc) - 0.5) <= 0.1);
    }
    SUBCASE("json field names") {
        const auto j = to_json(boundedness_delta(closed_form_ab(StatisticSpec::descents(5)), true));
        for (const char* key : {"delta_a", "delta_b", "delta_row_relaxed", "delta_row_exact", "delta_cross", "delta"})
            CHECK(j.contains(key));
    }
}
