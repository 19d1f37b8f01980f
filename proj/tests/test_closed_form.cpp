#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "dips/closed_form_statistics.hpp"
#include "dips/simulation.hpp"

using namespace dips;

namespace {

Permutation perm(const char* s) { return Permutation::parse(s); }

}  // namespace

TEST_CASE("spec parsing and validation") {
    CHECK(parse_statistic_kind("chatterjee") == StatisticKind::chatterjee_oscillation);
    CHECK(parse_statistic_kind("chatterjee_oscillation") == StatisticKind::chatterjee_oscillation);
    CHECK_THROWS(parse_statistic_kind("kendall"));
    CHECK(parse_normalization("paper_literal") == Normalization::paper_literal);
    CHECK_THROWS(parse_normalization("other"));
    CHECK_THROWS(StatisticSpec::mww(0, 3).validate());
    StatisticSpec bad = StatisticSpec::mww(2, 2);
    bad.n = 5;
    CHECK_THROWS(bad.validate());
    CHECK_THROWS(StatisticSpec::descents(1).validate());
}

TEST_CASE("descents") {
    CHECK(descents(Permutation::identity(6)) == 0);
    CHECK(descents(perm("2,1,3")) == 1);
    std::map<std::int64_t, int> c;
    for_each_permutation(4, [&](const Permutation& p) { c[descents(p)]++; });
    CHECK(c == std::map<std::int64_t, int>{{0, 1}, {1, 11}, {2, 11}, {3, 1}});
}

TEST_CASE("inversions") {
    CHECK(inversions(Permutation::identity(9)) == 0);
    CHECK(inversions(perm("3,1,2")) == 2);
    double s = 0, s2 = 0;
    for_each_permutation(3, [&](const Permutation& p) {
        const double v = static_cast<double>(inversions(p));
        s += v;
        s2 += v * v;
    });
    CHECK(s2 / 6 - (s / 6) * (s / 6) == doctest::Approx(11.0 / 12));
    // merge count against the quadratic definition
    Engine rng = substream(4, 0);
    for (int t = 0; t < 50; ++t) {
        const Permutation p = sample_permutation(rng, 37);
        std::int64_t brute = 0;
        for (int i = 0; i < 37; ++i)
            for (int j = i + 1; j < 37; ++j) brute += p[i] > p[j];
        CHECK(inversions(p) == brute);
    }
}

TEST_CASE("oscillation") {
    CHECK(oscillation(Permutation::identity(4)) == 3);
    CHECK(oscillation(perm("1,3,2")) == 3);
    std::int64_t best = 0;
    for_each_permutation(4, [&](const Permutation& p) { best = std::max(best, oscillation(p)); });
    CHECK(best == 7);
    CHECK(oscillation(perm("2,4,1,3")) == 7);
}

TEST_CASE("mww_count") {
    CHECK(mww_count(Permutation::identity(4), 2, 2) == 4);
    CHECK(mww_count(perm("4,3,2,1"), 2, 2) == 0);
    double s = 0;
    for_each_permutation(4, [&](const Permutation& p) { s += static_cast<double>(mww_count(p, 2, 2)); });
    CHECK(s / 24 == doctest::Approx(2.0));
    CHECK_THROWS(mww_count(Permutation::identity(4), 2, 3));
    Engine rng = substream(5, 0);
    for (int t = 0; t < 50; ++t) {
        const Permutation p = sample_permutation(rng, 23);
        std::int64_t brute = 0;
        for (int i = 0; i < 9; ++i)
            for (int j = 9; j < 23; ++j) brute += p[i] < p[j];
        CHECK(mww_count(p, 9, 14) == brute);
    }
}

TEST_CASE("chatterjee_xi") {
    const std::vector<double> x{0.1, 0.7, 0.4};
    const std::vector<double> up{1.0, 3.0, 2.0};
    const std::vector<double> down{3.0, 1.0, 2.0};
    CHECK(chatterjee_xi(x, up) == doctest::Approx(0.68465319688145764182).epsilon(1e-14));
    CHECK(chatterjee_xi(x, down) == doctest::Approx(chatterjee_xi(x, up)).epsilon(1e-15));
    const std::vector<double> x2{5.0, -1.0}, y2{0.3, 0.2};
    CHECK(std::abs(chatterjee_xi(x2, y2)) <= 1e-15);
    const std::vector<double> tie{1.0, 1.0, 2.0};
    CHECK_THROWS(chatterjee_xi(tie, up));
    CHECK_THROWS(chatterjee_xi(x, tie));
    CHECK_THROWS(chatterjee_xi(x, y2));

    Engine rng = substream(6, 0);
    for (int t = 0; t < 30; ++t) {
        std::vector<double> a(20), b(20);
        for (int i = 0; i < 20; ++i) {
            a[static_cast<std::size_t>(i)] = static_cast<double>(rng()) / 1.8e19;
            b[static_cast<std::size_t>(i)] = static_cast<double>(rng()) / 1.8e19;
        }
        const Permutation r = chatterjee_ranks(a, b);
        CHECK(chatterjee_xi(a, b) == statistic_value(StatisticSpec::chatterjee(20), r));
    }
}

TEST_CASE("read_xy_csv") {
    std::istringstream with_header("x,y\n1,2\n3.5,-4\n");
    const auto [x, y] = read_xy_csv(with_header, true);
    CHECK(x == std::vector<double>{1, 3.5});
    CHECK(y == std::vector<double>{2, -4});
    std::istringstream bad("1,2\n3\n");
    CHECK_THROWS(read_xy_csv(bad, false));
}

TEST_CASE("statistic_value examples") {
    CHECK(statistic_value(StatisticSpec::mww(1, 1), perm("1,2")) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(statistic_value(StatisticSpec::descents(5), Permutation::identity(5)) ==
          doctest::Approx(-2 * std::sqrt(2.0)).epsilon(1e-15));
    CHECK(statistic_value(StatisticSpec::inversions(4, Normalization::paper_literal), Permutation::identity(4)) ==
          doctest::Approx(-2.0380986614602723511).epsilon(1e-14));
    CHECK(statistic_value(StatisticSpec::descents(5, Normalization::paper_literal), Permutation::identity(5)) ==
          doctest::Approx(-2 / std::sqrt(1.0)).epsilon(1e-15));
    CHECK_THROWS(statistic_value(StatisticSpec::descents(5), Permutation::identity(4)));
}

TEST_CASE("build_kernel examples") {
    const Kernel4 d = build_kernel(StatisticSpec::descents(3));
    CHECK(d(0, 1, 1, 0) == 1.0);
    CHECK(d(0, 1, 0, 1) == -1.0);
    for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) CHECK(d(1, 0, k, l) == 0.0);

    CHECK(chatterjee_b2(3) == doctest::Approx(20.0 / 9).epsilon(1e-15));
    const Matrix a = chatterjee_a(3);
    CHECK(a.sum_squares() / 2 == doctest::Approx(1.0).epsilon(1e-14));

    const Kernel4 m = build_kernel(StatisticSpec::mww(1, 1));
    CHECK(m(0, 1, 0, 1) == 1.0);
    CHECK(m(0, 1, 0, 0) == 0.0);
    CHECK(m(0, 1, 1, 0) == 0.0);
    CHECK(m(0, 1, 1, 1) == 0.0);
    CHECK_THROWS(build_kernel(StatisticSpec::descents(kMaxDenseN + 1)));
}

TEST_CASE("closed_form_ab examples") {
    const int n = 7;
    const NormalizedDips lit = closed_form_ab(StatisticSpec::descents(n, Normalization::paper_literal));
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            const double eta = (n - 2.0 * (i + 1) + 1) / n * ((k == n - 1) - (k == 0));
            CHECK(lit.a(i, k) == doctest::Approx(std::sqrt(6.0 / (n + 1)) * eta).epsilon(1e-13));
        }
    const NormalizedDips chat = closed_form_ab(StatisticSpec::chatterjee(n));
    CHECK(chat.a_is_zero);
    const Matrix ca = chatterjee_a(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    const double expect = ((j == (i + 1) % n) ? 1.0 : 0.0) * ca(k, l) - ca(k, l) / n;
                    CHECK(chat.b(i, j, k, l) == doctest::Approx(expect).epsilon(1e-13));
                }
    const int n1 = 3, n2 = 4, m = 7;
    const NormalizedDips mw = closed_form_ab(StatisticSpec::mww(n1, n2));
    for (int i = 0; i < m; ++i)
        for (int k = 0; k < m; ++k) {
            const double kk = k + 1.0;
            const double eta = i < n1 ? n2 * (m - 2 * kk + 1) / (2.0 * m) : n1 * (2 * kk - m - 1) / (2.0 * m);
            CHECK(mw.a(i, k) * mw.sigma == doctest::Approx(eta).epsilon(1e-13));
        }
}

TEST_CASE("cross-validation against the generic pipeline") {
    for (int n : {4, 5, 6, 8}) {
        for (const StatisticSpec& s : {StatisticSpec::descents(n), StatisticSpec::inversions(n),
                                       StatisticSpec::mww(n / 2, n - n / 2), StatisticSpec::chatterjee(n),
                                       StatisticSpec::descents(n, Normalization::paper_literal)}) {
            const ClosedFormCheck c = closed_form_check(s, 5);
            INFO(to_string(s.kind) << " n=" << n);
            CHECK(c.scale > 0);
            CHECK(c.max_deviation <= 1e-10);
            CHECK(c.max_reconstruct <= 1e-10);
        }
    }
}

TEST_CASE("exact moments by enumeration") {
    for (int n = 2; n <= 7; ++n) {
        const double m = n;
        const auto des = exact_distribution(StatisticSpec::descents(n));
        CHECK(des.raw_mean() == doctest::Approx((m - 1) / 2).epsilon(1e-12));
        CHECK(des.raw_variance() == doctest::Approx((m + 1) / 12).epsilon(1e-12));
        const auto inv = exact_distribution(StatisticSpec::inversions(n));
        CHECK(inv.raw_mean() == doctest::Approx(m * (m - 1) / 4).epsilon(1e-12));
        CHECK(inv.raw_variance() == doctest::Approx(m * (m - 1) * (2 * m + 5) / 72).epsilon(1e-12));
        for (int n1 = 1; n1 < n; ++n1) {
            const int n2 = n - n1;
            const auto mw = exact_distribution(StatisticSpec::mww(n1, n2));
            CHECK(mw.raw_mean() == doctest::Approx(n1 * n2 / 2.0).epsilon(1e-12));
            CHECK(mw.raw_variance() == doctest::Approx(n1 * n2 * (m + 1) / 12).epsilon(1e-12));
        }
    }
}

TEST_CASE("descent duality: Des(pi) and Des(pi^-1) share a distribution") {
    for (int n = 2; n <= 6; ++n) {
        std::map<std::int64_t, int> a, b;
        for_each_permutation(n, [&](const Permutation& p) {
            a[descents(p)]++;
            b[descents(p.inverse())]++;
        });
        CHECK(a == b);
    }
}

TEST_CASE("descent scale candidates") {
    const auto c = descent_scale_candidates(11);
    CHECK(c.literal_sd == doctest::Approx(std::sqrt(2.0)));
    CHECK(c.exact_sd == doctest::Approx(1.0));
    CHECK(c.stated_sigma2 == doctest::Approx(8.0));
    CHECK(c.eta_sigma2 == doctest::Approx(8.0 / 11));
    const auto e = exact_distribution(StatisticSpec::descents(7));
    const auto l = exact_distribution(StatisticSpec::descents(7, Normalization::paper_literal));
    CHECK(e.variance() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(l.variance() == doctest::Approx(0.5).epsilon(1e-12));
}
