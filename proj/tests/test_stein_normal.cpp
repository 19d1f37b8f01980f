#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "dips/rng.hpp"
#include "dips/stein_normal.hpp"

using namespace dips;

namespace {

// References from 40-digit complementary error function evaluations.
struct Ref {
    double x;
    double sf;
};
constexpr Ref kSf[] = {{0.0, 0.5},
                       {1.0, 0.15865525393145705141},
                       {1.96, 0.024997895148220434137},
                       {3.0, 0.0013498980316300945267},
                       {5.0, 2.8665157187919391167e-7},
                       {8.0, 6.2209605742717841235e-16}};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("normal functions") {
    for (const auto& r : kSf) CHECK(rel(normal_sf(r.x), r.sf) <= 1e-14);
    CHECK(rel(normal_cdf(-1.5), 0.066807201268858066004) <= 1e-14);
    CHECK(rel(normal_pdf(0.7), 0.31225393336676125711) <= 1e-14);
    for (double x = -3; x <= 3; x += 0.25) CHECK(std::abs(normal_sf(x) + normal_cdf(x) - 1) <= 1e-15);
    CHECK(std::abs(8 * normal_sf(8) / normal_pdf(8) - 1) <= 0.02);
}

TEST_CASE("stein_solution") {
    CHECK(rel(stein_solution(0, 0), 0.6266570686577501256) <= 1e-14);
    CHECK(rel(stein_solution(-1, 1), 0.10402700430011603671) <= 1e-13);
    CHECK(rel(stein_solution(2, 1), 0.35451678721645584103) <= 1e-13);
    for (double z : {0.0, 1.0, 2.0}) {
        CHECK(std::abs(stein_solution(z - 1e-13, z) - stein_solution(z + 1e-13, z)) <= 1e-12);
    }
    for (double w = -6; w <= 6; w += 0.1)
        for (double z = 0; z <= 4; z += 0.5) CHECK(std::abs(w * stein_solution(w, z)) <= 1.0);
}

TEST_CASE("stein_residual") {
    CHECK(stein_residual(-1, 1) <= 1e-7);
    CHECK(stein_residual(2, 1) <= 1e-7);
    const double h = 1e-6;
    CHECK_THROWS_AS(stein_residual(0.5, 0.5 + h / 2), std::domain_error);
    CHECK_THROWS_AS(stein_residual(0.5, 0.5 - h / 2), std::domain_error);
    for (double w = -4; w <= 4; w += 0.35)
        for (double z : {0.0, 1.3, 2.6})
            if (std::abs(w - z) > 1e-3) CHECK(stein_residual(w, z) <= 1e-7);
}

TEST_CASE("tau_theta") {
    EnvelopeParams p{100, 0.1, 1.0, 1.0, 1.0};
    const double tau = tau_theta(p);
    CHECK(std::abs(tau - 1.581930111521714496) <= 1e-10);
    CHECK(tau_lhs(p, tau) <= p.theta);
    CHECK(tau_lhs(p, tau + 1e-6) > p.theta);

    p.theta = 1e-12;
    CHECK(tau_theta(p) < 1e-10);

    p = {100, 0.5, 1e6, 1.0, 1.0};
    CHECK(tau_theta(p) == doctest::Approx(2.0));

    Engine rng = substream(17, 0);
    auto u = [&] { return static_cast<double>(rng() >> 11) / 9007199254740992.0; };
    for (int t = 0; t < 100; ++t) {
        EnvelopeParams q{1 + static_cast<int>(bounded(rng, 1000)), 0.01 + u(), 0.05 + 3 * u(), 1.0, 1.0};
        const double tq = tau_theta(q);
        CHECK(tq > 0);
        CHECK(tq <= 1 / q.delta + 1e-15);
        CHECK(tau_lhs(q, tq) <= q.theta * (1 + 1e-12));
        if (tq < 1 / q.delta - 1e-6) CHECK(tau_lhs(q, tq + 1e-6) > q.theta);
    }
    CHECK_THROWS(tau_theta({100, 0.0, 1.0, 1.0, 1.0}));
    CHECK_THROWS(tau_theta({100, 0.1, -1.0, 1.0, 1.0}));
}

TEST_CASE("tau0_theta") {
    const DeltaFn zero = [](double) { return 0.0; };
    const double delta = 0.05, theta = 0.3;
    CHECK(std::abs(tau0_theta(100, delta, zero, zero, theta) - std::cbrt(2 * theta / delta)) <= 1e-9);
    CHECK(std::abs(tau0_theta(1.0, delta, zero, zero, theta) - 1.0) <= 1e-10);

    const DeltaFn c = [](double) { return 0.2; };
    const double t0 = tau0_theta(100, delta, c, c, theta);
    auto lhs = [&](double t) { return t * t * (t * delta + 0.4) / 2 + 3 * t * 0.2; };
    CHECK(lhs(t0) <= theta + 1e-12);
    CHECK(lhs(t0 + 1e-6) > theta);

    const ApplicationDeltas app = application_deltas(100, 0.1, 1.0);
    const EnvelopeParams p{100, 0.1, 1.0, 1.0, 1.0};
    const double t_app = tau0_theta(
        tau_theta(p), 0.1, [&](double t) { return app.delta1(t); }, [&](double) { return app.delta2(); }, 1.0);
    CHECK(std::abs(t_app - 0.89160530107676575354) <= 1e-9);
}

TEST_CASE("md_bound_envelope") {
    const EnvelopeParams p{100, 0.1, 1.0, 1.0, 1.0};
    CHECK(rel(md_bound_envelope(p, 0), 0.81548454853771357061) <= 1e-14);
    const EnvelopeParams q{100, 0.1, 0.5, 2.0, 1.0};
    CHECK(rel(md_bound_envelope(q, 1.0), 2.637954033120205035) <= 1e-14);
    CHECK_THROWS_AS(md_bound_envelope(p, -0.1), std::domain_error);
    CHECK_THROWS_AS(md_bound_envelope(p, tau_theta(p) + 0.01), std::domain_error);
    double prev = 0;
    for (double z = 0; z <= tau_theta(p); z += 0.05) {
        const double v = md_bound_envelope(p, z);
        CHECK(v >= prev);
        prev = v;
    }
    // delta = 1/sqrt(n): the envelope over (1+z^3)/sqrt(n) stays between fixed constants
    for (int n : {100, 10000}) {
        const EnvelopeParams r{n, 1 / std::sqrt(n), 1.0, 1.0, 1.0};
        const double z = 1.0;
        const double ratio = md_bound_formula(r, z) / ((1 + z * z * z) / std::sqrt(n));
        CHECK(ratio > 1);
        CHECK(ratio < 20);
    }
}

TEST_CASE("thm6 and mgf envelopes") {
    CHECK(thm6_bound(1, 0, 0, 0, 1) == 0.0);
    CHECK(rel(thm6_bound(1, 0.01, 0.01, 0.01, 1), 5.5294147276145945379) <= 1e-14);
    CHECK(thm6_bound(1.1, 0.01, 0.01, 0.01, 1) >= thm6_bound(1, 0.01, 0.01, 0.01, 1));
    CHECK(thm6_bound(1, 0.02, 0.01, 0.01, 1) >= thm6_bound(1, 0.01, 0.01, 0.01, 1));
    CHECK(thm6_bound(1, 0.01, 0.02, 0.01, 1) >= thm6_bound(1, 0.01, 0.01, 0.01, 1));
    CHECK(thm6_bound(1, 0.01, 0.01, 0.02, 1) >= thm6_bound(1, 0.01, 0.01, 0.01, 1));

    CHECK(mgf_envelope(0, 0.3, 0.1, 0.1) == doctest::Approx(1 + 9 * 0.3));
    CHECK(rel(mgf_envelope(1.2, 0, 0, 0), std::exp(0.72)) <= 1e-15);
    const ApplicationDeltas app = application_deltas(100, 0.1, 1.0);
    CHECK(rel(mgf_envelope(1, 0.1, app.delta1(1), app.delta2()), 10.244088515406606552) <= 1e-14);
}

TEST_CASE("application_deltas") {
    const ApplicationDeltas a = application_deltas(100, 0.1, 1.0);
    CHECK(a.delta1(0) == doctest::Approx(0.3));
    CHECK(a.delta1(0.5) == doctest::Approx(0.35));
    CHECK(rel(a.delta2(), 0.24494897427831780982) <= 1e-15);
    CHECK(a.delta1(2) >= a.delta1(1));
    const ApplicationDeltas b = application_deltas(400, 1 / std::sqrt(400.0), 2.0);
    CHECK(b.delta1(1) == doctest::Approx(0.4).epsilon(1e-14));
    CHECK_THROWS(application_deltas(100, 0.1, 0.0));
}
