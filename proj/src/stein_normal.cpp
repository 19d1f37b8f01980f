#include "dips/stein_normal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dips {

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2 * std::numbers::pi); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2); }

double normal_sf(double x) { return 0.5 * std::erfc(x * std::numbers::sqrt2 / 2); }

double stein_solution(double w, double z) {
    if (w <= z) return normal_cdf(w) * normal_sf(z) / normal_pdf(w);
    return normal_cdf(z) * normal_sf(w) / normal_pdf(w);
}

double stein_residual(double w, double z, double h) {
    if (!(h > 0)) throw std::invalid_argument("step h must be positive");
    if (std::abs(w - z) <= h) throw std::domain_error("w within h of z: derivative undefined across the jump");
    const double deriv = (stein_solution(w + h, z) - stein_solution(w - h, z)) / (2 * h);
    const double rhs = w * stein_solution(w, z) + (w <= z ? 1.0 : 0.0) - normal_cdf(z);
    return std::abs(deriv - rhs);
}

void EnvelopeParams::validate() const {
    if (n < 1) throw std::invalid_argument("envelope n must be positive");
    if (!(delta > 0)) throw std::invalid_argument("delta must be positive");
    if (!(theta > 0)) throw std::invalid_argument("theta must be positive");
    if (!(c1 > 0)) throw std::invalid_argument("c1 must be positive");
    if (!(delta1_c > 0)) throw std::invalid_argument("delta1_c must be positive");
}

double tau_lhs(const EnvelopeParams& p, double t) {
    const double d = p.delta, n = p.n;
    const double d3 = d * d * d;
    return t * t * t * d + std::sqrt(n) * d3 * t * t + n * d3 * t * t * t + t * d + t * t / n;
}

namespace {

// Largest t in [0, hi] with g(t) <= theta for nondecreasing g.
template <class G>
double bisect_max(G g, double hi, double theta) {
    if (g(hi) <= theta) return hi;
    double lo = 0.0;
    while (hi - lo > 1e-12 * std::max(1.0, hi)) {
        const double mid = 0.5 * (lo + hi);
        if (g(mid) <= theta)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

}  // namespace

double tau_theta(const EnvelopeParams& p) {
    p.validate();
    return bisect_max([&](double t) { return tau_lhs(p, t); }, 1.0 / p.delta, p.theta);
}

double tau0_theta(double tau, double delta, const DeltaFn& delta1, const DeltaFn& delta2, double theta) {
    if (!(delta > 0) || !(theta > 0) || tau < 0) throw std::invalid_argument("tau0 needs delta > 0, theta > 0, tau >= 0");
    auto g = [&](double t) { return t * t * (t * delta + 2 * delta1(t)) / 2 + 3 * t * delta2(t); };
    return bisect_max(g, std::min(tau, 1.0 / delta), theta);
}

double md_bound_formula(const EnvelopeParams& p, double z) {
    const double d = p.delta, n = p.n;
    const double d3 = d * d * d;
    return p.c1 * std::exp(p.theta) * (1 + z * z) * (std::sqrt(n) * d * d + n * d3 + n * d3 * z + d);
}

double md_bound_envelope(const EnvelopeParams& p, double z) {
    const double tau = tau_theta(p);
    if (z < 0 || z > tau) throw std::domain_error("z outside [0, tau(theta)]");
    return md_bound_formula(p, z);
}

double thm6_bound(double z, double delta, double delta1_at_z, double delta2_at_z, double theta) {
    return 31 * std::exp(theta) * (1 + 9 * delta) *
           ((1 + z * z) * (delta1_at_z + delta + delta * delta2_at_z) + (1 + z) * delta2_at_z);
}

double mgf_envelope(double t, double delta, double delta1_at_t, double delta2_at_t) {
    return (1 + 9 * delta) * std::exp(t * t / 2 * (1 + t * delta + 2 * delta1_at_t) + 3 * t * delta2_at_t);
}

double ApplicationDeltas::delta1(double t) const {
    const double m = n;
    const double d3 = delta * delta * delta;
    return c * (std::sqrt(m) * delta * delta + m * d3 + m * d3 * t + 1 / std::sqrt(m));
}

double ApplicationDeltas::delta2() const { return std::sqrt(6.0) * delta; }

ApplicationDeltas application_deltas(int n, double delta, double c) {
    if (n < 1 || !(delta >= 0) || !(c > 0)) throw std::invalid_argument("application deltas need n >= 1, delta >= 0, c > 0");
    return {n, delta, c};
}

}  // namespace dips
