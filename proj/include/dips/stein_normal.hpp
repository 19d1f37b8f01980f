#pragma once

#include <functional>

namespace dips {

double normal_pdf(double x);
double normal_cdf(double x);
// Upper tail 1 - Phi(x), computed without cancellation.
double normal_sf(double x);

// Solution f_z of f'(w) - w f(w) = 1{w <= z} - Phi(z).
double stein_solution(double w, double z);
// |central difference of f_z at w - (w f_z(w) + 1{w<=z} - Phi(z))|. Throws if |w - z| <= h.
double stein_residual(double w, double z, double h = 1e-6);

struct EnvelopeParams {
    int n = 0;
    double delta = 0.0;
    double theta = 1.0;
    double c1 = 1.0;
    double delta1_c = 1.0;

    void validate() const;  // throws std::invalid_argument
};

// Left side of the tau(theta) constraint at t.
double tau_lhs(const EnvelopeParams& p, double t);
// max{0 <= t <= 1/delta : tau_lhs(t) <= theta}, to 1e-10 absolute.
double tau_theta(const EnvelopeParams& p);

using DeltaFn = std::function<double(double)>;

// max{0 <= t <= min(tau, 1/delta) : t^2 (t delta + 2 delta1(t))/2 + 3 t delta2(t) <= theta}
double tau0_theta(double tau, double delta, const DeltaFn& delta1, const DeltaFn& delta2, double theta);

// c1 e^theta (1+z^2)(sqrt(n) delta^2 + n delta^3 + n delta^3 z + delta); throws unless 0 <= z <= tau(theta).
double md_bound_envelope(const EnvelopeParams& p, double z);
// Same expression without the domain check.
double md_bound_formula(const EnvelopeParams& p, double z);

double thm6_bound(double z, double delta, double delta1_at_z, double delta2_at_z, double theta);

// (1+9 delta) exp(t^2/2 (1 + t delta + 2 delta1) + 3 t delta2)
double mgf_envelope(double t, double delta, double delta1_at_t, double delta2_at_t);

struct ApplicationDeltas {
    int n = 0;
    double delta = 0.0;
    double c = 1.0;
    // c (sqrt(n) delta^2 + n delta^3 + n delta^3 t + 1/sqrt(n))
    double delta1(double t) const;
    // sqrt(6) delta
    double delta2() const;
};

ApplicationDeltas application_deltas(int n, double delta, double c);

}  // namespace dips
