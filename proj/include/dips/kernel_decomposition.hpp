#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "dips/array4.hpp"
#include "dips/permutation.hpp"

namespace dips {

inline constexpr int kMaxDenseN = 40;
inline constexpr int kMaxExactAssignmentN = 12;

// Raw kernel xi(i,j,k,l) of the statistic sum_{i,j} xi(i,j,pi(i),pi(j)).
class Kernel4 {
public:
    // Requires 2 <= n <= kMaxDenseN and finite entries.
    explicit Kernel4(DenseArray4 values);

    template <class F>
    static Kernel4 from_function(int n, F&& f) {
        check_size(n);
        DenseArray4 d(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l) d(i, j, k, l) = f(i, j, k, l);
        return Kernel4(std::move(d));
    }

    int n() const noexcept { return values_.n(); }
    double operator()(int i, int j, int k, int l) const noexcept { return values_(i, j, k, l); }
    const DenseArray4& values() const noexcept { return values_; }
    double max_abs() const noexcept { return values_.max_abs(); }

    static void check_size(int n);

private:
    DenseArray4 values_;
};

// Text format: "n=<int>" then n^4 reals, (i,j,k,l) row-major.
Kernel4 read_kernel(std::istream& in);
Kernel4 read_kernel_file(const std::string& path);
void write_kernel(std::ostream& out, const Kernel4& kernel);

class CenteredKernel {
public:
    int n() const noexcept { return values_.n(); }
    double operator()(int i, int j, int k, int l) const noexcept { return values_(i, j, k, l); }
    const DenseArray4& values() const noexcept { return values_; }

private:
    explicit CenteredKernel(DenseArray4 v) : values_(std::move(v)) {}
    DenseArray4 values_;
    friend CenteredKernel center_kernel(const Kernel4& kernel);
};

struct EtaPair {
    int n = 0;
    Matrix eta;
    Matrix eta_star;
};

struct NormalizedDips {
    int n = 0;
    Matrix a;
    Array4 b;
    double sigma = 1.0;
    bool a_is_zero = false;
    double mean_shift = 0.0;
};

struct DeltaReport {
    double delta_a = 0.0;
    double delta_b = 0.0;
    double delta_row_relaxed = 0.0;
    std::optional<double> delta_row_exact;
    double delta_cross = 0.0;
    double delta = 0.0;
    // Components of delta_row_relaxed: |b(i,i,k,k)| plus the j-major or l-major sum.
    double row_by_position = 0.0;
    double row_by_value = 0.0;
};

nlohmann::json to_json(const DeltaReport& r);

// Largest marginal residuals of a NormalizedDips (used as postcondition checks).
struct MarginalResiduals {
    double a_rows = 0.0;
    double a_cols = 0.0;
    double b_marginals = 0.0;
    double sum_a2 = 0.0;  // sum of a(i,k)^2
};

MarginalResiduals marginal_residuals(const NormalizedDips& dips);
// Max over the 4 n^3 one-index marginal sums.
double max_marginal_sum(const DenseArray4& values);

// Average of xi over the free positions; fixed[p] holds the index of position p if fixed.
double marginal_average(const Kernel4& kernel, const std::array<std::optional<int>, 4>& fixed);

CenteredKernel center_kernel(const Kernel4& kernel);
EtaPair eta_from_kernel(const Kernel4& kernel, const CenteredKernel& centered);
NormalizedDips normalize(const Kernel4& kernel);

// sum_i a(i,pi(i)) + sum_{i != j} b(i,j,pi(i),pi(j))
double evaluate(const NormalizedDips& dips, const Permutation& perm);
// sum_{i,j} xi(i,j,pi(i),pi(j))
double raw_sum(const Kernel4& kernel, const Permutation& perm);

double reconstruct_check(const Kernel4& kernel, const NormalizedDips& dips, const Permutation& perm);
double reconstruct_check(const Kernel4& kernel, const Permutation& perm);

DeltaReport boundedness_delta(const NormalizedDips& dips, bool exact_assignment,
                              int exact_cap = kMaxExactAssignmentN);

}  // namespace dips
