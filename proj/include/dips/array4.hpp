#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

namespace dips {

// Square n x n real matrix, row-major.
class Matrix {
public:
    Matrix() = default;
    explicit Matrix(int n, double fill = 0.0);

    int n() const noexcept { return n_; }
    double operator()(int r, int c) const noexcept { return v_[idx(r, c)]; }
    double& operator()(int r, int c) noexcept { return v_[idx(r, c)]; }
    std::span<const double> data() const noexcept { return v_; }

    double max_abs() const noexcept;
    double sum_squares() const noexcept;
    double row_mean(int r) const noexcept;
    double col_mean(int c) const noexcept;
    double mean() const noexcept;

private:
    std::size_t idx(int r, int c) const noexcept {
        return static_cast<std::size_t>(r) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(c);
    }
    int n_ = 0;
    std::vector<double> v_;
};

// Dense n^4 array indexed (i,j,k,l), row-major.
class DenseArray4 {
public:
    DenseArray4() = default;
    explicit DenseArray4(int n, double fill = 0.0);
    DenseArray4(int n, std::vector<double> values);

    int n() const noexcept { return n_; }
    std::size_t index(int i, int j, int k, int l) const noexcept {
        const auto n = static_cast<std::size_t>(n_);
        return ((static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j)) * n + static_cast<std::size_t>(k)) * n +
               static_cast<std::size_t>(l);
    }
    double operator()(int i, int j, int k, int l) const noexcept { return v_[index(i, j, k, l)]; }
    double& operator()(int i, int j, int k, int l) noexcept { return v_[index(i, j, k, l)]; }
    std::span<const double> data() const noexcept { return v_; }
    std::span<double> data() noexcept { return v_; }

    double max_abs() const noexcept;

private:
    int n_ = 0;
    std::vector<double> v_;
};

// b(i,j,k,l) = sum_t position_t(i,j) * value_t(k,l)
struct SeparableTerm {
    Matrix position;
    Matrix value;
};

class SeparableArray4 {
public:
    SeparableArray4() = default;
    SeparableArray4(int n, std::vector<SeparableTerm> terms);

    int n() const noexcept { return n_; }
    double operator()(int i, int j, int k, int l) const noexcept {
        double s = 0.0;
        for (const auto& t : terms_) s += t.position(i, j) * t.value(k, l);
        return s;
    }
    const std::vector<SeparableTerm>& terms() const noexcept { return terms_; }
    DenseArray4 to_dense() const;
    SeparableArray4 scaled(double factor) const;

private:
    int n_ = 0;
    std::vector<SeparableTerm> terms_;
};

// Group of equal slices used to shortcut sums over structured arrays.
struct IndexClass {
    int rep;
    int count;
};

// For every fixed row r, the columns grouped by identical entries across all
// matrices (column r kept alone); likewise for every fixed column.
struct ClassTable {
    std::vector<std::vector<IndexClass>> by_row;
    std::vector<std::vector<IndexClass>> by_col;
};

ClassTable singleton_classes(int n);
ClassTable compress_classes(const std::vector<const Matrix*>& mats);

// Either representation of a 4-index array.
class Array4 {
public:
    Array4() = default;
    Array4(DenseArray4 d) : v_(std::move(d)) {}         // NOLINT(google-explicit-constructor)
    Array4(SeparableArray4 s) : v_(std::move(s)) {}     // NOLINT(google-explicit-constructor)

    int n() const noexcept;
    double operator()(int i, int j, int k, int l) const noexcept;

    bool is_dense() const noexcept { return std::holds_alternative<DenseArray4>(v_); }
    const DenseArray4* dense() const noexcept { return std::get_if<DenseArray4>(&v_); }
    const SeparableArray4* separable() const noexcept { return std::get_if<SeparableArray4>(&v_); }
    DenseArray4 to_dense() const;

    // (i,j) classes and (k,l) classes; singletons for dense storage.
    ClassTable position_classes() const;
    ClassTable value_classes() const;

private:
    std::variant<DenseArray4, SeparableArray4> v_;
};

}  // namespace dips
