#include "dips/array4.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dips {

Matrix::Matrix(int n, double fill) : n_(n) {
    if (n < 0) throw std::invalid_argument("negative matrix size");
    v_.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), fill);
}

double Matrix::max_abs() const noexcept {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
}

double Matrix::sum_squares() const noexcept {
    double s = 0.0;
    for (double x : v_) s += x * x;
    return s;
}

double Matrix::row_mean(int r) const noexcept {
    double s = 0.0;
    for (int c = 0; c < n_; ++c) s += (*this)(r, c);
    return s / n_;
}

double Matrix::col_mean(int c) const noexcept {
    double s = 0.0;
    for (int r = 0; r < n_; ++r) s += (*this)(r, c);
    return s / n_;
}

double Matrix::mean() const noexcept {
    double s = 0.0;
    for (double x : v_) s += x;
    return s / static_cast<double>(v_.size());
}

DenseArray4::DenseArray4(int n, double fill) : n_(n) {
    if (n < 0) throw std::invalid_argument("negative array size");
    const auto m = static_cast<std::size_t>(n);
    v_.assign(m * m * m * m, fill);
}

DenseArray4::DenseArray4(int n, std::vector<double> values) : n_(n), v_(std::move(values)) {
    const auto m = static_cast<std::size_t>(n);
    if (n < 0 || v_.size() != m * m * m * m) {
        throw std::invalid_argument("expected n^4 values");
    }
}

double DenseArray4::max_abs() const noexcept {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
}

SeparableArray4::SeparableArray4(int n, std::vector<SeparableTerm> terms) : n_(n), terms_(std::move(terms)) {
    for (const auto& t : terms_) {
        if (t.position.n() != n || t.value.n() != n) {
            throw std::invalid_argument("separable term size mismatch");
        }
    }
}

DenseArray4 SeparableArray4::to_dense() const {
    DenseArray4 d(n_);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
            for (int k = 0; k < n_; ++k)
                for (int l = 0; l < n_; ++l) d(i, j, k, l) = (*this)(i, j, k, l);
    return d;
}

SeparableArray4 SeparableArray4::scaled(double factor) const {
    SeparableArray4 out = *this;
    for (auto& t : out.terms_) {
        for (int r = 0; r < n_; ++r)
            for (int c = 0; c < n_; ++c) t.value(r, c) *= factor;
    }
    return out;
}

ClassTable singleton_classes(int n) {
    ClassTable t;
    t.by_row.assign(static_cast<std::size_t>(n), {});
    t.by_col.assign(static_cast<std::size_t>(n), {});
    for (int r = 0; r < n; ++r) {
        auto& row = t.by_row[static_cast<std::size_t>(r)];
        auto& col = t.by_col[static_cast<std::size_t>(r)];
        for (int c = 0; c < n; ++c) {
            row.push_back({c, 1});
            col.push_back({c, 1});
        }
    }
    return t;
}

namespace {

// Groups the indices idx (excluding `own`) by the tuple key(idx); `own` forms its own class.
template <class Key>
std::vector<IndexClass> group_line(int n, int own, Key key) {
    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(n));
    for (int c = 0; c < n; ++c)
        if (c != own) order.push_back(c);
    std::sort(order.begin(), order.end(), [&](int x, int y) { return key(x) < key(y); });
    std::vector<IndexClass> out;
    out.push_back({own, 1});
    for (std::size_t s = 0; s < order.size();) {
        std::size_t e = s + 1;
        while (e < order.size() && key(order[e]) == key(order[s])) ++e;
        out.push_back({order[s], static_cast<int>(e - s)});
        s = e;
    }
    return out;
}

}  // namespace

ClassTable compress_classes(const std::vector<const Matrix*>& mats) {
    if (mats.empty()) throw std::invalid_argument("no matrices to compress");
    const int n = mats.front()->n();
    ClassTable t;
    t.by_row.resize(static_cast<std::size_t>(n));
    t.by_col.resize(static_cast<std::size_t>(n));
    for (int r = 0; r < n; ++r) {
        t.by_row[static_cast<std::size_t>(r)] = group_line(n, r, [&](int c) {
            std::vector<double> k;
            k.reserve(mats.size());
            for (const Matrix* m : mats) k.push_back((*m)(r, c));
            return k;
        });
        t.by_col[static_cast<std::size_t>(r)] = group_line(n, r, [&](int c) {
            std::vector<double> k;
            k.reserve(mats.size());
            for (const Matrix* m : mats) k.push_back((*m)(c, r));
            return k;
        });
    }
    return t;
}

int Array4::n() const noexcept {
    return std::visit([](const auto& a) { return a.n(); }, v_);
}

double Array4::operator()(int i, int j, int k, int l) const noexcept {
    if (const auto* d = dense()) return (*d)(i, j, k, l);
    return std::get<SeparableArray4>(v_)(i, j, k, l);
}

DenseArray4 Array4::to_dense() const {
    if (const auto* d = dense()) return *d;
    return std::get<SeparableArray4>(v_).to_dense();
}

ClassTable Array4::position_classes() const {
    if (const auto* s = separable(); s && !s->terms().empty()) {
        std::vector<const Matrix*> mats;
        for (const auto& t : s->terms()) mats.push_back(&t.position);
        return compress_classes(mats);
    }
    return singleton_classes(n());
}

ClassTable Array4::value_classes() const {
    if (const auto* s = separable(); s && !s->terms().empty()) {
        std::vector<const Matrix*> mats;
        for (const auto& t : s->terms()) mats.push_back(&t.value);
        return compress_classes(mats);
    }
    return singleton_classes(n());
}

}  // namespace dips
