#include "dips/kernel_decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "dips/assignment.hpp"

namespace dips {

void Kernel4::check_size(int n) {
    if (n < 2) throw std::invalid_argument("kernel size n must be at least 2");
    if (n > kMaxDenseN) {
        throw std::invalid_argument("kernel size n=" + std::to_string(n) + " exceeds the dense cap " +
                                    std::to_string(kMaxDenseN));
    }
}

Kernel4::Kernel4(DenseArray4 values) : values_(std::move(values)) {
    check_size(values_.n());
    for (double x : values_.data()) {
        if (!std::isfinite(x)) throw std::invalid_argument("kernel has a non-finite entry");
    }
}

Kernel4 read_kernel(std::istream& in) {
    std::string header;
    if (!(in >> header) || header.rfind("n=", 0) != 0) {
        throw std::runtime_error("kernel file must start with 'n=<int>'");
    }
    int n = 0;
    try {
        std::size_t used = 0;
        n = std::stoi(header.substr(2), &used);
        if (used != header.size() - 2) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
        throw std::runtime_error("bad kernel header '" + header + "'");
    }
    Kernel4::check_size(n);
    const auto count = static_cast<std::size_t>(n) * static_cast<std::size_t>(n) * static_cast<std::size_t>(n) *
                       static_cast<std::size_t>(n);
    std::vector<double> v;
    v.reserve(count);
    std::string tok;
    while (in >> tok) {
        std::size_t used = 0;
        double x = 0.0;
        try {
            x = std::stod(tok, &used);
        } catch (const std::exception&) {
            throw std::runtime_error("bad kernel value '" + tok + "'");
        }
        if (used != tok.size()) throw std::runtime_error("bad kernel value '" + tok + "'");
        v.push_back(x);
    }
    if (v.size() != count) {
        throw std::runtime_error("kernel file has " + std::to_string(v.size()) + " values, expected " +
                                 std::to_string(count));
    }
    return Kernel4(DenseArray4(n, std::move(v)));
}

Kernel4 read_kernel_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open kernel file " + path);
    return read_kernel(in);
}

void write_kernel(std::ostream& out, const Kernel4& kernel) {
    const int n = kernel.n();
    std::ostringstream s;
    s.precision(17);
    s << "n=" << n << '\n';
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                for (int l = 0; l < n; ++l) s << (l ? " " : "") << kernel(i, j, k, l);
                s << '\n';
            }
    out << s.str();
}

nlohmann::json to_json(const DeltaReport& r) {
    nlohmann::json j;
    j["delta_a"] = r.delta_a;
    j["delta_b"] = r.delta_b;
    j["delta_row_relaxed"] = r.delta_row_relaxed;
    j["delta_row_exact"] = r.delta_row_exact ? nlohmann::json(*r.delta_row_exact) : nlohmann::json(nullptr);
    j["delta_cross"] = r.delta_cross;
    j["delta"] = r.delta;
    j["row_by_position"] = r.row_by_position;
    j["row_by_value"] = r.row_by_value;
    return j;
}

double marginal_average(const Kernel4& kernel, const std::array<std::optional<int>, 4>& fixed) {
    const int n = kernel.n();
    for (const auto& f : fixed) {
        if (f && (*f < 0 || *f >= n)) throw std::out_of_range("fixed index out of range");
    }
    std::array<int, 4> lo{}, hi{};
    int free = 0;
    for (std::size_t p = 0; p < 4; ++p) {
        if (fixed[p]) {
            lo[p] = *fixed[p];
            hi[p] = *fixed[p] + 1;
        } else {
            lo[p] = 0;
            hi[p] = n;
            ++free;
        }
    }
    double s = 0.0;
    for (int i = lo[0]; i < hi[0]; ++i)
        for (int j = lo[1]; j < hi[1]; ++j)
            for (int k = lo[2]; k < hi[2]; ++k)
                for (int l = lo[3]; l < hi[3]; ++l) s += kernel(i, j, k, l);
    return s / std::pow(static_cast<double>(n), free);
}

namespace {

// Subtracts the mean along one axis (stride describes that axis in the flat layout).
void center_axis(std::span<double> v, std::size_t n, std::size_t stride) {
    const std::size_t total = v.size();
    for (std::size_t base = 0; base < total; ++base) {
        if ((base / stride) % n != 0) continue;
        double s = 0.0;
        for (std::size_t t = 0; t < n; ++t) s += v[base + t * stride];
        const double m = s / static_cast<double>(n);
        for (std::size_t t = 0; t < n; ++t) v[base + t * stride] -= m;
    }
}

}  // namespace

// The 15-term inclusion-exclusion equals (I-M_i)(I-M_j)(I-M_k)(I-M_l) applied to xi.
CenteredKernel center_kernel(const Kernel4& kernel) {
    DenseArray4 c = kernel.values();
    const auto n = static_cast<std::size_t>(kernel.n());
    for (std::size_t stride : {n * n * n, n * n, n, std::size_t{1}}) center_axis(c.data(), n, stride);
    return CenteredKernel(std::move(c));
}

EtaPair eta_from_kernel(const Kernel4& kernel, const CenteredKernel& centered) {
    const int n = kernel.n();
    if (centered.n() != n) throw std::invalid_argument("kernel and centered kernel differ in size");
    const double nd = n;
    Matrix first(n), second(n);  // xi(i,.,k,.) and xi(.,i,.,k)
    double grand = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    const double x = kernel(i, j, k, l);
                    first(i, k) += x;
                    second(j, l) += x;
                    grand += x;
                }
    const double n2 = nd * nd;
    grand /= n2 * n2;
    EtaPair out{n, Matrix(n), Matrix(n)};
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            out.eta(i, k) = centered(i, i, k, k) + nd * first(i, k) / n2 + nd * second(i, k) / n2 - nd * grand;
        }
    std::vector<double> rm(static_cast<std::size_t>(n)), cm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        rm[static_cast<std::size_t>(i)] = out.eta.row_mean(i);
        cm[static_cast<std::size_t>(i)] = out.eta.col_mean(i);
    }
    const double gm = out.eta.mean();
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            out.eta_star(i, k) = out.eta(i, k) - rm[static_cast<std::size_t>(i)] - cm[static_cast<std::size_t>(k)] + gm;
        }
    return out;
}

NormalizedDips normalize(const Kernel4& kernel) {
    const CenteredKernel centered = center_kernel(kernel);
    const EtaPair eta = eta_from_kernel(kernel, centered);
    const int n = kernel.n();
    NormalizedDips d;
    d.n = n;
    d.mean_shift = n * eta.eta.mean();
    const double tol = 1e-12 * std::max(1.0, eta.eta.max_abs());
    if (eta.eta_star.max_abs() <= tol) {
        d.a = Matrix(n);
        d.b = centered.values();
        d.sigma = 1.0;
        d.a_is_zero = true;
        return d;
    }
    const double sigma2 = eta.eta_star.sum_squares() / (n - 1);
    if (!(sigma2 > 0.0)) throw std::logic_error("eta* is nonzero but sigma^2 vanished");
    const double sigma = std::sqrt(sigma2);
    d.sigma = sigma;
    d.a = Matrix(n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) d.a(i, k) = eta.eta_star(i, k) / sigma;
    DenseArray4 b = centered.values();
    for (double& x : b.data()) x /= sigma;
    d.b = std::move(b);
    return d;
}

double max_marginal_sum(const DenseArray4& values) {
    const int n = values.n();
    double worst = 0.0;
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
            for (int z = 0; z < n; ++z) {
                double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
                for (int t = 0; t < n; ++t) {
                    s0 += values(t, x, y, z);
                    s1 += values(x, t, y, z);
                    s2 += values(x, y, t, z);
                    s3 += values(x, y, z, t);
                }
                worst = std::max({worst, std::abs(s0), std::abs(s1), std::abs(s2), std::abs(s3)});
            }
    return worst;
}

MarginalResiduals marginal_residuals(const NormalizedDips& dips) {
    MarginalResiduals r;
    const int n = dips.n;
    for (int i = 0; i < n; ++i) {
        r.a_rows = std::max(r.a_rows, std::abs(dips.a.row_mean(i)));
        r.a_cols = std::max(r.a_cols, std::abs(dips.a.col_mean(i)));
    }
    r.sum_a2 = dips.a.sum_squares();
    if (const auto* d = dips.b.dense()) {
        r.b_marginals = max_marginal_sum(*d) / n;
    } else {
        // Each marginal of sum_t P_t(i,j) V_t(k,l) is a factor marginal times the other factor.
        const auto& terms = dips.b.separable()->terms();
        const std::size_t rank = terms.size();
        std::vector<double> coef(rank);
        double worst = 0.0;
        auto scan = [&](bool position_side, bool by_col) {
            for (int f = 0; f < n; ++f) {
                for (std::size_t t = 0; t < rank; ++t) {
                    const Matrix& m = position_side ? terms[t].position : terms[t].value;
                    double s = 0.0;
                    for (int x = 0; x < n; ++x) s += by_col ? m(x, f) : m(f, x);
                    coef[t] = s;
                }
                for (int x = 0; x < n; ++x)
                    for (int y = 0; y < n; ++y) {
                        double s = 0.0;
                        for (std::size_t t = 0; t < rank; ++t) {
                            const Matrix& o = position_side ? terms[t].value : terms[t].position;
                            s += coef[t] * o(x, y);
                        }
                        worst = std::max(worst, std::abs(s));
                    }
            }
        };
        scan(true, true);
        scan(true, false);
        scan(false, true);
        scan(false, false);
        r.b_marginals = worst / n;
    }
    return r;
}

double evaluate(const NormalizedDips& dips, const Permutation& perm) {
    const int n = dips.n;
    if (perm.size() != n) throw std::invalid_argument("permutation length does not match the statistic");
    double lin = 0.0;
    if (!dips.a_is_zero)
        for (int i = 0; i < n; ++i) lin += dips.a(i, perm[i]);
    double quad = 0.0;
    if (const auto* d = dips.b.dense()) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j) quad += (*d)(i, j, perm[i], perm[j]);
    } else {
        for (const auto& t : dips.b.separable()->terms()) {
            double s = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    if (i != j) s += t.position(i, j) * t.value(perm[i], perm[j]);
            quad += s;
        }
    }
    return lin + quad;
}

double raw_sum(const Kernel4& kernel, const Permutation& perm) {
    const int n = kernel.n();
    if (perm.size() != n) throw std::invalid_argument("permutation length does not match the kernel");
    double s = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) s += kernel(i, j, perm[i], perm[j]);
    return s;
}

double reconstruct_check(const Kernel4& kernel, const NormalizedDips& dips, const Permutation& perm) {
    return std::abs(raw_sum(kernel, perm) - (dips.sigma * evaluate(dips, perm) + dips.mean_shift));
}

double reconstruct_check(const Kernel4& kernel, const Permutation& perm) {
    return reconstruct_check(kernel, normalize(kernel), perm);
}

namespace {

template <class Entry>
DeltaReport delta_scan(int n, const ClassTable& pc, const ClassTable& vc, Entry entry) {
    DeltaReport r;
    std::vector<double> table;
    for (int i = 0; i < n; ++i) {
        const auto& jcl = pc.by_row[static_cast<std::size_t>(i)];
        for (int k = 0; k < n; ++k) {
            const auto& lcl = vc.by_row[static_cast<std::size_t>(k)];
            const std::size_t cj = jcl.size(), cl = lcl.size();
            table.resize(cj * cl);
            for (std::size_t a = 0; a < cj; ++a)
                for (std::size_t c = 0; c < cl; ++c) table[a * cl + c] = std::abs(entry(i, jcl[a].rep, k, lcl[c].rep));
            double diag = 0.0, by_pos = 0.0, cross = 0.0;
            for (std::size_t a = 0; a < cj; ++a) {
                double best = 0.0;
                for (std::size_t c = 0; c < cl; ++c) {
                    const double x = table[a * cl + c];
                    r.delta_b = std::max(r.delta_b, x);
                    cross += jcl[a].count * lcl[c].count * x;
                    if (jcl[a].rep == i && lcl[c].rep == k) diag = x;
                    if (jcl[a].rep != i && lcl[c].rep != k) best = std::max(best, x);
                }
                if (jcl[a].rep != i) by_pos += jcl[a].count * best;
            }
            double by_val = 0.0;
            for (std::size_t c = 0; c < cl; ++c) {
                if (lcl[c].rep == k) continue;
                double best = 0.0;
                for (std::size_t a = 0; a < cj; ++a)
                    if (jcl[a].rep != i) best = std::max(best, table[a * cl + c]);
                by_val += lcl[c].count * best;
            }
            const double row = diag + std::min(by_pos, by_val);
            if (row > r.delta_row_relaxed) {
                r.delta_row_relaxed = row;
                r.row_by_position = diag + by_pos;
                r.row_by_value = diag + by_val;
            }
            r.delta_cross = std::max(r.delta_cross, cross);
        }
    }
    // Remaining fixed (position, value) pairs: (i,l), (j,k), (j,l).
    auto sum_over = [&](const std::vector<IndexClass>& p, const std::vector<IndexClass>& v, auto&& at) {
        double s = 0.0;
        for (const auto& x : p)
            for (const auto& y : v) s += x.count * y.count * std::abs(at(x.rep, y.rep));
        return s;
    };
    for (int f = 0; f < n; ++f)
        for (int g = 0; g < n; ++g) {
            const auto& prow = pc.by_row[static_cast<std::size_t>(f)];
            const auto& pcol = pc.by_col[static_cast<std::size_t>(f)];
            const auto& vrow = vc.by_row[static_cast<std::size_t>(g)];
            const auto& vcol = vc.by_col[static_cast<std::size_t>(g)];
            const double il = sum_over(prow, vcol, [&](int j, int k) { return entry(f, j, k, g); });
            const double jk = sum_over(pcol, vrow, [&](int i, int l) { return entry(i, f, g, l); });
            const double jl = sum_over(pcol, vcol, [&](int i, int k) { return entry(i, f, k, g); });
            r.delta_cross = std::max({r.delta_cross, il, jk, jl});
        }
    return r;
}

template <class Entry>
double exact_row(int n, Entry entry) {
    const int m = n - 1;
    std::vector<double> w(static_cast<std::size_t>(m) * static_cast<std::size_t>(m));
    double best = 0.0;
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            int r = 0;
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                int c = 0;
                for (int l = 0; l < n; ++l) {
                    if (l == k) continue;
                    w[static_cast<std::size_t>(r * m + c)] = std::abs(entry(i, j, k, l));
                    ++c;
                }
                ++r;
            }
            best = std::max(best, std::abs(entry(i, i, k, k)) + max_weight_assignment(w, m));
        }
    return best;
}

}  // namespace

DeltaReport boundedness_delta(const NormalizedDips& dips, bool exact_assignment, int exact_cap) {
    const int n = dips.n;
    if (exact_assignment && n > exact_cap) {
        throw std::invalid_argument("exact assignment refused: n=" + std::to_string(n) + " exceeds cap " +
                                    std::to_string(exact_cap));
    }
    DeltaReport r;
    if (const auto* d = dips.b.dense()) {
        auto entry = [d](int i, int j, int k, int l) { return (*d)(i, j, k, l); };
        const ClassTable single = singleton_classes(n);
        r = delta_scan(n, single, single, entry);
        if (exact_assignment) r.delta_row_exact = exact_row(n, entry);
    } else {
        const auto* s = dips.b.separable();
        auto entry = [s](int i, int j, int k, int l) { return (*s)(i, j, k, l); };
        r = delta_scan(n, dips.b.position_classes(), dips.b.value_classes(), entry);
        if (exact_assignment) r.delta_row_exact = exact_row(n, entry);
    }
    r.delta_a = dips.a_is_zero ? 0.0 : dips.a.max_abs();
    r.delta = std::max({r.delta_a, r.delta_b, r.delta_row_relaxed, r.delta_cross});
    return r;
}

}  // namespace dips
