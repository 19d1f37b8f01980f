#include "dips/closed_form_statistics.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "dips/rng.hpp"

namespace dips {

std::string to_string(StatisticKind kind) {
    switch (kind) {
        case StatisticKind::descents: return "descents";
        case StatisticKind::inversions: return "inversions";
        case StatisticKind::mww: return "mww";
        case StatisticKind::chatterjee_oscillation: return "chatterjee";
    }
    return "unknown";
}

std::string to_string(Normalization mode) {
    return mode == Normalization::paper_literal ? "paper_literal" : "variance_exact";
}

StatisticKind parse_statistic_kind(const std::string& text) {
    if (text == "descents") return StatisticKind::descents;
    if (text == "inversions") return StatisticKind::inversions;
    if (text == "mww") return StatisticKind::mww;
    if (text == "chatterjee" || text == "chatterjee_oscillation") return StatisticKind::chatterjee_oscillation;
    throw std::invalid_argument("unknown statistic '" + text + "'");
}

Normalization parse_normalization(const std::string& text) {
    if (text == "paper_literal") return Normalization::paper_literal;
    if (text == "variance_exact") return Normalization::variance_exact;
    throw std::invalid_argument("unknown normalization '" + text + "'");
}

void StatisticSpec::validate() const {
    if (n < 2) throw std::invalid_argument("statistic size n must be at least 2");
    if (kind == StatisticKind::mww) {
        if (n1 < 1 || n2 < 1 || n1 + n2 != n) {
            throw std::invalid_argument("mww requires n1 >= 1, n2 >= 1 and n1 + n2 = n");
        }
    }
}

StatisticSpec StatisticSpec::descents(int n, Normalization m) {
    return {StatisticKind::descents, n, 0, 0, m};
}
StatisticSpec StatisticSpec::inversions(int n, Normalization m) {
    return {StatisticKind::inversions, n, 0, 0, m};
}
StatisticSpec StatisticSpec::mww(int n1, int n2, Normalization m) {
    return {StatisticKind::mww, n1 + n2, n1, n2, m};
}
StatisticSpec StatisticSpec::chatterjee(int n, Normalization m) {
    return {StatisticKind::chatterjee_oscillation, n, 0, 0, m};
}

std::int64_t descents(const Permutation& perm) {
    std::int64_t d = 0;
    for (int i = 0; i + 1 < perm.size(); ++i) d += perm[i] > perm[i + 1];
    return d;
}

namespace {

std::int64_t merge_count(std::vector<int>& v, std::vector<int>& buf, std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::int64_t c = merge_count(v, buf, lo, mid) + merge_count(v, buf, mid, hi);
    std::size_t a = lo, b = mid, o = lo;
    while (a < mid && b < hi) {
        if (v[b] < v[a]) {
            c += static_cast<std::int64_t>(mid - a);
            buf[o++] = v[b++];
        } else {
            buf[o++] = v[a++];
        }
    }
    while (a < mid) buf[o++] = v[a++];
    while (b < hi) buf[o++] = v[b++];
    std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
              v.begin() + static_cast<std::ptrdiff_t>(lo));
    return c;
}

}  // namespace

std::int64_t inversions(const Permutation& perm) {
    std::vector<int> v(perm.values().begin(), perm.values().end());
    std::vector<int> buf(v.size());
    return merge_count(v, buf, 0, v.size());
}

std::int64_t oscillation(const Permutation& perm) {
    std::int64_t s = 0;
    for (int i = 0; i + 1 < perm.size(); ++i) s += std::abs(perm[i] - perm[i + 1]);
    return s;
}

std::int64_t mww_count(const Permutation& perm, int n1, int n2) {
    if (n1 < 1 || n2 < 1 || n1 + n2 != perm.size()) throw std::invalid_argument("bad mww split");
    // Scan values upward, counting x positions seen before each y position.
    const Permutation inv = perm.inverse();
    std::int64_t seen_x = 0, count = 0;
    for (int v = 0; v < perm.size(); ++v) {
        if (inv[v] < n1)
            ++seen_x;
        else
            count += seen_x;
    }
    return count;
}

Permutation chatterjee_ranks(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("x and y differ in length");
    const std::size_t n = x.size();
    if (n < 2) throw std::invalid_argument("need at least two observations");
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw std::invalid_argument("non-finite observation");
    std::vector<std::size_t> by_x(n), by_y(n);
    std::iota(by_x.begin(), by_x.end(), 0);
    std::iota(by_y.begin(), by_y.end(), 0);
    std::sort(by_x.begin(), by_x.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::sort(by_y.begin(), by_y.end(), [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });
    for (std::size_t i = 1; i < n; ++i) {
        if (x[by_x[i]] == x[by_x[i - 1]]) throw std::invalid_argument("ties in x");
        if (y[by_y[i]] == y[by_y[i - 1]]) throw std::invalid_argument("ties in y");
    }
    std::vector<int> rank_of(n);  // 0-based rank of y among all y
    for (std::size_t r = 0; r < n; ++r) rank_of[by_y[r]] = static_cast<int>(r);
    std::vector<int> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = rank_of[by_x[i]];
    return Permutation(std::move(r));
}

double chatterjee_xi(std::span<const double> x, std::span<const double> y) {
    const Permutation r = chatterjee_ranks(x, y);
    return statistic_value(StatisticSpec::chatterjee(r.size()), r);
}

std::pair<std::vector<double>, std::vector<double>> read_xy_csv(std::istream& in, bool has_header) {
    std::vector<double> xs, ys;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (has_header && lineno == 1) continue;
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
            throw std::runtime_error("line " + std::to_string(lineno) + ": expected two comma-separated columns");
        }
        auto num = [&](const std::string& s) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(s, &used);
            } catch (const std::exception&) {
                throw std::runtime_error("line " + std::to_string(lineno) + ": bad number '" + s + "'");
            }
            if (s.find_first_not_of(" \t", used) != std::string::npos) {
                throw std::runtime_error("line " + std::to_string(lineno) + ": bad number '" + s + "'");
            }
            return v;
        };
        xs.push_back(num(line.substr(0, comma)));
        ys.push_back(num(line.substr(comma + 1)));
    }
    return {std::move(xs), std::move(ys)};
}

std::int64_t raw_statistic(const StatisticSpec& spec, const Permutation& perm) {
    switch (spec.kind) {
        case StatisticKind::descents: return descents(perm);
        case StatisticKind::inversions: return inversions(perm);
        case StatisticKind::mww: return mww_count(perm, spec.n1, spec.n2);
        case StatisticKind::chatterjee_oscillation: return oscillation(perm);
    }
    return 0;
}

AffineMap statistic_affine(const StatisticSpec& spec) {
    spec.validate();
    const double n = spec.n;
    switch (spec.kind) {
        case StatisticKind::descents:
            return {(n - 1) / 2, spec.normalization == Normalization::paper_literal ? std::sqrt((n + 1) / 6)
                                                                                    : std::sqrt((n + 1) / 12)};
        case StatisticKind::inversions: return {n * (n - 1) / 4, std::sqrt(n * (n - 1) * (2 * n + 5) / 72)};
        case StatisticKind::mww: {
            const double n1 = spec.n1, n2 = spec.n2;
            return {n1 * n2 / 2, std::sqrt(n1 * n2 * (n + 1) / 12)};
        }
        case StatisticKind::chatterjee_oscillation:
            // sqrt(5n/2) (1 - 3 osc / (n^2 - 1)) rewritten as (osc - c) / s
            return {(n * n - 1) / 3, -(n * n - 1) / (3 * std::sqrt(5 * n / 2))};
    }
    return {};
}

double normalize_raw(const StatisticSpec& spec, std::int64_t raw) {
    const double x = static_cast<double>(raw);
    if (spec.kind == StatisticKind::chatterjee_oscillation) {
        const double n = spec.n;
        return std::sqrt(5 * n / 2) * (1 - 3 * x / (n * n - 1));
    }
    return statistic_affine(spec).apply(x);
}

double statistic_value(const StatisticSpec& spec, const Permutation& perm) {
    if (perm.size() != spec.n) throw std::invalid_argument("permutation length does not match spec.n");
    return normalize_raw(spec, raw_statistic(spec, perm));
}

std::int64_t max_raw_statistic(const StatisticSpec& spec) {
    spec.validate();
    const std::int64_t n = spec.n;
    switch (spec.kind) {
        case StatisticKind::descents: return n - 1;
        case StatisticKind::inversions: return n * (n - 1) / 2;
        case StatisticKind::mww: return static_cast<std::int64_t>(spec.n1) * spec.n2;
        case StatisticKind::chatterjee_oscillation: return n * n / 2;
    }
    return 0;
}

double chatterjee_b2(int n) {
    const double m = n;
    return (m + 1) * (2 * m * m + 7) / 45;
}

Matrix chatterjee_a(int n) {
    Matrix alpha(n);
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) alpha(k, l) = std::abs(k - l);
    std::vector<double> rm(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) rm[static_cast<std::size_t>(k)] = alpha.row_mean(k);
    const double g = alpha.mean();
    const double b = std::sqrt(chatterjee_b2(n));
    Matrix a(n);
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
            a(k, l) = (alpha(k, l) - rm[static_cast<std::size_t>(k)] - rm[static_cast<std::size_t>(l)] + g) / b;
    return a;
}

namespace {

int succ(int i, int n) { return i + 1 == n ? 0 : i + 1; }

double trace(const Matrix& m) {
    double t = 0.0;
    for (int k = 0; k < m.n(); ++k) t += m(k, k);
    return t;
}

}  // namespace

Kernel4 build_kernel(const StatisticSpec& spec) {
    spec.validate();
    const int n = spec.n;
    Kernel4::check_size(n);
    switch (spec.kind) {
        case StatisticKind::descents:
            return Kernel4::from_function(n, [](int i, int j, int k, int l) {
                return (i < j && l == k - 1) ? 1.0 : (i < j && l == k + 1) ? -1.0 : 0.0;
            });
        case StatisticKind::inversions:
            return Kernel4::from_function(n, [](int i, int j, int k, int l) { return (i < j && k > l) ? 1.0 : 0.0; });
        case StatisticKind::mww: {
            const int n1 = spec.n1;
            return Kernel4::from_function(
                n, [n1](int i, int j, int k, int l) { return (i < n1 && j >= n1 && k < l) ? 1.0 : 0.0; });
        }
        case StatisticKind::chatterjee_oscillation: {
            const Matrix a = chatterjee_a(n);
            const double denom = static_cast<double>(n) * (n - 1);
            return Kernel4::from_function(n, [&](int i, int j, int k, int l) {
                return (j == succ(i, n) ? a(k, l) : 0.0) + a(i, i) / denom;
            });
        }
    }
    throw std::logic_error("unhandled statistic");
}

namespace {

// 1{I<J} - (n-1+2(J-I))/(2n), split into its two displayed pieces.
Matrix strict_upper(int n) {
    Matrix m(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = i < j ? 1.0 : 0.0;
    return m;
}

Matrix upper_centering(int n) {
    Matrix m(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = -(n - 1 + 2.0 * (j - i)) / (2.0 * n);
    return m;
}

NormalizedDips assemble(int n, Matrix eta_star, std::vector<SeparableTerm> xi_star, double sigma,
                        double mean_shift) {
    NormalizedDips d;
    d.n = n;
    d.sigma = sigma;
    d.mean_shift = mean_shift;
    d.a = Matrix(n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) d.a(i, k) = eta_star(i, k) / sigma;
    d.a_is_zero = false;
    d.b = SeparableArray4(n, std::move(xi_star)).scaled(1.0 / sigma);
    return d;
}

}  // namespace

NormalizedDips closed_form_ab(const StatisticSpec& spec) {
    spec.validate();
    const int n = spec.n;
    const double nd = n;
    switch (spec.kind) {
        case StatisticKind::descents: {
            // xi* = 1{i<j}(D - c_k - c'_l) - (n-1+2(j-i))/(2n) (D - c_k - c'_l)
            Matrix eta(n), dt(n);
            for (int i = 0; i < n; ++i) {
                const double I = i + 1;
                eta(i, n - 1) += (nd - 2 * I + 1) / nd;
                eta(i, 0) -= (nd - 2 * I + 1) / nd;
            }
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    const double d = (l == k - 1 ? 1.0 : 0.0) - (l == k + 1 ? 1.0 : 0.0);
                    const double rk = ((k == n - 1) - (k == 0)) / nd;
                    const double cl = ((l == 0) - (l == n - 1)) / nd;
                    dt(k, l) = d - rk - cl;
                }
            std::vector<SeparableTerm> terms{{strict_upper(n), dt}, {upper_centering(n), dt}};
            const double sigma = spec.normalization == Normalization::paper_literal ? std::sqrt((nd + 1) / 6)
                                                                                    : std::sqrt((nd + 1) / 3);
            return assemble(n, std::move(eta), std::move(terms), sigma, 0.0);
        }
        case StatisticKind::inversions: {
            Matrix eta(n), vt(n);
            for (int i = 0; i < n; ++i)
                for (int k = 0; k < n; ++k) eta(i, k) = -(2.0 * (i + 1) - nd - 1) * (2.0 * (k + 1) - nd - 1) / (2 * nd);
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) vt(k, l) = (k > l ? 1.0 : 0.0) - (nd - 1 + 2.0 * (k - l)) / (2 * nd);
            std::vector<SeparableTerm> terms{{strict_upper(n), vt}, {upper_centering(n), vt}};
            const double sigma = std::sqrt(nd * (nd - 1) * (2 * nd + 5) / 72);
            return assemble(n, std::move(eta), std::move(terms), sigma, (nd - 1) * (nd * nd - 1) / (4 * nd));
        }
        case StatisticKind::mww: {
            const double n1 = spec.n1, n2 = spec.n2;
            Matrix eta(n), pt(n), vt(n);
            for (int i = 0; i < n; ++i)
                for (int k = 0; k < n; ++k) {
                    const double K = k + 1;
                    eta(i, k) = i < spec.n1 ? n2 * (nd - 2 * K + 1) / (2 * nd) : n1 * (2 * K - nd - 1) / (2 * nd);
                }
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    pt(i, j) = ((i < spec.n1 ? 1.0 : 0.0) - n1 / nd) * ((j >= spec.n1 ? 1.0 : 0.0) - n2 / nd);
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) vt(k, l) = (k < l ? 1.0 : 0.0) - (nd - 1 + 2.0 * (l - k)) / (2 * nd);
            std::vector<SeparableTerm> terms{{pt, vt}};
            const double sigma = std::sqrt(n1 * n2 * (nd + 1) / 12);
            return assemble(n, std::move(eta), std::move(terms), sigma, n1 * n2 * (nd * nd - 1) / (2 * nd * nd));
        }
        case StatisticKind::chatterjee_oscillation: {
            const Matrix a = chatterjee_a(n);
            Matrix p(n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) p(i, j) = (j == succ(i, n) ? 1.0 : 0.0) - 1.0 / nd;
            NormalizedDips d;
            d.n = n;
            d.a = Matrix(n);
            d.a_is_zero = true;
            d.sigma = 1.0;
            d.mean_shift = trace(a) / (nd * (nd - 1));
            d.b = SeparableArray4(n, {{p, a}});
            return d;
        }
    }
    throw std::logic_error("unhandled statistic");
}

double kernel_statistic(const StatisticSpec& spec, const Permutation& perm) {
    spec.validate();
    if (perm.size() != spec.n) throw std::invalid_argument("permutation length does not match spec.n");
    const int n = spec.n;
    switch (spec.kind) {
        case StatisticKind::descents: return 2.0 * static_cast<double>(descents(perm.inverse())) - (n - 1);
        case StatisticKind::inversions: return static_cast<double>(inversions(perm));
        case StatisticKind::mww: return static_cast<double>(mww_count(perm, spec.n1, spec.n2));
        case StatisticKind::chatterjee_oscillation: {
            const Matrix a = chatterjee_a(n);
            double t = 0.0;
            for (int i = 0; i < n; ++i) t += a(perm[i], perm[succ(i, n)]);
            return t + trace(a) / (n - 1);
        }
    }
    return 0.0;
}

ClosedFormCheck closed_form_check(const StatisticSpec& spec, int max_enumerate, int samples, std::uint64_t seed) {
    const Kernel4 kernel = build_kernel(spec);
    const NormalizedDips generic = normalize(kernel);
    const NormalizedDips closed = closed_form_ab(spec);
    const int n = spec.n;
    const DenseArray4 gb = generic.b.to_dense(), cb = closed.b.to_dense();

    double xy = 0.0, yy = 0.0;
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            xy += generic.a(i, k) * closed.a(i, k);
            yy += closed.a(i, k) * closed.a(i, k);
        }
    for (std::size_t t = 0; t < gb.data().size(); ++t) {
        xy += gb.data()[t] * cb.data()[t];
        yy += cb.data()[t] * cb.data()[t];
    }
    ClosedFormCheck r;
    r.scale = yy > 0 ? xy / yy : 0.0;
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
            r.max_deviation = std::max(r.max_deviation, std::abs(generic.a(i, k) - r.scale * closed.a(i, k)));
    for (std::size_t t = 0; t < gb.data().size(); ++t)
        r.max_deviation = std::max(r.max_deviation, std::abs(gb.data()[t] - r.scale * cb.data()[t]));

    auto check = [&](const Permutation& p) {
        const double raw = kernel_statistic(spec, p);
        double e = std::abs(raw - (closed.sigma * evaluate(closed, p) + closed.mean_shift));
        e = std::max(e, reconstruct_check(kernel, generic, p));
        r.max_reconstruct = std::max(r.max_reconstruct, e);
        ++r.permutations;
    };
    if (n <= max_enumerate) {
        for_each_permutation(n, check);
    } else {
        Engine rng = substream(seed, 0);
        std::vector<int> v(static_cast<std::size_t>(n));
        for (int s = 0; s < samples; ++s) {
            for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i;
            shuffle_forward(v, rng);
            check(Permutation(v));
        }
    }
    return r;
}

DescentScaleCandidates descent_scale_candidates(int n) {
    const double m = n;
    return {std::sqrt((m + 1) / 6), std::sqrt((m + 1) / 12), 2 * (m + 1) / 3, 2 * (m + 1) / (3 * m),
            std::sqrt(6 / (m + 1))};
}

}  // namespace dips
