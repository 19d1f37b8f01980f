#include "dips/assignment.hpp"

#include <limits>
#include <stdexcept>

namespace dips {

double max_weight_assignment(const std::vector<double>& w, int m) {
    if (m < 0 || w.size() != static_cast<std::size_t>(m) * static_cast<std::size_t>(m)) {
        throw std::invalid_argument("assignment matrix must be m x m");
    }
    if (m == 0) return 0.0;
    // Shortest augmenting path form on costs -w, 1-based potentials.
    const double inf = std::numeric_limits<double>::infinity();
    const auto M = static_cast<std::size_t>(m);
    auto cost = [&](std::size_t r, std::size_t c) { return -w[(r - 1) * M + (c - 1)]; };
    std::vector<double> u(M + 1, 0.0), v(M + 1, 0.0);
    std::vector<std::size_t> match(M + 1, 0), way(M + 1, 0);
    for (std::size_t r = 1; r <= M; ++r) {
        match[0] = r;
        std::size_t c0 = 0;
        std::vector<double> minv(M + 1, inf);
        std::vector<char> used(M + 1, 0);
        do {
            used[c0] = 1;
            const std::size_t r0 = match[c0];
            double d = inf;
            std::size_t c1 = 0;
            for (std::size_t c = 1; c <= M; ++c) {
                if (used[c]) continue;
                const double cur = cost(r0, c) - u[r0] - v[c];
                if (cur < minv[c]) {
                    minv[c] = cur;
                    way[c] = c0;
                }
                if (minv[c] < d) {
                    d = minv[c];
                    c1 = c;
                }
            }
            for (std::size_t c = 0; c <= M; ++c) {
                if (used[c]) {
                    u[match[c]] += d;
                    v[c] -= d;
                } else {
                    minv[c] -= d;
                }
            }
            c0 = c1;
        } while (match[c0] != 0);
        do {
            const std::size_t c1 = way[c0];
            match[c0] = match[c1];
            c0 = c1;
        } while (c0 != 0);
    }
    double total = 0.0;
    for (std::size_t c = 1; c <= M; ++c) total += w[(match[c] - 1) * M + (c - 1)];
    return total;
}

}  // namespace dips
