#include "dips/permutation.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace dips {

bool is_permutation(std::span<const int> values) {
    std::vector<char> seen(values.size(), 0);
    for (int v : values) {
        if (v < 0 || static_cast<std::size_t>(v) >= values.size() || seen[static_cast<std::size_t>(v)]) {
            return false;
        }
        seen[static_cast<std::size_t>(v)] = 1;
    }
    return true;
}

Permutation::Permutation(std::vector<int> values) : map_(std::move(values)) {
    if (!is_permutation(map_)) {
        throw std::invalid_argument("not a permutation of 0..n-1");
    }
}

Permutation Permutation::identity(int n) {
    if (n < 0) throw std::invalid_argument("negative permutation size");
    std::vector<int> v(static_cast<std::size_t>(n));
    std::iota(v.begin(), v.end(), 0);
    return Permutation(std::move(v));
}

Permutation Permutation::from_one_based(std::span<const int> values) {
    std::vector<int> v(values.begin(), values.end());
    for (int& x : v) --x;
    if (!is_permutation(v)) {
        throw std::invalid_argument("not a permutation of 1..n");
    }
    return Permutation(std::move(v));
}

Permutation Permutation::parse(const std::string& text) {
    std::string cleaned = text;
    std::replace_if(cleaned.begin(), cleaned.end(),
                    [](char c) { return c == ',' || c == '[' || c == ']' || c == ';'; }, ' ');
    std::istringstream in(cleaned);
    std::vector<int> v;
    std::string tok;
    while (in >> tok) {
        std::size_t used = 0;
        int x = 0;
        try {
            x = std::stoi(tok, &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("bad permutation entry '" + tok + "'");
        }
        if (used != tok.size()) throw std::invalid_argument("bad permutation entry '" + tok + "'");
        v.push_back(x);
    }
    if (v.empty()) throw std::invalid_argument("empty permutation");
    return from_one_based(v);
}

Permutation Permutation::inverse() const {
    std::vector<int> inv(map_.size());
    for (std::size_t i = 0; i < map_.size(); ++i) inv[static_cast<std::size_t>(map_[i])] = static_cast<int>(i);
    Permutation p;
    p.map_ = std::move(inv);
    return p;
}

Permutation Permutation::compose(const Permutation& other) const {
    if (other.size() != size()) throw std::invalid_argument("size mismatch in compose");
    Permutation p;
    p.map_.resize(map_.size());
    for (std::size_t i = 0; i < map_.size(); ++i) p.map_[i] = map_[static_cast<std::size_t>(other.map_[i])];
    return p;
}

Permutation Permutation::swapped(int i, int j) const {
    if (i < 0 || j < 0 || i >= size() || j >= size()) throw std::out_of_range("swap index out of range");
    Permutation p = *this;
    std::swap(p.map_[static_cast<std::size_t>(i)], p.map_[static_cast<std::size_t>(j)]);
    return p;
}

std::vector<int> Permutation::one_based() const {
    std::vector<int> v = map_;
    for (int& x : v) ++x;
    return v;
}

std::string Permutation::to_string() const {
    std::string s = "[";
    for (std::size_t i = 0; i < map_.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(map_[i] + 1);
    }
    return s + "]";
}

void for_each_permutation(int n, const std::function<void(const Permutation&)>& fn) {
    std::vector<int> v(static_cast<std::size_t>(n));
    std::iota(v.begin(), v.end(), 0);
    do {
        fn(Permutation(v));
    } while (std::next_permutation(v.begin(), v.end()));
}

std::size_t factorial(int n) {
    if (n < 0 || n > 20) throw std::out_of_range("factorial argument out of range");
    std::size_t f = 1;
    for (int k = 2; k <= n; ++k) f *= static_cast<std::size_t>(k);
    return f;
}

std::size_t lex_rank(const Permutation& p) {
    const int n = p.size();
    std::size_t rank = 0;
    for (int i = 0; i < n; ++i) {
        int smaller = 0;
        for (int j = i + 1; j < n; ++j) smaller += p[j] < p[i];
        rank += static_cast<std::size_t>(smaller) * factorial(n - 1 - i);
    }
    return rank;
}

}  // namespace dips
