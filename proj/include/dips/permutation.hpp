#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace dips {

// Bijection of {0..n-1}. The library indexes positions and values from 0;
// text formats (CLI, CSV, JSON) use the usual 1-based notation.
class Permutation {
public:
    Permutation() = default;

    // Throws std::invalid_argument unless values is a permutation of 0..n-1.
    explicit Permutation(std::vector<int> values);

    static Permutation identity(int n);
    static Permutation from_one_based(std::span<const int> values);
    // Parses "2,1,3" or "2 1 3" (1-based).
    static Permutation parse(const std::string& text);

    int size() const noexcept { return static_cast<int>(map_.size()); }
    int operator[](int i) const noexcept { return map_[static_cast<std::size_t>(i)]; }
    std::span<const int> values() const noexcept { return map_; }

    Permutation inverse() const;
    // (this ∘ other)(i) = this(other(i))
    Permutation compose(const Permutation& other) const;
    // Exchanges the values at positions i and j.
    Permutation swapped(int i, int j) const;

    std::vector<int> one_based() const;
    std::string to_string() const;

    bool operator==(const Permutation&) const = default;
    auto operator<=>(const Permutation&) const = default;

private:
    std::vector<int> map_;
};

bool is_permutation(std::span<const int> values);

// Calls fn on every permutation of {0..n-1} in lexicographic order.
void for_each_permutation(int n, const std::function<void(const Permutation&)>& fn);

// Lexicographic rank in [0, n!) for n <= 20.
std::size_t lex_rank(const Permutation& p);

std::size_t factorial(int n);

}  // namespace dips
