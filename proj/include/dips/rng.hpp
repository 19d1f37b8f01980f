#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <utility>

namespace dips {

// xoshiro256++ (Blackman and Vigna), state filled by splitmix64.
class Xoshiro256pp {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256pp(std::uint64_t seed = 0) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        const std::uint64_t r = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return r;
    }

    bool operator==(const Xoshiro256pp&) const = default;

private:
    static std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

using Engine = Xoshiro256pp;

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

// Stream `stream` of the root seed; the same (seed, stream) always replays.
Engine substream(std::uint64_t seed, std::uint64_t stream);

// Uniform integer in [0, range) by Lemire's multiply-and-reject.
inline std::uint64_t bounded(Engine& rng, std::uint64_t range) {
    __uint128_t m = static_cast<__uint128_t>(rng()) * range;
    auto low = static_cast<std::uint64_t>(m);
    if (low < range) {
        const std::uint64_t threshold = (0 - range) % range;
        while (low < threshold) {
            m = static_cast<__uint128_t>(rng()) * range;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

// Uniform integer in [lo, hi].
inline int uniform_int(Engine& rng, int lo, int hi) {
    return lo + static_cast<int>(bounded(rng, static_cast<std::uint64_t>(hi - lo) + 1));
}

// Fisher-Yates: position i exchanged with a uniform j in {i..n-1}.
inline void shuffle_forward(std::span<int> v, Engine& rng) {
    const int n = static_cast<int>(v.size());
    for (int i = 0; i + 1 < n; ++i) {
        const int j = uniform_int(rng, i, n - 1);
        std::swap(v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(j)]);
    }
}

}  // namespace dips
