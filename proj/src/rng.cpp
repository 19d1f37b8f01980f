#include "dips/rng.hpp"

namespace dips {

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Xoshiro256pp::Xoshiro256pp(std::uint64_t seed) noexcept {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
}

Engine substream(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t h = seed;
    std::uint64_t key = splitmix64(h);
    h = key ^ stream;
    key = splitmix64(h);
    return Engine(key);
}

}  // namespace dips
