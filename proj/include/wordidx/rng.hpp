#pragma once
// rng.hpp - portable seeded generator: xoshiro256** state seeded by four
// successive splitmix64 outputs. Bounded draws use rejection sampling so the
// stream of values is identical on every platform and standard library.

#include "wordidx/word.hpp"

#include <cstdint>
#include <limits>
#include <vector>

namespace wordidx {

inline std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) noexcept {
        for (auto& s : s_) s = splitmix64(seed);
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, bound); bound must be nonzero.
    std::uint64_t below(std::uint64_t bound) noexcept {
        const std::uint64_t limit = max() - max() % bound;
        std::uint64_t v;
        do {
            v = (*this)();
        } while (v >= limit);
        return v % bound;
    }

    // Uniform in [lo, hi].
    std::uint64_t between(std::uint64_t lo, std::uint64_t hi) noexcept {
        if (hi - lo == max()) return (*this)();
        return lo + below(hi - lo + 1);
    }

    bool coin() noexcept { return (*this)() >> 63; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

    std::uint64_t s_[4];
};

// Uniform random word of the given width.
inline Word random_word(Rng& rng, unsigned width) {
    std::vector<std::uint8_t> bytes(width / 8);
    for (std::size_t i = 0; i < bytes.size(); i += 8) {
        std::uint64_t v = rng();
        for (std::size_t j = 0; j < 8 && i + j < bytes.size(); ++j) bytes[i + j] = std::uint8_t(v >> (8 * j));
    }
    return Word::from_bytes(width, bytes);
}

} // namespace wordidx
