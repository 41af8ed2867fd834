#pragma once

#include <cstdint>
#include <vector>

namespace cyto {

// Deterministic PRNG (splitmix64). The standard <random> distributions are
// implementation-defined, which would break byte-identical reruns across
// toolchains, so every randomized operation in the library draws from this.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Unbiased integer in [0, bound).
    std::uint64_t next_below(std::uint64_t bound) {
        std::uint64_t threshold = (0ULL - bound) % bound;
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    // Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    float next_float() {
        return static_cast<float>(next_u64() >> 40) * 0x1.0p-24f;
    }

    // Uniform in [lo, hi).
    float next_float(float lo, float hi) {
        return lo + (hi - lo) * next_float();
    }

    // Fisher-Yates; stable given the seed regardless of platform.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

// Derives an independent stream from a base seed and a stream index, so that
// e.g. per-class or per-epoch draws do not interleave.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    Rng mixer(base ^ (0x6a09e667f3bcc909ULL + stream * 0x9e3779b97f4a7c15ULL));
    return mixer.next_u64();
}

} // namespace cyto
