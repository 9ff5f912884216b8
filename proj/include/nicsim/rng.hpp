#ifndef NICSIM_RNG_HPP
#define NICSIM_RNG_HPP

#include <cstdint>
#include <string_view>
#include <vector>

namespace nicsim {

// Portable deterministic generator (splitmix64). Identical seeds produce
// identical streams on every platform; std::uniform_* distributions are
// deliberately avoided since the standard does not pin their algorithms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    // Derives an independent stream from (seed, entity-id). Adding entities
    // never perturbs the streams of existing ones.
    static Rng split(std::uint64_t seed, std::string_view entity) {
        std::uint64_t h = 1469598103934665603ULL; // FNV offset basis
        for (char c : entity) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ULL;
        }
        return Rng(mix(seed ^ mix(h)));
    }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix(state_);
    }

    // Uniform double in [0, 1), 53 bits of precision.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Unbiased integer in [0, bound) via rejection.
    std::uint64_t next_below(std::uint64_t bound) {
        if (bound == 0) return 0;
        std::uint64_t threshold = (0ULL - bound) % bound;
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    // Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    std::uint64_t state_;
};

} // namespace nicsim

#endif
