#ifndef CACHEMISS_RNG_HPP
#define CACHEMISS_RNG_HPP

#include <cstdint>

namespace cachemiss {

/* SplitMix64: 64-bit seedable, splittable, trivially reproducible.
 * Output sequences are fully determined by the seed, independent of
 * platform or standard-library implementation. */
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

    std::uint64_t operator()() { return next_u64(); }

    std::uint64_t next_u64()
    {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /* Uniform on [0, 1) with 53 random bits. */
    double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

    /* Uniform on {0, ..., n-1}, bias-free (Lemire with rejection). */
    std::uint32_t below(std::uint32_t n)
    {
        std::uint64_t x = next_u64() >> 32;
        std::uint64_t m = x * n;
        std::uint32_t l = static_cast<std::uint32_t>(m);
        if (l < n) {
            std::uint32_t t = (0u - n) % n;
            while (l < t) {
                x = next_u64() >> 32;
                m = x * n;
                l = static_cast<std::uint32_t>(m);
            }
        }
        return static_cast<std::uint32_t>(m >> 32);
    }

    /* Derive an independent stream (used for replication seeding). */
    SplitMix64 split()
    {
        std::uint64_t s = next_u64();
        return SplitMix64(s);
    }

    static constexpr std::uint64_t min() { return 0; }
    static constexpr std::uint64_t max() { return ~0ULL; }

private:
    std::uint64_t state_;
};

} // namespace cachemiss

#endif
