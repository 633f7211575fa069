#pragma once

// Seeding and uniform draws with a fixed, implementation-independent bit
// recipe. The standard distributions (uniform_real_distribution and friends)
// are not specified bit-for-bit, so everything here goes straight from the
// engine's 64-bit output.

#include <cstdint>
#include <limits>
#include <random>

namespace semiband {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive well-separated seeds from small ints.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Engine for stream `stream` of seed `seed`. Distinct (seed, stream) pairs
/// give independent-looking engines; the same pair always gives the same one.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0)
{
    std::seed_seq seq{
        static_cast<std::uint32_t>(splitmix64(seed)),
        static_cast<std::uint32_t>(splitmix64(seed) >> 32),
        static_cast<std::uint32_t>(splitmix64(stream ^ 0x5bd1e995ULL)),
        static_cast<std::uint32_t>(splitmix64(stream ^ 0x5bd1e995ULL) >> 32)};
    return Rng(seq);
}

/// Uniform on the open interval (0,1): 53 random mantissa bits, with an
/// exact zero replaced by the smallest positive normal double.
template <class Engine>
double uniform_open01(Engine& rng)
{
    static_assert(Engine::max() - Engine::min() == std::numeric_limits<std::uint64_t>::max(),
                  "uniform_open01 needs a full 64-bit engine");
    // The shifted value fits in 53 bits, so the signed conversion is exact.
    const double u = static_cast<double>(static_cast<std::int64_t>(rng() >> 11)) * 0x1.0p-53;
    return u > 0.0 ? u : std::numeric_limits<double>::min();
}

/// Uniform integer on {0, ..., n-1} (Lemire's multiply-shift with rejection).
template <class Engine>
std::uint64_t uniform_index(Engine& rng, std::uint64_t n)
{
    if (n <= 1)
        return 0;
    unsigned __int128 product = static_cast<unsigned __int128>(rng()) * n;
    auto low = static_cast<std::uint64_t>(product);
    if (low < n) {
        const std::uint64_t threshold = (0 - n) % n;
        while (low < threshold) {
            product = static_cast<unsigned __int128>(rng()) * n;
            low = static_cast<std::uint64_t>(product);
        }
    }
    return static_cast<std::uint64_t>(product >> 64);
}

} // namespace semiband
