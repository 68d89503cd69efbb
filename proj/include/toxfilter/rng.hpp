#pragma once

#include <cstdint>
#include <string_view>

namespace toxfilter {

/// 64-bit FNV-1a, used to derive per-variant RNG streams from string ids.
inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 14695981039346656037ull) {
    std::uint64_t h = seed;
    for (char c : data) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

/// SplitMix64: tiny, fast and fully portable, so identical seeds give
/// identical attack variants on every platform.  std::mt19937 would work but
/// its distribution adaptors are implementation-defined, which would break
/// byte-for-byte reproducibility of generated datasets.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double uniform() noexcept {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n); n must be positive.
    std::uint32_t below(std::uint32_t n) noexcept {
        return static_cast<std::uint32_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }

private:
    std::uint64_t state_;
};

/// Seed for the RNG stream of one attack variant.  Mixing the parent id and
/// variant index into the top-level seed makes every variant independent of
/// generation order, so datasets can be produced in parallel or in slices
/// and still come out identical.
inline std::uint64_t derive_stream_seed(std::uint64_t seed, std::string_view parent_id,
                                        std::uint64_t variant_index) {
    std::uint64_t h = fnv1a64(parent_id);
    for (int i = 0; i < 8; ++i) {
        h ^= (variant_index >> (8 * i)) & 0xff;
        h *= 1099511628211ull;
    }
    return seed ^ h;
}

} // namespace toxfilter
