#pragma once

#include <array>
#include <cstdint>

namespace vgp {

/// Identifies one independent random stream. Together with a draw counter it
/// fully determines every variate, so generation order and thread layout can
/// never change results.
struct Seed {
    std::uint64_t master = 0;
    std::uint64_t stream = 0;

    /// Stream for path p of an ensemble seeded with this Seed.
    Seed for_path(std::uint64_t p) const { return Seed{master, stream ^ p}; }
    /// Disjoint derived stream for an auxiliary purpose (component index,
    /// trial loops, simplex sampling).
    Seed derived(std::uint64_t tag) const {
        return Seed{master, stream + (tag + 1) * 0x9E3779B97F4A7C15ULL};
    }
};

/// Philox 4x32-10 keyed counter block cipher (the Random123 generator).
std::array<std::uint32_t, 4> philox4x32(const std::array<std::uint32_t, 4>& counter,
                                         const std::array<std::uint32_t, 2>& key);

/// Stateless stream of standard normal / uniform variates: draw d is a pure
/// function of (seed.master, seed.stream, d).
class RandomStream {
public:
    explicit RandomStream(Seed seed) : seed_(seed) {}

    /// d-th N(0,1) variate (Box-Muller on a Philox block).
    double normal(std::uint64_t d) const;
    /// d-th uniform variate in (0,1).
    double uniform(std::uint64_t d) const;
    /// d-th uniform 64-bit word.
    std::uint64_t bits(std::uint64_t d) const;

private:
    std::array<std::uint64_t, 2> block(std::uint64_t index) const;
    Seed seed_;
};

} // namespace vgp
