#include "vgp/rng.hpp"

#include <cmath>
#include <numbers>

namespace vgp {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void round_once(std::array<std::uint32_t, 4>& x, const std::array<std::uint32_t, 2>& k) {
    const std::uint64_t p0 = std::uint64_t(kMul0) * x[0];
    const std::uint64_t p1 = std::uint64_t(kMul1) * x[2];
    const std::uint32_t hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
    const std::uint32_t hi1 = std::uint32_t(p1 >> 32), lo1 = std::uint32_t(p1);
    x = {hi1 ^ x[1] ^ k[0], lo1, hi0 ^ x[3] ^ k[1], lo0};
}

// (x >> 11) + 1 scaled by 2^-53: value in (0, 1], log() stays finite.
inline double to_unit_open_closed(std::uint64_t x) {
    return static_cast<double>((x >> 11) + 1) * 0x1.0p-53;
}

// (x >> 11) scaled by 2^-53: value in [0, 1).
inline double to_unit_closed_open(std::uint64_t x) {
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

} // namespace

std::array<std::uint32_t, 4> philox4x32(const std::array<std::uint32_t, 4>& counter,
                                         const std::array<std::uint32_t, 2>& key) {
    std::array<std::uint32_t, 4> x = counter;
    std::array<std::uint32_t, 2> k = key;
    for (int r = 0; r < 10; ++r) {
        round_once(x, k);
        k[0] += kWeyl0;
        k[1] += kWeyl1;
    }
    return x;
}

std::array<std::uint64_t, 2> RandomStream::block(std::uint64_t index) const {
    const std::array<std::uint32_t, 4> ctr = {
        std::uint32_t(index), std::uint32_t(index >> 32),
        std::uint32_t(seed_.stream), std::uint32_t(seed_.stream >> 32)};
    const std::array<std::uint32_t, 2> key = {
        std::uint32_t(seed_.master), std::uint32_t(seed_.master >> 32)};
    const auto out = philox4x32(ctr, key);
    return {(std::uint64_t(out[1]) << 32) | out[0],
            (std::uint64_t(out[3]) << 32) | out[2]};
}

std::uint64_t RandomStream::bits(std::uint64_t d) const {
    const auto b = block(d >> 1);
    return b[d & 1];
}

double RandomStream::uniform(std::uint64_t d) const {
    const auto b = block(d >> 1);
    double u = to_unit_closed_open(b[d & 1]);
    if (u <= 0.0) u = 0x1.0p-53;
    return u;
}

double RandomStream::normal(std::uint64_t d) const {
    const auto b = block(d >> 1);
    const double u1 = to_unit_open_closed(b[0]);
    const double u2 = to_unit_closed_open(b[1]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    return (d & 1) ? r * std::sin(theta) : r * std::cos(theta);
}

} // namespace vgp
