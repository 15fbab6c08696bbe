#pragma once
// Philox4x32-10 counter-based generator (Salmon et al., SC'11) and Gaussian draws.
//
// Output depends only on (key, counter), so any symbol of any stream can be
// generated independently of the others.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace cvqn {

class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr int kRounds = 10;

    static constexpr Counter generate(Counter ctr, Key key) {
        for (int r = 0; r < kRounds; ++r) {
            if (r > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            ctr = round(ctr, key);
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static constexpr Counter round(const Counter& c, const Key& k) {
        const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
        const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
        return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
};

/// Two independent standard normals for (seed, index, stream), via Box-Muller on
/// two 53-bit uniforms taken from one Philox block.
inline std::array<double, 2> gaussian_pair(std::uint64_t seed, std::uint64_t index, std::uint32_t stream) {
    const Philox4x32::Counter ctr{static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), stream,
                                  0u};
    const Philox4x32::Key key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    const auto w = Philox4x32::generate(ctr, key);

    constexpr double kTwoPow53 = 9007199254740992.0;
    const auto bits53 = [](std::uint32_t hi, std::uint32_t lo) {
        return ((std::uint64_t{hi} << 32) | lo) >> 11;
    };
    // u1 in (0, 1] keeps the logarithm finite.
    const double u1 = (static_cast<double>(bits53(w[0], w[1])) + 1.0) / kTwoPow53;
    const double u2 = static_cast<double>(bits53(w[2], w[3])) / kTwoPow53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(theta), r * std::sin(theta)};
}

}  // namespace cvqn
