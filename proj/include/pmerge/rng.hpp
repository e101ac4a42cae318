#pragma once
// Counter-based random number generation (Philox 4x32-10). Each Monte Carlo
// replication draws from its own stream keyed by (seed, replication index,
// stream role), so results are identical regardless of how replications are
// distributed over threads.

#include <array>
#include <cstdint>

#include "pmerge/stats.hpp"

namespace pmerge::rng {

struct PhiloxBlock {
    std::array<std::uint32_t, 4> v;
};

// One application of the Philox 4x32 round function, 10 rounds.
inline PhiloxBlock philox4x32(std::array<std::uint32_t, 4> ctr,
                              std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t M0 = 0xD2511F53u;
    constexpr std::uint32_t M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u;
    constexpr std::uint32_t W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * ctr[2];
        const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
        const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += W0;
        key[1] += W1;
    }
    return PhiloxBlock{ctr};
}

// Stream of uniforms/normals for one (seed, replication, role) triple.
class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t replication, std::uint32_t role)
        : key_{static_cast<std::uint32_t>(seed),
               static_cast<std::uint32_t>(seed >> 32)},
          base_{static_cast<std::uint32_t>(replication),
                static_cast<std::uint32_t>(replication >> 32), role} {}

    std::uint32_t next_u32() {
        if (pos_ == 4) refill();
        return block_.v[pos_++];
    }

    // Uniform on (0, 1), 53-bit resolution, never exactly 0 or 1.
    double uniform() {
        const std::uint64_t hi = next_u32();
        const std::uint64_t lo = next_u32();
        const std::uint64_t bits = ((hi << 32) | lo) >> 11;
        return (static_cast<double>(bits) + 0.5) * 0x1p-53;
    }

    double normal() { return stats::norm_quantile(uniform()); }

    // Uniform integer in [0, n); n must be positive.
    std::uint64_t below(std::uint64_t n) {
        // 64-bit multiply-shift; bias is negligible for the n used here
        const std::uint64_t hi = next_u32();
        const std::uint64_t lo = next_u32();
        const std::uint64_t x = (hi << 32) | lo;
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(x) * n) >> 64);
    }

private:
    void refill() {
        const PhiloxBlock b = philox4x32(
            {base_[0], base_[1], base_[2], counter_}, key_);
        block_ = b;
        ++counter_;
        pos_ = 0;
    }

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 3> base_;
    std::uint32_t counter_ = 0;
    PhiloxBlock block_{};
    int pos_ = 4;
};

}  // namespace pmerge::rng
