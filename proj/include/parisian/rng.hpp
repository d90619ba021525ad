#pragma once

// Philox 4x32-10 counter-based generator (Salmon, Moraes, Dror, Shaw 2011),
// keyed by a 64-bit seed. Each simulated path owns the substream addressed by
// its path index, so results do not depend on how paths are distributed over
// worker threads.

#include <array>
#include <cmath>
#include <cstdint>

namespace parisian {

namespace detail {

inline std::array<std::uint32_t, 4> philox4x32(std::uint64_t seed, std::uint64_t counter_hi,
                                               std::uint64_t counter_lo) {
    constexpr std::uint32_t kMul0 = 0xD2511F53u, kMul1 = 0xCD9E8D57u;
    constexpr std::uint32_t kWeyl0 = 0x9E3779B9u, kWeyl1 = 0xBB67AE85u;

    std::uint32_t c0 = std::uint32_t(counter_lo), c1 = std::uint32_t(counter_lo >> 32);
    std::uint32_t c2 = std::uint32_t(counter_hi), c3 = std::uint32_t(counter_hi >> 32);
    std::uint32_t k0 = std::uint32_t(seed), k1 = std::uint32_t(seed >> 32);

    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t(kMul0) * c0;
        const std::uint64_t p1 = std::uint64_t(kMul1) * c2;
        const std::uint32_t hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
        const std::uint32_t hi1 = std::uint32_t(p1 >> 32), lo1 = std::uint32_t(p1);
        const std::uint32_t n0 = hi1 ^ c1 ^ k0;
        const std::uint32_t n1 = lo1;
        const std::uint32_t n2 = hi0 ^ c3 ^ k1;
        const std::uint32_t n3 = lo0;
        c0 = n0;
        c1 = n1;
        c2 = n2;
        c3 = n3;
        k0 += kWeyl0;
        k1 += kWeyl1;
    }
    return {c0, c1, c2, c3};
}

}  // namespace detail

// Uniform(0,1) stream for one path. Every block of the counter yields two
// 53-bit uniforms; values are strictly inside (0,1).
class PathStream {
  public:
    PathStream(std::uint64_t seed, std::uint64_t path_index)
        : seed_(seed), path_(path_index) {}

    double uniform() {
        if (have_ == 0) refill();
        return buf_[--have_];
    }

    double exponential(double rate) { return -std::log(uniform()) / rate; }

  private:
    void refill() {
        const auto out = detail::philox4x32(seed_, path_, block_++);
        const std::uint64_t z0 = (std::uint64_t(out[0]) << 32) | out[1];
        const std::uint64_t z1 = (std::uint64_t(out[2]) << 32) | out[3];
        buf_[1] = (double(z0 >> 11) + 0.5) * 0x1.0p-53;
        buf_[0] = (double(z1 >> 11) + 0.5) * 0x1.0p-53;
        have_ = 2;
    }

    std::uint64_t seed_, path_, block_ = 0;
    double buf_[2] = {0.0, 0.0};
    int have_ = 0;
};

}  // namespace parisian
