#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace gou {

// Philox4x64-10 counter-based generator. A stream is identified by a
// 128-bit key (seed, stream id); outputs are pure functions of
// (key, counter), so any substream can be regenerated independently and
// in parallel. Matches numpy.random.Philox output for the same
// key/counter, which the tests pin down with frozen vectors.
struct PhiloxKey {
    std::uint64_t k0 = 0;
    std::uint64_t k1 = 0;
};

namespace philox {
inline constexpr std::uint64_t kM0 = 0xD2E7470EE14C6C93ULL;
inline constexpr std::uint64_t kM1 = 0xCA5A826395121157ULL;
inline constexpr std::uint64_t kW0 = 0x9E3779B97F4A7C15ULL;
inline constexpr std::uint64_t kW1 = 0xBB67AE8584CAA73BULL;
}  // namespace philox

struct PhiloxCounter {
    std::array<std::uint64_t, 4> c{0, 0, 0, 0};
    void increment() {
        if (++c[0] != 0) return;
        if (++c[1] != 0) return;
        if (++c[2] != 0) return;
        ++c[3];
    }
};

std::array<std::uint64_t, 4> philox4x64(PhiloxCounter ctr, PhiloxKey key);

// Buffered sequential view of one Philox stream.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream) : key_{seed, stream} {}

    std::uint64_t next_u64() {
        if (pos_ == 4) refill();
        return block_[pos_++];
    }

    // Uniform draw in the open interval (0,1); 53 usable bits.
    double next_unit() { return to_unit(next_u64()); }

    static double to_unit(std::uint64_t u) {
        return (static_cast<double>(u >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    void refill() {
        block_ = philox4x64(ctr_, key_);
        ctr_.increment();
        pos_ = 0;
    }

    PhiloxKey key_;
    PhiloxCounter ctr_;
    std::array<std::uint64_t, 4> block_{};
    int pos_ = 4;
};

// Stable mix for deriving stream ids from structured indices
// (scenario, N, replication, ...). splitmix64 finalizer chain.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t derive_stream(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

}  // namespace gou
