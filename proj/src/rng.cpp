#include "gou/rng.hpp"

namespace gou {

namespace {

using philox::kM0;
using philox::kM1;
using philox::kW0;
using philox::kW1;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
    unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
    hi = static_cast<std::uint64_t>(p >> 64);
    lo = static_cast<std::uint64_t>(p);
}

inline void round_once(std::array<std::uint64_t, 4>& c, const PhiloxKey& k) {
    std::uint64_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, c[0], hi0, lo0);
    mulhilo(kM1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k.k0, lo1, hi0 ^ c[3] ^ k.k1, lo0};
}

}  // namespace

std::array<std::uint64_t, 4> philox4x64(PhiloxCounter ctr, PhiloxKey key) {
    std::array<std::uint64_t, 4> c = ctr.c;
    for (int r = 0; r < 10; ++r) {
        if (r > 0) {
            key.k0 += kW0;
            key.k1 += kW1;
        }
        round_once(c, key);
    }
    return c;
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_stream(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix64(mix64(mix64(a) ^ b) ^ c);
}

}  // namespace gou
