#include <immintrin.h>

#include <algorithm>
#include <array>
#include <cstring>

#include "gou/rng.hpp"
#include "kernels_impl.hpp"
#include "kernels_math.hpp"

// AVX2 variants of the Monte Carlo kernels. Four Philox lanes run in
// parallel; every floating-point operation mirrors the scalar reference
// in kernels_math.hpp in the same order, so outputs are bitwise equal.
namespace gou::kernels {

namespace {

namespace kd = detail;

struct MulConst {
    __m256i lo;
    __m256i hi;
};

inline MulConst mul_const(std::uint64_t m) {
    return {_mm256_set1_epi64x(static_cast<long long>(m & 0xFFFFFFFFULL)),
            _mm256_set1_epi64x(static_cast<long long>(m >> 32))};
}

inline void mulhilo(const MulConst& m, __m256i b, __m256i& hi, __m256i& lo) {
    const __m256i mask = _mm256_set1_epi64x(0xFFFFFFFFLL);
    const __m256i b_hi = _mm256_srli_epi64(b, 32);
    const __m256i p00 = _mm256_mul_epu32(m.lo, b);
    const __m256i p01 = _mm256_mul_epu32(m.lo, b_hi);
    const __m256i p10 = _mm256_mul_epu32(m.hi, b);
    const __m256i p11 = _mm256_mul_epu32(m.hi, b_hi);
    const __m256i mid =
        _mm256_add_epi64(_mm256_srli_epi64(p00, 32),
                         _mm256_add_epi64(_mm256_and_si256(p01, mask), _mm256_and_si256(p10, mask)));
    hi = _mm256_add_epi64(
        p11, _mm256_add_epi64(_mm256_srli_epi64(p01, 32),
                              _mm256_add_epi64(_mm256_srli_epi64(p10, 32), _mm256_srli_epi64(mid, 32))));
    lo = _mm256_or_si256(_mm256_slli_epi64(mid, 32), _mm256_and_si256(p00, mask));
}

// One Philox4x64-10 block per lane; counter words c1..c3 are zero
// (streams never generate 2^64 blocks).
inline void philox_vec(__m256i c0, __m256i k0, __m256i k1, __m256i& o0, __m256i& o1,
                       __m256i& o2, __m256i& o3) {
    const MulConst m0 = mul_const(philox::kM0);
    const MulConst m1 = mul_const(philox::kM1);
    const __m256i w0 = _mm256_set1_epi64x(static_cast<long long>(philox::kW0));
    const __m256i w1 = _mm256_set1_epi64x(static_cast<long long>(philox::kW1));
    __m256i c1 = _mm256_setzero_si256();
    __m256i c2 = _mm256_setzero_si256();
    __m256i c3 = _mm256_setzero_si256();
    for (int r = 0; r < 10; ++r) {
        if (r > 0) {
            k0 = _mm256_add_epi64(k0, w0);
            k1 = _mm256_add_epi64(k1, w1);
        }
        __m256i hi0, lo0, hi1, lo1;
        mulhilo(m0, c0, hi0, lo0);
        mulhilo(m1, c2, hi1, lo1);
        const __m256i n0 = _mm256_xor_si256(_mm256_xor_si256(hi1, c1), k0);
        const __m256i n2 = _mm256_xor_si256(_mm256_xor_si256(hi0, c3), k1);
        c0 = n0;
        c1 = lo1;
        c2 = n2;
        c3 = lo0;
    }
    o0 = c0;
    o1 = c1;
    o2 = c2;
    o3 = c3;
}

// Exact u64 -> double for values below 2^53.
inline __m256d u64_to_double(__m256i x) {
    const __m256i magic_i = _mm256_set1_epi64x(0x4330000000000000LL);  // 2^52
    const __m256d magic_d = _mm256_castsi256_pd(magic_i);
    const __m256i mask = _mm256_set1_epi64x(0xFFFFFFFFLL);
    const __m256i lo = _mm256_and_si256(x, mask);
    const __m256i hi = _mm256_srli_epi64(x, 32);
    const __m256d dlo = _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(lo, magic_i)), magic_d);
    const __m256d dhi = _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(hi, magic_i)), magic_d);
    return _mm256_fmadd_pd(dhi, _mm256_set1_pd(4294967296.0), dlo);
}

inline __m256d to_unit(__m256i u) {
    const __m256d d = u64_to_double(_mm256_srli_epi64(u, 11));
    return _mm256_mul_pd(_mm256_add_pd(d, _mm256_set1_pd(0.5)), _mm256_set1_pd(0x1.0p-53));
}

inline __m256d log_unit(__m256d x) {
    const __m256i bits = _mm256_castpd_si256(x);
    const __m256d e_biased = u64_to_double(_mm256_srli_epi64(bits, 52));
    __m256d e = _mm256_sub_pd(e_biased, _mm256_set1_pd(1023.0));
    __m256d m = _mm256_castsi256_pd(
        _mm256_or_si256(_mm256_and_si256(bits, _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL)),
                        _mm256_set1_epi64x(0x3FF0000000000000LL)));
    const __m256d gt = _mm256_cmp_pd(m, _mm256_set1_pd(kd::kSqrt2), _CMP_GT_OQ);
    m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), gt);
    e = _mm256_add_pd(e, _mm256_and_pd(gt, _mm256_set1_pd(1.0)));
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d s = _mm256_div_pd(_mm256_sub_pd(m, one), _mm256_add_pd(m, one));
    const __m256d s2 = _mm256_mul_pd(s, s);
    __m256d p = _mm256_set1_pd(1.0 / 15.0);
    p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 13.0));
    p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 11.0));
    p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 9.0));
    p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 7.0));
    p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 5.0));
    p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 3.0));
    p = _mm256_fmadd_pd(p, s2, one);
    const __m256d tail = _mm256_fmadd_pd(e, _mm256_set1_pd(kd::kLn2Lo),
                                         _mm256_mul_pd(e, _mm256_set1_pd(kd::kLn2Hi)));
    return _mm256_fmadd_pd(_mm256_mul_pd(_mm256_set1_pd(2.0), s), p, tail);
}

inline void sincos_2pi(__m256d u, __m256d& sin_out, __m256d& cos_out) {
    const __m256d z = _mm256_mul_pd(_mm256_set1_pd(4.0), u);
    const __m256d q = _mm256_floor_pd(_mm256_add_pd(z, _mm256_set1_pd(0.5)));
    const __m256d d = _mm256_sub_pd(z, q);
    const __m256d r = _mm256_mul_pd(d, _mm256_set1_pd(kd::kPiO2));
    const __m256d r2 = _mm256_mul_pd(r, r);

    __m256d ps = _mm256_set1_pd(kd::kSin6);
    ps = _mm256_fmadd_pd(ps, r2, _mm256_set1_pd(kd::kSin5));
    ps = _mm256_fmadd_pd(ps, r2, _mm256_set1_pd(kd::kSin4));
    ps = _mm256_fmadd_pd(ps, r2, _mm256_set1_pd(kd::kSin3));
    ps = _mm256_fmadd_pd(ps, r2, _mm256_set1_pd(kd::kSin2));
    ps = _mm256_fmadd_pd(ps, r2, _mm256_set1_pd(kd::kSin1));
    const __m256d sin_r = _mm256_fmadd_pd(_mm256_mul_pd(r, r2), ps, r);

    __m256d pc = _mm256_set1_pd(kd::kCos6);
    pc = _mm256_fmadd_pd(pc, r2, _mm256_set1_pd(kd::kCos5));
    pc = _mm256_fmadd_pd(pc, r2, _mm256_set1_pd(kd::kCos4));
    pc = _mm256_fmadd_pd(pc, r2, _mm256_set1_pd(kd::kCos3));
    pc = _mm256_fmadd_pd(pc, r2, _mm256_set1_pd(kd::kCos2));
    pc = _mm256_fmadd_pd(pc, r2, _mm256_set1_pd(kd::kCos1));
    const __m256d cos_r = _mm256_fmadd_pd(
        _mm256_mul_pd(r2, r2), pc, _mm256_fmadd_pd(_mm256_set1_pd(-0.5), r2, _mm256_set1_pd(1.0)));

    const __m256i qi = _mm256_cvtepi32_epi64(_mm256_cvtpd_epi32(q));
    const __m256i one_i = _mm256_set1_epi64x(1);
    const __m256i two_i = _mm256_set1_epi64x(2);
    const __m256i signbit = _mm256_set1_epi64x(static_cast<long long>(0x8000000000000000ULL));

    const __m256d swap_mask =
        _mm256_castsi256_pd(_mm256_cmpeq_epi64(_mm256_and_si256(qi, one_i), one_i));
    const __m256d s_base = _mm256_blendv_pd(sin_r, cos_r, swap_mask);
    const __m256d c_base = _mm256_blendv_pd(cos_r, sin_r, swap_mask);

    const __m256i s_neg = _mm256_cmpeq_epi64(_mm256_and_si256(qi, two_i), two_i);
    const __m256i c_neg = _mm256_cmpeq_epi64(
        _mm256_and_si256(_mm256_add_epi64(qi, one_i), two_i), two_i);
    sin_out = _mm256_xor_pd(s_base, _mm256_castsi256_pd(_mm256_and_si256(s_neg, signbit)));
    cos_out = _mm256_xor_pd(c_base, _mm256_castsi256_pd(_mm256_and_si256(c_neg, signbit)));
}

inline void normal_pair(__m256i ua, __m256i ub, __m256d& z0, __m256d& z1) {
    const __m256d u1 = to_unit(ua);
    const __m256d u2 = to_unit(ub);
    const __m256d r = _mm256_sqrt_pd(_mm256_mul_pd(_mm256_set1_pd(-2.0), log_unit(u1)));
    __m256d s, c;
    sincos_2pi(u2, s, c);
    z0 = _mm256_mul_pd(r, c);
    z1 = _mm256_mul_pd(r, s);
}

inline void transpose4(__m256d& a, __m256d& b, __m256d& c, __m256d& d) {
    const __m256d t0 = _mm256_unpacklo_pd(a, b);
    const __m256d t1 = _mm256_unpackhi_pd(a, b);
    const __m256d t2 = _mm256_unpacklo_pd(c, d);
    const __m256d t3 = _mm256_unpackhi_pd(c, d);
    a = _mm256_permute2f128_pd(t0, t2, 0x20);
    b = _mm256_permute2f128_pd(t1, t3, 0x20);
    c = _mm256_permute2f128_pd(t0, t2, 0x31);
    d = _mm256_permute2f128_pd(t1, t3, 0x31);
}

}  // namespace

void normal_fill_avx2(std::uint64_t seed, std::uint64_t stream, std::span<double> out) {
    const __m256i key0 = _mm256_set1_epi64x(static_cast<long long>(seed));
    const __m256i key1 = _mm256_set1_epi64x(static_cast<long long>(stream));
    const __m256i lane_off = _mm256_setr_epi64x(0, 1, 2, 3);
    std::uint64_t blk = 0;
    std::size_t i = 0;
    alignas(32) double tmp[16];
    while (i < out.size()) {
        const __m256i c0 =
            _mm256_add_epi64(_mm256_set1_epi64x(static_cast<long long>(blk)), lane_off);
        __m256i o0, o1, o2, o3;
        philox_vec(c0, key0, key1, o0, o1, o2, o3);
        __m256d z0, z1, z2, z3;
        normal_pair(o0, o1, z0, z1);
        normal_pair(o2, o3, z2, z3);
        transpose4(z0, z1, z2, z3);
        _mm256_store_pd(tmp + 0, z0);
        _mm256_store_pd(tmp + 4, z1);
        _mm256_store_pd(tmp + 8, z2);
        _mm256_store_pd(tmp + 12, z3);
        const std::size_t take = std::min<std::size_t>(16, out.size() - i);
        std::memcpy(out.data() + i, tmp, take * sizeof(double));
        i += take;
        blk += 4;
    }
}

void brownian_sup_avx2(const SupSpec& spec, std::uint64_t seed, std::uint64_t stream_base,
                       std::size_t rep_begin, std::size_t rep_count, double* out) {
    const int k = spec.dim;
    const int ng = spec.n_gamma;
    const __m256d inv = _mm256_set1_pd(spec.inv_sqrt_m);
    const __m256i key0 = _mm256_set1_epi64x(static_cast<long long>(seed));

    std::size_t r = 0;
    for (; r + 4 <= rep_count; r += 4) {
        const std::uint64_t s0 = stream_base + rep_begin + r;
        const __m256i key1 = _mm256_setr_epi64x(
            static_cast<long long>(s0), static_cast<long long>(s0 + 1),
            static_cast<long long>(s0 + 2), static_cast<long long>(s0 + 3));
        std::uint64_t blk = 0;
        __m256d zbuf[4];
        int pos = 4;
        __m256d sum[8];
        __m256d best[8];
        for (int c = 0; c < 8; ++c) sum[c] = best[c] = _mm256_setzero_pd();

        for (std::size_t j = 0; j < spec.grid; ++j) {
            for (int c = 0; c < k; ++c) {
                if (pos == 4) {
                    __m256i o0, o1, o2, o3;
                    philox_vec(_mm256_set1_epi64x(static_cast<long long>(blk++)), key0, key1,
                               o0, o1, o2, o3);
                    normal_pair(o0, o1, zbuf[0], zbuf[1]);
                    normal_pair(o2, o3, zbuf[2], zbuf[3]);
                    pos = 0;
                }
                sum[c] = _mm256_fmadd_pd(zbuf[pos++], inv, sum[c]);
            }
            __m256d sq = _mm256_mul_pd(sum[0], sum[0]);
            for (int c = 1; c < k; ++c) sq = _mm256_fmadd_pd(sum[c], sum[c], sq);
            const double* w = spec.weights + j * ng;
            for (int g = 0; g < ng; ++g)
                best[g] = _mm256_max_pd(best[g], _mm256_mul_pd(sq, _mm256_set1_pd(w[g])));
        }
        alignas(32) double tmp[4];
        for (int g = 0; g < ng; ++g) {
            _mm256_store_pd(tmp, _mm256_sqrt_pd(best[g]));
            for (int lane = 0; lane < 4; ++lane) out[(r + lane) * ng + g] = tmp[lane];
        }
    }
    if (r < rep_count)
        brownian_sup_scalar(spec, seed, stream_base, rep_begin + r, rep_count - r, out + r * ng);
}

}  // namespace gou::kernels
