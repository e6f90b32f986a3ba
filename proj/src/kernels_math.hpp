#pragma once

#include <bit>
#include <cmath>
#include <cstdint>

// Scalar transcendental kernels shared by the scalar backend and the
// tests. The AVX2 backend mirrors these lane-for-lane with the same
// operation order and explicit fused multiply-adds, which is what makes
// scalar and vector outputs bitwise identical.
namespace gou::kernels::detail {

inline constexpr double kLn2Hi = 6.93147180369123816490e-01;
inline constexpr double kLn2Lo = 1.90821492927058770002e-10;
inline constexpr double kSqrt2 = 1.41421356237309504880;
inline constexpr double kPiO2 = 1.57079632679489661923;

// log(x) for normal positive x; valid on (0, 1] which is all the
// uniform-variate path needs. atanh series after reducing the mantissa
// to [sqrt(1/2), sqrt(2)).
inline double log_unit(double x) {
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
    std::int64_t e = static_cast<std::int64_t>(bits >> 52) - 1023;
    double m = std::bit_cast<double>((bits & 0x000FFFFFFFFFFFFFULL) | 0x3FF0000000000000ULL);
    if (m > kSqrt2) {
        m = m * 0.5;
        e += 1;
    }
    const double s = (m - 1.0) / (m + 1.0);
    const double s2 = s * s;
    double p = 1.0 / 15.0;
    p = std::fma(p, s2, 1.0 / 13.0);
    p = std::fma(p, s2, 1.0 / 11.0);
    p = std::fma(p, s2, 1.0 / 9.0);
    p = std::fma(p, s2, 1.0 / 7.0);
    p = std::fma(p, s2, 1.0 / 5.0);
    p = std::fma(p, s2, 1.0 / 3.0);
    p = std::fma(p, s2, 1.0);
    const double ed = static_cast<double>(e);
    return std::fma(2.0 * s, p, std::fma(ed, kLn2Lo, ed * kLn2Hi));
}

inline constexpr double kSin1 = -1.66666666666666307295e-1;
inline constexpr double kSin2 = 8.33333333332211858878e-3;
inline constexpr double kSin3 = -1.98412698295895385996e-4;
inline constexpr double kSin4 = 2.75573136213857245213e-6;
inline constexpr double kSin5 = -2.50507477628578072866e-8;
inline constexpr double kSin6 = 1.58962301576546568060e-10;

inline constexpr double kCos1 = 4.16666666666665929218e-2;
inline constexpr double kCos2 = -1.38888888888730564116e-3;
inline constexpr double kCos3 = 2.48015872888517179954e-5;
inline constexpr double kCos4 = -2.75573141792967388112e-7;
inline constexpr double kCos5 = 2.08757008419747316778e-9;
inline constexpr double kCos6 = -1.13585365213876817300e-11;

inline double flip_sign(double x, bool flip) {
    const std::uint64_t mask = flip ? 0x8000000000000000ULL : 0ULL;
    return std::bit_cast<double>(std::bit_cast<std::uint64_t>(x) ^ mask);
}

// sin(2*pi*u) and cos(2*pi*u) for u in [0,1): quadrant split plus
// minimax polynomials on [-pi/4, pi/4].
inline void sincos_2pi(double u, double& sin_out, double& cos_out) {
    const double z = 4.0 * u;
    const double q = std::floor(z + 0.5);
    const double d = z - q;
    const double r = d * kPiO2;
    const double r2 = r * r;

    double ps = kSin6;
    ps = std::fma(ps, r2, kSin5);
    ps = std::fma(ps, r2, kSin4);
    ps = std::fma(ps, r2, kSin3);
    ps = std::fma(ps, r2, kSin2);
    ps = std::fma(ps, r2, kSin1);
    const double sin_r = std::fma(r * r2, ps, r);

    double pc = kCos6;
    pc = std::fma(pc, r2, kCos5);
    pc = std::fma(pc, r2, kCos4);
    pc = std::fma(pc, r2, kCos3);
    pc = std::fma(pc, r2, kCos2);
    pc = std::fma(pc, r2, kCos1);
    const double cos_r = std::fma(r2 * r2, pc, std::fma(-0.5, r2, 1.0));

    const int qi = static_cast<int>(q) & 3;
    const bool swap = (qi & 1) != 0;
    sin_out = flip_sign(swap ? cos_r : sin_r, (qi & 2) != 0);
    cos_out = flip_sign(swap ? sin_r : cos_r, ((qi + 1) & 2) != 0);
}

inline double to_unit(std::uint64_t u) {
    return (static_cast<double>(u >> 11) + 0.5) * 0x1.0p-53;
}

// Box-Muller pair from two raw 64-bit words.
inline void normal_pair(std::uint64_t ua, std::uint64_t ub, double& z0, double& z1) {
    const double u1 = to_unit(ua);
    const double u2 = to_unit(ub);
    const double r = std::sqrt(-2.0 * log_unit(u1));
    double s, c;
    sincos_2pi(u2, s, c);
    z0 = r * c;
    z1 = r * s;
}

}  // namespace gou::kernels::detail
