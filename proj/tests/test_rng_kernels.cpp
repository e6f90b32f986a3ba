#include "doctest.h"

#include <cmath>
#include <cstring>
#include <vector>

#include "gou/critvals.hpp"
#include "gou/errors.hpp"
#include "gou/kernels.hpp"
#include "gou/rng.hpp"
#include "../src/kernels_math.hpp"

using namespace gou;

namespace {

struct BackendGuard {
    kernels::Backend saved = kernels::active_backend();
    ~BackendGuard() { kernels::force_backend(saved); }
};

}  // namespace

TEST_SUITE("rng_kernels") {

TEST_CASE("philox4x64-10 known answers") {
    // Frozen from numpy.random.Philox (same key/counter convention up to
    // numpy's pre-increment of the counter before the first block).
    PhiloxCounter c1;
    c1.c = {1, 0, 0, 0};
    auto b = philox4x64(c1, PhiloxKey{0, 0});
    CHECK(b[0] == 0x02f4ba6408e4d89bULL);
    CHECK(b[1] == 0x3dd62b0b9ca8c5b2ULL);
    CHECK(b[2] == 0x1c8667a55d902e79ULL);
    CHECK(b[3] == 0x907d7a052fd5b4dcULL);

    PhiloxCounter c2;
    c2.c = {2, 0, 0, 0};
    b = philox4x64(c2, PhiloxKey{0, 0});
    CHECK(b[0] == 0x809bf322883987c3ULL);
    CHECK(b[1] == 0x471128b9e807f7ddULL);
    CHECK(b[2] == 0xf250ba0dbec065b7ULL);
    CHECK(b[3] == 0xfc6ed66767a457bcULL);

    b = philox4x64(PhiloxCounter{}, PhiloxKey{0xffffffffffffffffULL, 0xffffffffffffffffULL});
    CHECK(b[0] == 0x44b7493d1acfc229ULL);
    CHECK(b[1] == 0x6636af8e997921ddULL);
    CHECK(b[2] == 0x3f73e132b5b3780eULL);
    CHECK(b[3] == 0x605644dde03b01b1ULL);

    b = philox4x64(c1, PhiloxKey{0xdeadbeef12345678ULL, 0});
    CHECK(b[0] == 0x01e08b9944fc9ce9ULL);
    CHECK(b[1] == 0x4dd35999ef97e4c4ULL);
    CHECK(b[2] == 0xfb4385fe6262b926ULL);
    CHECK(b[3] == 0xe8ca5d2e2ace8c50ULL);
}

TEST_CASE("counter increment carries") {
    PhiloxCounter c;
    c.c = {0xffffffffffffffffULL, 0xffffffffffffffffULL, 5, 0};
    c.increment();
    CHECK(c.c[0] == 0);
    CHECK(c.c[1] == 0);
    CHECK(c.c[2] == 6);
}

TEST_CASE("stream view matches raw blocks") {
    RngStream s(11, 22);
    PhiloxCounter ctr;
    const auto b0 = philox4x64(ctr, PhiloxKey{11, 22});
    ctr.increment();
    const auto b1 = philox4x64(ctr, PhiloxKey{11, 22});
    for (int i = 0; i < 4; ++i) CHECK(s.next_u64() == b0[static_cast<std::size_t>(i)]);
    CHECK(s.next_u64() == b1[0]);
}

TEST_CASE("uniform draws live in (0,1)") {
    RngStream s(3, 4);
    for (int i = 0; i < 1000; ++i) {
        const double u = s.next_unit();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("kernel log matches libm") {
    RngStream s(5, 6);
    double worst = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const double u = s.next_unit();
        worst = std::max(worst, std::abs(kernels::detail::log_unit(u) - std::log(u)) /
                                    std::max(1.0, std::abs(std::log(u))));
    }
    // also the extreme of the uniform range
    const double tiny = 0x1.0p-54;
    worst = std::max(worst, std::abs(kernels::detail::log_unit(tiny) - std::log(tiny)) /
                                std::abs(std::log(tiny)));
    CHECK(worst < 1e-13);
}

TEST_CASE("kernel sincos matches libm") {
    RngStream s(7, 8);
    double worst = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const double u = s.next_unit();
        double sn, cn;
        kernels::detail::sincos_2pi(u, sn, cn);
        worst = std::max(worst, std::abs(sn - std::sin(2.0 * M_PI * u)));
        worst = std::max(worst, std::abs(cn - std::cos(2.0 * M_PI * u)));
    }
    for (double u : {0.0, 0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875}) {
        double sn, cn;
        kernels::detail::sincos_2pi(u, sn, cn);
        worst = std::max(worst, std::abs(sn - std::sin(2.0 * M_PI * u)));
        worst = std::max(worst, std::abs(cn - std::cos(2.0 * M_PI * u)));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("normal_fill moments and determinism") {
    std::vector<double> z(2000000);
    kernels::normal_fill(2024, 0, z);
    double m = 0.0;
    for (double x : z) m += x;
    m /= static_cast<double>(z.size());
    double v = 0.0, k4 = 0.0;
    for (double x : z) {
        const double d = x - m;
        v += d * d;
        k4 += d * d * d * d;
    }
    v /= static_cast<double>(z.size());
    k4 = k4 / static_cast<double>(z.size()) / (v * v);
    CHECK(std::abs(m) < 4.0 / std::sqrt(static_cast<double>(z.size())));
    CHECK(v == doctest::Approx(1.0).epsilon(0.005));
    CHECK(k4 == doctest::Approx(3.0).epsilon(0.02));

    std::vector<double> z2(100);
    kernels::normal_fill(2024, 0, z2);
    CHECK(std::memcmp(z.data(), z2.data(), z2.size() * sizeof(double)) == 0);
}

TEST_CASE("distinct streams are distinct") {
    std::vector<double> a(64), b(64);
    kernels::normal_fill(1, 0, a);
    kernels::normal_fill(1, 1, b);
    CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) != 0);
}

TEST_CASE("scalar and avx2 backends agree bitwise") {
    if (!kernels::avx2_supported()) return;
    BackendGuard guard;

    // normal_fill over an awkward length (exercises block tails)
    std::vector<double> a(1003), b(1003);
    kernels::force_backend(kernels::Backend::Scalar);
    kernels::normal_fill(123, 7, a);
    kernels::force_backend(kernels::Backend::Avx2);
    kernels::normal_fill(123, 7, b);
    CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);

    // brownian_sup across dims, odd grid, rep tail
    for (int k : {1, 2, 3, 5}) {
        const std::size_t m = 777;
        const std::vector<double> gammas = {0.0, 0.1, 0.49};
        std::vector<double> w(m * gammas.size());
        for (std::size_t j = 0; j < m; ++j) {
            const double t = static_cast<double>(j + 1) / static_cast<double>(m);
            for (std::size_t g = 0; g < gammas.size(); ++g)
                w[j * gammas.size() + g] = std::pow(t, -2.0 * gammas[g]);
        }
        kernels::SupSpec spec{k, m, w.data(), 3, 1.0 / std::sqrt(static_cast<double>(m))};
        std::vector<double> ra(7 * 3), rb(7 * 3);
        kernels::force_backend(kernels::Backend::Scalar);
        kernels::brownian_sup(spec, 99, 1000, 5, 7, ra.data());
        kernels::force_backend(kernels::Backend::Avx2);
        kernels::brownian_sup(spec, 99, 1000, 5, 7, rb.data());
        CHECK(std::memcmp(ra.data(), rb.data(), ra.size() * sizeof(double)) == 0);
    }
}

TEST_CASE("fused sup kernel equals the reference scan") {
    const std::size_t m = 777;
    const int k = 3;
    std::vector<double> z(m * static_cast<std::size_t>(k));
    kernels::normal_fill(99, 1005, z);
    const double ref = sup_stat_from_increments(z, k, m, 0.49, 1.0 / std::sqrt(777.0));
    const double fused = sup_stat_sample(k, 0.49, m, 99, 1005);
    CHECK(ref == fused);
}

TEST_CASE("derive_stream separates indices") {
    CHECK(derive_stream(1, 2, 3) != derive_stream(1, 3, 2));
    CHECK(derive_stream(0, 0, 0) != derive_stream(0, 0, 1));
    CHECK(derive_stream(7) == derive_stream(7, 0, 0));
}

}  // TEST_SUITE
