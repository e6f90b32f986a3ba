#include "gou/kernels.hpp"

#include <array>
#include <cstdlib>
#include <cstring>
#include <string>

#include "gou/errors.hpp"
#include "gou/rng.hpp"
#include "kernels_impl.hpp"
#include "kernels_math.hpp"

namespace gou::kernels {

namespace {

Backend detect_backend() {
    if (const char* env = std::getenv("GOU_KERNEL_BACKEND")) {
        const std::string v(env);
        if (v == "scalar") return Backend::Scalar;
        if (v == "avx2") {
            if (!avx2_supported()) throw Error("GOU_KERNEL_BACKEND=avx2 but CPU lacks AVX2/FMA");
            return Backend::Avx2;
        }
        throw Error("unknown GOU_KERNEL_BACKEND '" + v + "' (expected scalar|avx2)");
    }
    return avx2_supported() ? Backend::Avx2 : Backend::Scalar;
}

Backend& backend_ref() {
    static Backend b = detect_backend();
    return b;
}

}  // namespace

bool avx2_supported() {
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend active_backend() { return backend_ref(); }

void force_backend(Backend b) {
    if (b == Backend::Avx2 && !avx2_supported())
        throw Error("cannot force AVX2 backend: CPU lacks AVX2/FMA");
    backend_ref() = b;
}

const char* backend_name(Backend b) {
    return b == Backend::Avx2 ? "avx2" : "scalar";
}

void normal_fill(std::uint64_t seed, std::uint64_t stream, std::span<double> out) {
    if (active_backend() == Backend::Avx2)
        normal_fill_avx2(seed, stream, out);
    else
        normal_fill_scalar(seed, stream, out);
}

void brownian_sup(const SupSpec& spec, std::uint64_t seed, std::uint64_t stream_base,
                  std::size_t rep_begin, std::size_t rep_count, double* out) {
    require(spec.dim >= 1 && spec.dim <= 8, "brownian_sup: dim must be in 1..8");
    require(spec.n_gamma >= 1 && spec.n_gamma <= 8, "brownian_sup: n_gamma must be in 1..8");
    require(spec.grid >= 1, "brownian_sup: empty grid");
    if (active_backend() == Backend::Avx2)
        brownian_sup_avx2(spec, seed, stream_base, rep_begin, rep_count, out);
    else
        brownian_sup_scalar(spec, seed, stream_base, rep_begin, rep_count, out);
}

void normal_fill_scalar(std::uint64_t seed, std::uint64_t stream, std::span<double> out) {
    const PhiloxKey key{seed, stream};
    PhiloxCounter ctr;
    std::size_t i = 0;
    while (i < out.size()) {
        const auto blk = philox4x64(ctr, key);
        ctr.increment();
        std::array<double, 4> z;
        detail::normal_pair(blk[0], blk[1], z[0], z[1]);
        detail::normal_pair(blk[2], blk[3], z[2], z[3]);
        const std::size_t take = std::min<std::size_t>(4, out.size() - i);
        std::memcpy(out.data() + i, z.data(), take * sizeof(double));
        i += take;
    }
}

void brownian_sup_scalar(const SupSpec& spec, std::uint64_t seed, std::uint64_t stream_base,
                         std::size_t rep_begin, std::size_t rep_count, double* out) {
    const int k = spec.dim;
    const int ng = spec.n_gamma;
    for (std::size_t r = 0; r < rep_count; ++r) {
        const PhiloxKey key{seed, stream_base + rep_begin + r};
        PhiloxCounter ctr;
        std::array<double, 4> zbuf{};
        int pos = 4;
        std::array<double, 8> sum{};
        std::array<double, 8> best{};
        for (std::size_t j = 0; j < spec.grid; ++j) {
            for (int c = 0; c < k; ++c) {
                if (pos == 4) {
                    const auto blk = philox4x64(ctr, key);
                    ctr.increment();
                    detail::normal_pair(blk[0], blk[1], zbuf[0], zbuf[1]);
                    detail::normal_pair(blk[2], blk[3], zbuf[2], zbuf[3]);
                    pos = 0;
                }
                sum[c] = std::fma(zbuf[pos++], spec.inv_sqrt_m, sum[c]);
            }
            double sq = sum[0] * sum[0];
            for (int c = 1; c < k; ++c) sq = std::fma(sum[c], sum[c], sq);
            const double* w = spec.weights + j * ng;
            for (int g = 0; g < ng; ++g) best[g] = std::max(best[g], sq * w[g]);
        }
        for (int g = 0; g < ng; ++g) out[r * ng + g] = std::sqrt(best[g]);
    }
}

}  // namespace gou::kernels
