#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace gou::kernels {

// Data-parallel inner loops used by the Monte Carlo tabulations: batch
// standard-normal generation and the weighted Brownian-supremum scan.
// A scalar reference implementation always exists; an AVX2 variant is
// selected at runtime when the CPU supports it. Both variants perform
// the identical IEEE operation sequence, so their outputs agree bitwise
// (the equivalence tests assert exactly that).
enum class Backend { Scalar, Avx2 };

Backend active_backend();
void force_backend(Backend);  // throws gou::Error if unsupported on this CPU
bool avx2_supported();
const char* backend_name(Backend);

// Fills `out` with the standard normals of the Philox stream
// (seed, stream), counter starting at zero. out[i] is the i-th normal
// of the stream regardless of buffer size or backend.
void normal_fill(std::uint64_t seed, std::uint64_t stream, std::span<double> out);

// Weighted supremum of a k-dimensional Brownian path on an equidistant
// grid. Replication r consumes the first grid*dim normals of stream
// (seed, stream_base + r); grid point j (0-based) uses normals
// [j*dim, (j+1)*dim) as coordinate increments, scaled by inv_sqrt_m.
// weights has grid rows of n_gamma entries, row j = t_j^(-2*gamma_g)
// with t_j = (j+1)/grid. Output layout: out[(r - rep_begin)*n_gamma + g]
// = max_j ||B(t_j)|| * t_j^(-gamma_g).
struct SupSpec {
    int dim = 1;
    std::size_t grid = 0;
    const double* weights = nullptr;
    int n_gamma = 0;
    double inv_sqrt_m = 0.0;
};

void brownian_sup(const SupSpec& spec, std::uint64_t seed, std::uint64_t stream_base,
                  std::size_t rep_begin, std::size_t rep_count, double* out);

}  // namespace gou::kernels
