#pragma once

#include "gou/kernels.hpp"

namespace gou::kernels {

void normal_fill_scalar(std::uint64_t seed, std::uint64_t stream, std::span<double> out);
void brownian_sup_scalar(const SupSpec& spec, std::uint64_t seed, std::uint64_t stream_base,
                         std::size_t rep_begin, std::size_t rep_count, double* out);

// Compiled with -mavx2 -mfma in its own translation unit; only called
// after the runtime CPU check.
void normal_fill_avx2(std::uint64_t seed, std::uint64_t stream, std::span<double> out);
void brownian_sup_avx2(const SupSpec& spec, std::uint64_t seed, std::uint64_t stream_base,
                       std::size_t rep_begin, std::size_t rep_count, double* out);

}  // namespace gou::kernels
