#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace gou {

struct CriticalValueRow {
    int k = 0;
    double gamma = 0.0;
    double alpha = 0.0;
    double c = 0.0;
    std::size_t B = 0;
    std::size_t grid = 0;
    std::uint64_t seed = 0;
};

struct CriticalValueTable {
    std::vector<CriticalValueRow> rows;

    // Exact match on k and alpha; gamma either exact or linearly
    // interpolated between the neighbouring tabulated nodes.
    double lookup(int k, double gamma, double alpha) const;

    void write_csv(std::ostream& os) const;
    static CriticalValueTable read_csv(std::istream& is);
};

// Scalar reference for one weighted-sup sample from explicit increments
// (length m*k, grid-point major), each scaled by `scale` before the
// cumulative sum. With raw N(0,1) draws and scale = 1/sqrt(m) this
// matches the fused kernel bit for bit.
double sup_stat_from_increments(std::span<const double> increments, int k, std::size_t m,
                                double gamma, double scale = 1.0);

// One sample of sup_{0<t<=1} ||B_k(t)|| / t^gamma on an m-point grid,
// from Philox stream (seed, stream).
double sup_stat_sample(int k, double gamma, std::size_t m, std::uint64_t seed,
                       std::uint64_t stream);

// Empirical (1-alpha) quantiles over B replications per (k, gamma); the
// replication paths are shared across gammas (common random numbers).
CriticalValueTable tabulate_critical_values(std::span<const int> ks,
                                            std::span<const double> gammas,
                                            std::span<const double> alphas, std::size_t B,
                                            std::size_t m, std::uint64_t seed, int threads = 0);

// Analytic oracle for k=1, gamma=0: the reflection-principle law of
// sup |W| on [0,1].
double sup_abs_bm_cdf(double c);
double sup_abs_bm_quantile(double p);

// The tabulated grid the library ships with.
inline constexpr int kDefaultKs[] = {1, 2, 3, 4, 5};
inline constexpr double kDefaultGammas[] = {0.0, 0.1, 0.2, 0.3, 0.4, 0.49};
inline constexpr double kDefaultAlphas[] = {0.10, 0.05, 0.025, 0.01};

}  // namespace gou
