#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "gou/estimate.hpp"

namespace gou {

double normal_cdf(double x);
double normal_quantile(double p);

// Probability-integral-transformed residuals Phi(e_i/sigma_hat), sorted.
std::vector<double> pit_values(const Eigen::VectorXd& residuals, double sigma_hat);

// Lilliefors-type Kolmogorov-Smirnov statistic
// sqrt(n) * max_i max(|u_(i) - i/n|, |u_(i) - (i-1)/n|).
double ks_statistic(const std::vector<double>& u_sorted);

// Cramer-von Mises statistic 1/(12n) + sum (u_(i) - (i-1/2)/n)^2.
double cvm_statistic(const std::vector<double>& u_sorted);

struct GofQuantileRow {
    std::size_t n = 0;
    double alpha = 0.0;  // quantile level (0.90, 0.95, 0.975, 0.99)
    double ks = 0.0;
    double cvm = 0.0;
};

// Monte Carlo quantiles of the two statistics under Gaussian residuals
// with estimated mean and scale. The default scale estimate is the
// uncentered s_n^2 = sum(eps^2)/(n-1); `centered` switches to the usual
// centered variance.
std::vector<GofQuantileRow> tabulate_gof_quantiles(std::size_t n, std::size_t B,
                                                   std::uint64_t seed, bool centered = false,
                                                   int threads = 0);

struct GofTable {
    std::vector<GofQuantileRow> rows;
    // Tail probability by linear interpolation in the quantile level at
    // the nearest tabulated n; clamped to [0, 1].
    double pvalue_ks(std::size_t n, double stat) const;
    double pvalue_cvm(std::size_t n, double stat) const;
    void write_csv(std::ostream& os) const;
    static GofTable read_csv(std::istream& is);
};

struct GofReport {
    double ks = 0.0;
    double cvm = 0.0;
    std::size_t n = 0;
    double pvalue_ks = 0.0;
    double pvalue_cvm = 0.0;
    double sigma_hat = 0.0;
};

// Full pipeline: fit on [from,to], residuals, realized-QV scale, PIT,
// statistics, p-values.
GofReport gof_test(const Trajectory& traj, const BasisSpec& basis, const GofTable& table,
                   std::size_t from_index, std::size_t to_index);

nlohmann::json gof_report_to_json(const GofReport& r);

}  // namespace gou
