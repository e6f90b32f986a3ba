#include "gou/gof.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "gou/errors.hpp"
#include "gou/kernels.hpp"
#include "gou/parallel.hpp"

namespace gou {

namespace {

constexpr double kGofAlphas[] = {0.90, 0.95, 0.975, 0.99};

void check_sorted(const std::vector<double>& u) {
    require(!u.empty(), "gof statistic: empty input");
    for (std::size_t i = 1; i < u.size(); ++i)
        require(u[i - 1] <= u[i], "gof statistic: input must be sorted");
}

// Order statistic at ceil(q*B) (type-1 empirical quantile).
double order_quantile(const std::vector<double>& sorted, double q) {
    const std::size_t b = sorted.size();
    std::size_t idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(b)));
    idx = std::min(std::max<std::size_t>(idx, 1), b);
    return sorted[idx - 1];
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

double normal_quantile(double p) {
    require(p > 0.0 && p < 1.0, "normal_quantile: p must be in (0,1)");
    // Bisection on the cdf; plenty fast for table work and exact enough
    // (cdf via erfc is accurate to ~1e-16).
    double lo = -10.0, hi = 10.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (normal_cdf(mid) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<double> pit_values(const Eigen::VectorXd& residuals, double sigma_hat) {
    require(sigma_hat > 0.0, "pit_values: sigma_hat must be > 0");
    std::vector<double> u(static_cast<std::size_t>(residuals.size()));
    for (Eigen::Index i = 0; i < residuals.size(); ++i)
        u[static_cast<std::size_t>(i)] = normal_cdf(residuals(i) / sigma_hat);
    std::sort(u.begin(), u.end());
    return u;
}

double ks_statistic(const std::vector<double>& u_sorted) {
    check_sorted(u_sorted);
    const double n = static_cast<double>(u_sorted.size());
    double m = 0.0;
    for (std::size_t i = 1; i <= u_sorted.size(); ++i) {
        const double u = u_sorted[i - 1];
        m = std::max(m, std::abs(u - static_cast<double>(i) / n));
        m = std::max(m, std::abs(u - static_cast<double>(i - 1) / n));
    }
    return std::sqrt(n) * m;
}

double cvm_statistic(const std::vector<double>& u_sorted) {
    check_sorted(u_sorted);
    const double n = static_cast<double>(u_sorted.size());
    double s = 1.0 / (12.0 * n);
    for (std::size_t i = 1; i <= u_sorted.size(); ++i) {
        const double d = u_sorted[i - 1] - (static_cast<double>(i) - 0.5) / n;
        s += d * d;
    }
    return s;
}

std::vector<GofQuantileRow> tabulate_gof_quantiles(std::size_t n, std::size_t B,
                                                   std::uint64_t seed, bool centered,
                                                   int threads) {
    require(n >= 2, "tabulate_gof_quantiles: n must be >= 2");
    require(B >= 1, "tabulate_gof_quantiles: B must be >= 1");

    std::vector<double> ks_all(B), cvm_all(B);
    parallel_for(B, threads, [&](std::size_t b0, std::size_t b1) {
        std::vector<double> eps(n);
        std::vector<double> u(n);
        for (std::size_t b = b0; b < b1; ++b) {
            kernels::normal_fill(seed, b, eps);
            double mean = 0.0, ss = 0.0;
            for (double e : eps) mean += e;
            mean /= static_cast<double>(n);
            if (centered) {
                for (double e : eps) ss += (e - mean) * (e - mean);
            } else {
                for (double e : eps) ss += e * e;
            }
            const double s = std::sqrt(ss / static_cast<double>(n - 1));
            for (std::size_t i = 0; i < n; ++i) u[i] = normal_cdf((eps[i] - mean) / s);
            std::sort(u.begin(), u.end());
            ks_all[b] = ks_statistic(u);
            cvm_all[b] = cvm_statistic(u);
        }
    });

    std::sort(ks_all.begin(), ks_all.end());
    std::sort(cvm_all.begin(), cvm_all.end());
    std::vector<GofQuantileRow> rows;
    for (double a : kGofAlphas)
        rows.push_back({n, a, order_quantile(ks_all, a), order_quantile(cvm_all, a)});
    return rows;
}

namespace {

// Interpolate the tail probability from the four tabulated quantile
// levels; linear in alpha, clamped to [0,1].
double interp_pvalue(const std::vector<std::pair<double, double>>& crit_by_alpha, double stat) {
    // crit_by_alpha: (quantile level, critical value), ascending level.
    // Tail probability at the tabulated point is 1 - level.
    if (stat <= crit_by_alpha.front().second) {
        // below the 90% quantile: interpolate between p=1 at stat=0 and
        // p=0.10 at the first tabulated point
        const double c = crit_by_alpha.front().second;
        const double p = 1.0 - (stat / c) * 0.90;
        return std::clamp(p, 0.0, 1.0);
    }
    for (std::size_t i = 1; i < crit_by_alpha.size(); ++i) {
        if (stat <= crit_by_alpha[i].second) {
            const auto [a0, c0] = crit_by_alpha[i - 1];
            const auto [a1, c1] = crit_by_alpha[i];
            const double w = (stat - c0) / (c1 - c0);
            const double p = (1.0 - a0) + w * ((1.0 - a1) - (1.0 - a0));
            return std::clamp(p, 0.0, 1.0);
        }
    }
    // beyond the 99% quantile: extrapolate the last segment, clamp at 0
    const auto [a0, c0] = crit_by_alpha[crit_by_alpha.size() - 2];
    const auto [a1, c1] = crit_by_alpha.back();
    const double w = (stat - c0) / (c1 - c0);
    const double p = (1.0 - a0) + w * ((1.0 - a1) - (1.0 - a0));
    return std::clamp(p, 0.0, 1.0);
}

}  // namespace

double GofTable::pvalue_ks(std::size_t n, double stat) const {
    require(!rows.empty(), "GofTable: empty table");
    std::size_t best_n = 0;
    for (const auto& r : rows)
        if (best_n == 0 ||
            std::llabs(static_cast<long long>(r.n) - static_cast<long long>(n)) <
                std::llabs(static_cast<long long>(best_n) - static_cast<long long>(n)))
            best_n = r.n;
    std::vector<std::pair<double, double>> crit;
    for (const auto& r : rows)
        if (r.n == best_n) crit.emplace_back(r.alpha, r.ks);
    std::sort(crit.begin(), crit.end());
    return interp_pvalue(crit, stat);
}

double GofTable::pvalue_cvm(std::size_t n, double stat) const {
    require(!rows.empty(), "GofTable: empty table");
    std::size_t best_n = 0;
    for (const auto& r : rows)
        if (best_n == 0 ||
            std::llabs(static_cast<long long>(r.n) - static_cast<long long>(n)) <
                std::llabs(static_cast<long long>(best_n) - static_cast<long long>(n)))
            best_n = r.n;
    std::vector<std::pair<double, double>> crit;
    for (const auto& r : rows)
        if (r.n == best_n) crit.emplace_back(r.alpha, r.cvm);
    std::sort(crit.begin(), crit.end());
    return interp_pvalue(crit, stat);
}

void GofTable::write_csv(std::ostream& os) const {
    os << "n,alpha,ks,cvm\n";
    char buf[128];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g\n", r.n, r.alpha, r.ks, r.cvm);
        os << buf;
    }
}

GofTable GofTable::read_csv(std::istream& is) {
    GofTable t;
    std::string line;
    require(static_cast<bool>(std::getline(is, line)), "gof table csv: empty input");
    require(line.rfind("n,alpha,ks,cvm", 0) == 0, "gof table csv: bad header");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        GofQuantileRow r;
        std::getline(ls, cell, ',');
        r.n = static_cast<std::size_t>(std::stoull(cell));
        std::getline(ls, cell, ',');
        r.alpha = std::stod(cell);
        std::getline(ls, cell, ',');
        r.ks = std::stod(cell);
        std::getline(ls, cell, ',');
        r.cvm = std::stod(cell);
        t.rows.push_back(r);
    }
    require(!t.rows.empty(), "gof table csv: no rows");
    return t;
}

GofReport gof_test(const Trajectory& traj, const BasisSpec& basis, const GofTable& table,
                   std::size_t from_index, std::size_t to_index) {
    const DiscretizedSample sample = build_design(traj, basis, from_index, to_index);
    const EstimationResult fit = fit_theta(sample);
    const Eigen::VectorXd eps = residuals(sample, fit.theta_hat);
    const double sigma_hat = std::sqrt(realized_qv_sigma2(traj, from_index, to_index));
    const std::vector<double> u = pit_values(eps, sigma_hat);

    GofReport rep;
    rep.n = sample.n;
    rep.sigma_hat = sigma_hat;
    rep.ks = ks_statistic(u);
    rep.cvm = cvm_statistic(u);
    rep.pvalue_ks = table.pvalue_ks(rep.n, rep.ks);
    rep.pvalue_cvm = table.pvalue_cvm(rep.n, rep.cvm);
    return rep;
}

nlohmann::json gof_report_to_json(const GofReport& r) {
    nlohmann::json j;
    j["ks"] = r.ks;
    j["cvm"] = r.cvm;
    j["n"] = r.n;
    j["pvalue_ks"] = r.pvalue_ks;
    j["pvalue_cvm"] = r.pvalue_cvm;
    j["sigma_hat"] = r.sigma_hat;
    return j;
}

}  // namespace gou
