#include "gou/critvals.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "gou/errors.hpp"
#include "gou/gof.hpp"
#include "gou/kernels.hpp"
#include "gou/parallel.hpp"

namespace gou {

namespace {

std::vector<double> weight_table(std::size_t m, std::span<const double> gammas) {
    std::vector<double> w(m * gammas.size());
    for (std::size_t j = 0; j < m; ++j) {
        const double t = static_cast<double>(j + 1) / static_cast<double>(m);
        for (std::size_t g = 0; g < gammas.size(); ++g)
            w[j * gammas.size() + g] = std::pow(t, -2.0 * gammas[g]);
    }
    return w;
}

}  // namespace

double sup_stat_from_increments(std::span<const double> increments, int k, std::size_t m,
                                double gamma, double scale) {
    require(k >= 1, "sup_stat_from_increments: k must be >= 1");
    require(m >= 1, "sup_stat_from_increments: empty grid");
    require(increments.size() >= m * static_cast<std::size_t>(k),
            "sup_stat_from_increments: need m*k increments");
    const double gam[1] = {gamma};
    const std::vector<double> w = weight_table(m, gam);
    std::vector<double> sum(static_cast<std::size_t>(k), 0.0);
    double best = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        for (int c = 0; c < k; ++c)
            sum[c] = std::fma(increments[j * static_cast<std::size_t>(k) + c], scale, sum[c]);
        double sq = sum[0] * sum[0];
        for (int c = 1; c < k; ++c) sq = std::fma(sum[c], sum[c], sq);
        best = std::max(best, sq * w[j]);
    }
    return std::sqrt(best);
}

double sup_stat_sample(int k, double gamma, std::size_t m, std::uint64_t seed,
                       std::uint64_t stream) {
    require(k >= 1, "sup_stat_sample: k must be >= 1");
    require(m >= 1, "sup_stat_sample: empty grid");
    const double gam[1] = {gamma};
    const std::vector<double> w = weight_table(m, gam);
    kernels::SupSpec spec;
    spec.dim = k;
    spec.grid = m;
    spec.weights = w.data();
    spec.n_gamma = 1;
    spec.inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(m));
    double out = 0.0;
    kernels::brownian_sup(spec, seed, stream, 0, 1, &out);
    return out;
}

CriticalValueTable tabulate_critical_values(std::span<const int> ks,
                                            std::span<const double> gammas,
                                            std::span<const double> alphas, std::size_t B,
                                            std::size_t m, std::uint64_t seed, int threads) {
    require(!ks.empty() && !gammas.empty() && !alphas.empty(),
            "tabulate_critical_values: empty parameter set");
    require(B >= 1, "tabulate_critical_values: B must be >= 1");
    require(m >= 1, "tabulate_critical_values: grid must be >= 1");
    require(gammas.size() <= 8, "tabulate_critical_values: at most 8 gammas per pass");

    const std::vector<double> w = weight_table(m, gammas);
    const std::size_t ng = gammas.size();

    CriticalValueTable table;
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
        const int k = ks[ki];
        require(k >= 1 && k <= 8, "tabulate_critical_values: k must be in 1..8");
        kernels::SupSpec spec;
        spec.dim = k;
        spec.grid = m;
        spec.weights = w.data();
        spec.n_gamma = static_cast<int>(ng);
        spec.inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(m));

        // Replication r of dimension k owns stream (k << 32) + r; samples
        // are written by index, so results do not depend on the thread
        // count.
        std::vector<double> samples(B * ng);
        const std::uint64_t stream_base = static_cast<std::uint64_t>(k) << 32;
        parallel_for(B, threads, [&](std::size_t b0, std::size_t b1) {
            kernels::brownian_sup(spec, seed, stream_base, b0, b1 - b0, samples.data() + b0 * ng);
        });

        std::vector<double> col(B);
        for (std::size_t g = 0; g < ng; ++g) {
            for (std::size_t b = 0; b < B; ++b) col[b] = samples[b * ng + g];
            std::sort(col.begin(), col.end());
            for (double alpha : alphas) {
                const double q = 1.0 - alpha;
                std::size_t idx =
                    static_cast<std::size_t>(std::ceil(q * static_cast<double>(B)));
                idx = std::min(std::max<std::size_t>(idx, 1), B);
                table.rows.push_back({k, gammas[g], alpha, col[idx - 1], B, m, seed});
            }
        }
    }
    return table;
}

double CriticalValueTable::lookup(int k, double gamma, double alpha) const {
    constexpr double kAlphaTol = 1e-9;
    constexpr double kGammaTol = 1e-9;
    std::map<double, double> by_gamma;  // gamma -> c for matching (k, alpha)
    for (const auto& r : rows)
        if (r.k == k && std::abs(r.alpha - alpha) <= kAlphaTol) by_gamma[r.gamma] = r.c;
    if (by_gamma.empty()) {
        std::ostringstream msg;
        msg << "critical value lookup failed for (k=" << k << ", gamma=" << gamma
            << ", alpha=" << alpha << "): no rows with this k and alpha; table covers ";
        std::map<int, int> kcount;
        for (const auto& r : rows) kcount[r.k]++;
        msg << kcount.size() << " dimensions";
        throw Error(msg.str());
    }

    auto exact = by_gamma.lower_bound(gamma - kGammaTol);
    if (exact != by_gamma.end() && std::abs(exact->first - gamma) <= kGammaTol)
        return exact->second;

    auto hi = by_gamma.upper_bound(gamma);
    if (hi == by_gamma.begin() || hi == by_gamma.end()) {
        std::ostringstream msg;
        msg << "critical value lookup failed for (k=" << k << ", gamma=" << gamma
            << ", alpha=" << alpha << "): gamma outside tabulated range ["
            << by_gamma.begin()->first << ", " << by_gamma.rbegin()->first << "]";
        throw Error(msg.str());
    }
    auto lo = std::prev(hi);
    const double w = (gamma - lo->first) / (hi->first - lo->first);
    return lo->second + w * (hi->second - lo->second);
}

void CriticalValueTable::write_csv(std::ostream& os) const {
    os << "k,gamma,alpha,c,B,grid,seed\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%zu,%zu,%llu\n", r.k, r.gamma,
                      r.alpha, r.c, r.B, r.grid, static_cast<unsigned long long>(r.seed));
        os << buf;
    }
}

CriticalValueTable CriticalValueTable::read_csv(std::istream& is) {
    CriticalValueTable t;
    std::string line;
    require(static_cast<bool>(std::getline(is, line)), "critical value csv: empty input");
    require(line.rfind("k,gamma,alpha,c", 0) == 0, "critical value csv: bad header");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        CriticalValueRow r;
        std::getline(ls, cell, ',');
        r.k = std::stoi(cell);
        std::getline(ls, cell, ',');
        r.gamma = std::stod(cell);
        std::getline(ls, cell, ',');
        r.alpha = std::stod(cell);
        std::getline(ls, cell, ',');
        r.c = std::stod(cell);
        if (std::getline(ls, cell, ',')) r.B = static_cast<std::size_t>(std::stoull(cell));
        if (std::getline(ls, cell, ',')) r.grid = static_cast<std::size_t>(std::stoull(cell));
        if (std::getline(ls, cell, ',')) r.seed = std::stoull(cell);
        t.rows.push_back(r);
    }
    require(!t.rows.empty(), "critical value csv: no rows");
    return t;
}

double sup_abs_bm_cdf(double c) {
    if (c <= 0.0) return 0.0;
    double s = 0.0;
    for (int j = -10; j <= 10; ++j) {
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;
        s += sign * (normal_cdf((2.0 * j + 1.0) * c) - normal_cdf((2.0 * j - 1.0) * c));
    }
    return std::clamp(s, 0.0, 1.0);
}

double sup_abs_bm_quantile(double p) {
    require(p > 0.0 && p < 1.0, "sup_abs_bm_quantile: p must be in (0,1)");
    double lo = 1e-8, hi = 10.0;
    while (sup_abs_bm_cdf(hi) < p) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (sup_abs_bm_cdf(mid) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace gou
