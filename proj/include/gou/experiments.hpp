#pragma once

#include "gou/critvals.hpp"
#include "gou/detect.hpp"
#include "gou/simulate.hpp"

namespace gou {

struct ExperimentConfig {
    GouModel theta0;
    std::vector<GouModel> theta_star;
    std::vector<double> t_star;
    std::vector<std::size_t> N_list;
    double T = 20.0;
    double gamma = 0.1;
    double alpha = 0.05;
    std::size_t replications = 100;
    std::uint64_t seed = 0;
    double horizon_multiple = 3.0;
    double cap_multiple = 2.0;  // monitoring horizon K <= cap_multiple*N
    void validate() const;
};

struct GridRow {
    int scenario = 0;            // index into theta_star x t_star
    std::string theta_star;      // label "mu1;mu2;a"
    double t_star = 0.0;
    std::size_t N = 0;
    std::size_t rep = 0;
    DetectorKind detector = DetectorKind::Q;
    double tau_rel = 0.0;        // K/N at detection, 1.0 sentinel when undetected
    bool detected = false;
};

// Simulate, fit on 1..N, run both monitors with the tabulated critical
// values; one row per (scenario, N, replication, detector).
std::vector<GridRow> run_grid(const ExperimentConfig& config, const CriticalValueTable& table,
                              int threads = 0);

struct PowerPoint {
    int j = 0;
    double power = 0.0;
};

// Empirical CDF of tau_rel at j/10, j = 0..19. Rows must share N; filter
// by scenario/detector before calling.
std::vector<PowerPoint> power_curve(std::span<const GridRow> rows, std::size_t N);

void write_grid_csv(std::span<const GridRow> rows, std::ostream& os);
std::vector<GridRow> read_grid_csv(std::istream& is);
void write_power_csv(std::span<const GridRow> rows, std::ostream& os);

nlohmann::json experiment_to_json(const ExperimentConfig& c);
ExperimentConfig experiment_from_json(const nlohmann::json& j);

const char* detector_name(DetectorKind k);

}  // namespace gou
