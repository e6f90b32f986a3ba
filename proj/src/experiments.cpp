#include "gou/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>

#include "gou/errors.hpp"
#include "gou/parallel.hpp"
#include "gou/rng.hpp"

namespace gou {

const char* detector_name(DetectorKind k) { return k == DetectorKind::Q ? "Q" : "Gamma"; }

void ExperimentConfig::validate() const {
    theta0.validate();
    require(!theta_star.empty() && !t_star.empty() && !N_list.empty(),
            "ExperimentConfig: scenario lists must be nonempty");
    require(replications >= 1, "ExperimentConfig: replications must be >= 1");
    require(T > 0.0, "ExperimentConfig: T must be > 0");
    require(gamma >= 0.0 && gamma < 0.5, "ExperimentConfig: gamma must be in [0, 1/2)");
    require(alpha > 0.0 && alpha < 1.0, "ExperimentConfig: alpha must be in (0,1)");
    require(horizon_multiple >= 1.0 + cap_multiple,
            "ExperimentConfig: horizon_multiple must cover 1 + cap_multiple");
    for (const auto& th : theta_star) {
        th.validate();
        require(th.basis == theta0.basis, "ExperimentConfig: theta_star must share the basis");
        require(th.sigma == theta0.sigma, "ExperimentConfig: theta_star must share sigma");
    }
    for (double ts : t_star) require(ts >= 0.0, "ExperimentConfig: t_star must be >= 0");
}

namespace {

std::string theta_label(const GouModel& m) {
    std::ostringstream os;
    for (Eigen::Index i = 0; i < m.mu.size(); ++i) os << m.mu(i) << ";";
    os << m.a;
    return os.str();
}

}  // namespace

std::vector<GridRow> run_grid(const ExperimentConfig& config, const CriticalValueTable& table,
                              int threads) {
    config.validate();
    const int p1 = config.theta0.p() + 1;
    const double c_q = table.lookup(1, config.gamma, config.alpha);
    const double c_g = table.lookup(p1, config.gamma, config.alpha);

    struct Task {
        int scenario;
        std::size_t star_idx;
        std::size_t tstar_idx;
        std::size_t N;
        std::size_t rep;
    };
    std::vector<Task> tasks;
    int scen = 0;
    for (std::size_t si = 0; si < config.theta_star.size(); ++si) {
        for (std::size_t ti = 0; ti < config.t_star.size(); ++ti, ++scen) {
            for (std::size_t N : config.N_list)
                for (std::size_t rep = 0; rep < config.replications; ++rep)
                    tasks.push_back({scen, si, ti, N, rep});
        }
    }

    std::vector<GridRow> rows(tasks.size() * 2);
    parallel_for(tasks.size(), threads, [&](std::size_t t0, std::size_t t1) {
        for (std::size_t t = t0; t < t1; ++t) {
            const Task& task = tasks[t];
            ChangePointScenario sc;
            sc.theta0 = config.theta0;
            sc.theta_star = config.theta_star[task.star_idx];
            sc.t_star = config.t_star[task.tstar_idx];
            sc.horizon_multiple = config.horizon_multiple;

            const std::uint64_t stream = derive_stream(static_cast<std::uint64_t>(task.scenario),
                                                       task.N, task.rep);
            Trajectory traj = simulate_trajectory(sc, task.N, config.T, config.seed, stream);
            traj.n_historical = task.N;

            DetectorConfig dc;
            dc.gamma = config.gamma;
            dc.alpha = config.alpha;
            dc.max_k = static_cast<std::size_t>(
                std::llround(config.cap_multiple * static_cast<double>(task.N)));

            dc.c = c_q;
            const DetectorRun rq = monitor_q(traj, config.theta0.basis, dc);
            dc.c = c_g;
            const DetectorRun rg = monitor_gamma(traj, config.theta0.basis, dc);

            const std::string label = theta_label(sc.theta_star);
            for (int d = 0; d < 2; ++d) {
                const DetectorRun& run = d == 0 ? rq : rg;
                GridRow row;
                row.scenario = task.scenario;
                row.theta_star = label;
                row.t_star = sc.t_star;
                row.N = task.N;
                row.rep = task.rep;
                row.detector = d == 0 ? DetectorKind::Q : DetectorKind::Gamma;
                row.detected = run.detected();
                row.tau_rel = run.detected() ? static_cast<double>(*run.stopped_at) /
                                                   static_cast<double>(task.N)
                                             : 1.0;
                rows[t * 2 + d] = row;
            }
        }
    });
    return rows;
}

std::vector<PowerPoint> power_curve(std::span<const GridRow> rows, std::size_t N) {
    require(!rows.empty(), "power_curve: no rows");
    std::size_t count = 0;
    std::vector<std::size_t> hits(20, 0);
    for (const auto& r : rows) {
        if (r.N != N) continue;
        ++count;
        for (int j = 0; j < 20; ++j)
            if (r.tau_rel <= static_cast<double>(j) / 10.0) ++hits[static_cast<std::size_t>(j)];
    }
    require(count > 0, "power_curve: no rows with the requested N");
    std::vector<PowerPoint> out(20);
    for (int j = 0; j < 20; ++j)
        out[static_cast<std::size_t>(j)] = {
            j, static_cast<double>(hits[static_cast<std::size_t>(j)]) / static_cast<double>(count)};
    return out;
}

void write_grid_csv(std::span<const GridRow> rows, std::ostream& os) {
    os << "scenario,theta_star,t_star,N,rep,detector,tau_rel\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "s%d,%s,%.17g,%zu,%zu,%s,%.17g\n", r.scenario,
                      r.theta_star.c_str(), r.t_star, r.N, r.rep, detector_name(r.detector),
                      r.tau_rel);
        os << buf;
    }
}

std::vector<GridRow> read_grid_csv(std::istream& is) {
    std::vector<GridRow> rows;
    std::string line;
    require(static_cast<bool>(std::getline(is, line)), "grid csv: empty input");
    require(line.rfind("scenario,theta_star,t_star,N,rep,detector,tau_rel", 0) == 0,
            "grid csv: bad header");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        GridRow r;
        std::getline(ls, cell, ',');
        require(cell.size() > 1 && cell[0] == 's', "grid csv: bad scenario");
        r.scenario = std::stoi(cell.substr(1));
        std::getline(ls, r.theta_star, ',');
        std::getline(ls, cell, ',');
        r.t_star = std::stod(cell);
        std::getline(ls, cell, ',');
        r.N = static_cast<std::size_t>(std::stoull(cell));
        std::getline(ls, cell, ',');
        r.rep = static_cast<std::size_t>(std::stoull(cell));
        std::getline(ls, cell, ',');
        r.detector = cell == "Q" ? DetectorKind::Q : DetectorKind::Gamma;
        std::getline(ls, cell, ',');
        r.tau_rel = std::stod(cell);
        r.detected = r.tau_rel < 1.0 || r.tau_rel > 1.0;  // sentinel exactly 1.0
        rows.push_back(r);
    }
    require(!rows.empty(), "grid csv: no rows");
    return rows;
}

void write_power_csv(std::span<const GridRow> rows, std::ostream& os) {
    // Group rows by (scenario, N, detector); one block of 20 points each.
    std::map<std::tuple<int, std::size_t, int>, std::vector<GridRow>> groups;
    for (const auto& r : rows)
        groups[{r.scenario, r.N, static_cast<int>(r.detector)}].push_back(r);
    os << "scenario,N,detector,j,power\n";
    char buf[160];
    for (const auto& [key, group] : groups) {
        const auto& [scen, n, det] = key;
        const auto curve = power_curve(group, n);
        for (const auto& pt : curve) {
            std::snprintf(buf, sizeof(buf), "s%d,%zu,%s,%d,%.17g\n", scen, n,
                          detector_name(static_cast<DetectorKind>(det)), pt.j, pt.power);
            os << buf;
        }
    }
}

nlohmann::json experiment_to_json(const ExperimentConfig& c) {
    nlohmann::json j;
    j["theta0"] = model_to_json(c.theta0);
    j["theta_star"] = nlohmann::json::array();
    for (const auto& th : c.theta_star) j["theta_star"].push_back(model_to_json(th));
    j["t_star"] = c.t_star;
    j["N"] = c.N_list;
    j["T"] = c.T;
    j["gamma"] = c.gamma;
    j["alpha"] = c.alpha;
    j["replications"] = c.replications;
    j["seed"] = c.seed;
    j["horizon_multiple"] = c.horizon_multiple;
    j["cap_multiple"] = c.cap_multiple;
    return j;
}

ExperimentConfig experiment_from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    c.theta0 = model_from_json(j.at("theta0"));
    for (const auto& th : j.at("theta_star")) c.theta_star.push_back(model_from_json(th));
    c.t_star = j.at("t_star").get<std::vector<double>>();
    c.N_list = j.at("N").get<std::vector<std::size_t>>();
    c.T = j.value("T", 20.0);
    c.gamma = j.value("gamma", 0.1);
    c.alpha = j.value("alpha", 0.05);
    c.replications = j.value("replications", std::size_t{100});
    c.seed = j.value("seed", std::uint64_t{0});
    c.horizon_multiple = j.value("horizon_multiple", 3.0);
    c.cap_multiple = j.value("cap_multiple", 2.0);
    c.validate();
    return c;
}

}  // namespace gou
