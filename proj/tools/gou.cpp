// Command-line front end: simulation, estimation, goodness of fit,
// sequential monitoring, Monte Carlo tabulations, and the experiment
// grid. Exit codes: 0 success, 1 domain error, 2 usage error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "gou/critvals.hpp"
#include "gou/detect.hpp"
#include "gou/errors.hpp"
#include "gou/experiments.hpp"
#include "gou/gof.hpp"
#include "gou/kernels.hpp"
#include "gou/parallel.hpp"
#include "gou/simulate.hpp"

namespace {

using namespace gou;

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag,
                           std::optional<std::uint64_t> config = std::nullopt) {
    if (flag) return *flag;
    if (config) return *config;
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

void log_config(const std::string& cmd, const nlohmann::json& effective) {
    std::cerr << "[gou] " << cmd << " " << effective.dump() << "\n";
}

std::string default_critval_path() {
    if (const char* env = std::getenv("GOU_CRITVAL_TABLE")) return env;
    return std::string(GOU_DATA_DIR) + "/critical_values.csv";
}

std::string default_gof_path() {
    if (const char* env = std::getenv("GOU_GOF_TABLE")) return env;
    return std::string(GOU_DATA_DIR) + "/gof_quantiles.csv";
}

CriticalValueTable load_critvals(const std::string& path) {
    std::ifstream is(path);
    require(is.good(), "cannot open critical value table: " + path);
    return CriticalValueTable::read_csv(is);
}

GofTable load_gof_table(const std::string& path) {
    std::ifstream is(path);
    require(is.good(), "cannot open gof quantile table: " + path);
    return GofTable::read_csv(is);
}

Trajectory load_trajectory(const std::string& path, std::size_t history) {
    std::ifstream is(path);
    require(is.good(), "cannot open trajectory: " + path);
    Trajectory t = read_trajectory_csv(is);
    if (history > 0) t.n_historical = history;
    return t;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    require(os.good(), "cannot open output file: " + path);
    return os;
}

std::vector<double> parse_list(const std::string& csv) {
    std::vector<double> out;
    std::istringstream is(csv);
    std::string cell;
    while (std::getline(is, cell, ',')) out.push_back(std::stod(cell));
    require(!out.empty(), "empty list: " + csv);
    return out;
}

int run(int argc, char** argv) {
    CLI::App app{"generalized Ornstein-Uhlenbeck simulation, estimation and "
                 "sequential change-point monitoring"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "worker threads (default: all cores)");

    // ---- simulate ----------------------------------------------------
    auto* sim = app.add_subcommand("simulate", "exact simulation of a change-point scenario");
    std::string sim_config, sim_out = "trajectory.csv";
    std::optional<std::uint64_t> sim_seed;
    std::optional<std::size_t> sim_n;
    std::optional<double> sim_t;
    std::uint64_t sim_rep = 0;
    bool sim_em = false;
    sim->add_option("--config", sim_config, "scenario json")->required();
    sim->add_option("--out", sim_out, "output csv (i,t,x)");
    sim->add_option("--seed", sim_seed, "master seed (overrides config)");
    sim->add_option("--n", sim_n, "historical sample size N (overrides config)");
    sim->add_option("--t", sim_t, "historical horizon T (overrides config)");
    sim->add_option("--replicate", sim_rep, "replication index (rng substream)");
    sim->add_flag("--euler", sim_em, "use the Euler-Maruyama scheme on theta0 instead");

    // ---- estimate ----------------------------------------------------
    auto* est = app.add_subcommand("estimate", "least-squares drift fit on a window");
    std::string est_traj, est_out;
    int est_p1 = 2, est_p2 = 0;
    std::size_t est_from = 1, est_to = 0;
    bool est_mle = false;
    est->add_option("--traj", est_traj, "trajectory csv")->required();
    est->add_option("--p1", est_p1, "cosine terms incl. constant");
    est->add_option("--p2", est_p2, "sine terms");
    est->add_option("--from", est_from, "first observation index (1-based)");
    est->add_option("--to", est_to, "last observation index (default: end)");
    est->add_option("--out", est_out, "output json (default: stdout)");
    est->add_flag("--mle", est_mle, "also report the quadrature continuous-record MLE");

    // ---- gof ----------------------------------------------------------
    auto* gof = app.add_subcommand("gof", "goodness-of-fit test on standardized residuals");
    std::string gof_traj, gof_out, gof_table = default_gof_path();
    int gof_p1 = 2, gof_p2 = 0;
    std::size_t gof_from = 1, gof_to = 0;
    gof->add_option("--traj", gof_traj, "trajectory csv")->required();
    gof->add_option("--p1", gof_p1, "cosine terms incl. constant");
    gof->add_option("--p2", gof_p2, "sine terms");
    gof->add_option("--from", gof_from, "first observation index");
    gof->add_option("--to", gof_to, "last observation index (default: end)");
    gof->add_option("--table", gof_table, "quantile table csv");
    gof->add_option("--out", gof_out, "output json (default: stdout)");

    // ---- monitor -------------------------------------------------------
    auto* mon = app.add_subcommand("monitor", "sequential change-point monitoring");
    std::string mon_detector = "gamma", mon_traj, mon_out, mon_table = default_critval_path();
    std::size_t mon_history = 0, mon_maxk = 0;
    int mon_p1 = 2, mon_p2 = 0;
    double mon_gamma = 0.1, mon_alpha = 0.05;
    std::optional<double> mon_c, mon_sigma, mon_delta;
    bool mon_stream = false;
    mon->add_option("--detector", mon_detector, "q or gamma")->check(CLI::IsMember({"q", "gamma"}));
    mon->add_option("--traj", mon_traj, "trajectory csv (batch mode)");
    mon->add_flag("--stream", mon_stream, "read observations from stdin");
    mon->add_option("--history", mon_history, "historical sample size N")->required();
    mon->add_option("--delta", mon_delta, "time step (required with --stream)");
    mon->add_option("--p1", mon_p1, "cosine terms incl. constant");
    mon->add_option("--p2", mon_p2, "sine terms");
    mon->add_option("--gamma", mon_gamma, "boundary exponent");
    mon->add_option("--alpha", mon_alpha, "nominal level");
    mon->add_option("--c", mon_c, "critical value (default: table lookup)");
    mon->add_option("--sigma", mon_sigma, "known sigma (default: estimate from history)");
    mon->add_option("--max-k", mon_maxk, "horizon cap on K (default 2N)");
    mon->add_option("--table", mon_table, "critical value table csv");
    mon->add_option("--out", mon_out, "detector run csv");

    // ---- tabulate-critvals ----------------------------------------------
    auto* tcv = app.add_subcommand("tabulate-critvals",
                                   "Monte Carlo critical values of sup ||B_k(t)||/t^gamma");
    std::string tcv_k = "1", tcv_gammas = "0,0.1,0.2,0.3,0.4,0.49",
                tcv_alphas = "0.10,0.05,0.025,0.01", tcv_out;
    std::size_t tcv_b = 50000, tcv_grid = 10000;
    std::optional<std::uint64_t> tcv_seed;
    tcv->add_option("--k,--ks", tcv_k, "dimensions, comma separated");
    tcv->add_option("--gammas,--gamma", tcv_gammas, "boundary exponents");
    tcv->add_option("--alphas,--alpha", tcv_alphas, "levels");
    tcv->add_option("--B", tcv_b, "replications");
    tcv->add_option("--grid", tcv_grid, "grid points");
    tcv->add_option("--seed", tcv_seed, "master seed");
    tcv->add_option("--out", tcv_out, "output csv (default: stdout)");

    // ---- tabulate-gof ---------------------------------------------------
    auto* tgf = app.add_subcommand("tabulate-gof", "Monte Carlo quantiles of the gof statistics");
    std::string tgf_n = "100,250,500,750,1000", tgf_out;
    std::size_t tgf_b = 100000;
    std::optional<std::uint64_t> tgf_seed;
    bool tgf_centered = false;
    tgf->add_option("--n,--ns", tgf_n, "sample sizes, comma separated");
    tgf->add_option("--B", tgf_b, "replications");
    tgf->add_option("--seed", tgf_seed, "master seed");
    tgf->add_flag("--centered", tgf_centered, "center the variance estimator");
    tgf->add_option("--out", tgf_out, "output csv (default: stdout)");

    // ---- experiment -------------------------------------------------------
    auto* exp = app.add_subcommand("experiment", "scenario grid with both detectors");
    std::string exp_config, exp_out = "results.csv", exp_power, exp_table = default_critval_path();
    std::optional<std::uint64_t> exp_seed;
    exp->add_option("--config", exp_config, "experiment json")->required();
    exp->add_option("--out", exp_out, "result csv");
    exp->add_option("--power-out", exp_power, "also write power curves csv");
    exp->add_option("--table", exp_table, "critical value table csv");
    exp->add_option("--seed", exp_seed, "master seed (overrides config)");

    // ---- power ------------------------------------------------------------
    auto* pow = app.add_subcommand("power", "power curves from a result csv");
    std::string pow_results, pow_out;
    pow->add_option("--results", pow_results, "result csv from 'experiment'")->required();
    pow->add_option("--out", pow_out, "output csv (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (sim->parsed()) {
        std::ifstream is(sim_config);
        require(is.good(), "cannot open scenario config: " + sim_config);
        nlohmann::json j = nlohmann::json::parse(is);
        ScenarioFile sf = scenario_from_json(j);
        const std::size_t N = sim_n.value_or(sf.N);
        const double T = sim_t.value_or(sf.T);
        const std::uint64_t seed = resolve_seed(sim_seed, sf.seed);
        nlohmann::json eff = scenario_to_json(sf.scenario, N, T, seed);
        eff["replicate"] = sim_rep;
        eff["euler"] = sim_em;
        log_config("simulate", eff);
        Trajectory traj =
            sim_em ? euler_maruyama_trajectory(sf.scenario.theta0, N, T, seed, sim_rep,
                                               sf.scenario.horizon_multiple)
                   : simulate_trajectory(sf.scenario, N, T, seed, sim_rep);
        auto os = open_out(sim_out);
        write_trajectory_csv(traj, os);
        return 0;
    }

    if (est->parsed()) {
        Trajectory traj = load_trajectory(est_traj, 0);
        const BasisSpec basis{est_p1, est_p2};
        const std::size_t to = est_to == 0 ? traj.size() - 1 : est_to;
        log_config("estimate", {{"traj", est_traj},
                                {"p1", est_p1},
                                {"p2", est_p2},
                                {"from", est_from},
                                {"to", to}});
        const DiscretizedSample sample = build_design(traj, basis, est_from, to);
        const EstimationResult fit = fit_theta(sample);
        nlohmann::json j = estimation_to_json(fit);
        if (est_mle) {
            const Eigen::VectorXd mle = mle_continuous(traj, basis);
            j["theta_check"] = std::vector<double>(mle.data(), mle.data() + mle.size());
        }
        if (est_out.empty())
            std::cout << j.dump(2) << "\n";
        else
            open_out(est_out) << j.dump(2) << "\n";
        return 0;
    }

    if (gof->parsed()) {
        Trajectory traj = load_trajectory(gof_traj, 0);
        const BasisSpec basis{gof_p1, gof_p2};
        const std::size_t to = gof_to == 0 ? traj.size() - 1 : gof_to;
        log_config("gof", {{"traj", gof_traj},
                           {"p1", gof_p1},
                           {"p2", gof_p2},
                           {"from", gof_from},
                           {"to", to},
                           {"table", gof_table}});
        const GofTable table = load_gof_table(gof_table);
        const GofReport rep = gof_test(traj, basis, table, gof_from, to);
        if (gof_out.empty())
            std::cout << gof_report_to_json(rep).dump(2) << "\n";
        else
            open_out(gof_out) << gof_report_to_json(rep).dump(2) << "\n";
        return 0;
    }

    if (mon->parsed()) {
        const BasisSpec basis{mon_p1, mon_p2};
        DetectorConfig dc;
        dc.gamma = mon_gamma;
        dc.alpha = mon_alpha;
        dc.max_k = mon_maxk;
        if (mon_sigma) dc.sigma_known = *mon_sigma;
        const bool is_q = mon_detector == "q";
        if (mon_c) {
            dc.c = *mon_c;
        } else {
            const int dim = is_q ? 1 : basis.dim() + 1;
            dc.c = load_critvals(mon_table).lookup(dim, mon_gamma, mon_alpha);
        }
        log_config("monitor", {{"detector", mon_detector},
                               {"history", mon_history},
                               {"gamma", mon_gamma},
                               {"alpha", mon_alpha},
                               {"c", dc.c},
                               {"stream", mon_stream}});

        if (mon_stream) {
            require(mon_delta.has_value(), "monitor --stream requires --delta");
            require(mon_history >= 2, "monitor --stream requires --history >= 2");
            std::vector<double> history;
            history.reserve(mon_history + 1);
            double x;
            while (history.size() < mon_history + 1 && std::cin >> x) history.push_back(x);
            require(history.size() == mon_history + 1,
                    "monitor --stream: stream ended inside the historical window");
            std::optional<QMonitor> qm;
            std::optional<GammaMonitor> gm;
            if (is_q)
                qm.emplace(history, *mon_delta, basis, dc);
            else
                gm.emplace(history, *mon_delta, basis, dc);
            const std::size_t cap = dc.max_k == 0 ? 2 * mon_history : dc.max_k;
            bool alarmed = false;
            while (std::cin >> x) {
                const std::size_t k = is_q ? qm->push(x) : gm->push(x);
                const auto stopped = is_q ? qm->stopped_at() : gm->stopped_at();
                if (stopped && !alarmed) {
                    std::cout << "ALARM K=" << *stopped << std::endl;
                    alarmed = true;
                }
                if (k >= cap) break;
            }
            return 0;
        }

        require(!mon_traj.empty(), "monitor: need --traj or --stream");
        Trajectory traj = load_trajectory(mon_traj, mon_history);
        const DetectorRun run =
            is_q ? monitor_q(traj, basis, dc) : monitor_gamma(traj, basis, dc);
        if (run.detected()) std::cout << "ALARM K=" << *run.stopped_at << "\n";
        if (!mon_out.empty()) {
            auto os = open_out(mon_out);
            run.write_csv(os);
        }
        return 0;
    }

    if (tcv->parsed()) {
        const std::uint64_t seed = resolve_seed(tcv_seed);
        std::vector<int> ks;
        for (double v : parse_list(tcv_k)) ks.push_back(static_cast<int>(v));
        const std::vector<double> gammas = parse_list(tcv_gammas);
        const std::vector<double> alphas = parse_list(tcv_alphas);
        log_config("tabulate-critvals", {{"k", tcv_k},
                                         {"gammas", tcv_gammas},
                                         {"alphas", tcv_alphas},
                                         {"B", tcv_b},
                                         {"grid", tcv_grid},
                                         {"seed", seed},
                                         {"backend", kernels::backend_name(
                                                         kernels::active_backend())}});
        const CriticalValueTable table =
            tabulate_critical_values(ks, gammas, alphas, tcv_b, tcv_grid, seed, threads);
        if (tcv_out.empty())
            table.write_csv(std::cout);
        else {
            auto os = open_out(tcv_out);
            table.write_csv(os);
        }
        return 0;
    }

    if (tgf->parsed()) {
        const std::uint64_t seed = resolve_seed(tgf_seed);
        log_config("tabulate-gof",
                   {{"n", tgf_n}, {"B", tgf_b}, {"seed", seed}, {"centered", tgf_centered}});
        GofTable table;
        for (double nv : parse_list(tgf_n)) {
            const auto rows = tabulate_gof_quantiles(static_cast<std::size_t>(nv), tgf_b,
                                                     seed, tgf_centered, threads);
            table.rows.insert(table.rows.end(), rows.begin(), rows.end());
        }
        if (tgf_out.empty())
            table.write_csv(std::cout);
        else {
            auto os = open_out(tgf_out);
            table.write_csv(os);
        }
        return 0;
    }

    if (exp->parsed()) {
        std::ifstream is(exp_config);
        require(is.good(), "cannot open experiment config: " + exp_config);
        ExperimentConfig config = experiment_from_json(nlohmann::json::parse(is));
        if (exp_seed) config.seed = *exp_seed;
        nlohmann::json eff = experiment_to_json(config);
        eff["table"] = exp_table;
        log_config("experiment", eff);
        const CriticalValueTable table = load_critvals(exp_table);
        const std::vector<GridRow> rows = run_grid(config, table, threads);
        {
            auto os = open_out(exp_out);
            write_grid_csv(rows, os);
        }
        if (!exp_power.empty()) {
            auto os = open_out(exp_power);
            write_power_csv(rows, os);
        }
        return 0;
    }

    if (pow->parsed()) {
        std::ifstream is(pow_results);
        require(is.good(), "cannot open results: " + pow_results);
        const std::vector<GridRow> rows = read_grid_csv(is);
        log_config("power", {{"results", pow_results}, {"rows", rows.size()}});
        if (pow_out.empty())
            write_power_csv(rows, std::cout);
        else {
            auto os = open_out(pow_out);
            write_power_csv(rows, os);
        }
        return 0;
    }

    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const gou::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
