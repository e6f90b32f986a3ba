#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "gou/critvals.hpp"
#include "gou/estimate.hpp"
#include "gou/gof.hpp"
#include "gou/simulate.hpp"

using namespace gou;

namespace {

const std::string kBin = GOU_CLI_BIN;

struct TempDir {
    std::string path;
    TempDir() {
        char tmpl[] = "/tmp/gou_cli_XXXXXX";
        path = mkdtemp(tmpl);
    }
    ~TempDir() {
        const std::string cmd = "rm -rf " + path;
        (void)std::system(cmd.c_str());
    }
    std::string file(const std::string& name) const { return path + "/" + name; }
};

int run_cmd(const std::string& cmd) {
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream is(path);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

const char* kScenarioJson = R"({
  "theta0":     {"mu": [1.0, 2.0], "a": 1.0, "sigma": 3.0, "basis": {"p1": 2, "p2": 0}},
  "theta_star": {"mu": [5.0, 3.0], "a": 1.0, "sigma": 3.0, "basis": {"p1": 2, "p2": 0}},
  "t_star": 0.0, "horizon_multiple": 3.0, "N": 320, "T": 16.0, "seed": 20240811
})";

const char* kScenarioGammaJson = R"({
  "theta0":     {"mu": [1.0, 2.0], "a": 1.0, "sigma": 3.0, "basis": {"p1": 2, "p2": 0}},
  "theta_star": {"mu": [15.0, 3.0], "a": 4.0, "sigma": 3.0, "basis": {"p1": 2, "p2": 0}},
  "t_star": 0.0, "horizon_multiple": 3.0, "N": 400, "T": 20.0, "seed": 20240811
})";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("simulate round-trips against the library bitwise") {
    TempDir dir;
    std::ofstream(dir.file("scenario.json")) << kScenarioJson;
    const int rc = run_cmd(kBin + " simulate --config " + dir.file("scenario.json") + " --out " +
                           dir.file("traj.csv") + " 2> /dev/null");
    REQUIRE(rc == 0);

    std::ifstream is(dir.file("traj.csv"));
    const Trajectory from_cli = read_trajectory_csv(is);

    GouModel m0, m1;
    m0.mu = Eigen::Vector2d(1.0, 2.0);
    m0.a = 1.0;
    m0.sigma = 3.0;
    m0.basis = {2, 0};
    m1 = m0;
    m1.mu = Eigen::Vector2d(5.0, 3.0);
    const Trajectory direct = simulate_trajectory({m0, m1, 0.0, 3.0}, 320, 16.0, 20240811);

    REQUIRE(from_cli.size() == direct.size());
    for (std::size_t i = 0; i < direct.size(); ++i) CHECK(from_cli.x[i] == direct.x[i]);
}

TEST_CASE("simulate then estimate reproduces the in-process fit bitwise") {
    TempDir dir;
    std::ofstream(dir.file("scenario.json")) << kScenarioJson;
    REQUIRE(run_cmd(kBin + " simulate --config " + dir.file("scenario.json") + " --out " +
                    dir.file("traj.csv") + " 2> /dev/null") == 0);
    REQUIRE(run_cmd(kBin + " estimate --traj " + dir.file("traj.csv") +
                    " --p1 2 --p2 0 --from 1 --to 320 --out " + dir.file("fit.json") +
                    " 2> /dev/null") == 0);

    std::ifstream is(dir.file("traj.csv"));
    const Trajectory traj = read_trajectory_csv(is);
    const auto fit = fit_theta(build_design(traj, {2, 0}, 1, 320));

    const auto j = nlohmann::json::parse(slurp(dir.file("fit.json")));
    const auto theta = j.at("theta_hat").get<std::vector<double>>();
    REQUIRE(theta.size() == 3);
    for (int i = 0; i < 3; ++i) CHECK(theta[static_cast<std::size_t>(i)] == fit.theta_hat(i));
    CHECK(j.at("sigma2_hat").get<double>() == fit.sigma2_hat);
}

TEST_CASE("gof subcommand reproduces the in-process report bitwise") {
    TempDir dir;
    std::ofstream(dir.file("scenario.json")) << kScenarioJson;
    REQUIRE(run_cmd(kBin + " simulate --config " + dir.file("scenario.json") + " --out " +
                    dir.file("traj.csv") + " 2> /dev/null") == 0);
    REQUIRE(run_cmd(kBin + " gof --traj " + dir.file("traj.csv") +
                    " --p1 2 --p2 0 --from 1 --to 320 --out " + dir.file("gof.json") +
                    " 2> /dev/null") == 0);

    std::ifstream is(dir.file("traj.csv"));
    const Trajectory traj = read_trajectory_csv(is);
    std::ifstream ts(std::string(GOU_DATA_DIR) + "/gof_quantiles.csv");
    REQUIRE(ts.good());
    const GofTable table = GofTable::read_csv(ts);
    const GofReport rep = gof_test(traj, {2, 0}, table, 1, 320);

    const auto j = nlohmann::json::parse(slurp(dir.file("gof.json")));
    CHECK(j.at("ks").get<double>() == rep.ks);
    CHECK(j.at("cvm").get<double>() == rep.cvm);
    CHECK(j.at("pvalue_ks").get<double>() == rep.pvalue_ks);
    CHECK(j.at("pvalue_cvm").get<double>() == rep.pvalue_cvm);
}

TEST_CASE("monitor stream mode raises an alarm on a strong change") {
    TempDir dir;
    std::ofstream(dir.file("scenario.json")) << kScenarioJson;
    REQUIRE(run_cmd(kBin + " simulate --config " + dir.file("scenario.json") + " --out " +
                    dir.file("traj.csv") + " 2> /dev/null") == 0);

    // turn the trajectory csv into a raw observation stream
    std::ifstream is(dir.file("traj.csv"));
    const Trajectory traj = read_trajectory_csv(is);
    std::ofstream obs(dir.file("obs.txt"));
    for (double x : traj.x) obs << x << "\n";
    obs.close();

    const int rc = run_cmd(kBin +
                           " monitor --detector q --stream --history 320 --delta 0.05"
                           " --p1 2 --p2 0 --gamma 0.1 --alpha 0.05 --c 2.2933 < " +
                           dir.file("obs.txt") + " > " + dir.file("mon.txt") + " 2> /dev/null");
    REQUIRE(rc == 0);
    const std::string out = slurp(dir.file("mon.txt"));
    CHECK(out.find("ALARM K=") != std::string::npos);
}

TEST_CASE("batch gamma monitor raises an alarm and records the run") {
    TempDir dir;
    std::ofstream(dir.file("scenario.json")) << kScenarioGammaJson;
    REQUIRE(run_cmd(kBin + " simulate --config " + dir.file("scenario.json") + " --out " +
                    dir.file("traj.csv") + " 2> /dev/null") == 0);
    REQUIRE(run_cmd(kBin + " monitor --detector gamma --traj " + dir.file("traj.csv") +
                    " --history 400 --p1 2 --p2 0 --gamma 0.1 --alpha 0.05 --c 3.0502 --out " +
                    dir.file("run.csv") + " > " + dir.file("alarm.txt") + " 2> /dev/null") == 0);
    const std::string alarm = slurp(dir.file("alarm.txt"));
    const std::string run = slurp(dir.file("run.csv"));
    CHECK(alarm.find("ALARM K=") != std::string::npos);
    CHECK(run.rfind("K,statistic,boundary,stopped", 0) == 0);
}

TEST_CASE("exit codes: usage errors give 2, domain errors give 1") {
    TempDir dir;
    CHECK(run_cmd(kBin + " no-such-subcommand 2> /dev/null") == 2);
    CHECK(run_cmd(kBin + " simulate 2> /dev/null") == 2);  // missing required --config
    CHECK(run_cmd(kBin + " estimate --traj " + dir.file("missing.csv") + " 2> /dev/null") == 1);
    CHECK(run_cmd(kBin + " --help > /dev/null 2>&1") == 0);
}

TEST_CASE("tabulate-critvals emits the requested grid") {
    TempDir dir;
    REQUIRE(run_cmd(kBin +
                    " tabulate-critvals --k 1 --gammas 0,0.1 --alphas 0.10,0.05"
                    " --B 500 --grid 200 --seed 5 --out " +
                    dir.file("cv.csv") + " 2> /dev/null") == 0);
    std::ifstream is(dir.file("cv.csv"));
    const auto table = CriticalValueTable::read_csv(is);
    CHECK(table.rows.size() == 4);
    CHECK_NOTHROW((void)table.lookup(1, 0.05, 0.10));
}

}  // TEST_SUITE
