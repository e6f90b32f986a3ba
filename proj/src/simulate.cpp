#include "gou/simulate.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "gou/errors.hpp"
#include "gou/kernels.hpp"

namespace gou {

namespace {
constexpr double kTwoPi = 6.28318530717958647692;
constexpr double kSqrt2 = 1.41421356237309504880;
}  // namespace

void Trajectory::validate() const {
    require(x.size() >= 2, "Trajectory: need at least two observations");
    require(delta > 0.0, "Trajectory: delta must be > 0");
}

void ChangePointScenario::validate() const {
    theta0.validate();
    theta_star.validate();
    require(theta0.basis == theta_star.basis, "scenario: models must share the basis");
    require(theta0.sigma == theta_star.sigma, "scenario: only drift parameters may change");
    require(t_star >= 0.0, "scenario: t_star must be >= 0");
    require(horizon_multiple > 0.0, "scenario: horizon_multiple must be > 0");
}

ExactStepCoeffs exact_step_coeffs(const GouModel& model, double delta) {
    model.validate();
    require(delta > 0.0, "exact_step: delta must be > 0");
    ExactStepCoeffs c;
    c.basis = model.basis;
    c.decay = std::exp(-model.a * delta);
    c.noise_sd = model.sigma * std::sqrt((1.0 - std::exp(-2.0 * model.a * delta)) / (2.0 * model.a));
    c.on_cos.resize(model.p());
    c.on_sin.resize(model.p());
    for (int row = 0; row < model.p(); ++row) {
        const int f = model.basis.freq(row);
        const auto [ak, bk] = ab_coeffs(model.a, f + 1);
        const double w = kTwoPi * f;
        const double cd = std::cos(w * delta);
        const double sd = std::sin(w * delta);
        // A_k, B_k: step integrals of e^{a s} against cos/sin at the
        // row's frequency.
        const double A = ak * cd - ak * c.decay + bk * sd;
        const double B = bk * c.decay - bk * cd + ak * sd;
        if (!model.basis.is_sine(row)) {
            c.on_cos[row] = model.mu(row) * A;
            c.on_sin[row] = -model.mu(row) * B;
        } else {
            c.on_cos[row] = model.mu(row) * B;
            c.on_sin[row] = model.mu(row) * A;
        }
    }
    return c;
}

double exact_step_with(const ExactStepCoeffs& c, double t_prev, double x_prev, double z) {
    const double u = t_prev - std::floor(t_prev);
    double drift = 0.0;
    for (std::size_t row = 0; row < c.on_cos.size(); ++row) {
        const int f = c.basis.freq(static_cast<int>(row));
        double cv = 1.0, sv = 0.0;
        if (f > 0) {
            cv = kSqrt2 * std::cos(kTwoPi * f * u);
            sv = kSqrt2 * std::sin(kTwoPi * f * u);
        }
        drift += c.on_cos[row] * cv + c.on_sin[row] * sv;
    }
    return c.decay * x_prev + drift + c.noise_sd * z;
}

double exact_step(const GouModel& model, double t_prev, double x_prev, double delta, double z) {
    return exact_step_with(exact_step_coeffs(model, delta), t_prev, x_prev, z);
}

Trajectory simulate_trajectory(const ChangePointScenario& scenario, std::size_t N, double T,
                               std::uint64_t seed, std::uint64_t replicate, double x0) {
    scenario.validate();
    require(N >= 2, "simulate_trajectory: N must be >= 2");
    require(T > 0.0, "simulate_trajectory: T must be > 0");

    const double delta = T / static_cast<double>(N);
    const std::size_t steps =
        static_cast<std::size_t>(std::ceil(scenario.horizon_multiple * static_cast<double>(N)));
    const std::size_t change_index =
        N + static_cast<std::size_t>(std::floor(scenario.t_star * static_cast<double>(N)));

    const ExactStepCoeffs c0 = exact_step_coeffs(scenario.theta0, delta);
    const ExactStepCoeffs c1 = exact_step_coeffs(scenario.theta_star, delta);

    std::vector<double> z(steps);
    kernels::normal_fill(seed, replicate, z);

    Trajectory traj;
    traj.delta = delta;
    traj.n_historical = N;
    traj.seed = seed;
    traj.x.resize(steps + 1);
    traj.x[0] = x0;
    for (std::size_t i = 1; i <= steps; ++i) {
        const ExactStepCoeffs& c = (i <= change_index) ? c0 : c1;
        traj.x[i] = exact_step_with(c, static_cast<double>(i - 1) * delta, traj.x[i - 1], z[i - 1]);
    }
    return traj;
}

Trajectory euler_maruyama_trajectory(const GouModel& model, std::size_t N, double T,
                                     std::uint64_t seed, std::uint64_t replicate,
                                     double horizon_multiple, double x0) {
    model.validate();
    require(N >= 1, "euler_maruyama_trajectory: N must be >= 1");
    require(T > 0.0, "euler_maruyama_trajectory: T must be > 0");

    const double delta = T / static_cast<double>(N);
    const std::size_t steps =
        static_cast<std::size_t>(std::ceil(horizon_multiple * static_cast<double>(N)));
    const double sqdt = std::sqrt(delta);

    std::vector<double> z(steps);
    kernels::normal_fill(seed, replicate, z);

    Trajectory traj;
    traj.delta = delta;
    traj.n_historical = N;
    traj.seed = seed;
    traj.x.resize(steps + 1);
    traj.x[0] = x0;
    std::vector<double> phi(model.p());
    for (std::size_t i = 1; i <= steps; ++i) {
        const double t_prev = static_cast<double>(i - 1) * delta;
        eval_basis_into(model.basis, t_prev, phi.data());
        double drift = 0.0;
        for (int k = 0; k < model.p(); ++k) drift += model.mu(k) * phi[k];
        drift -= model.a * traj.x[i - 1];
        traj.x[i] = traj.x[i - 1] + drift * delta + model.sigma * sqdt * z[i - 1];
    }
    return traj;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& os) {
    os << "i,t,x\n";
    char buf[64];
    for (std::size_t i = 0; i < traj.x.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g\n", i, traj.t(i), traj.x[i]);
        os << buf;
    }
}

Trajectory read_trajectory_csv(std::istream& is) {
    Trajectory traj;
    std::string line;
    require(static_cast<bool>(std::getline(is, line)), "trajectory csv: empty input");
    require(line.rfind("i,t,x", 0) == 0, "trajectory csv: expected header 'i,t,x'");
    double t1 = 0.0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        std::getline(ls, cell, ',');
        std::getline(ls, cell, ',');
        const double t = std::stod(cell);
        std::getline(ls, cell, ',');
        traj.x.push_back(std::stod(cell));
        if (traj.x.size() == 2) t1 = t;
    }
    require(traj.x.size() >= 2, "trajectory csv: need at least two rows");
    traj.delta = t1;
    traj.validate();
    return traj;
}

nlohmann::json scenario_to_json(const ChangePointScenario& s, std::size_t N, double T,
                                std::uint64_t seed) {
    nlohmann::json j;
    j["theta0"] = model_to_json(s.theta0);
    j["theta_star"] = model_to_json(s.theta_star);
    j["t_star"] = s.t_star;
    j["horizon_multiple"] = s.horizon_multiple;
    j["N"] = N;
    j["T"] = T;
    j["seed"] = seed;
    return j;
}

ScenarioFile scenario_from_json(const nlohmann::json& j) {
    ScenarioFile f;
    f.scenario.theta0 = model_from_json(j.at("theta0"));
    f.scenario.theta_star = model_from_json(j.at("theta_star"));
    f.scenario.t_star = j.at("t_star").get<double>();
    f.scenario.horizon_multiple = j.value("horizon_multiple", 3.0);
    f.N = j.at("N").get<std::size_t>();
    f.T = j.at("T").get<double>();
    f.seed = j.value("seed", std::uint64_t{0});
    f.scenario.validate();
    return f;
}

}  // namespace gou
