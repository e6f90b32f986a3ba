#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gou/model.hpp"

namespace gou {

// Equally spaced discrete observations X_{t_i}, t_i = i*delta.
struct Trajectory {
    std::vector<double> x;
    double delta = 0.0;
    std::size_t n_historical = 0;  // N: observations assumed change-free
    std::uint64_t seed = 0;
    std::string scenario;

    std::size_t size() const { return x.size(); }
    double t(std::size_t i) const { return static_cast<double>(i) * delta; }
    void validate() const;
};

// Drift switches from theta0 to theta_star after observation index
// N + floor(t_star*N); only drift parameters change.
struct ChangePointScenario {
    GouModel theta0;
    GouModel theta_star;
    double t_star = 0.0;
    double horizon_multiple = 3.0;
    void validate() const;
};

// Per-step constants of the exact transition for a fixed step size:
// X_i = decay*X_{i-1} + sum_j mu_j*(on_cos_j*phi_fj(t_{i-1})
//        + on_sin_j*psi_fj(t_{i-1})) + noise_sd*z_i.
struct ExactStepCoeffs {
    double decay = 0.0;
    double noise_sd = 0.0;
    std::vector<double> on_cos;  // per basis row, mu folded in
    std::vector<double> on_sin;
    BasisSpec basis;
};

ExactStepCoeffs exact_step_coeffs(const GouModel& model, double delta);

double exact_step_with(const ExactStepCoeffs& c, double t_prev, double x_prev, double z);

// One-shot form (recomputes the coefficients).
double exact_step(const GouModel& model, double t_prev, double x_prev, double delta, double z);

// Exact simulation over ceil(horizon_multiple*N)+1 points. Deterministic
// given (seed, replicate): the trajectory owns Philox substream
// (seed, replicate).
Trajectory simulate_trajectory(const ChangePointScenario& scenario, std::size_t N, double T,
                               std::uint64_t seed, std::uint64_t replicate = 0, double x0 = 0.0);

// Euler-Maruyama scheme; validation oracle for the exact simulator.
Trajectory euler_maruyama_trajectory(const GouModel& model, std::size_t N, double T,
                                     std::uint64_t seed, std::uint64_t replicate = 0,
                                     double horizon_multiple = 1.0, double x0 = 0.0);

void write_trajectory_csv(const Trajectory& traj, std::ostream& os);
Trajectory read_trajectory_csv(std::istream& is);

nlohmann::json scenario_to_json(const ChangePointScenario& s, std::size_t N, double T,
                                std::uint64_t seed);
struct ScenarioFile {
    ChangePointScenario scenario;
    std::size_t N = 0;
    double T = 0.0;
    std::uint64_t seed = 0;
};
ScenarioFile scenario_from_json(const nlohmann::json& j);

}  // namespace gou
