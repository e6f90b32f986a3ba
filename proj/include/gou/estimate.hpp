#pragma once

#include <Eigen/Dense>
#include <cstddef>

#include "gou/simulate.hpp"

namespace gou {

// Regression data of the discretized SDE: Y_i = (X_{t_i}-X_{t_{i-1}})/sqrt(delta),
// Z_i = sqrt(delta)*(phi(t_{i-1}), -X_{t_{i-1}}).
struct DiscretizedSample {
    Eigen::VectorXd y;
    Eigen::MatrixXd z;  // n x (p+1)
    double delta = 0.0;
    double T = 0.0;  // window length n*delta
    std::size_t n = 0;
};

struct EstimationResult {
    Eigen::VectorXd theta_hat;
    Eigen::MatrixXd sigma_n;  // Z'Z/T, accumulated row by row
    Eigen::VectorXd sum_z;    // sum of design rows, same accumulation pass
    double sigma2_hat = 0.0;  // realized quadratic variation over the window
    std::size_t n_used = 0;
    double condition = 0.0;   // singular-value ratio of Z
};

// Rows i = from_index..to_index (1-based observation indices); row i uses
// the left endpoint t_{i-1} = (i-1)*delta.
DiscretizedSample build_design(const Trajectory& traj, const BasisSpec& basis,
                               std::size_t from_index, std::size_t to_index);

// Least squares by SVD; rejects condition numbers above 1e12.
EstimationResult fit_theta(const DiscretizedSample& sample);

// (1/n) sum (X_{t_i}-X_{t_{i-1}})^2/delta over the index range.
double realized_qv_sigma2(const Trajectory& traj, std::size_t from_index, std::size_t to_index);

Eigen::VectorXd residuals(const DiscretizedSample& sample, const Eigen::VectorXd& theta_hat);

// Quadrature approximation of the continuous-record MLE: trapezoid rule
// for the time integrals, left-point (Ito) sums for the stochastic ones.
Eigen::VectorXd mle_continuous(const Trajectory& traj, const BasisSpec& basis);

nlohmann::json estimation_to_json(const EstimationResult& r);

}  // namespace gou
