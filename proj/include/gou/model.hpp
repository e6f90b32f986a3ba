#pragma once

#include <Eigen/Dense>
#include <utility>

#include "gou/basis.hpp"

#include "json.hpp"

namespace gou {

// Drift parameters theta = (mu, a) of dX = (mu' phi(t) - a X) dt + sigma dB.
struct GouModel {
    Eigen::VectorXd mu;
    double a = 1.0;
    double sigma = 1.0;
    BasisSpec basis;

    int p() const { return basis.dim(); }
    // theta = (mu_1, ..., mu_p, a)
    Eigen::VectorXd theta() const;
    void validate() const;
};

// a_k = a/(a^2+4pi^2(k-1)^2), b_k = 2pi(k-1)/(a^2+4pi^2(k-1)^2), k >= 1.
std::pair<double, double> ab_coeffs(double a, int k);

// Stationary drift mean h~(t); 1-periodic.
double htilde(const GouModel& model, double t);

// The (p+1)x(p+1) limit matrix [I_p, Lambda; Lambda', omega]. Validated
// symmetric positive definite (eigenvalues > 1e-10).
Eigen::MatrixXd sigma_matrix(const GouModel& model);

// Drift constants of the two detectors under the alternative.
double kappa_q(const GouModel& theta0, const GouModel& theta_star);
double kappa_gamma(const GouModel& theta0, const GouModel& theta_star);

nlohmann::json model_to_json(const GouModel& model);
GouModel model_from_json(const nlohmann::json& j);

}  // namespace gou
