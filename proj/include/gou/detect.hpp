#pragma once

#include <optional>

#include "gou/estimate.hpp"

namespace gou {

enum class DetectorKind { Q, Gamma };

struct DetectorConfig {
    double gamma = 0.1;                 // boundary exponent, in [0, 1/2)
    double c = 0.0;                     // critical value c(alpha, gamma)
    double alpha = 0.0;                 // nominal level (metadata)
    std::size_t max_k = 0;              // horizon cap on K; 0 means 2N
    std::optional<double> sigma_known;  // else estimated from the history
    // Weight the estimator difference by Sigma_N itself instead of its
    // symmetric square root. Detects drift-aligned changes much earlier
    // but is NOT size-calibrated by the bundled ||B_k|| critical values;
    // off by default.
    bool full_sigma_weighting = false;
    void validate() const;
};

// ell_gamma(s) = (s/(1+s))^gamma.
double ell_gamma(double s, double gamma);

// g1(N,K) = sqrt(N) * (1 + K/N) * ell_gamma(K/N).
double g1(std::size_t N, std::size_t K, double gamma);

// Symmetric PSD square root via eigendecomposition. Eigenvalues in
// [-1e-8, 0] are clamped to zero; below that the input is rejected.
Eigen::MatrixXd matrix_sqrt_psd(const Eigen::MatrixXd& m);

struct DetectorRun {
    DetectorKind kind = DetectorKind::Q;
    std::vector<double> statistic;  // statistic at K = 1, 2, ...
    std::vector<double> boundary;
    std::optional<std::size_t> stopped_at;
    DetectorConfig config;
    std::size_t n_historical = 0;
    double sigma_hat = 0.0;

    bool detected() const { return stopped_at.has_value(); }
    void write_csv(std::ostream& os) const;
};

// Residual-CUSUM monitor: Q(N,K) = sum of post-history residuals against
// the fixed historical fit; alarm when |Q| >= c*sigma*g1(N,K).
class QMonitor {
public:
    QMonitor(const std::vector<double>& history, double delta, const BasisSpec& basis,
             const DetectorConfig& config);

    // Consume one new observation X_{N+K}; returns the updated K.
    std::size_t push(double x);

    std::size_t k() const { return k_; }
    std::optional<std::size_t> stopped_at() const { return stopped_at_; }
    double statistic() const { return q_sum_; }
    double boundary() const;
    double sigma_hat() const { return sigma_; }
    const Eigen::VectorXd& theta_hat() const { return theta_; }

private:
    BasisSpec basis_;
    DetectorConfig config_;
    std::size_t n_ = 0;
    double delta_ = 0.0;
    double sqdt_ = 0.0;
    Eigen::VectorXd theta_;
    double sigma_ = 0.0;
    double x_prev_ = 0.0;
    double q_sum_ = 0.0;
    std::size_t k_ = 0;
    std::optional<std::size_t> stopped_at_;
};

// Estimator-difference monitor: Gamma(N,K) =
// sqrt(T) * Sigma_N^{1/2} (theta_{N+K} - theta_N), with Sigma_N from the
// historical window; alarm when ||Gamma|| >= c*sigma*ell_gamma(K/N).
// The running fit keeps the normal equations Z'Z and Z'Y over 1..N+K and
// refits in O(p^3) per step.
class GammaMonitor {
public:
    GammaMonitor(const std::vector<double>& history, double delta, const BasisSpec& basis,
                 const DetectorConfig& config);

    std::size_t push(double x);

    std::size_t k() const { return k_; }
    std::optional<std::size_t> stopped_at() const { return stopped_at_; }
    double statistic() const { return stat_; }
    double boundary() const;
    double sigma_hat() const { return sigma_; }
    const Eigen::VectorXd& theta_ref() const { return theta_ref_; }
    Eigen::VectorXd theta_current() const;

private:
    Eigen::VectorXd solve_current() const;

    BasisSpec basis_;
    DetectorConfig config_;
    std::size_t n_ = 0;
    double delta_ = 0.0;
    double sqdt_ = 0.0;
    double sqrt_T_ = 0.0;
    Eigen::MatrixXd gram_;      // Z'Z over 1..N+K
    Eigen::VectorXd zty_;       // Z'Y over 1..N+K
    Eigen::MatrixXd weight_;
    Eigen::VectorXd theta_ref_;
    double sigma_ = 0.0;
    double x_prev_ = 0.0;
    double stat_ = 0.0;
    std::size_t k_ = 0;
    std::optional<std::size_t> stopped_at_;
};

// Batch drivers: history = the first traj.n_historical observations,
// monitoring over the remainder up to max_k.
DetectorRun monitor_q(const Trajectory& traj, const BasisSpec& basis,
                      const DetectorConfig& config);
DetectorRun monitor_gamma(const Trajectory& traj, const BasisSpec& basis,
                          const DetectorConfig& config);

}  // namespace gou
