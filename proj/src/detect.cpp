#include "gou/detect.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "gou/errors.hpp"

namespace gou {

void DetectorConfig::validate() const {
    require(gamma >= 0.0 && gamma < 0.5, "DetectorConfig: gamma must be in [0, 1/2)");
    require(c > 0.0, "DetectorConfig: critical value c must be > 0");
    if (sigma_known) require(*sigma_known > 0.0, "DetectorConfig: known sigma must be > 0");
}

double ell_gamma(double s, double gamma) {
    require(s >= 0.0, "ell_gamma: s must be >= 0");
    if (gamma == 0.0) return 1.0;
    if (s == 0.0) return 0.0;
    return std::pow(s / (1.0 + s), gamma);
}

double g1(std::size_t N, std::size_t K, double gamma) {
    require(N >= 1 && K >= 1, "g1: need N >= 1, K >= 1");
    const double n = static_cast<double>(N);
    const double s = static_cast<double>(K) / n;
    return std::sqrt(n) * (1.0 + s) * ell_gamma(s, gamma);
}

Eigen::MatrixXd matrix_sqrt_psd(const Eigen::MatrixXd& m) {
    require(m.rows() == m.cols() && m.rows() > 0, "matrix_sqrt_psd: need a square matrix");
    require((m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-10,
            "matrix_sqrt_psd: input is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    Eigen::VectorXd ev = es.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        require(ev(i) >= -1e-8, "matrix_sqrt_psd: input is not positive semidefinite");
        if (ev(i) < 0.0) ev(i) = 0.0;
    }
    return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

namespace {

// Historical accumulation shared by both monitors: normal equations over
// rows 1..N plus the realized quadratic variation.
struct HistoryFit {
    Eigen::MatrixXd gram;
    Eigen::VectorXd zty;
    double sigma2 = 0.0;
};

HistoryFit accumulate_history(const std::vector<double>& history, double delta,
                              const BasisSpec& basis) {
    require(history.size() >= 2, "monitor: history needs at least two observations");
    require(delta > 0.0, "monitor: delta must be > 0");
    basis.validate();
    const int d = basis.dim() + 1;
    const double sq = std::sqrt(delta);
    HistoryFit h;
    h.gram = Eigen::MatrixXd::Zero(d, d);
    h.zty = Eigen::VectorXd::Zero(d);
    std::vector<double> phi(basis.dim());
    Eigen::VectorXd z(d);
    for (std::size_t i = 1; i < history.size(); ++i) {
        eval_basis_into(basis, static_cast<double>(i - 1) * delta, phi.data());
        for (int k = 0; k < basis.dim(); ++k) z(k) = sq * phi[k];
        z(d - 1) = -sq * history[i - 1];
        const double y = (history[i] - history[i - 1]) / sq;
        h.gram.noalias() += z * z.transpose();
        h.zty.noalias() += z * y;
        h.sigma2 += y * y;
    }
    h.sigma2 /= static_cast<double>(history.size() - 1);
    return h;
}

Eigen::VectorXd solve_checked(const Eigen::MatrixXd& gram, const Eigen::VectorXd& zty,
                              const char* who) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    const double emax = es.eigenvalues().maxCoeff();
    const double emin = es.eigenvalues().minCoeff();
    const double cond2 = emin > 0.0 ? emax / emin : std::numeric_limits<double>::infinity();
    // cond(Z) = sqrt(cond(Z'Z))
    if (!(std::sqrt(cond2) < 1e12)) {
        std::ostringstream msg;
        msg << who << ": singular or ill-conditioned fit (condition estimate "
            << std::sqrt(cond2) << ")";
        throw Error(msg.str());
    }
    return es.eigenvectors() *
           (es.eigenvectors().transpose() * zty).cwiseQuotient(es.eigenvalues());
}

}  // namespace

QMonitor::QMonitor(const std::vector<double>& history, double delta, const BasisSpec& basis,
                   const DetectorConfig& config)
    : basis_(basis), config_(config), delta_(delta) {
    config_.validate();
    const HistoryFit h = accumulate_history(history, delta, basis);
    n_ = history.size() - 1;
    sqdt_ = std::sqrt(delta);
    theta_ = solve_checked(h.gram, h.zty, "monitor_q");
    sigma_ = config_.sigma_known ? *config_.sigma_known : std::sqrt(h.sigma2);
    x_prev_ = history.back();
    if (config_.max_k == 0) config_.max_k = 2 * n_;
}

double QMonitor::boundary() const {
    return config_.c * sigma_ * g1(n_, std::max<std::size_t>(k_, 1), config_.gamma);
}

std::size_t QMonitor::push(double x) {
    ++k_;
    const std::size_t i = n_ + k_;  // observation index of the new point
    std::vector<double> phi(basis_.dim());
    eval_basis_into(basis_, static_cast<double>(i - 1) * delta_, phi.data());
    const double y = (x - x_prev_) / sqdt_;
    double zth = 0.0;
    for (int k = 0; k < basis_.dim(); ++k) zth += sqdt_ * phi[k] * theta_(k);
    zth += -sqdt_ * x_prev_ * theta_(basis_.dim());
    q_sum_ += y - zth;
    x_prev_ = x;
    if (!stopped_at_ && std::abs(q_sum_) >= boundary()) stopped_at_ = k_;
    return k_;
}

GammaMonitor::GammaMonitor(const std::vector<double>& history, double delta,
                           const BasisSpec& basis, const DetectorConfig& config)
    : basis_(basis), config_(config), delta_(delta) {
    config_.validate();
    const HistoryFit h = accumulate_history(history, delta, basis);
    n_ = history.size() - 1;
    sqdt_ = std::sqrt(delta);
    const double T = static_cast<double>(n_) * delta;
    sqrt_T_ = std::sqrt(T);
    gram_ = h.gram;
    zty_ = h.zty;
    theta_ref_ = solve_checked(gram_, zty_, "monitor_gamma");
    weight_ =
        config_.full_sigma_weighting ? Eigen::MatrixXd(gram_ / T) : matrix_sqrt_psd(gram_ / T);
    sigma_ = config_.sigma_known ? *config_.sigma_known : std::sqrt(h.sigma2);
    x_prev_ = history.back();
    if (config_.max_k == 0) config_.max_k = 2 * n_;
}

Eigen::VectorXd GammaMonitor::solve_current() const {
    return solve_checked(gram_, zty_, "monitor_gamma");
}

Eigen::VectorXd GammaMonitor::theta_current() const { return solve_current(); }

double GammaMonitor::boundary() const {
    return config_.c * sigma_ *
           ell_gamma(static_cast<double>(k_) / static_cast<double>(n_), config_.gamma);
}

std::size_t GammaMonitor::push(double x) {
    ++k_;
    const std::size_t i = n_ + k_;
    const int d = basis_.dim() + 1;
    std::vector<double> phi(basis_.dim());
    eval_basis_into(basis_, static_cast<double>(i - 1) * delta_, phi.data());
    Eigen::VectorXd z(d);
    for (int k = 0; k < basis_.dim(); ++k) z(k) = sqdt_ * phi[k];
    z(d - 1) = -sqdt_ * x_prev_;
    const double y = (x - x_prev_) / sqdt_;
    gram_.noalias() += z * z.transpose();
    zty_.noalias() += z * y;
    x_prev_ = x;

    const Eigen::VectorXd theta_k = solve_current();
    stat_ = (sqrt_T_ * (weight_ * (theta_k - theta_ref_))).norm();
    if (!stopped_at_ && stat_ >= boundary()) stopped_at_ = k_;
    return k_;
}

namespace {

template <typename Monitor>
DetectorRun drive(const Trajectory& traj, const BasisSpec& basis, const DetectorConfig& config,
                  DetectorKind kind) {
    traj.validate();
    const std::size_t n = traj.n_historical;
    require(n >= 2 && n < traj.size(), "monitor: trajectory must extend past the history");

    DetectorConfig cfg = config;
    if (cfg.max_k == 0) cfg.max_k = 2 * n;

    const std::vector<double> history(traj.x.begin(), traj.x.begin() + n + 1);
    Monitor mon(history, traj.delta, basis, cfg);

    DetectorRun run;
    run.kind = kind;
    run.config = cfg;
    run.n_historical = n;
    run.sigma_hat = mon.sigma_hat();
    const std::size_t k_max = std::min(cfg.max_k, traj.size() - 1 - n);
    run.statistic.reserve(k_max);
    run.boundary.reserve(k_max);
    for (std::size_t k = 1; k <= k_max; ++k) {
        mon.push(traj.x[n + k]);
        run.statistic.push_back(std::abs(mon.statistic()));
        run.boundary.push_back(mon.boundary());
    }
    run.stopped_at = mon.stopped_at();
    return run;
}

}  // namespace

DetectorRun monitor_q(const Trajectory& traj, const BasisSpec& basis,
                      const DetectorConfig& config) {
    return drive<QMonitor>(traj, basis, config, DetectorKind::Q);
}

DetectorRun monitor_gamma(const Trajectory& traj, const BasisSpec& basis,
                          const DetectorConfig& config) {
    return drive<GammaMonitor>(traj, basis, config, DetectorKind::Gamma);
}

void DetectorRun::write_csv(std::ostream& os) const {
    os << "K,statistic,boundary,stopped\n";
    char buf[128];
    for (std::size_t i = 0; i < statistic.size(); ++i) {
        const int stopped = (stopped_at && *stopped_at == i + 1) ? 1 : 0;
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%d\n", i + 1, statistic[i], boundary[i],
                      stopped);
        os << buf;
    }
}

}  // namespace gou
