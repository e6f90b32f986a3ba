#include "gou/estimate.hpp"

#include <cmath>
#include <sstream>

#include "gou/errors.hpp"

namespace gou {

DiscretizedSample build_design(const Trajectory& traj, const BasisSpec& basis,
                               std::size_t from_index, std::size_t to_index) {
    traj.validate();
    basis.validate();
    require(from_index >= 1 && from_index <= to_index && to_index < traj.size(),
            "build_design: need 1 <= from <= to <= trajectory length - 1");

    const std::size_t n = to_index - from_index + 1;
    const int p = basis.dim();
    const double sq = std::sqrt(traj.delta);

    DiscretizedSample s;
    s.delta = traj.delta;
    s.T = static_cast<double>(n) * traj.delta;
    s.n = n;
    s.y.resize(static_cast<Eigen::Index>(n));
    s.z.resize(static_cast<Eigen::Index>(n), p + 1);
    std::vector<double> phi(p);
    for (std::size_t i = from_index; i <= to_index; ++i) {
        const Eigen::Index r = static_cast<Eigen::Index>(i - from_index);
        s.y(r) = (traj.x[i] - traj.x[i - 1]) / sq;
        eval_basis_into(basis, traj.t(i - 1), phi.data());
        for (int k = 0; k < p; ++k) s.z(r, k) = sq * phi[k];
        s.z(r, p) = -sq * traj.x[i - 1];
    }
    return s;
}

EstimationResult fit_theta(const DiscretizedSample& sample) {
    require(sample.n >= 1 && sample.y.size() == sample.z.rows(),
            "fit_theta: malformed sample");
    const Eigen::Index d = sample.z.cols();
    require(sample.z.rows() >= d, "fit_theta: fewer rows than parameters");

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sample.z, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(d - 1);
    const double cond = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    if (!(cond < 1e12)) {
        std::ostringstream msg;
        msg << "fit_theta: design matrix is ill-conditioned (condition estimate " << cond << ")";
        throw Error(msg.str());
    }

    EstimationResult r;
    r.theta_hat = svd.solve(sample.y);
    r.condition = cond;
    r.n_used = sample.n;
    r.sigma2_hat = sample.y.squaredNorm() / static_cast<double>(sample.n);

    // One pass accumulates both Z'Z and sum Z_i so that the first column
    // of sigma_n equals sqrt(delta)/T * sum_z at the bit level.
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd sz = Eigen::VectorXd::Zero(d);
    for (Eigen::Index i = 0; i < sample.z.rows(); ++i) {
        const auto row = sample.z.row(i);
        g.noalias() += row.transpose() * row;
        sz += row.transpose();
    }
    r.sigma_n = g / sample.T;
    r.sum_z = sz;
    return r;
}

double realized_qv_sigma2(const Trajectory& traj, std::size_t from_index, std::size_t to_index) {
    traj.validate();
    require(from_index >= 1 && from_index <= to_index && to_index < traj.size(),
            "realized_qv_sigma2: need 1 <= from <= to <= trajectory length - 1");
    double acc = 0.0;
    for (std::size_t i = from_index; i <= to_index; ++i) {
        const double d = traj.x[i] - traj.x[i - 1];
        acc += d * d;
    }
    const double n = static_cast<double>(to_index - from_index + 1);
    return acc / (n * traj.delta);
}

Eigen::VectorXd residuals(const DiscretizedSample& sample, const Eigen::VectorXd& theta_hat) {
    require(theta_hat.size() == sample.z.cols(), "residuals: theta dimension mismatch");
    return sample.y - sample.z * theta_hat;
}

Eigen::VectorXd mle_continuous(const Trajectory& traj, const BasisSpec& basis) {
    traj.validate();
    basis.validate();
    const int p = basis.dim();
    const std::size_t M = traj.size() - 1;
    const double dt = traj.delta;

    // Trapezoid quadrature of the Q integrals over [0, M*delta].
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(p + 1, p + 1);
    Eigen::VectorXd rt = Eigen::VectorXd::Zero(p + 1);
    std::vector<double> phi(p);
    Eigen::VectorXd v(p + 1);
    for (std::size_t i = 0; i <= M; ++i) {
        eval_basis_into(basis, traj.t(i), phi.data());
        for (int k = 0; k < p; ++k) v(k) = phi[k];
        v(p) = -traj.x[i];
        const double w = (i == 0 || i == M) ? 0.5 * dt : dt;
        q.noalias() += w * (v * v.transpose());
        if (i < M) {
            // Ito left-point sums for the R~ entries
            const double dx = traj.x[i + 1] - traj.x[i];
            rt.noalias() += v * dx;
        }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q);
    const double emax = es.eigenvalues().maxCoeff();
    const double emin = es.eigenvalues().minCoeff();
    const double cond = emin > 0.0 ? emax / emin : std::numeric_limits<double>::infinity();
    if (!(cond < 1e12)) {
        std::ostringstream msg;
        msg << "mle_continuous: Q matrix is singular or ill-conditioned (condition estimate "
            << cond << ")";
        throw Error(msg.str());
    }
    return es.eigenvectors() *
           (es.eigenvectors().transpose() * rt).cwiseQuotient(es.eigenvalues());
}

nlohmann::json estimation_to_json(const EstimationResult& r) {
    nlohmann::json j;
    j["theta_hat"] =
        std::vector<double>(r.theta_hat.data(), r.theta_hat.data() + r.theta_hat.size());
    j["sigma2_hat"] = r.sigma2_hat;
    j["n"] = r.n_used;
    j["condition"] = r.condition;
    return j;
}

}  // namespace gou
