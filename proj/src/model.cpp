#include "gou/model.hpp"

#include <cmath>

#include "gou/errors.hpp"

namespace gou {

namespace {
constexpr double kTwoPi = 6.28318530717958647692;
constexpr double kSqrt2 = 1.41421356237309504880;

// Coefficient of mu_row on the cos/sin pair at the row's own frequency
// in the expansion of h~. Cosine rows contribute a_k*phi + b_k*psi,
// sine rows a_k*psi - b_k*phi.
struct HtildeTerm {
    double on_cos;
    double on_sin;
};

HtildeTerm htilde_term(const BasisSpec& basis, double a, int row) {
    const int f = basis.freq(row);
    const auto [ak, bk] = ab_coeffs(a, f + 1);
    if (basis.is_sine(row)) return {-bk, ak};
    return {ak, bk};
}
}  // namespace

Eigen::VectorXd GouModel::theta() const {
    Eigen::VectorXd th(p() + 1);
    th.head(p()) = mu;
    th(p()) = a;
    return th;
}

void GouModel::validate() const {
    basis.validate();
    require(a > 0.0, "GouModel: mean-reversion a must be > 0");
    // sigma = 0 is admitted for noise-free simulation checks; estimation
    // and the limit matrix require sigma > 0.
    require(sigma >= 0.0, "GouModel: diffusion sigma must be >= 0");
    require(static_cast<int>(mu.size()) == basis.dim(),
            "GouModel: mu length must equal the basis dimension");
}

std::pair<double, double> ab_coeffs(double a, int k) {
    require(a > 0.0, "ab_coeffs: a must be > 0");
    require(k >= 1, "ab_coeffs: k must be >= 1");
    const double w = kTwoPi * (k - 1);
    const double denom = a * a + w * w;
    return {a / denom, w / denom};
}

double htilde(const GouModel& model, double t) {
    model.validate();
    const double u = t - std::floor(t);
    double h = 0.0;
    for (int row = 0; row < model.p(); ++row) {
        const int f = model.basis.freq(row);
        const HtildeTerm term = htilde_term(model.basis, model.a, row);
        double cv = 1.0, sv = 0.0;
        if (f > 0) {
            cv = kSqrt2 * std::cos(kTwoPi * f * u);
            sv = kSqrt2 * std::sin(kTwoPi * f * u);
        }
        h += model.mu(row) * (term.on_cos * cv + term.on_sin * sv);
    }
    return h;
}

Eigen::MatrixXd sigma_matrix(const GouModel& model) {
    model.validate();
    require(model.sigma > 0.0, "sigma_matrix: sigma must be > 0");
    const int p = model.p();
    Eigen::MatrixXd sig = Eigen::MatrixXd::Zero(p + 1, p + 1);
    sig.topLeftCorner(p, p).setIdentity();

    // Lambda_j = -integral h~ phi_j. Only the cos/sin pair at row j's
    // frequency survives the inner product; a partner term appears when
    // both the cosine and the sine at that frequency are in the basis.
    double omega = model.sigma * model.sigma / (2.0 * model.a);
    for (int row = 0; row < p; ++row) {
        const int f = model.basis.freq(row);
        const auto [ak, bk] = ab_coeffs(model.a, f + 1);
        double lam;
        if (!model.basis.is_sine(row)) {
            lam = model.mu(row) * ak;
            if (f >= 1 && f <= model.basis.p2) lam -= model.mu(model.basis.p1 + f - 1) * bk;
        } else {
            lam = model.mu(row) * ak;
            if (f <= model.basis.p1 - 1) lam += model.mu(f) * bk;
        }
        sig(row, p) = -lam;
        sig(p, row) = -lam;
        omega += model.mu(row) * model.mu(row) * (ak * ak + bk * bk);
    }
    sig(p, p) = omega;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sig);
    require(es.eigenvalues().minCoeff() > 1e-10,
            "sigma_matrix: result is not positive definite (internal error)");
    return sig;
}

double kappa_q(const GouModel& theta0, const GouModel& theta_star) {
    require(theta0.basis == theta_star.basis, "kappa_q: models must share the basis");
    theta0.validate();
    theta_star.validate();
    return theta0.a * (theta_star.mu(0) / theta_star.a - theta0.mu(0) / theta0.a);
}

double kappa_gamma(const GouModel& theta0, const GouModel& theta_star) {
    require(theta0.basis == theta_star.basis, "kappa_gamma: models must share the basis");
    const Eigen::MatrixXd sig = sigma_matrix(theta0);
    return (sig * (theta_star.theta() - theta0.theta())).norm();
}

nlohmann::json model_to_json(const GouModel& model) {
    nlohmann::json j;
    j["mu"] = std::vector<double>(model.mu.data(), model.mu.data() + model.mu.size());
    j["a"] = model.a;
    j["sigma"] = model.sigma;
    j["basis"] = {{"p1", model.basis.p1}, {"p2", model.basis.p2}};
    return j;
}

GouModel model_from_json(const nlohmann::json& j) {
    GouModel m;
    const auto mu = j.at("mu").get<std::vector<double>>();
    m.mu = Eigen::Map<const Eigen::VectorXd>(mu.data(), static_cast<Eigen::Index>(mu.size()));
    m.a = j.at("a").get<double>();
    m.sigma = j.at("sigma").get<double>();
    m.basis.p1 = j.at("basis").at("p1").get<int>();
    m.basis.p2 = j.at("basis").at("p2").get<int>();
    m.validate();
    return m;
}

}  // namespace gou
