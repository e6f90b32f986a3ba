#include "gou/basis.hpp"

#include <cmath>

#include "gou/errors.hpp"

namespace gou {

namespace {
constexpr double kTwoPi = 6.28318530717958647692;
constexpr double kSqrt2 = 1.41421356237309504880;
}  // namespace

void BasisSpec::validate() const {
    require(p1 >= 1, "BasisSpec: p1 must be >= 1 (the constant function is mandatory)");
    require(p2 >= 0, "BasisSpec: p2 must be >= 0");
}

void eval_basis_into(const BasisSpec& spec, double t, double* out) {
    const double u = t - std::floor(t);  // 1-periodic reduction
    out[0] = 1.0;
    for (int k = 1; k < spec.p1; ++k) out[k] = kSqrt2 * std::cos(kTwoPi * k * u);
    for (int j = 1; j <= spec.p2; ++j) out[spec.p1 + j - 1] = kSqrt2 * std::sin(kTwoPi * j * u);
}

Eigen::VectorXd eval_basis(const BasisSpec& spec, double t) {
    spec.validate();
    Eigen::VectorXd v(spec.dim());
    eval_basis_into(spec, t, v.data());
    return v;
}

}  // namespace gou
