#pragma once

#include <Eigen/Dense>

namespace gou {

// Fourier drift basis on [0,1): the constant plus cosines at frequencies
// 1..p1-1 and sines at frequencies 1..p2, all orthonormal in L^2([0,1]).
// Row order: (1, sqrt2*cos 2*pi*t, ..., sqrt2*cos 2*pi*(p1-1)t,
//             sqrt2*sin 2*pi*t, ..., sqrt2*sin 2*pi*p2*t).
struct BasisSpec {
    int p1 = 1;  // cosine terms including the constant (frequencies 0..p1-1)
    int p2 = 0;  // sine terms (frequencies 1..p2)

    int dim() const { return p1 + p2; }
    bool is_sine(int row) const { return row >= p1; }
    int freq(int row) const { return row < p1 ? row : row - p1 + 1; }
    void validate() const;
    bool operator==(const BasisSpec&) const = default;
};

Eigen::VectorXd eval_basis(const BasisSpec& spec, double t);

// Hot-path variant: writes the p basis values into out.
void eval_basis_into(const BasisSpec& spec, double t, double* out);

}  // namespace gou
