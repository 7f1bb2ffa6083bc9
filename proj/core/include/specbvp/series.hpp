#pragma once
// Truncated Taylor jets of matrix-valued analytic functions of lambda,
// used for forward-mode lambda-differentiation of kernel assembly: the
// coefficient of order m is d^m/dlambda^m / m! at the expansion point.
// Square roots and normal traces are propagated through Sylvester solves
// kappa X + X kappa = C, never assuming commutativity.

#include <vector>

#include "specbvp/util.hpp"

namespace specbvp {

struct MatSeries {
  std::vector<Mat> c;  // c[j] = j-th Taylor coefficient
  int order() const { return static_cast<int>(c.size()) - 1; }
  const Mat& value() const { return c.at(0); }
};

MatSeries series_constant(const Mat& m, int order);
// the scalar function lambda itself, as an N x N multiple of the identity
MatSeries series_lambda(Cplx lambda0, int n, int order);
MatSeries series_add(const MatSeries& a, const MatSeries& b);
MatSeries series_sub(const MatSeries& a, const MatSeries& b);
MatSeries series_mul(const MatSeries& a, const MatSeries& b);
MatSeries series_scale(const MatSeries& a, Cplx factor);
// left/right multiplication by a constant matrix
MatSeries series_lmul(const Mat& m, const MatSeries& a);
MatSeries series_rmul(const MatSeries& a, const Mat& m);
MatSeries series_inverse(const MatSeries& a);

// solves a X + X b = c; throws IdentityError when the solve is singular
// (spectra of a and -b intersect)
Mat sylvester_solve(const Mat& a, const Mat& b, const Mat& c);

// jets of X(lambda) with kappa X + X kappa = rhs order by order
MatSeries series_sylvester_pair(const MatSeries& kappa, const MatSeries& rhs);

// jets of kappa(lambda) = (pk - lambda)^{1/2} from the base value:
// kappa0 k_r + k_r kappa0 = -delta_{r,1} I - sum_{0<j<r} k_j k_{r-j}
MatSeries kappa_series(const Mat& kappa0, int order);

std::vector<Cplx> series_trace(const MatSeries& a);

}  // namespace specbvp
