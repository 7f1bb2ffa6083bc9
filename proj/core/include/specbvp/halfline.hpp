#pragma once
// Exact per-mode resolvent data on the half-line for -d^2/dx^2 + pk - lambda
// under the two-row boundary condition pi1 g0 u = 0, pi2 (g1 u + b g0 u) = 0
// (g1 = du/dx at x = 0, pointing into the domain, so the decaying solution
// e^{-x kappa} has Dirichlet-to-Neumann block exactly -kappa).
//
// The resolvent splits as Q_+ + G: Q is the whole-line kernel
// (1/2) kappa^{-1} e^{-kappa|x-y|} and the singular Green kernel is
// e^{-x kappa} C e^{-y kappa}, with C carried as lambda-jets so that the
// derivatives required by resolvent-power traces come out of the same
// assembly arithmetic.

#include <functional>

#include "specbvp/series.hpp"

namespace specbvp {

inline constexpr double kBranchEps = 1e-8;
inline constexpr int kMaxTrnDerivative = 6;

struct ModeData {
  Mat pk;                                    // Hermitian nonnegative block of P'
  Mat pi1, pi2;                              // complementary idempotents
  Mat b;                                     // Robin-part multiplier
  std::function<double(double)> potential;   // optional scalar v(x), support [0, c]
  double potential_support = 0.0;            // c; 0 means no potential
};
void validate_mode_data(const ModeData& md, double tol = 1e-12);

// distance from lambda to spec(pk) + [0, inf)
double branch_distance(const Mat& pk, Cplx lambda);
// principal square root (pk - lambda)^{1/2}; Re spec > 0; refuses within
// kBranchEps (1 + |lambda|) of the branch set
Mat frak_a(const Mat& pk, Cplx lambda);

// e^{-x kappa}
Mat k_kernel(const Mat& kappa, double x);
// e^{-x kappa} e^{-y kappa}
Mat g_kernel(const Mat& kappa, double x, double y);
// (1/2) kappa^{-1} e^{-kappa |x-y|}
Mat q_kernel(const Mat& kappa, double x, double y);

struct ElementaryKernels {
  Mat kappa;
  Mat trn_g;   // integral of e^{-x kappa} e^{-x kappa}: solves kappa X + X kappa = I
};
ElementaryKernels elementary_kernels(const Mat& kappa);

enum class ResolventRoute { reduced, direct };

struct ModeKernel {
  MatSeries kappa;      // jets of (pk - lambda)^{1/2}
  MatSeries sg_coeff;   // jets of C
  Cplx lambda{};
  int jet_order = 0;
};

// Builds kappa and C at lambda (jets to jet_order).  The reduced route goes
// through S = -kappa + [-kappa, pi1] + pi2 b pi2 via C = -S^{-1} pi2 -
// (1/2) kappa^{-1}; the direct route solves [pi1 + pi2(b - kappa)] D = -pi2.
// Both are always evaluated at order zero and must agree to 1e-10.
ModeKernel mode_resolvent(const ModeData& md, Cplx lambda,
                          ResolventRoute route = ResolventRoute::reduced,
                          int jet_order = 0);

// value of the singular Green kernel / full resolvent kernel at (x, y)
Mat sg_kernel_value(const ModeKernel& mk, double x, double y);
Mat resolvent_kernel_value(const ModeKernel& mk, double x, double y);

// fiber trace of the (m-1)-st Taylor coefficient of tr_n G(lambda):
// X with kappa X + X kappa = C, i.e. d^{m-1}/dlambda^{m-1}/(m-1)! tr X
Cplx trn_resolvent_sg(const ModeKernel& mk, int m = 1);

// first-order trace weight psi (d/dx + b1) applied before the normal trace:
// tr[ psi (b1 - kappa) X ]
struct FirstOrderWeight {
  Mat psi;
  Mat b1;
};
Cplx trn_resolvent_sg_weighted(const ModeKernel& mk, const FirstOrderWeight& w);

struct HeatContour {
  int n_half = 24;        // node count is 2 n_half
  double alpha = 1.1721;  // hyperbola tilt; clamped to the sector when narrow
  double tail_tol = 1e-12;
};

// tr_n-then-fiber trace of the heat singular Green term, by quadrature of
// e^{-t lambda} over a spectrum-hugging hyperbola; theta is the resolvent
// sector half-angle established for the scenario (must exceed pi/4)
Cplx mode_heat_sg(const ModeData& md, double t,
                  const FirstOrderWeight* weight = nullptr,
                  double theta = 0.5 * kPi,
                  const HeatContour& contour = {});

// lower bound estimate for the realization spectrum of one mode (used for
// contour placement and summation cutoffs): min eig pk - ||pi2 b pi2||^2
double mode_spectral_bound(const ModeData& md);

}  // namespace specbvp
