#include "specbvp/halfline.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace specbvp {

void validate_mode_data(const ModeData& md, double tol) {
  const int n = static_cast<int>(md.pk.rows());
  const Mat id = Mat::Identity(n, n);
  if ((md.pi1 + md.pi2 - id).norm() > tol)
    throw IdentityError("mode data: pi1 + pi2 != I");
  if ((md.pi1 * md.pi1 - md.pi1).norm() > tol)
    throw IdentityError("mode data: pi1 is not idempotent");
  if ((md.pk - md.pk.adjoint()).norm() > tol * std::max(1.0, md.pk.norm()))
    throw IdentityError("mode data: pk is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Mat> es(md.pk);
  if (es.eigenvalues().minCoeff() < -tol * std::max(1.0, md.pk.norm()))
    throw IdentityError("mode data: pk has a negative eigenvalue");
}

double branch_distance(const Mat& pk, Cplx lambda) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (pk + pk.adjoint()));
  double dist = std::numeric_limits<double>::infinity();
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const double d = es.eigenvalues()(i);
    const double di = lambda.real() >= d ? std::abs(lambda.imag())
                                         : std::abs(lambda - Cplx(d, 0.0));
    dist = std::min(dist, di);
  }
  return dist;
}

Mat frak_a(const Mat& pk, Cplx lambda) {
  if (branch_distance(pk, lambda) < kBranchEps * (1.0 + std::abs(lambda))) {
    std::ostringstream os;
    os << "square root branch: lambda = " << lambda << " is within "
       << kBranchEps << " (1+|lambda|) of spec(pk) + [0,inf)";
    throw RefusalError(os.str());
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (pk + pk.adjoint()));
  const int n = static_cast<int>(pk.rows());
  Vec root(n);
  for (int i = 0; i < n; ++i)
    root(i) = std::sqrt(Cplx(es.eigenvalues()(i), 0.0) - lambda);
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().adjoint();
}

Mat k_kernel(const Mat& kappa, double x) { return Mat((-x * kappa).exp()); }

Mat g_kernel(const Mat& kappa, double x, double y) {
  return k_kernel(kappa, x) * k_kernel(kappa, y);
}

Mat q_kernel(const Mat& kappa, double x, double y) {
  Eigen::PartialPivLU<Mat> lu(kappa);
  return 0.5 * lu.solve(k_kernel(kappa, std::abs(x - y)));
}

ElementaryKernels elementary_kernels(const Mat& kappa) {
  ElementaryKernels ek;
  ek.kappa = kappa;
  const int n = static_cast<int>(kappa.rows());
  ek.trn_g = sylvester_solve(kappa, kappa, Mat::Identity(n, n));
  return ek;
}

ModeKernel mode_resolvent(const ModeData& md, Cplx lambda, ResolventRoute route,
                          int jet_order) {
  validate_mode_data(md);
  if (md.potential_support > 0.0 || md.potential)
    throw std::invalid_argument(
        "mode_resolvent is the exact (potential-free) path; use the "
        "Dirichlet-to-Neumann reduction for potentials");
  const int n = static_cast<int>(md.pk.rows());
  const Mat id = Mat::Identity(n, n);

  ModeKernel mk;
  mk.lambda = lambda;
  mk.jet_order = jet_order;
  mk.kappa = kappa_series(frak_a(md.pk, lambda), jet_order);
  const Mat& kappa0 = mk.kappa.c[0];

  const Mat pbp = md.pi2 * md.b * md.pi2;
  const Mat s0 = -kappa0 + (md.pi1 * kappa0 - kappa0 * md.pi1) + pbp;
  {
    Eigen::JacobiSVD<Mat> svd(s0);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    if (smin <= 1e-12 * std::max(1.0, smax)) {
      Eigen::JacobiSVD<Mat> svk(kappa0);
      std::ostringstream os;
      os << "reduced boundary operator singular at lambda = " << lambda
         << " (sigma_min = " << smin << ", nearest singular lambda within about "
         << 2.0 * smin * svk.singularValues().minCoeff() << ")";
      throw AssumptionError("2.7", os.str());
    }
  }

  const MatSeries kinv = series_inverse(mk.kappa);
  const MatSeries half_kinv = series_scale(kinv, 0.5);

  // reduced route: C = -S^{-1} pi2 - (1/2) kappa^{-1}
  const MatSeries commutator =
      series_sub(series_lmul(md.pi1, mk.kappa), series_rmul(mk.kappa, md.pi1));
  const MatSeries s_series =
      series_add(series_add(series_scale(mk.kappa, -1.0), commutator),
                 series_constant(pbp, jet_order));
  const MatSeries c_reduced = series_sub(
      series_scale(series_rmul(series_inverse(s_series), md.pi2), -1.0), half_kinv);

  // direct route: [pi1 + pi2 (b - kappa)] D = -pi2, C = D - (1/2) kappa^{-1}
  const MatSeries mprime = series_add(
      series_constant(md.pi1, jet_order),
      series_lmul(md.pi2, series_sub(series_constant(md.b, jet_order), mk.kappa)));
  const MatSeries c_direct = series_sub(
      series_scale(series_rmul(series_inverse(mprime), md.pi2), -1.0), half_kinv);

  const double cscale = std::max(1.0, c_reduced.c[0].norm());
  if ((c_reduced.c[0] - c_direct.c[0]).norm() > 1e-10 * cscale)
    throw IdentityError("resolvent routes disagree beyond 1e-10");

  mk.sg_coeff = (route == ResolventRoute::reduced) ? c_reduced : c_direct;

  // boundary rows of Q_+ + G must vanish identically in the data variable
  const Mat c0 = mk.sg_coeff.c[0];
  const Mat d0 = c0 + 0.5 * kinv.c[0];
  const double r1 = (md.pi1 * d0).norm();
  const double r2 =
      (md.pi2 * (0.5 * id + 0.5 * md.b * kinv.c[0] + (md.b - kappa0) * c0)).norm();
  if (r1 > 1e-10 * cscale || r2 > 1e-10 * cscale)
    throw IdentityError("assembled kernel violates the boundary condition rows");
  return mk;
}

Mat sg_kernel_value(const ModeKernel& mk, double x, double y) {
  return k_kernel(mk.kappa.c[0], x) * mk.sg_coeff.c[0] * k_kernel(mk.kappa.c[0], y);
}

Mat resolvent_kernel_value(const ModeKernel& mk, double x, double y) {
  return q_kernel(mk.kappa.c[0], x, y) + sg_kernel_value(mk, x, y);
}

Cplx trn_resolvent_sg(const ModeKernel& mk, int m) {
  if (m < 1) throw std::invalid_argument("derivative order m must be >= 1");
  if (m > kMaxTrnDerivative)
    throw std::invalid_argument("derivative order m exceeds the configured maximum");
  if (m - 1 > mk.jet_order)
    throw std::invalid_argument(
        "kernel carries too few lambda-jets; rebuild with a higher jet order");
  const MatSeries x = series_sylvester_pair(mk.kappa, mk.sg_coeff);
  return x.c[m - 1].trace();
}

Cplx trn_resolvent_sg_weighted(const ModeKernel& mk, const FirstOrderWeight& w) {
  const Mat x0 = sylvester_solve(mk.kappa.c[0], mk.kappa.c[0], mk.sg_coeff.c[0]);
  return (w.psi * (w.b1 - mk.kappa.c[0]) * x0).trace();
}

double mode_spectral_bound(const ModeData& md) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (md.pk + md.pk.adjoint()));
  const Mat pbp = md.pi2 * md.b * md.pi2;
  const double beta =
      pbp.size() == 0 ? 0.0 : Eigen::JacobiSVD<Mat>(pbp).singularValues().maxCoeff();
  return es.eigenvalues().minCoeff() - beta * beta;
}

Cplx mode_heat_sg(const ModeData& md, double t, const FirstOrderWeight* weight,
                  double theta, const HeatContour& contour) {
  if (!(t > 0.0))
    throw std::invalid_argument("heat time must be positive");
  if (t < 1e-6 || t > 10.0)
    throw RefusalError("heat time outside the supported window [1e-6, 10]");
  if (!(theta > 0.25 * kPi))
    throw RefusalError("heat construction needs a resolvent sector wider than pi/4");

  // clamp the hyperbola tilt so its asymptotes clear the spectral sector of
  // half-angle pi - 2 theta around the positive reals
  const double alpha = std::min(contour.alpha, 2.0 * theta - 0.5 * kPi - 0.05);
  if (alpha <= 0.05)
    throw RefusalError("resolvent sector too narrow for the heat contour");

  const double bound = mode_spectral_bound(md);
  const double sigma0 = bound - 0.1 * (1.0 + std::abs(bound));
  if (-t * sigma0 > 650.0)
    throw RefusalError("heat value below the representable range at this mode/time");

  const int nh = contour.n_half;
  const double h = 1.0818 / nh;
  const double mu_c = 4.4921 * nh / t;

  CompensatedCplx acc;
  double first_mag = 0.0, last_mag = 0.0, max_mag = 0.0;
  for (int j = -nh; j < nh; ++j) {
    const double u = (j + 0.5) * h;
    const Cplx w = kI * u - alpha;
    const Cplx z = mu_c * (1.0 + std::sin(w));
    const Cplx zp = mu_c * kI * std::cos(w);
    const ModeKernel mk = mode_resolvent(md, sigma0 - z, ResolventRoute::reduced, 0);
    const Cplx g = weight != nullptr ? trn_resolvent_sg_weighted(mk, *weight)
                                     : trn_resolvent_sg(mk, 1);
    const Cplx term = h * zp * std::exp(t * (z - sigma0)) * g / (2.0 * kPi * kI);
    acc.add(term);
    const double mag = std::abs(term);
    max_mag = std::max(max_mag, mag);
    if (j == -nh) first_mag = mag;
    if (j == nh - 1) last_mag = mag;
  }
  const Cplx s = acc.value();
  // compare tails against the integrand scale as well: exact structural
  // cancellation of the sum must not read as non-convergence
  const double denom = std::max({std::abs(s), 1e-8 * max_mag, 1e-280});
  if (max_mag > 1e-250 &&
      std::max(first_mag, last_mag) / denom > contour.tail_tol)
    throw RefusalError("heat quadrature has not converged (tail terms too large); "
                       "raise the node count or widen the sector");
  return s;
}

}  // namespace specbvp
