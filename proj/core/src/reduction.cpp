#include "specbvp/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>

#include <Eigen/Sparse>
#include <unsupported/Eigen/MatrixFunctions>

namespace specbvp {
namespace {

double smallest_sval(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

double largest_sval(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

// S = A_DN + [A_DN, Pi1] + Pi2 B Pi2, commutator formed exactly
Mat s_block(const Mat& a_dn, const Mat& pi1, const Mat& pi2, const Mat& b) {
  return a_dn + (a_dn * pi1 - pi1 * a_dn) + pi2 * b * pi2;
}

Mat sprime_block(const Mat& a_dn, const Mat& pi1) {
  return a_dn - (a_dn * pi1 - pi1 * a_dn);
}

void require_invertible(const Mat& m, const char* what, int k, Cplx lambda) {
  const double smin = smallest_sval(m);
  if (smin <= 1e-12 * std::max(1.0, largest_sval(m))) {
    std::ostringstream oss;
    oss.precision(9);
    oss << "reduced operator " << what << " singular at lambda = ("
        << lambda.real() << ", " << lambda.imag() << "), mode k = " << k
        << " (sigma_min = " << smin << ")";
    throw AssumptionError("2.7", oss.str());
  }
}

double min_re_sqrt_shifted(const Mat& pk, Cplx lambda) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (pk + pk.adjoint()));
  double out = std::numeric_limits<double>::infinity();
  for (int i = 0; i < es.eigenvalues().size(); ++i)
    out = std::min(out, std::sqrt(Cplx(es.eigenvalues()(i), 0.0) - lambda).real());
  return out;
}

Vec interp_column(const Mat& vals, const RVec& gx, double x) {
  const Eigen::Index m = gx.size();
  if (x <= gx(0)) return vals.col(0);
  if (x >= gx(m - 1)) {
    // inside the last cell by rounding -> clamp; truly beyond -> zero extension
    if (x <= gx(m - 1) + 1e-12 * (1.0 + std::abs(gx(m - 1))))
      return vals.col(m - 1);
    return Vec::Zero(vals.rows());
  }
  const double* first = gx.data();
  const double* it = std::upper_bound(first, first + m, x);
  Eigen::Index j = (it - first) - 1;  // gx(j) <= x < gx(j+1)
  const double t = (x - gx(j)) / (gx(j + 1) - gx(j));
  return (1.0 - t) * vals.col(j) + t * vals.col(j + 1);
}

}  // namespace

void validate_scenario(const Scenario& sc) {
  const int n = sc.basis.fiber_dim;
  if (!(sc.a_or_pprime.basis == sc.basis) || !(sc.pi1.basis == sc.basis) ||
      !(sc.b.basis == sc.basis))
    throw std::invalid_argument("scenario: mismatched mode bases");
  if (sc.a_or_pprime.order != 1 && sc.a_or_pprime.order != 2)
    throw std::invalid_argument("scenario: interior operator must have order 1 or 2");
  if (sc.b.order < 0 || sc.b.order > 1)
    throw std::invalid_argument("scenario: boundary multiplier must have order <= 1");
  if (!(sc.theta > 0.0) || sc.theta > kPi / 2 + 1e-15)
    throw std::invalid_argument("scenario: theta must lie in (0, pi/2]");
  if (sc.potential && sc.potential_support <= 0.0)
    throw std::invalid_argument("scenario: potential needs a positive support bound");
  if (sc.sigma) {
    if (sc.sigma->rows() != n || sc.sigma->cols() != n)
      throw std::invalid_argument("scenario: sigma has the wrong fiber dimension");
    if (((*sc.sigma) * (*sc.sigma) + Mat::Identity(n, n)).norm() > 1e-10)
      throw std::invalid_argument("scenario: sigma must satisfy sigma^2 = -I");
  }
  validate_projection(sc.pi1);
  for (int k = sc.basis.k_min(); k <= sc.basis.k_max(); ++k)
    validate_mode_data(scenario_mode(sc, k));

  if (sc.basis.geometry == Geometry::Circle) {
    const TangentialOperator pprime = sc.a_or_pprime.order == 2
                                          ? sc.a_or_pprime
                                          : build_square(sc.a_or_pprime);
    if (pprime.symbol) {
      const double defect = principal_commutator_defect(sc.pi1, pprime);
      if (defect > 1e-8) {
        std::ostringstream oss;
        oss << "principal symbols of Pi1 and P' fail to commute: defect = "
            << defect;
        throw AssumptionError("2.4", oss.str());
      }
      const EllipticityReport er =
          check_parameter_ellipticity(pprime, sc.pi1, sc.b, sc.theta);
      if (!er.passed) {
        std::ostringstream oss;
        oss.precision(9);
        oss << "parameter-ellipticity scan failed at theta = " << sc.theta
            << ": min sigma = " << er.min_singular_value << " at |mu| = "
            << er.worst_abs_mu << ", arg mu = " << er.worst_arg_mu;
        throw AssumptionError("2.7", oss.str());
      }
    }
  }
}

Mat scenario_pk(const Scenario& sc, int k) {
  const Mat& blk = mode_matrix(sc.a_or_pprime, k);
  if (sc.a_or_pprime.order == 2) return blk;
  if (sc.a_or_pprime.order == 1) return blk * blk;
  throw std::invalid_argument("scenario_pk: interior operator must have order 1 or 2");
}

ModeData scenario_mode(const Scenario& sc, int k) {
  const int n = sc.basis.fiber_dim;
  ModeData md;
  md.pk = scenario_pk(sc, k);
  md.pi1 = sc.pi1.block(k);
  md.pi2 = Mat::Identity(n, n) - md.pi1;
  md.b = mode_matrix(sc.b, k);
  md.potential = sc.potential;
  md.potential_support = sc.potential_support;
  return md;
}

double scenario_kappa_min(const Scenario& sc, Cplx lambda) {
  double out = std::numeric_limits<double>::infinity();
  for (int k = sc.basis.k_min(); k <= sc.basis.k_max(); ++k)
    out = std::min(out, min_re_sqrt_shifted(scenario_pk(sc, k), lambda));
  return out;
}

// ---------------------------------------------------------------------------
// Dirichlet-to-Neumann family

DtnMethod dtn_method(const Scenario& sc) {
  return sc.potential ? DtnMethod::riccati : DtnMethod::exact;
}

Mat dtn(const Scenario& sc, int k, Cplx lambda, std::optional<DtnMethod> force,
        const RiccatiOptions& opt) {
  const int n = sc.basis.fiber_dim;
  const Mat pk = scenario_pk(sc, k);
  const Mat kap = frak_a(pk, lambda);
  const DtnMethod method = force.value_or(dtn_method(sc));
  if (method == DtnMethod::exact) {
    if (sc.potential)
      throw std::invalid_argument("dtn: exact route unavailable with a potential");
    return -kap;
  }

  const double km = min_re_sqrt_shifted(pk, lambda);
  if (km < 1e-8)
    throw RefusalError("dtn: decay scale 1/Re kappa diverges at this lambda");
  const double support = sc.potential ? sc.potential_support : 0.0;
  const double xmax = support + 10.0 / km;
  const Mat id = Mat::Identity(n, n);
  auto q_at = [&](double s) {  // s measured from xmax toward the boundary
    const double x = xmax - s;
    Mat q = pk - lambda * id;
    if (sc.potential && x <= sc.potential_support)
      q += sc.potential(x) * id;
    return q;
  };
  // integrate dR/ds = R^2 - q(s) (the stable direction of the Riccati flow)
  auto rhs = [&](double s, const Mat& r) { return (r * r - q_at(s)).eval(); };

  // Dormand-Prince 5(4) embedded pair
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                          c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695,
                          e4 = 393.0 / 640, e5 = -92097.0 / 339200,
                          e6 = 187.0 / 2100, e7 = 1.0 / 40;

  Mat r = -kap;
  double s = 0.0;
  double h = xmax / 100.0;
  const double blow = opt.blowup_factor * (1.0 + kap.norm());
  while (s < xmax) {
    h = std::min(h, xmax - s);
    const Mat k1 = rhs(s, r);
    const Mat k2 = rhs(s + c2 * h, r + h * (a21 * k1));
    const Mat k3 = rhs(s + c3 * h, r + h * (a31 * k1 + a32 * k2));
    const Mat k4 = rhs(s + c4 * h, r + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Mat k5 = rhs(s + c5 * h,
                       r + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Mat k6 = rhs(s + h, r + h * (a61 * k1 + a62 * k2 + a63 * k3 +
                                       a64 * k4 + a65 * k5));
    const Mat y5 = r + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Mat k7 = rhs(s + h, y5);
    const Mat y4 = r + h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 +
                            e7 * k7);
    const double err = (y5 - y4).norm();
    const double tol = opt.abs_tol + opt.rel_tol * std::max(r.norm(), y5.norm());
    if (err <= tol) {
      s += h;
      r = y5;
      if (r.norm() > blow)
        throw RefusalError(
            "dtn: Riccati blow-up (lambda too close to the Dirichlet spectrum)");
      if (s >= xmax) break;
    }
    const double grow = err > 0.0 ? 0.9 * std::pow(tol / err, 0.2) : 5.0;
    h *= std::clamp(grow, 0.2, 5.0);
    if (h < 1e-12 * xmax)
      throw RefusalError("dtn: Riccati step-size underflow");
  }
  return r;
}

// ---------------------------------------------------------------------------
// Reduced boundary families

ReducedFamily s_family(const Scenario& sc, Cplx lambda, ReducedKind which) {
  ReducedFamily out;
  out.basis = sc.basis;
  out.kind = which;
  out.lambda = lambda;
  const int n = sc.basis.fiber_dim;
  const Mat id = Mat::Identity(n, n);
  for (int k = sc.basis.k_min(); k <= sc.basis.k_max(); ++k) {
    const Mat a_dn = dtn(sc, k, lambda);
    const Mat pi1 = sc.pi1.block(k);
    const Mat pi2 = id - pi1;
    const Mat bk = mode_matrix(sc.b, k);
    switch (which) {
      case ReducedKind::S: {
        Mat sk = s_block(a_dn, pi1, pi2, bk);
        require_invertible(sk, "S", k, lambda);
        out.blocks[k] = std::move(sk);
        break;
      }
      case ReducedKind::Sprime: {
        Mat sp = sprime_block(a_dn, pi1);
        require_invertible(sp, "S'", k, lambda);
        out.blocks[k] = std::move(sp);
        break;
      }
      case ReducedKind::Stilde: {
        const Mat sk = s_block(a_dn, pi1, pi2, bk);
        require_invertible(a_dn, "A_DN", k, lambda);
        require_invertible(sk, "S", k, lambda);
        const Mat a_inv = a_dn.partialPivLu().solve(id);
        const Mat s_inv = sk.partialPivLu().solve(id);
        const Mat comm = a_dn * pi1 - pi1 * a_dn;  // [A_DN, Pi1]
        const Mat st1 =
            comm * a_inv * pi1 + pi2 * bk * pi2 * a_inv * (-comm) * a_inv;
        Mat ist1 = id + st1;
        require_invertible(ist1, "I + St_1", k, lambda);
        out.blocks[k] = a_inv * pi1 + s_inv * pi2;
        out.correction[k] = ist1.partialPivLu().solve(id);
        break;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Invertibility scan

std::pair<double, double> scan_ray_minimum(const Scenario& sc, double phi,
                                           double lo, double hi) {
  auto smin_at = [&](double rho) {
    const Cplx mu = rho * std::exp(kI * phi);
    const Cplx lam = -mu * mu;
    const int n = sc.basis.fiber_dim;
    const Mat id = Mat::Identity(n, n);
    double worst = std::numeric_limits<double>::infinity();
    for (int k = sc.basis.k_min(); k <= sc.basis.k_max(); ++k) {
      const Mat a_dn = dtn(sc, k, lam);
      const Mat pi1 = sc.pi1.block(k);
      worst = std::min(
          worst, smallest_sval(s_block(a_dn, pi1, id - pi1, mode_matrix(sc.b, k))));
    }
    return worst;
  };
  double a = std::log(lo), b = std::log(hi);
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = smin_at(std::exp(c)), fd = smin_at(std::exp(d));
  for (int it = 0; it < 60; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = smin_at(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = smin_at(std::exp(d));
    }
  }
  const double rho = std::exp(0.5 * (a + b));
  return {rho, std::min(fc, fd)};
}

ScanReport invertibility_scan(const Scenario& sc, double theta_prime,
                              const ScanGrid& grid) {
  if (!(theta_prime >= 0.0) || theta_prime >= sc.theta ||
      theta_prime >= kPi / 2)
    throw std::invalid_argument(
        "invertibility_scan: need 0 <= theta' < min(theta, pi/2)");
  if (grid.n_radii < 8 || !(grid.r_min > 0.0) || !(grid.r_ceiling > grid.r_min))
    throw std::invalid_argument("invertibility_scan: malformed grid");

  std::vector<double> phis;
  if (theta_prime == 0.0)
    phis = {0.0};
  else
    phis = {theta_prime, -theta_prime};
  const int nr = grid.n_radii;
  std::vector<double> rho(nr);
  for (int j = 0; j < nr; ++j)
    rho[j] = grid.r_min *
             std::pow(grid.r_ceiling / grid.r_min, double(j) / (nr - 1));

  const int n = sc.basis.fiber_dim;
  const Mat id = Mat::Identity(n, n);
  auto smin_at = [&](double phi, double r) {
    const Cplx mu = r * std::exp(kI * phi);
    const Cplx lam = -mu * mu;
    double worst = std::numeric_limits<double>::infinity();
    for (int k = sc.basis.k_min(); k <= sc.basis.k_max(); ++k) {
      const Mat a_dn = dtn(sc, k, lam);
      const Mat pi1 = sc.pi1.block(k);
      worst = std::min(
          worst, smallest_sval(s_block(a_dn, pi1, id - pi1, mode_matrix(sc.b, k))));
    }
    return worst;
  };

  ScanReport rep;
  rep.theta_prime = theta_prime;
  rep.delta = grid.delta;
  rep.min_sigma = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> s(phis.size(), std::vector<double>(nr));
  for (std::size_t p = 0; p < phis.size(); ++p)
    for (int j = 0; j < nr; ++j) {
      s[p][j] = smin_at(phis[p], rho[j]);
      if (s[p][j] < rep.min_sigma) {
        rep.min_sigma = s[p][j];
        rep.min_sigma_radius = rho[j];
        rep.min_sigma_ray = phis[p] > 0 ? 1 : (phis[p] < 0 ? -1 : 0);
      }
    }

  // initial below-delta run pushes the candidate radius up; a below-delta
  // sample after a passing one is an interior singularity
  auto below = [&](int j) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < phis.size(); ++p) m = std::min(m, s[p][j]);
    return m < grid.delta;
  };
  int start = 0;
  while (start < nr && below(start)) ++start;
  if (start >= nr)
    throw RefusalError(
        "invertibility_scan: radius not established below the grid ceiling");
  for (int j = start + 1; j < nr; ++j)
    if (below(j)) {
      std::size_t pworst = 0;
      for (std::size_t p = 1; p < phis.size(); ++p)
        if (s[p][j] < s[pworst][j]) pworst = p;
      const auto [loc, val] = scan_ray_minimum(
          sc, phis[pworst], rho[std::max(j - 1, 0)], rho[std::min(j + 1, nr - 1)]);
      std::ostringstream oss;
      oss.precision(9);
      oss << "invertibility_scan: singularity on ray arg mu = " << phis[pworst]
          << ", sigma_min = " << val << " near |mu| = " << loc;
      throw RefusalError(oss.str());
    }

  // per ray, the smallest index from which the curve is nondecreasing
  int onset = start;
  for (std::size_t p = 0; p < phis.size(); ++p) {
    int m = start;
    for (int j = nr - 2; j >= start; --j)
      if (s[p][j] > s[p][j + 1] + 1e-9 * (1.0 + s[p][j + 1])) {
        m = j + 1;
        break;
      }
    // a strictly interior dip must stay above delta once polished, else the
    // ray carries a genuine singularity the coarse grid stepped over
    if (m > start) {
      const auto [loc, val] = scan_ray_minimum(sc, phis[p],
                                               rho[std::max(m - 1, 0)],
                                               rho[std::min(m + 1, nr - 1)]);
      if (val < grid.delta) {
        std::ostringstream oss;
        oss.precision(9);
        oss << "invertibility_scan: singularity on ray arg mu = " << phis[p]
            << ", sigma_min = " << val << " near |mu| = " << loc;
        throw RefusalError(oss.str());
      }
    }
    onset = std::max(onset, m);
  }
  if (onset > nr - 5)
    throw RefusalError(
        "invertibility_scan: radius not established below the grid ceiling");
  rep.r = onset == 0 ? 0.0 : rho[onset];
  return rep;
}

// ---------------------------------------------------------------------------
// Gridded sections

RVec uniform_grid(double length, int n) {
  if (!(length > 0.0) || n < 2)
    throw std::invalid_argument("uniform_grid: need positive length, n >= 2");
  return RVec::LinSpaced(n, 0.0, length);
}

GriddedSection make_section(const ModeBasis& basis, const RVec& x) {
  GriddedSection f;
  f.basis = basis;
  f.x = x;
  for (int k = basis.k_min(); k <= basis.k_max(); ++k)
    f.values[k] = Mat::Zero(basis.fiber_dim, x.size());
  return f;
}

double section_norm(const GriddedSection& f) {
  const Eigen::Index m = f.x.size();
  if (m < 2) return 0.0;
  double total = 0.0;
  for (const auto& [k, vals] : f.values) {
    (void)k;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double wl = i > 0 ? f.x(i) - f.x(i - 1) : 0.0;
      const double wr = i + 1 < m ? f.x(i + 1) - f.x(i) : 0.0;
      total += 0.5 * (wl + wr) * vals.col(i).squaredNorm();
    }
  }
  return std::sqrt(total);
}

// ---------------------------------------------------------------------------
// Resolvent assembly

ResolventOperator::ResolventOperator(const Scenario& sc, Cplx lambda,
                                     const AssembleOptions& opt)
    : basis_(sc.basis), lambda_(lambda), residual_tol_(opt.residual_tol) {
  if (sc.potential)
    throw RefusalError(
        "assemble_resolvent: closed-form kernels need the product case "
        "(no potential)");
  if (opt.n_grid < 16)
    throw std::invalid_argument("assemble_resolvent: grid too small");
  const double km = scenario_kappa_min(sc, lambda);
  if (km < 1e-6)
    throw RefusalError(
        "assemble_resolvent: decay scale 1/Re kappa diverges at this lambda");
  x_ = uniform_grid(opt.length_factor / km, opt.n_grid);
  h_ = x_(1) - x_(0);
  const int n = basis_.fiber_dim;
  const Mat id = Mat::Identity(n, n);
  for (int k = basis_.k_min(); k <= basis_.k_max(); ++k) {
    ModeFactor mf;
    mf.pk = scenario_pk(sc, k);
    mf.kappa = frak_a(mf.pk, lambda);
    mf.exp_step = (-h_ * mf.kappa).exp();
    mf.half_kinv = (2.0 * mf.kappa).partialPivLu().solve(id);
    mf.pi1 = sc.pi1.block(k);
    mf.pi2 = id - mf.pi1;
    mf.b = mode_matrix(sc.b, k);
    mf.a_dn = -mf.kappa;
    const Mat sk = s_block(mf.a_dn, mf.pi1, mf.pi2, mf.b);
    require_invertible(sk, "S", k, lambda);
    mf.s_inv_pi2 = sk.partialPivLu().solve(mf.pi2);
    modes_.emplace(k, std::move(mf));
  }
}

void ResolventOperator::check_section(const GriddedSection& f) const {
  if (!(f.basis == basis_))
    throw std::invalid_argument("resolvent apply: section basis mismatch");
  if (f.x.size() != x_.size() ||
      (f.x - x_).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + x_(x_.size() - 1)))
    throw std::invalid_argument("resolvent apply: section grid mismatch");
  for (int k = basis_.k_min(); k <= basis_.k_max(); ++k) {
    auto it = f.values.find(k);
    if (it == f.values.end() || it->second.rows() != basis_.fiber_dim ||
        it->second.cols() != x_.size())
      throw std::invalid_argument("resolvent apply: malformed section values");
  }
}

ResolventOperator::QuadratureData ResolventOperator::mode_qplus(
    const ModeFactor& mf, const Mat& fv) const {
  const Eigen::Index ng = x_.size();
  const int n = basis_.fiber_dim;
  QuadratureData qd;
  qd.w.resize(ng);
  std::vector<Vec> iplus(ng);
  Vec acc = Vec::Zero(n);
  iplus[0] = acc;
  for (Eigen::Index i = 1; i < ng; ++i) {
    acc = mf.exp_step * (acc + 0.5 * h_ * fv.col(i - 1)) + 0.5 * h_ * fv.col(i);
    iplus[i] = acc;
  }
  acc = Vec::Zero(n);
  std::vector<Vec> iminus(ng);
  iminus[ng - 1] = acc;
  for (Eigen::Index i = ng - 2; i >= 0; --i) {
    acc = 0.5 * h_ * fv.col(i) + mf.exp_step * (0.5 * h_ * fv.col(i + 1) + acc);
    iminus[i] = acc;
  }
  for (Eigen::Index i = 0; i < ng; ++i)
    qd.w[i] = mf.half_kinv * (iplus[i] + iminus[i]);
  qd.eta0 = mf.half_kinv * iminus[0];
  qd.eta1 = 0.5 * iminus[0];
  return qd;
}

ResolventApplication ResolventOperator::apply(const GriddedSection& f) const {
  check_section(f);
  const Eigen::Index ng = x_.size();
  const int n = basis_.fiber_dim;
  ResolventApplication out;
  out.u.basis = basis_;
  out.u.x = x_;
  double bres = 0.0;
  for (const auto& [k, mf] : modes_) {
    const Mat& fv = f.values.at(k);
    const QuadratureData qd = mode_qplus(mf, fv);
    const Vec g = -qd.eta0 + mf.s_inv_pi2 * (mf.a_dn * qd.eta0 - qd.eta1);
    Mat uv(n, ng);
    Vec p = g;
    for (Eigen::Index i = 0; i < ng; ++i) {
      uv.col(i) = qd.w[i] + p;
      p = mf.exp_step * p;
    }
    out.u.values[k] = std::move(uv);
    const Vec g0u = qd.eta0 + g;
    const Vec g1u = qd.eta1 + mf.a_dn * g;
    const double scale = g0u.norm() + g1u.norm() + 1e-280;
    const double r1 = (mf.pi1 * g0u).norm();
    const double r2 = (mf.pi2 * (g1u + mf.b * g0u)).norm();
    bres = std::max(bres, (r1 + r2) / scale);
  }
  out.boundary_residual = bres;

  double num = 0.0;
  for (const auto& [k, mf] : modes_) {
    const Mat& uv = out.u.values.at(k);
    const Mat& fv = f.values.at(k);
    const Mat pml = mf.pk - lambda_ * Mat::Identity(n, n);
    for (Eigen::Index i = 1; i + 1 < ng; ++i) {
      const Vec res = -(uv.col(i + 1) - 2.0 * uv.col(i) + uv.col(i - 1)) /
                          (h_ * h_) +
                      pml * uv.col(i) - fv.col(i);
      num += h_ * res.squaredNorm();
    }
  }
  out.interior_residual = std::sqrt(num) / std::max(section_norm(f), 1e-280);
  if (out.interior_residual > residual_tol_) {
    std::ostringstream oss;
    oss << "assemble_resolvent: grid too coarse, interior residual = "
        << out.interior_residual;
    throw RefusalError(oss.str());
  }
  return out;
}

GriddedSection ResolventOperator::apply_qplus(const GriddedSection& f) const {
  check_section(f);
  const Eigen::Index ng = x_.size();
  GriddedSection out;
  out.basis = basis_;
  out.x = x_;
  for (const auto& [k, mf] : modes_) {
    const QuadratureData qd = mode_qplus(mf, f.values.at(k));
    Mat wv(basis_.fiber_dim, ng);
    for (Eigen::Index i = 0; i < ng; ++i) wv.col(i) = qd.w[i];
    out.values[k] = std::move(wv);
  }
  return out;
}

std::map<int, Vec> ResolventOperator::gamma0_qplus(const GriddedSection& f) const {
  check_section(f);
  std::map<int, Vec> out;
  for (const auto& [k, mf] : modes_)
    out[k] = mode_qplus(mf, f.values.at(k)).eta0;
  return out;
}

std::map<int, Vec> ResolventOperator::gamma1_qplus(const GriddedSection& f) const {
  check_section(f);
  std::map<int, Vec> out;
  for (const auto& [k, mf] : modes_)
    out[k] = mode_qplus(mf, f.values.at(k)).eta1;
  return out;
}

GriddedSection ResolventOperator::poisson(const std::map<int, Vec>& phi) const {
  const Eigen::Index ng = x_.size();
  const int n = basis_.fiber_dim;
  GriddedSection out;
  out.basis = basis_;
  out.x = x_;
  for (const auto& [k, mf] : modes_) {
    Mat uv = Mat::Zero(n, ng);
    auto it = phi.find(k);
    if (it != phi.end()) {
      if (it->second.size() != n)
        throw std::invalid_argument("poisson: boundary datum has wrong size");
      Vec p = it->second;
      for (Eigen::Index i = 0; i < ng; ++i) {
        uv.col(i) = p;
        p = mf.exp_step * p;
      }
    }
    out.values[k] = std::move(uv);
  }
  return out;
}

Mat ResolventOperator::s0(int k) const {
  const ModeFactor& mf = modes_.at(k);
  return mf.s_inv_pi2 * mf.a_dn;
}

Mat ResolventOperator::s1(int k) const { return -modes_.at(k).s_inv_pi2; }

ResolventOperator assemble_resolvent(const Scenario& sc, Cplx lambda,
                                     const AssembleOptions& opt) {
  return ResolventOperator(sc, lambda, opt);
}

// ---------------------------------------------------------------------------
// Finite-difference oracle

GriddedSection fd_oracle_solve(const Scenario& sc, Cplx lambda,
                               const GriddedSection& f, double h,
                               const FdOptions& opt) {
  if (!(h > 0.0)) throw std::invalid_argument("fd_oracle_solve: need h > 0");
  if (!(f.basis == sc.basis))
    throw std::invalid_argument("fd_oracle_solve: section basis mismatch");
  const double km = scenario_kappa_min(sc, lambda);
  if (km < 1e-6)
    throw RefusalError(
        "fd_oracle_solve: decay scale 1/Re kappa diverges at this lambda");
  const double len = sc.potential_support + opt.length_factor / km;
  const int nseg = std::max<int>(8, int(std::ceil(len / h)));
  const int n = sc.basis.fiber_dim;
  const Mat id = Mat::Identity(n, n);

  GriddedSection out;
  out.basis = sc.basis;
  out.x = f.x;
  for (int k = sc.basis.k_min(); k <= sc.basis.k_max(); ++k) {
    const Mat pk = scenario_pk(sc, k);
    const Mat pi1 = sc.pi1.block(k);
    const Mat pi2 = id - pi1;
    const Mat bk = mode_matrix(sc.b, k);
    // unknowns u_0 .. u_{nseg-1}; far Dirichlet u_{nseg} = 0 eliminated
    std::vector<Eigen::Triplet<Cplx>> trips;
    trips.reserve(std::size_t(nseg) * n * (2 * n + 2));
    auto put_block = [&](int row, int col, const Mat& blk) {
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
          if (blk(r, c) != Cplx(0.0, 0.0))
            trips.emplace_back(row * n + r, col * n + c, blk(r, c));
    };
    put_block(0, 0, pi1 + pi2 * (bk - (1.5 / h) * id));
    put_block(0, 1, (2.0 / h) * pi2);
    put_block(0, 2, (-0.5 / h) * pi2);
    Vec rhs = Vec::Zero(Eigen::Index(nseg) * n);
    for (int j = 1; j < nseg; ++j) {
      const double xj = j * h;
      Mat diag = (2.0 / (h * h)) * id + pk - lambda * id;
      if (sc.potential && xj <= sc.potential_support)
        diag += sc.potential(xj) * id;
      put_block(j, j, diag);
      put_block(j, j - 1, (-1.0 / (h * h)) * id);
      if (j + 1 < nseg) put_block(j, j + 1, (-1.0 / (h * h)) * id);
      rhs.segment(Eigen::Index(j) * n, n) = interp_column(f.values.at(k), f.x, xj);
    }
    Eigen::SparseMatrix<Cplx> A(Eigen::Index(nseg) * n, Eigen::Index(nseg) * n);
    A.setFromTriplets(trips.begin(), trips.end());
    Eigen::SparseLU<Eigen::SparseMatrix<Cplx>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success)
      throw RefusalError("fd_oracle_solve: singular discrete system");
    const Vec sol = lu.solve(rhs);
    if (lu.info() != Eigen::Success)
      throw RefusalError("fd_oracle_solve: sparse solve failed");

    Mat uv(n, f.x.size());
    for (Eigen::Index i = 0; i < f.x.size(); ++i) {
      const double x = f.x(i);
      const int j = std::min<int>(int(std::floor(x / h)), nseg - 1);
      const double t = x / h - j;
      const Vec uj = sol.segment(Eigen::Index(j) * n, n);
      const Vec ujp = j + 1 < nseg ? Vec(sol.segment(Eigen::Index(j + 1) * n, n))
                                   : Vec(Vec::Zero(n));
      uv.col(i) = (1.0 - t) * uj + t * ujp;
    }
    out.values[k] = std::move(uv);
  }
  return out;
}

}  // namespace specbvp
