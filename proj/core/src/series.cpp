#include "specbvp/series.hpp"

#include <algorithm>

namespace specbvp {

MatSeries series_constant(const Mat& m, int order) {
  MatSeries s;
  s.c.assign(order + 1, Mat::Zero(m.rows(), m.cols()));
  s.c[0] = m;
  return s;
}

MatSeries series_lambda(Cplx lambda0, int n, int order) {
  MatSeries s = series_constant(lambda0 * Mat::Identity(n, n), order);
  if (order >= 1) s.c[1] = Mat::Identity(n, n);
  return s;
}

MatSeries series_add(const MatSeries& a, const MatSeries& b) {
  MatSeries s;
  const int order = std::min(a.order(), b.order());
  s.c.reserve(order + 1);
  for (int j = 0; j <= order; ++j) s.c.push_back(a.c[j] + b.c[j]);
  return s;
}

MatSeries series_sub(const MatSeries& a, const MatSeries& b) {
  MatSeries s;
  const int order = std::min(a.order(), b.order());
  s.c.reserve(order + 1);
  for (int j = 0; j <= order; ++j) s.c.push_back(a.c[j] - b.c[j]);
  return s;
}

MatSeries series_mul(const MatSeries& a, const MatSeries& b) {
  MatSeries s;
  const int order = std::min(a.order(), b.order());
  s.c.assign(order + 1, Mat::Zero(a.c[0].rows(), b.c[0].cols()));
  for (int r = 0; r <= order; ++r)
    for (int j = 0; j <= r; ++j) s.c[r] += a.c[j] * b.c[r - j];
  return s;
}

MatSeries series_scale(const MatSeries& a, Cplx factor) {
  MatSeries s = a;
  for (Mat& m : s.c) m *= factor;
  return s;
}

MatSeries series_lmul(const Mat& m, const MatSeries& a) {
  MatSeries s = a;
  for (Mat& x : s.c) x = m * x;
  return s;
}

MatSeries series_rmul(const MatSeries& a, const Mat& m) {
  MatSeries s = a;
  for (Mat& x : s.c) x = x * m;
  return s;
}

MatSeries series_inverse(const MatSeries& a) {
  const int n = static_cast<int>(a.c[0].rows());
  Eigen::PartialPivLU<Mat> lu(a.c[0]);
  const Mat b0 = lu.solve(Mat::Identity(n, n));
  if ((a.c[0] * b0 - Mat::Identity(n, n)).norm() > 1e-8)
    throw IdentityError("series inverse: leading coefficient is numerically singular");
  MatSeries s;
  s.c.assign(a.order() + 1, Mat::Zero(n, n));
  s.c[0] = b0;
  for (int r = 1; r <= a.order(); ++r) {
    Mat acc = Mat::Zero(n, n);
    for (int j = 1; j <= r; ++j) acc += a.c[j] * s.c[r - j];
    s.c[r] = -b0 * acc;
  }
  return s;
}

Mat sylvester_solve(const Mat& a, const Mat& b, const Mat& c) {
  const int n = static_cast<int>(a.rows());
  const int m = static_cast<int>(b.rows());
  Mat sys = Mat::Zero(n * m, n * m);
  // column-major vec: (I (x) a) vec X = vec(a X), (b^T (x) I) vec X = vec(X b)
  for (int j = 0; j < m; ++j)
    sys.block(j * n, j * n, n, n) += a;
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i)
      sys.block(j * n, i * n, n, n) += b(i, j) * Mat::Identity(n, n);
  Vec rhs(n * m);
  for (int j = 0; j < m; ++j) rhs.segment(j * n, n) = c.col(j);
  Eigen::PartialPivLU<Mat> lu(sys);
  const Vec x = lu.solve(rhs);
  Mat out(n, m);
  for (int j = 0; j < m; ++j) out.col(j) = x.segment(j * n, n);
  if ((a * out + out * b - c).norm() > 1e-9 * std::max(1.0, c.norm()))
    throw IdentityError("Sylvester solve singular: spectra of the factors overlap "
                        "(square-root branch violated?)");
  return out;
}

MatSeries series_sylvester_pair(const MatSeries& kappa, const MatSeries& rhs) {
  const int order = std::min(kappa.order(), rhs.order());
  MatSeries x;
  x.c.reserve(order + 1);
  for (int r = 0; r <= order; ++r) {
    Mat c = rhs.c[r];
    for (int j = 1; j <= r; ++j)
      c -= kappa.c[j] * x.c[r - j] + x.c[r - j] * kappa.c[j];
    x.c.push_back(sylvester_solve(kappa.c[0], kappa.c[0], c));
  }
  return x;
}

MatSeries kappa_series(const Mat& kappa0, int order) {
  const int n = static_cast<int>(kappa0.rows());
  MatSeries k;
  k.c.reserve(order + 1);
  k.c.push_back(kappa0);
  for (int r = 1; r <= order; ++r) {
    Mat c = (r == 1) ? Mat(-Mat::Identity(n, n)) : Mat(Mat::Zero(n, n));
    for (int j = 1; j < r; ++j) c -= k.c[j] * k.c[r - j];
    k.c.push_back(sylvester_solve(kappa0, kappa0, c));
  }
  return k;
}

std::vector<Cplx> series_trace(const MatSeries& a) {
  std::vector<Cplx> t;
  t.reserve(a.c.size());
  for (const Mat& m : a.c) t.push_back(m.trace());
  return t;
}

}  // namespace specbvp
