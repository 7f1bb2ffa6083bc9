#include "specbvp/tangential.hpp"

#include <cmath>

namespace specbvp {

namespace {

Mat sigma3() {
  Mat s(2, 2);
  s << 1, 0, 0, -1;
  return s;
}

Mat sigma1() {
  Mat s(2, 2);
  s << 0, 1, 1, 0;
  return s;
}

// full symbol of -i d/dtheta + a: xi + a
SymbolExpansion scalar_shift_symbol(double a) {
  SymbolExpansion s(1);
  Mat one = Mat::Identity(1, 1);
  s.add_constant_term(1, one, -one);   // |xi|^1 * (+-1) = xi
  if (a != 0.0) s.add_constant_term(0, a * one, a * one);
  return s;
}

// full symbol of [[-i d, m],[m, i d]]: xi sigma3 + m sigma1
SymbolExpansion dirac_pair_symbol(double m) {
  SymbolExpansion s(2);
  s.add_constant_term(1, sigma3(), -sigma3());
  if (m != 0.0) s.add_constant_term(0, m * sigma1(), m * sigma1());
  return s;
}

}  // namespace

Mat dirac_sigma() {
  Mat s(2, 2);
  s << 0, -1, 1, 0;
  return s;
}

TangentialOperator build_model_operator(const ModelFamily& fam, const ModeBasis& basis) {
  TangentialOperator op;
  op.basis = basis;
  op.blocks.reserve(basis.n_modes());

  if (std::holds_alternative<ScalarShift>(fam.base)) {
    if (basis.geometry != Geometry::Circle || basis.fiber_dim != 1)
      throw std::invalid_argument("ScalarShift needs circle geometry, fiber dim 1");
    const double a = std::get<ScalarShift>(fam.base).a;
    for (int k = basis.k_min(); k <= basis.k_max(); ++k)
      op.blocks.push_back(Mat::Constant(1, 1, Cplx(k + a, 0.0)));
    op.order = 1;
    op.selfadjoint = true;
    op.symbol = scalar_shift_symbol(a);
  } else if (std::holds_alternative<DiracPair>(fam.base)) {
    if (basis.geometry != Geometry::Circle || basis.fiber_dim != 2)
      throw std::invalid_argument("DiracPair needs circle geometry, fiber dim 2");
    const double m = std::get<DiracPair>(fam.base).m;
    for (int k = basis.k_min(); k <= basis.k_max(); ++k) {
      Mat b(2, 2);
      b << Cplx(k, 0), Cplx(m, 0), Cplx(m, 0), Cplx(-k, 0);
      op.blocks.push_back(b);
    }
    op.order = 1;
    op.selfadjoint = true;
    op.symbol = dirac_pair_symbol(m);
  } else if (std::holds_alternative<MatrixPoint>(fam.base)) {
    const Mat& M = std::get<MatrixPoint>(fam.base).M;
    if (basis.geometry != Geometry::Point || basis.fiber_dim != M.rows())
      throw std::invalid_argument("MatrixPoint needs point geometry matching the block size");
    op.blocks.push_back(M);
    op.order = 1;
    op.selfadjoint = (M - M.adjoint()).norm() < 1e-13;
  } else {
    const Mat& M = std::get<Morphism>(fam.base).M;
    if (basis.fiber_dim != M.rows())
      throw std::invalid_argument("Morphism block size must match fiber dim");
    for (int k = basis.k_min(); k <= basis.k_max(); ++k) op.blocks.push_back(M);
    op.order = 0;
    op.selfadjoint = (M - M.adjoint()).norm() < 1e-13;
    if (basis.geometry == Geometry::Circle) {
      SymbolExpansion s(basis.fiber_dim);
      s.add_constant_term(0, M, M);
      op.symbol = s;
    }
  }

  if (fam.squared) return build_square(op);
  return op;
}

TangentialOperator build_square(const TangentialOperator& a) {
  TangentialOperator op;
  op.basis = a.basis;
  op.order = 2 * a.order;
  op.selfadjoint = a.selfadjoint;
  op.blocks.reserve(a.blocks.size());
  for (const auto& b : a.blocks) op.blocks.push_back(b * b);
  if (a.selfadjoint) op.nonnegative = true;
  if (a.symbol) {
    // exact for the shipped (x'-independent) families; composition keeps
    // degrees down to top - 4 which covers every consumer of the square
    op.symbol = compose(*a.symbol, *a.symbol, 2 * a.symbol->top_degree() - 4);
  }
  return op;
}

Mat mode_matrix(const TangentialOperator& op, int k) { return op.block(k); }

bool residue_vanishes_by_parity(const SymbolExpansion& s, int ambient_dim) {
  // parity forces sum_{xi=+-1} tr p_{1-n} = 0 pointwise iff 1-n is even,
  // i.e. the ambient dimension is odd
  if (ambient_dim % 2 == 0) return false;
  return has_even_odd_parity(s);
}

Cplx noncommutative_residue(const SymbolExpansion& s, int ambient_dim) {
  if (residue_vanishes_by_parity(s, ambient_dim)) return {0.0, 0.0};
  if (ambient_dim != 2)
    throw RefusalError("noncommutative residue: only the circle boundary (ambient dim 2) "
                       "is computed by quadrature");
  const SymbolTerm* t = s.term(1 - ambient_dim);  // degree -1
  if (t == nullptr) return {0.0, 0.0};
  // trapezoid on the periodic grid is spectrally exact for trig polynomials
  CompensatedCplx acc;
  for (int j = 0; j < SymbolExpansion::kGrid; ++j)
    acc.add(t->plus[j].trace() + t->minus[j].trace());
  return acc.value() * (2.0 * kPi / SymbolExpansion::kGrid);
}

Cplx noncommutative_residue(const TangentialOperator& op) {
  if (!op.symbol)
    throw std::invalid_argument("noncommutative residue needs a symbol expansion");
  if (op.basis.geometry != Geometry::Circle)
    throw std::invalid_argument("noncommutative residue is defined on the circle boundary");
  return noncommutative_residue(*op.symbol, 2);
}

}  // namespace specbvp
