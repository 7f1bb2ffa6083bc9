#pragma once
// First- and second-order tangential model operators on the boundary, stored
// as mode blocks A_k (N x N) with optional homogeneous symbol expansions.
//
// Families:
//   ScalarShift{a}:  -i d/dtheta + a on S^1, N = 1, block [k + a]
//   DiracPair{m}:    blocks [[k, m], [m, -k]], N = 2, anticommutes with
//                    sigma = [[0, -1], [1, 0]]
//   MatrixPoint{M}:  a single Hermitian block on the point boundary
//   Morphism{M}:     order-0 constant multiplier
//   squares of the above (blocks A_k^2, order doubled)

#include <optional>
#include <variant>
#include <vector>

#include "specbvp/mode_basis.hpp"
#include "specbvp/symbol.hpp"
#include "specbvp/util.hpp"

namespace specbvp {

struct TangentialOperator {
  ModeBasis basis;
  std::vector<Mat> blocks;   // indexed by k - k_min
  int order = 1;
  bool selfadjoint = false;
  bool nonnegative = false;
  std::optional<SymbolExpansion> symbol;

  const Mat& block(int k) const { return blocks.at(basis.index_of(k)); }
  Mat& block(int k) { return blocks.at(basis.index_of(k)); }
};

struct ScalarShift { double a = 0.0; };
struct DiracPair   { double m = 0.0; };
struct MatrixPoint { Mat M; };
struct Morphism    { Mat M; };
using FamilyBase = std::variant<ScalarShift, DiracPair, MatrixPoint, Morphism>;

struct ModelFamily {
  FamilyBase base;
  bool squared = false;   // build blocks A_k^2 instead of A_k
};

TangentialOperator build_model_operator(const ModelFamily& fam, const ModeBasis& basis);
TangentialOperator build_square(const TangentialOperator& a);

// the sigma intertwiner of the DiracPair family (constant across modes)
Mat dirac_sigma();

// checked block accessor (spec-level operation; throws on out-of-range k)
Mat mode_matrix(const TangentialOperator& op, int k);

// Noncommutative residue of a symbol expansion: the literal cosphere integral
//   res = int_{S^1} sum_{xi = +-1} tr p_{1-n}(theta, xi) dtheta,  n = 2,
// with no 2 pi normalization.  The zeta-route residue ord(Q) * Res_{s=0}
// Tr(A Q^{-s}) differs from it by exactly kResidueBridge on the circle.
Cplx noncommutative_residue(const SymbolExpansion& s, int ambient_dim = 2);
Cplx noncommutative_residue(const TangentialOperator& op);

// parity fast path: true when even-odd parity forces the degree-(1-n)
// cosphere sum to vanish pointwise (requires n odd).
bool residue_vanishes_by_parity(const SymbolExpansion& s, int ambient_dim);

inline constexpr double kResidueBridge = 2.0 * kPi;

}  // namespace specbvp
