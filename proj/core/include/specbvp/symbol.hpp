#pragma once
// One-dimensional homogeneous symbol expansions on the circle.
//
// A term of degree d is the strictly homogeneous function
//   p_d(theta, xi) = |xi|^d * c(theta, sign xi),
// stored as the two component samples c(theta_j, +1), c(theta_j, -1) on the
// uniform grid theta_j = 2 pi j / G.  Symbol composition uses the standard
// asymptotic product sum_alpha (-i)^alpha/alpha! d_xi^alpha p . d_theta^alpha q,
// which on trig-polynomial data is exact once truncated below the requested
// degree; theta-derivatives are spectral (DFT), xi-derivatives use the
// homogeneity factor d(d-1)...(d-alpha+1) * sign(xi)^alpha.

#include <functional>
#include <optional>
#include <vector>

#include "specbvp/util.hpp"

namespace specbvp {

struct SymbolTerm {
  int degree = 0;
  std::vector<Mat> plus;    // component at xi = +1, one matrix per grid node
  std::vector<Mat> minus;   // component at xi = -1
};

class SymbolExpansion {
public:
  static constexpr int kGrid = 256;

  SymbolExpansion() = default;
  explicit SymbolExpansion(int fiber_dim) : fiber_dim_(fiber_dim) {}

  int fiber_dim() const { return fiber_dim_; }
  int grid() const { return kGrid; }
  static double theta(int j) { return 2.0 * kPi * j / kGrid; }

  // x'-independent term.
  void add_constant_term(int degree, const Mat& at_plus, const Mat& at_minus);
  // general term sampled from a callback f(theta, xi in {+1,-1}).
  void add_term(int degree, const std::function<Mat(double, int)>& f);
  // term with pre-sampled grids; merges with an existing term of that degree.
  void add_sampled_term(SymbolTerm t);

  bool has_degree(int d) const;
  const SymbolTerm* term(int d) const;
  const std::vector<SymbolTerm>& terms() const { return terms_; }
  int top_degree() const;

  // evaluate the finite expansion at (theta index j, xi = s * |xi|), summing
  // |xi|^d * c_d; used by tests against exact mode symbols.
  Mat evaluate(int j, double xi_abs, int xi_sign, int lowest_degree) const;

private:
  void insert(SymbolTerm t);
  int fiber_dim_ = 1;
  std::vector<SymbolTerm> terms_;  // strictly decreasing degree
};

// truncated symbol composition a o b keeping degrees >= lowest_degree
SymbolExpansion compose(const SymbolExpansion& a, const SymbolExpansion& b,
                        int lowest_degree);
SymbolExpansion sym_add(const SymbolExpansion& a, const SymbolExpansion& b);
SymbolExpansion sym_scale(const SymbolExpansion& a, Cplx factor);

// even-odd parity: every even-degree component odd under xi -> -xi and every
// odd-degree component even under it.
bool has_even_odd_parity(const SymbolExpansion& s, double tol = 1e-12);

}  // namespace specbvp
