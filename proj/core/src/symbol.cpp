#include "specbvp/symbol.hpp"

#include <algorithm>
#include <cmath>

namespace specbvp {

namespace {

// spectral differentiation on the uniform grid: f -> f' via direct DFT.
// Grid size is fixed and small (256); O(G^2) is fine at this scale.
std::vector<Cplx> dft_derivative(const std::vector<Cplx>& f) {
  const int g = static_cast<int>(f.size());
  std::vector<Cplx> coef(g);
  for (int m = 0; m < g; ++m) {
    Cplx acc = 0.0;
    for (int j = 0; j < g; ++j)
      acc += f[j] * std::exp(-kI * (2.0 * kPi * m * j / g));
    coef[m] = acc / static_cast<double>(g);
  }
  std::vector<Cplx> out(g, Cplx{0.0, 0.0});
  for (int m = 0; m < g; ++m) {
    // frequencies mapped to [-g/2, g/2); drop the unmatched Nyquist line
    int freq = (m <= g / 2 - 1) ? m : m - g;
    if (freq == -g / 2) continue;
    Cplx c = coef[m] * kI * static_cast<double>(freq);
    if (c == Cplx{0.0, 0.0}) continue;
    for (int j = 0; j < g; ++j)
      out[j] += c * std::exp(kI * (2.0 * kPi * m * j / g));
  }
  return out;
}

std::vector<Mat> grid_derivative(const std::vector<Mat>& comp) {
  const int g = static_cast<int>(comp.size());
  const int n = static_cast<int>(comp[0].rows());
  std::vector<Mat> out(g, Mat::Zero(n, n));
  std::vector<Cplx> line(g);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      for (int j = 0; j < g; ++j) line[j] = comp[j](r, c);
      auto d = dft_derivative(line);
      for (int j = 0; j < g; ++j) out[j](r, c) = d[j];
    }
  return out;
}

}  // namespace

void SymbolExpansion::insert(SymbolTerm t) {
  for (auto& existing : terms_) {
    if (existing.degree == t.degree) {
      for (int j = 0; j < kGrid; ++j) {
        existing.plus[j] += t.plus[j];
        existing.minus[j] += t.minus[j];
      }
      return;
    }
  }
  terms_.push_back(std::move(t));
  std::sort(terms_.begin(), terms_.end(),
            [](const SymbolTerm& a, const SymbolTerm& b) { return a.degree > b.degree; });
}

void SymbolExpansion::add_sampled_term(SymbolTerm t) {
  if (t.plus.size() != kGrid || t.minus.size() != kGrid)
    throw std::invalid_argument("symbol term grid size mismatch");
  insert(std::move(t));
}

void SymbolExpansion::add_constant_term(int degree, const Mat& at_plus, const Mat& at_minus) {
  SymbolTerm t;
  t.degree = degree;
  t.plus.assign(kGrid, at_plus);
  t.minus.assign(kGrid, at_minus);
  insert(std::move(t));
}

void SymbolExpansion::add_term(int degree, const std::function<Mat(double, int)>& f) {
  SymbolTerm t;
  t.degree = degree;
  t.plus.reserve(kGrid);
  t.minus.reserve(kGrid);
  for (int j = 0; j < kGrid; ++j) {
    t.plus.push_back(f(theta(j), +1));
    t.minus.push_back(f(theta(j), -1));
  }
  insert(std::move(t));
}

bool SymbolExpansion::has_degree(int d) const { return term(d) != nullptr; }

const SymbolTerm* SymbolExpansion::term(int d) const {
  for (const auto& t : terms_)
    if (t.degree == d) return &t;
  return nullptr;
}

int SymbolExpansion::top_degree() const {
  if (terms_.empty()) throw std::logic_error("empty symbol expansion");
  return terms_.front().degree;
}

Mat SymbolExpansion::evaluate(int j, double xi_abs, int xi_sign, int lowest_degree) const {
  Mat acc = Mat::Zero(fiber_dim_, fiber_dim_);
  for (const auto& t : terms_) {
    if (t.degree < lowest_degree) break;
    const Mat& c = xi_sign > 0 ? t.plus[j] : t.minus[j];
    acc += std::pow(xi_abs, t.degree) * c;
  }
  return acc;
}

SymbolExpansion compose(const SymbolExpansion& a, const SymbolExpansion& b,
                        int lowest_degree) {
  if (a.fiber_dim() != b.fiber_dim())
    throw std::invalid_argument("symbol composition: fiber dimension mismatch");
  const int g = SymbolExpansion::kGrid;
  SymbolExpansion out(a.fiber_dim());

  for (const auto& ta : a.terms()) {
    for (const auto& tb : b.terms()) {
      std::vector<Mat> bp = tb.plus, bm = tb.minus;  // alpha-th theta derivative
      const int alpha_max = ta.degree + tb.degree - lowest_degree;
      double falling = 1.0;  // d_a (d_a-1) ... (d_a-alpha+1)
      double fact = 1.0;     // alpha!
      for (int alpha = 0; alpha <= alpha_max; ++alpha) {
        const int deg = ta.degree + tb.degree - alpha;
        if (alpha > 0) {
          falling *= static_cast<double>(ta.degree - (alpha - 1));
          fact *= static_cast<double>(alpha);
          if (falling == 0.0) break;  // homogeneity factor kills all further alpha
          bp = grid_derivative(bp);
          bm = grid_derivative(bm);
        }
        if (deg < lowest_degree) continue;
        // d_xi^alpha on degree d_a: factor falling * sign(xi)^alpha
        const Cplx pref = std::pow(-kI, alpha) * (falling / fact);
        const double sgn_minus = (alpha % 2 == 0) ? 1.0 : -1.0;
        SymbolTerm t;
        t.degree = deg;
        t.plus.reserve(g);
        t.minus.reserve(g);
        for (int j = 0; j < g; ++j) {
          t.plus.push_back(pref * ta.plus[j] * bp[j]);
          t.minus.push_back((pref * sgn_minus) * ta.minus[j] * bm[j]);
        }
        out.add_sampled_term(std::move(t));
      }
    }
  }
  return out;
}

SymbolExpansion sym_add(const SymbolExpansion& a, const SymbolExpansion& b) {
  if (a.fiber_dim() != b.fiber_dim())
    throw std::invalid_argument("symbol sum: fiber dimension mismatch");
  SymbolExpansion out = a;
  for (const auto& t : b.terms()) out.add_sampled_term(t);
  return out;
}

SymbolExpansion sym_scale(const SymbolExpansion& a, Cplx factor) {
  SymbolExpansion out(a.fiber_dim());
  for (auto t : a.terms()) {
    for (auto& m : t.plus) m *= factor;
    for (auto& m : t.minus) m *= factor;
    out.add_sampled_term(std::move(t));
  }
  return out;
}

bool has_even_odd_parity(const SymbolExpansion& s, double tol) {
  for (const auto& t : s.terms()) {
    const bool even_degree = ((t.degree % 2) + 2) % 2 == 0;
    for (int j = 0; j < SymbolExpansion::kGrid; ++j) {
      const Mat diff = even_degree ? Mat(t.plus[j] + t.minus[j])   // must be odd in xi
                                   : Mat(t.plus[j] - t.minus[j]);  // must be even in xi
      if (diff.norm() > tol) return false;
    }
  }
  return true;
}

}  // namespace specbvp
