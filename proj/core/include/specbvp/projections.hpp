#pragma once
// Boundary projections: construction (spectral projections with explicit
// nullspace selection), orthogonalization with the conjugating operator R,
// generating operators, random norm-controlled perturbations, and the three
// structural checks a scenario must pass before reduction: sigma
// compatibility, well-posedness, and parameter-ellipticity of the boundary
// symbol (p'^0 + mu^2)^{1/2} - pi_2 b^h pi_2 over a sector of rays.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "specbvp/tangential.hpp"

namespace specbvp {

inline constexpr double kNullTol = 1e-8;

struct Projection {
  ModeBasis basis;
  std::vector<Mat> blocks;          // indexed by k - k_min
  bool orthogonal = false;          // per-mode Hermitian
  bool sigma_compatible = false;    // Pi = -sigma Pi^perp sigma per mode
  std::optional<SymbolExpansion> symbol;
  int dim_v0_prime = 0;             // dim V0' picked by the null selector
  int dim_v0_dblprime = 0;          // dim V0'' left out (Def-4.10 bookkeeping)

  const Mat& block(int k) const { return blocks.at(basis.index_of(k)); }
  Mat& block(int k) { return blocks.at(basis.index_of(k)); }
};

// throws IdentityError unless idempotent per mode (and Hermitian if flagged)
void validate_projection(const Projection& p, double tol = 1e-12);

// Hermitian range projection Pi_ort = Pi Pi* [Pi Pi* + (I-Pi*)(I-Pi)]^{-1}
// together with R = Pi + (I-Pi_ort)(I-Pi) satisfying R Pi R^{-1} = Pi_ort
// and R^{-1} = Pi_ort + (I-Pi)(I-Pi_ort).
struct OrthogonalizeResult {
  Projection projection;
  std::vector<Mat> r_blocks;
  std::vector<Mat> r_inv_blocks;
};
OrthogonalizeResult orthogonalize(const Projection& p);

// default positive weight (1+|k|) I for generating_operator
TangentialOperator default_c1(const ModeBasis& basis);

// selfadjoint invertible C with Pi_>(C) = p: C' = Pi C1 Pi - Pi^perp C1
// Pi^perp, then +1/-1 on the parts of ker C' inside ran Pi / ran Pi^perp
TangentialOperator generating_operator(const Projection& p, const TangentialOperator& c1);

// per-mode choice of a subspace V0' inside ker(C_k); missing mode = empty
struct NullSelector {
  std::map<int, Mat> spans;   // k -> columns spanning the chosen subspace
};
NullSelector empty_selector();
NullSelector full_null_selector(const TangentialOperator& c, double null_tol = kNullTol);
// Lagrangian line(s) for a real sigma with sigma^2 = -I: span of Re(u_j)
// over +i eigenvectors u_j of sigma restricted to ker(C_k); verified against
// the compatibility identity before returning.
NullSelector sigma_lagrangian_selector(const TangentialOperator& c, const Mat& sigma,
                                       double null_tol = kNullTol);

// Pi = Pi_>(C) + Pi_{V0'}, recording dim V0' and dim V0''
Projection spectral_projection(const TangentialOperator& c, const NullSelector& selector,
                               double null_tol = kNullTol);

// unitary conjugation exp(i eps S) Pi exp(-i eps S) with random Hermitian S,
// ||S_k|| = (1+|k|)^{decay_order}/2, so ||Pi_k - base_k|| <= eps (1+|k|)^{decay_order};
// with preserve_sigma the generator is averaged to commute with sigma, which
// keeps Pi = -sigma Pi^perp sigma exact.
Projection perturb_projection(const Projection& base, int decay_order, double eps,
                              std::uint64_t seed, const Mat* preserve_sigma = nullptr);

// max over modes of ||Pi_k + sigma (I - Pi_k) sigma||
double sigma_compat_defect(const Projection& p, const Mat& sigma);
bool check_sigma_compat(const Projection& p, const Mat& sigma, double tol = 1e-10);

// principal (degree-0) symbol of a projection at xi = +-1: from the attached
// expansion when present, otherwise the stable large-|k| block limit
// (refuses when the last two blocks differ by more than 1e-6).
// Returned per grid node; constant data collapses to a single entry.
std::vector<Mat> projection_principal_nodes(const Projection& p, int xi_sign);
// top-degree symbol component of a tangential operator at xi = +-1
std::vector<Mat> operator_principal_nodes(const TangentialOperator& a, int xi_sign);

// max over xi = +-1 and nodes of || [pi^0, p'^0] ||  (commuting principal
// symbols is a structural hypothesis of the reduction)
double principal_commutator_defect(const Projection& p, const TangentialOperator& pprime);

struct WellposedReport {
  bool passed = false;
  double margin = 0.0;       // min singular value of pi^0 : N_+ -> ran pi^0
  std::string detail;
};
// rank pi^0 = N/2 at xi = +-1 and pi^0 bijective from the positive principal
// eigenspace of a^0 onto ran pi^0; refuses for odd N.
WellposedReport check_wellposed(const Projection& p, const TangentialOperator& a,
                                double delta = 1e-6);

struct EllipticityGrid {
  int rays = 17;
  int radii = 40;
  double r_min = 1e-3;
  double r_max = 1e3;
  double delta = 1e-6;
};

struct EllipticityReport {
  bool passed = false;
  double min_singular_value = 0.0;
  double worst_abs_mu = 0.0;
  double worst_arg_mu = 0.0;
  int worst_xi = 0;          // +-1, or 0 for the xi'=0 branch
  double theta = 0.0;
  int remark_case = 0;       // sufficient condition that applies: 1 imaginary
                             // b^h, 2 Hermitian with top of range < a1,
                             // 3 ||b^h|| < dist(V_{a1}, 0); 0 = none claimed
  double a1 = 0.0;           // sqrt of the smallest eigenvalue of p'^0
  double delta = 1e-6;
};
// scans sigma_min((p'^0 + mu^2)^{1/2} - pi_2^h b^h pi_2^h) over xi = +-1 and
// mu on rays |arg mu| <= theta (clamped strictly inside the half-plane),
// |mu| log-spaced plus mu = 0, plus the trivial xi' = 0 branch; on failure
// the singular |mu| is located by golden-section polish.
EllipticityReport check_parameter_ellipticity(const TangentialOperator& pprime,
                                              const Projection& p,
                                              const TangentialOperator& b,
                                              double theta,
                                              const EllipticityGrid& grid = {});

// known asymptotic symbols of the nonnegative spectral projections of the
// shipped first-order families (scalar: Heaviside; pair: through degree -3)
SymbolExpansion aps_symbol_scalar();
SymbolExpansion aps_symbol_dirac(double m);

}  // namespace specbvp
