#pragma once
// Shared scalar types, error taxonomy, compensated accumulation, and a
// deterministic RNG (std engines have platform-defined distributions; reports
// must be bit-reproducible across builds, so we roll the mapping ourselves).

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace specbvp {

using Cplx = std::complex<double>;
using Mat  = Eigen::MatrixXcd;
using Vec  = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr Cplx kI{0.0, 1.0};

// A structural hypothesis of the problem family failed (named so the CLI can
// report which one). Maps to exit code 2.
class AssumptionError : public std::runtime_error {
public:
  AssumptionError(std::string name, const std::string& what)
      : std::runtime_error(name + ": " + what), name_(std::move(name)) {}
  const std::string& assumption() const { return name_; }
private:
  std::string name_;
};

// The computation declines to produce a number (conditioning, tail bound,
// contour placement, continuation strip). Maps to exit code 3.
class RefusalError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An internal identity that must hold did not. Maps to exit code 1.
class IdentityError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Neumaier variant of Kahan summation; enough to tame the cancellation
// between the +1/4 / -1/4 weighted mode families at small t.
class CompensatedSum {
public:
  void add(double x) {
    double t = s_ + x;
    if (std::abs(s_) >= std::abs(x))
      c_ += (s_ - t) + x;
    else
      c_ += (x - t) + s_;
    s_ = t;
  }
  double value() const { return s_ + c_; }
private:
  double s_ = 0.0, c_ = 0.0;
};

class CompensatedCplx {
public:
  void add(Cplx z) { re_.add(z.real()); im_.add(z.imag()); }
  Cplx value() const { return {re_.value(), im_.value()}; }
private:
  CompensatedSum re_, im_;
};

// xoshiro-free deterministic generator: SplitMix64 core + explicit Box-Muller.
// Identical streams on every platform for a given seed.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform() {  // in [0,1)
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }
  double normal() {
    if (have_spare_) { have_spare_ = false; return spare_; }
    double u1 = 0.0, u2;
    while (u1 == 0.0) u1 = uniform();
    u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * kPi * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * kPi * u2);
  }
  Cplx cnormal() { return {normal(), normal()}; }
private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// FNV-1a, used for config provenance hashes in reports.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) { h ^= c; h *= 0x100000001b3ULL; }
  return h;
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

}  // namespace specbvp
