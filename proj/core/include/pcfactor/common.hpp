#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pcfactor {

using Cx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr Cx kI{0.0, 1.0};

// Error taxonomy shared across the library.  Codes group into input errors,
// mathematical-domain rejections (the input is outside the supported regime),
// and numeric failures (the computation could not be carried out reliably).
enum class ErrorCode {
  InvalidArgument,
  Singular,
  BranchOnBoundary,
  ResonantData,
  NonDiagonalizableSum,
  ColocatedSingularities,
  NotFuchsian,
  FuchsViolation,
  AmbiguousPairing,
  GeometryFailure,
  StepUnderflow,
  NotConstant,
  NonConvergence,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

  // True for inputs outside the mathematical domain (rejected, not broken).
  bool is_domain_error() const {
    switch (code_) {
      case ErrorCode::Singular:
      case ErrorCode::BranchOnBoundary:
      case ErrorCode::ResonantData:
      case ErrorCode::NonDiagonalizableSum:
      case ErrorCode::ColocatedSingularities:
      case ErrorCode::NotFuchsian:
      case ErrorCode::FuchsViolation:
        return true;
      default:
        return false;
    }
  }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

// Central tolerances.  Matrix-dependent thresholds scale with the norm so the
// case logic is stable under rescaling of the input.
namespace tol {
inline constexpr double branch = 1e-6;        // distance to a branch-interval endpoint
inline constexpr double cluster_rel = 1e-8;   // eigenvalue clustering
inline constexpr double det_rel = 1e-12;      // invertibility threshold
inline constexpr double rank_rel = 1e-8;      // singular-value cutoff for ranks
inline constexpr double resonance = 1e-6;     // integer-difference detection
inline constexpr double pairing = 1e-6;       // eigenvalue pairing via exp
inline constexpr double integer_round = 1e-6; // index sums must round cleanly
inline constexpr double arc_const = 1e-6;     // per-arc constancy (relative)
inline constexpr double match = 1e-7;         // fingerprint match (resolver)
inline constexpr double generator_margin = 1e-3;  // non-resonance margin in generators
}  // namespace tol

inline double cluster_tol(const Mat& m) {
  return tol::cluster_rel * (1.0 + m.norm());
}

inline bool is_invertible(const Mat& m) {
  const double scale = std::max(m.norm(), 1e-300);
  return std::abs(m.determinant()) > tol::det_rel * std::pow(scale, m.rows());
}

inline Mat inverse_checked(const Mat& m, const char* what = "matrix") {
  if (!is_invertible(m)) fail(ErrorCode::Singular, std::string(what) + " is numerically singular");
  return m.inverse();
}

// Deterministic pseudo-random source.  The uniform mapping is fixed (top 53
// bits of the engine output), so identical seeds give identical draws on any
// platform, which the generators rely on for byte-identical output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed + 0x9e3779b97f4a7c15ull) {}

  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  Cx unit_disk() {
    for (;;) {
      Cx z(uniform(-1.0, 1.0), uniform(-1.0, 1.0));
      if (std::norm(z) <= 1.0) return z;
    }
  }

  // Nonzero draw, bounded away from the origin.
  Cx annulus(double rmin, double rmax) {
    const double r = std::sqrt(uniform(rmin * rmin, rmax * rmax));
    const double phi = uniform(0.0, 2.0 * kPi);
    return std::polar(r, phi);
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

inline bool near_integer(double x, double tolerance, long long* rounded = nullptr) {
  const double r = std::round(x);
  if (rounded) *rounded = static_cast<long long>(r);
  return std::abs(x - r) < tolerance;
}

}  // namespace pcfactor
