#pragma once

#include <functional>
#include <vector>

#include "pcfactor/common.hpp"

namespace pcfactor {

// Piecewise constant n x n matrix function on the unit circle. Jump k sits at
// angle jump_angles[k] (strictly increasing within [0, 2*pi)); arc k runs
// counterclockwise from jump k to jump k+1 (wrapping) and carries the constant
// value arc_values[k].
struct PiecewiseSymbol {
  int n = 0;
  double p = 2.0;  // Lebesgue exponent of the factorization space
  std::vector<double> jump_angles;
  std::vector<Mat> arc_values;

  int arc_count() const { return static_cast<int>(jump_angles.size()); }
  Cx jump_point(int k) const { return std::polar(1.0, jump_angles[static_cast<std::size_t>(k)]); }

  // Value at angle theta (reduced mod 2*pi); angles on a jump resolve to the
  // outgoing arc.
  const Mat& value_at_angle(double theta) const;

  void validate() const;  // shape and monotonicity checks, throws InvalidArgument
};

// Admissible strip for the exponent real parts: (1/p - 1, 1/p).
inline double strip_lo(double p) { return 1.0 / p - 1.0; }

// Integer power of a complex number.
inline Cx cx_ipow(Cx z, long long k) {
  if (k < 0) return Cx(1.0, 0.0) / cx_ipow(z, -k);
  Cx acc(1.0, 0.0);
  Cx base = z;
  for (long long e = k; e > 0; e >>= 1) {
    if (e & 1) acc *= base;
    base *= base;
  }
  return acc;
}

// Jump matrices m_k = value(before jump k) * value(after jump k)^{-1}.
// Their ordered product telescopes to the identity.
std::vector<Mat> jump_matrices(const PiecewiseSymbol& symbol);

struct PhiFailure {
  int jump = 0;
  Cx eigenvalue;
  double distance = 0.0;  // distance of arg/(2*pi) + 1/p to the nearest integer
  bool singular_arc = false;
};

struct PhiReport {
  bool ok = true;
  std::vector<PhiFailure> failures;
};

// Solvability test: every one-sided value invertible, and no jump eigenvalue
// with arg(lambda)/(2*pi) + 1/p within tol::branch of an integer.
PhiReport phi_criterion(const PiecewiseSymbol& symbol);

// Jump data of a symbol: the jump matrices, their strip-constrained
// logarithms, the sorted real parts per jump, and the total index.
struct DataPair {
  int n = 0;
  double p = 2.0;
  std::vector<Mat> ms;
  std::vector<Mat> es;
  std::vector<std::vector<double>> zetas;  // per jump, Re eigenvalues sorted descending
  long long kappa = 0;
};

// Builds the data for an explicit tuple of jump matrices whose ordered
// product is the identity.
DataPair data_from_jumps(const std::vector<Mat>& ms, double p);

DataPair extract_data(const PiecewiseSymbol& symbol);

// Scalar (n = 1) factorization g = g_plus * t^kappa * g_minus in closed form.
// g_plus extends analytically inside the circle, g_minus outside with
// g_minus(infinity) = exp of a constant fitted on the first arc.
struct ScalarFactorization {
  std::vector<Cx> exponents;  // one per jump
  long long kappa = 0;
  Cx constant;                // multiplicative fit absorbed into the plus factor
  std::function<Cx(Cx)> plus;
  std::function<Cx(Cx)> minus;
};

ScalarFactorization scalar_factorize(const PiecewiseSymbol& symbol);

// Factorization of a symbol with exactly two jumps; its jump matrices are
// mutually inverse, so all logarithms commute and the factors are explicit
// matrix exponentials.
struct CommutingFactorization {
  std::vector<long long> indices;  // sorted non-increasing
  std::function<Mat(Cx)> plus;
  std::function<Mat(Cx)> minus;
  Mat index_basis;  // columns: eigenvectors matching `indices`
};

CommutingFactorization commuting_factorize_m2(const PiecewiseSymbol& symbol);

}  // namespace pcfactor
