#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "pcfactor/common.hpp"
#include "pcfactor/polynomial.hpp"

namespace pcfactor {

// Rational coefficient matrix A(z) = N(z)/p(z) with p(z) = prod_k (z - a_k).
// Standard form: off-diagonal numerator entries have degree at most
// m - 2 + k_i - k_j, the diagonal entry i is k_i z^{m-1} plus a polynomial
// of degree at most m - 2. Solutions then behave like diag(z^{k_i}) times an
// invertible analytic factor at infinity.
struct RationalSystem {
  int n = 0;
  std::vector<Cx> singularities;
  std::vector<long long> indices;  // declared, non-increasing
  std::vector<std::vector<Poly>> numerators;  // [row][col]

  int m() const { return static_cast<int>(singularities.size()); }
  Poly denominator() const;
  Mat eval(Cx z) const;
};

// Empty list means the system is in standard form; entries describe the
// violated conditions.
std::vector<std::string> validate_standard_form(const RationalSystem& sys);

// Residue matrices N(a_k)/p'(a_k), evaluated in closed form.
std::vector<Mat> residues(const RationalSystem& sys);

// Coefficient field of a linear system Y' = F(z)Y.
struct MatrixField {
  int n = 0;
  std::vector<Cx> singularities;
  std::function<Mat(Cx)> at;
};

MatrixField field_of(const RationalSystem& sys);

// One-dimensional field a(z) = sum_k eps_k / (z - a_k).
MatrixField scalar_field(const std::vector<Cx>& singularities, const std::vector<Cx>& eps);

// m-th roots of unity, counterclockwise from 1.
std::vector<Cx> default_singularities(int m);

// Exponent rows eps[j][k] (slot j, point k) with exact row sums, real parts
// inside (lo + margin, lo + 1 - margin), and same-point slot separation.
std::vector<std::vector<Cx>> draw_exponent_rows(int n, int m,
                                                const std::vector<long long>& sums,
                                                double lo, Rng& rng);

// Exponents for the full-width shape: additionally every mixed selection sum
// (one slot per point) stays away from integers, and for n = 3 the two-slot
// selection sums do as well.
std::vector<std::vector<Cx>> draw_extremal_exponents(int n, int m, long long kappa_n,
                                                     double lo, Rng& rng);

// Upper-triangular 2x2 shape with prescribed diagonal exponent rows and a
// random nonzero coupling polynomial.
RationalSystem generate_triangular_2(const std::vector<Cx>& sing,
                                     const std::vector<long long>& indices,
                                     const std::vector<std::vector<Cx>>& eps, Rng& rng);

// Upper-triangular 3x3 shape. coupling_mask bits: 1 = entry (1,2),
// 2 = entry (1,3), 4 = entry (2,3); set bits get random nonzero polynomials,
// clear bits stay identically zero.
RationalSystem generate_triangular_3(const std::vector<Cx>& sing,
                                     const std::vector<long long>& indices,
                                     const std::vector<std::vector<Cx>>& eps,
                                     unsigned coupling_mask, Rng& rng);

// Scalar slot on top of a 2x2 block (rows/columns 2,3). With inner_lower the
// inner block is lower triangular with a constant subdiagonal entry and the
// coupling row is restricted to entry (1,2) so the inner invariant line
// survives; otherwise the inner block is full and the whole coupling row is
// drawn. coupling_on = false zeroes the coupling row (block diagonal).
RationalSystem generate_block12_3(const std::vector<Cx>& sing,
                                  const std::vector<long long>& indices,
                                  const std::vector<std::vector<Cx>>& eps,
                                  bool coupling_on, bool inner_lower, Rng& rng);

// Mirror shape: 2x2 block (rows/columns 1,2) with a trailing scalar slot.
// With inner_lower the inner block is lower triangular and the coupling
// column is restricted to entry (2,3).
RationalSystem generate_block21_3(const std::vector<Cx>& sing,
                                  const std::vector<long long>& indices,
                                  const std::vector<std::vector<Cx>>& eps,
                                  bool coupling_on, bool inner_lower, Rng& rng);

// Residue matrices with prescribed eigenvalue pairs whose (2,1) entries are
// gamma / p'(a_k), so the assembled (2,1) numerator is the constant gamma.
// Row sums of the diagonal come out exactly (kappa2 + gap, kappa2).
std::vector<Mat> build_2x2_residues(const std::vector<std::array<Cx, 2>>& pairs,
                                    long long gap, const std::vector<Cx>& sing, Rng& rng);

// Full-width shape with consecutive index gaps m - 2, nonzero constant
// subdiagonal entries, and zero entries below the subdiagonal.
RationalSystem generate_extremal(int n, int m, long long kappa_n,
                                 const std::vector<std::vector<Cx>>& eps, Rng& rng);

// Scalar equation y^(n) + q_1 y^(n-1) + ... + q_n y = 0 with rational
// coefficients vanishing at infinity; pf[j][k][o] is the coefficient of
// (z - a_k)^{-(o+1)} in q_{j+1}. Pole orders are at most j + 1 by layout.
struct ScalarFuchsEq {
  int order = 0;
  std::vector<Cx> singularities;
  std::vector<std::vector<std::vector<Cx>>> pf;

  Cx q(int j, Cx z) const;  // 1-based coefficient index
};

// First-order companion of the scalar equation in the variables
// (y^{(n-1)}, ..., y', y): first row (-q_1, ..., -q_n), subdiagonal ones.
MatrixField companion_system(const ScalarFuchsEq& eq);

// Roots of the indicial polynomial at singularity k.
std::vector<Cx> indicial_exponents(const ScalarFuchsEq& eq, int k);

// Exponents rho of solutions behaving like z^{-rho} at infinity. Throws
// NotFuchsian when some coefficient decays too slowly.
std::vector<Cx> indicial_exponents_at_infinity(const ScalarFuchsEq& eq);

// Absolute defect of the exponent-sum identity over all finite points and
// the point at infinity.
double fuchs_relation_check(const ScalarFuchsEq& eq);

struct AccessoryFamily {
  ScalarFuchsEq base;
  ScalarFuchsEq direction;
  ScalarFuchsEq at(Cx t) const;
};

// One-parameter family of scalar equations with the prescribed exponent
// multiset at each finite point and an ordinary point at infinity.
// Supported shapes: order 2 with four points and order 3 with three points.
AccessoryFamily accessory_family(int n, const std::vector<Cx>& singularities,
                                 const std::vector<std::vector<Cx>>& exponents);

}  // namespace pcfactor
