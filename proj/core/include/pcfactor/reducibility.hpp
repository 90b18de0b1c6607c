#pragma once

#include <vector>

#include "pcfactor/common.hpp"
#include "pcfactor/symbol.hpp"

namespace pcfactor {

enum class ReducibilityType2 { A, B, C };

// 2x2 reducibility report. For type B, n1 is the slot sum of the unique
// common line and n2 the quotient slot sum. For type C both line slots are
// reported sorted non-increasing.
struct Reducibility2 {
  ReducibilityType2 type = ReducibilityType2::A;
  long long n1 = 0;
  long long n2 = 0;
  std::vector<Mat> lines;  // unit representatives, one column each
  bool line_continuum = false;
};

enum class ReducibilityType3 { A, B1, B2, B3, C, C1, C2, C3, D };

// 3x3 reducibility report. Which integer fields are meaningful depends on
// the type:
//   B1/B2/B3: nu (distinguished scalar slot) and N = kappa - nu.
//   C:        n1 (line), n2 (middle), n3 (quotient), in flag order.
//   C1:       n1 >= n2 line slots, n3 the quotient slot.
//   C2:       n1 the line slot, n2 >= n3 the plane-quotient slots.
//   C3:       nu1 (intersection line of all planes), nu2 (quotient by the
//             plane holding all lines), nu_sharp the remainder.
//   D:        n1 >= n2 >= n3.
struct Reducibility3 {
  ReducibilityType3 type = ReducibilityType3::A;
  long long nu = 0, N = 0;
  long long n1 = 0, n2 = 0, n3 = 0;
  long long nu1 = 0, nu2 = 0, nu_sharp = 0;
  std::vector<Mat> lines;
  bool line_continuum = false;
  std::vector<Mat> planes;  // orthonormal 2-column bases
  bool plane_continuum = false;
};

Reducibility2 classify2(const DataPair& data);
Reducibility3 classify3(const DataPair& data);

// The exponent of e matching a jump eigenvalue mu via mu = exp(-2*pi*i*eps).
// Throws AmbiguousPairing when no or several exponent clusters match.
Cx match_exponent(const Mat& e, Cx mu);

// Exponents of e ordered along an invariant flag of m: one group per slot
// (chain[0], chain[1]/chain[0], ..., full space / chain.back()), each group
// sorted by descending real part. Chain entries are orthonormal bases of
// nested invariant subspaces of m.
std::vector<Cx> pair_exponents(const Mat& m, const Mat& e, const std::vector<Mat>& chain);

}  // namespace pcfactor
