#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "pcfactor/common.hpp"
#include "pcfactor/fuchsian.hpp"
#include "pcfactor/polynomial.hpp"
#include "pcfactor/symbol.hpp"

using namespace pcfactor;

namespace {

// Second-order equation with points {0, 1} and exponent data
// {0, 1-c} at 0, {0, c-a-b} at 1, {a, b} at infinity.
ScalarFuchsEq gauss_equation(Cx a, Cx b, Cx c) {
  ScalarFuchsEq eq;
  eq.order = 2;
  eq.singularities = {Cx(0.0, 0.0), Cx(1.0, 0.0)};
  eq.pf = {
      {{c}, {a + b + Cx(1.0, 0.0) - c}},
      {{-a * b, Cx(0.0, 0.0)}, {a * b, Cx(0.0, 0.0)}},
  };
  return eq;
}

bool matches_multiset(std::vector<Cx> got, std::vector<Cx> want, double tol) {
  if (got.size() != want.size()) return false;
  auto by_parts = [](Cx x, Cx y) {
    if (std::abs(x.real() - y.real()) > 1e-12) return x.real() < y.real();
    return x.imag() < y.imag();
  };
  std::sort(got.begin(), got.end(), by_parts);
  std::sort(want.begin(), want.end(), by_parts);
  for (std::size_t i = 0; i < got.size(); ++i)
    if (std::abs(got[i] - want[i]) > tol) return false;
  return true;
}

}  // namespace

TEST_CASE("default_singularities walks roots of unity counterclockwise") {
  std::vector<Cx> s = default_singularities(4);
  REQUIRE(s.size() == 4);
  CHECK(std::abs(s[0] - Cx(1.0, 0.0)) < 1e-14);
  CHECK(std::abs(s[1] - Cx(0.0, 1.0)) < 1e-14);
  CHECK(std::abs(s[2] - Cx(-1.0, 0.0)) < 1e-14);
  CHECK(std::abs(s[3] - Cx(0.0, -1.0)) < 1e-14);
}

TEST_CASE("draw_exponent_rows honors sums, strip placement, and separation") {
  Rng rng(101);
  const double lo = strip_lo(1.2);
  std::vector<std::vector<Cx>> eps = draw_exponent_rows(2, 3, {1, 0}, lo, rng);
  REQUIRE(eps.size() == 2);
  Cx sum0 = 0.0, sum1 = 0.0;
  for (int k = 0; k < 3; ++k) {
    sum0 += eps[0][static_cast<std::size_t>(k)];
    sum1 += eps[1][static_cast<std::size_t>(k)];
    CHECK(eps[0][static_cast<std::size_t>(k)].real() > lo);
    CHECK(eps[0][static_cast<std::size_t>(k)].real() < lo + 1.0);
    CHECK(std::abs(eps[0][static_cast<std::size_t>(k)] - eps[1][static_cast<std::size_t>(k)]) >
          1e-3);
  }
  CHECK(std::abs(sum0 - Cx(1.0, 0.0)) < 1e-10);
  CHECK(std::abs(sum1) < 1e-10);
}

TEST_CASE("draw_extremal_exponents keeps selection sums away from integers") {
  Rng rng(55);
  const double lo = strip_lo(1.2);
  std::vector<std::vector<Cx>> eps = draw_extremal_exponents(2, 4, 0, lo, rng);
  REQUIRE(eps.size() == 2);
  Cx total = 0.0;
  for (int r = 0; r < 2; ++r)
    for (int k = 0; k < 4; ++k) total += eps[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)];
  CHECK(std::abs(total - Cx(2.0, 0.0)) < 1e-10);

  // Every mixed selection (one slot per point) must stay off the integers.
  for (unsigned sel = 0; sel < 16; ++sel) {
    Cx s = 0.0;
    for (int k = 0; k < 4; ++k) {
      int row = (sel >> k) & 1u;
      s += eps[static_cast<std::size_t>(row)][static_cast<std::size_t>(k)];
    }
    long long nearest = std::llround(s.real());
    double dist = std::hypot(s.real() - static_cast<double>(nearest), s.imag());
    CHECK(dist > 1e-3);
  }
}

TEST_CASE("generate_triangular_2 produces a standard-form system with planted residues") {
  Rng rng(7);
  std::vector<Cx> sing = default_singularities(3);
  const double lo = strip_lo(1.2);
  std::vector<std::vector<Cx>> eps = draw_exponent_rows(2, 3, {1, 0}, lo, rng);
  RationalSystem sys = generate_triangular_2(sing, {1, 0}, eps, rng);

  CHECK(validate_standard_form(sys).empty());
  CHECK(sys.numerators[1][0].is_zero());
  CHECK_FALSE(sys.numerators[0][1].is_zero());

  std::vector<Mat> res = residues(sys);
  REQUIRE(res.size() == 3);
  for (int k = 0; k < 3; ++k) {
    CHECK(std::abs(res[static_cast<std::size_t>(k)](0, 0) -
                   eps[0][static_cast<std::size_t>(k)]) < 1e-10);
    CHECK(std::abs(res[static_cast<std::size_t>(k)](1, 1) -
                   eps[1][static_cast<std::size_t>(k)]) < 1e-10);
    CHECK(std::abs(res[static_cast<std::size_t>(k)](1, 0)) < 1e-14);
  }

  // Trace of the residue sum equals the declared index total.
  Cx tr = 0.0;
  for (const Mat& r : res) tr += r.trace();
  CHECK(std::abs(tr - Cx(1.0, 0.0)) < 1e-10);

  // The coefficient matrix agrees with its partial fraction expansion.
  Cx z(0.37, 0.21);
  Mat expanded = Mat::Zero(2, 2);
  for (int k = 0; k < 3; ++k)
    expanded += res[static_cast<std::size_t>(k)] / (z - sing[static_cast<std::size_t>(k)]);
  CHECK((sys.eval(z) - expanded).norm() < 1e-10);

  // Degree violations are reported.
  RationalSystem bad = sys;
  bad.numerators[0][1] = Poly::monomial(4);
  CHECK_FALSE(validate_standard_form(bad).empty());
}

TEST_CASE("generate_triangular_3 places couplings exactly on the mask") {
  Rng rng(9);
  std::vector<Cx> sing = default_singularities(3);
  const double lo = strip_lo(1.2);
  for (unsigned mask = 0; mask < 8; ++mask) {
    std::vector<std::vector<Cx>> eps = draw_exponent_rows(3, 3, {2, 1, 0}, lo, rng);
    RationalSystem sys = generate_triangular_3(sing, {2, 1, 0}, eps, mask, rng);
    CHECK(validate_standard_form(sys).empty());
    CHECK(sys.numerators[0][1].is_zero() == ((mask & 1u) == 0));
    CHECK(sys.numerators[0][2].is_zero() == ((mask & 2u) == 0));
    CHECK(sys.numerators[1][2].is_zero() == ((mask & 4u) == 0));
    CHECK(sys.numerators[1][0].is_zero());
    CHECK(sys.numerators[2][0].is_zero());
    CHECK(sys.numerators[2][1].is_zero());
  }
}

TEST_CASE("block shapes keep the declared invariant structure") {
  Rng rng(13);
  std::vector<Cx> sing = default_singularities(3);
  const double lo = strip_lo(1.2);

  std::vector<std::vector<Cx>> eps = draw_exponent_rows(3, 3, {1, 1, 0}, lo, rng);
  RationalSystem up = generate_block12_3(sing, {1, 1, 0}, eps, true, true, rng);
  CHECK(validate_standard_form(up).empty());
  CHECK(up.numerators[1][0].is_zero());
  CHECK(up.numerators[2][0].is_zero());
  CHECK(up.numerators[1][2].is_zero());
  CHECK_FALSE(up.numerators[2][1].is_zero());
  CHECK(up.numerators[0][2].is_zero());
  CHECK_FALSE(up.numerators[0][1].is_zero());

  std::vector<std::vector<Cx>> eps2 = draw_exponent_rows(3, 3, {1, 1, 0}, lo, rng);
  RationalSystem down = generate_block21_3(sing, {1, 1, 0}, eps2, false, false, rng);
  CHECK(validate_standard_form(down).empty());
  CHECK(down.numerators[0][2].is_zero());
  CHECK(down.numerators[1][2].is_zero());
  CHECK(down.numerators[2][0].is_zero());
  CHECK(down.numerators[2][1].is_zero());
}

TEST_CASE("build_2x2_residues pins spectra, row sums, and the subdiagonal") {
  Rng rng(17);
  std::vector<Cx> sing = default_singularities(3);
  std::vector<std::array<Cx, 2>> pairs = {
      {Cx(0.4, 0.2), Cx(0.1, -0.2)},
      {Cx(0.7, 0.0), Cx(0.3, 0.0)},
      {Cx(0.9, 0.0), Cx(0.6, 0.0)},
  };
  std::vector<Mat> res = build_2x2_residues(pairs, 1, sing, rng);
  REQUIRE(res.size() == 3);

  Poly den = poly_from_roots(sing);
  Poly dden = den.derivative();
  Cx gamma0 = res[0](1, 0) * dden.eval(sing[0]);
  Mat sum = Mat::Zero(2, 2);
  for (int k = 0; k < 3; ++k) {
    const Mat& r = res[static_cast<std::size_t>(k)];
    Cx want_tr = pairs[static_cast<std::size_t>(k)][0] + pairs[static_cast<std::size_t>(k)][1];
    Cx want_det = pairs[static_cast<std::size_t>(k)][0] * pairs[static_cast<std::size_t>(k)][1];
    CHECK(std::abs(r.trace() - want_tr) < 1e-10);
    CHECK(std::abs(r(0, 0) * r(1, 1) - r(0, 1) * r(1, 0) - want_det) < 1e-10);
    CHECK(std::abs(r(1, 0) * dden.eval(sing[static_cast<std::size_t>(k)]) - gamma0) < 1e-10);
    sum += r;
  }
  CHECK(std::abs(sum(0, 0) - Cx(2.0, 0.0)) < 1e-10);
  CHECK(std::abs(sum(1, 1) - Cx(1.0, 0.0)) < 1e-10);
}

TEST_CASE("generate_extremal builds the full-width shape with tight gaps") {
  Rng rng(21);
  std::vector<Cx> sing = default_singularities(3);
  const double lo = strip_lo(1.2);
  std::vector<std::vector<Cx>> eps = draw_extremal_exponents(2, 3, 1, lo, rng);
  RationalSystem sys = generate_extremal(2, 3, 1, eps, rng);
  CHECK(validate_standard_form(sys).empty());
  REQUIRE(sys.indices.size() == 2);
  CHECK(sys.indices[0] - sys.indices[1] == 1);
  CHECK(sys.indices[0] + sys.indices[1] == 3);
  CHECK_FALSE(sys.numerators[1][0].is_zero());
}

TEST_CASE("indicial exponents of the classical second-order equation") {
  const Cx a(0.3, 0.1), b(-0.2, 0.0), c(0.7, 0.0);
  ScalarFuchsEq eq = gauss_equation(a, b, c);

  CHECK(matches_multiset(indicial_exponents(eq, 0),
                         {Cx(0.0, 0.0), Cx(1.0, 0.0) - c}, 1e-10));
  CHECK(matches_multiset(indicial_exponents(eq, 1),
                         {Cx(0.0, 0.0), c - a - b}, 1e-10));
  CHECK(matches_multiset(indicial_exponents_at_infinity(eq), {a, b}, 1e-10));
  CHECK(fuchs_relation_check(eq) < 1e-12);
}

TEST_CASE("slow decay at infinity is rejected") {
  ScalarFuchsEq eq = gauss_equation(Cx(0.3, 0.1), Cx(-0.2, 0.0), Cx(0.7, 0.0));
  eq.pf[1][1][0] += Cx(1.0, 0.0);
  try {
    indicial_exponents_at_infinity(eq);
    CHECK(false);
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::NotFuchsian);
  }
}

TEST_CASE("companion system carries the coefficients in the first row") {
  ScalarFuchsEq eq = gauss_equation(Cx(0.3, 0.1), Cx(-0.2, 0.0), Cx(0.7, 0.0));
  MatrixField f = companion_system(eq);
  REQUIRE(f.n == 2);
  Cx z(0.4, 0.6);
  Mat m = f.at(z);
  CHECK(std::abs(m(0, 0) + eq.q(1, z)) < 1e-14);
  CHECK(std::abs(m(0, 1) + eq.q(2, z)) < 1e-14);
  CHECK(std::abs(m(1, 0) - Cx(1.0, 0.0)) < 1e-14);
  CHECK(std::abs(m(1, 1)) < 1e-14);
}

TEST_CASE("accessory family matches prescribed local data for order two") {
  std::vector<Cx> sing = default_singularities(4);
  std::vector<std::vector<Cx>> expo = {
      {Cx(0.2, 0.1), Cx(-0.3, 0.0)},
      {Cx(0.4, 0.0), Cx(0.15, 0.0)},
      {Cx(0.55, -0.1), Cx(0.3, 0.0)},
      {Cx(0.7, 0.0), Cx(0.0, 0.0)},
  };
  AccessoryFamily fam = accessory_family(2, sing, expo);

  bool direction_alive = false;
  for (const auto& cell : fam.direction.pf[1])
    for (Cx v : cell) direction_alive = direction_alive || std::abs(v) > 1e-12;
  CHECK(direction_alive);

  for (Cx t : {Cx(0.0, 0.0), Cx(1.7, 0.3)}) {
    ScalarFuchsEq eq = fam.at(t);
    for (int k = 0; k < 4; ++k)
      CHECK(matches_multiset(indicial_exponents(eq, k), expo[static_cast<std::size_t>(k)],
                             1e-9));
    CHECK(matches_multiset(indicial_exponents_at_infinity(eq),
                           {Cx(0.0, 0.0), Cx(1.0, 0.0)}, 1e-9));
    CHECK(fuchs_relation_check(eq) < 1e-9);
  }
}

TEST_CASE("accessory family matches prescribed local data for order three") {
  std::vector<Cx> sing = default_singularities(3);
  std::vector<std::vector<Cx>> expo = {
      {Cx(0.3, 0.0), Cx(0.1, 0.0), Cx(-0.2, 0.0)},
      {Cx(0.5, 0.2), Cx(0.25, 0.0), Cx(0.0, 0.0)},
      {Cx(0.6, 0.0), Cx(0.45, -0.2), Cx(1.0, 0.0)},
  };
  AccessoryFamily fam = accessory_family(3, sing, expo);

  for (Cx t : {Cx(0.0, 0.0), Cx(-0.6, 1.1)}) {
    ScalarFuchsEq eq = fam.at(t);
    for (int k = 0; k < 3; ++k)
      CHECK(matches_multiset(indicial_exponents(eq, k), expo[static_cast<std::size_t>(k)],
                             1e-9));
    CHECK(matches_multiset(indicial_exponents_at_infinity(eq),
                           {Cx(0.0, 0.0), Cx(1.0, 0.0), Cx(2.0, 0.0)}, 1e-9));
    CHECK(fuchs_relation_check(eq) < 1e-9);
  }
}

TEST_CASE("accessory family rejects exponents that break the sum identity") {
  std::vector<Cx> sing = default_singularities(4);
  std::vector<std::vector<Cx>> expo = {
      {Cx(0.2, 0.0), Cx(-0.3, 0.0)},
      {Cx(0.4, 0.0), Cx(0.15, 0.0)},
      {Cx(0.55, 0.0), Cx(0.3, 0.0)},
      {Cx(0.7, 0.0), Cx(0.5, 0.0)},
  };
  try {
    accessory_family(2, sing, expo);
    CHECK(false);
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::FuchsViolation);
  }
}
