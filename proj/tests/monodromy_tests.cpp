#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "pcfactor/common.hpp"
#include "pcfactor/fuchsian.hpp"
#include "pcfactor/monodromy.hpp"
#include "pcfactor/symbol.hpp"

using namespace pcfactor;

namespace {

RationalSystem triangular_system(Rng& rng, int m, long long k1, long long k2) {
  std::vector<Cx> sing = default_singularities(m);
  const double lo = strip_lo(1.2);
  std::vector<std::vector<Cx>> eps = draw_exponent_rows(2, m, {k1, k2}, lo, rng);
  return generate_triangular_2(sing, {k1, k2}, eps, rng);
}

}  // namespace

TEST_CASE("segments expose consistent point and velocity parametrizations") {
  Segment l = Segment::line(Cx(0.0, 0.0), Cx(1.0, 2.0));
  CHECK(std::abs(l.point(0.0) - Cx(0.0, 0.0)) < 1e-15);
  CHECK(std::abs(l.point(1.0) - Cx(1.0, 2.0)) < 1e-15);
  CHECK(std::abs(l.velocity(0.5) - Cx(1.0, 2.0)) < 1e-15);

  Segment c = Segment::arc(Cx(1.0, 0.0), 0.5, 0.0, kPi);
  CHECK(std::abs(c.point(0.0) - Cx(1.5, 0.0)) < 1e-14);
  CHECK(std::abs(c.point(1.0) - Cx(0.5, 0.0)) < 1e-14);
  double h = 1e-6;
  Cx fd = (c.point(0.5 + h) - c.point(0.5 - h)) / (2.0 * h);
  CHECK(std::abs(fd - c.velocity(0.5)) < 1e-7);
}

TEST_CASE("scalar residue transports to the expected monodromy factor") {
  std::vector<Cx> sing = default_singularities(3);
  MatrixField f = scalar_field(sing, {Cx(0.3, 0.0), Cx(-0.1, 0.0), Cx(-0.2, 0.0)});
  std::vector<LoopPath> loops = build_loops(sing, Cx(0.0, 0.0));
  MonodromyTuple tuple = monodromy(f, loops);
  REQUIRE(tuple.chis.size() == 3);

  Cx want0 = std::exp(Cx(0.0, -2.0 * kPi) * Cx(0.3, 0.0));
  CHECK(std::abs(tuple.chis[0](0, 0) - want0) < 1e-9);
  Cx want1 = std::exp(Cx(0.0, -2.0 * kPi) * Cx(-0.1, 0.0));
  CHECK(std::abs(tuple.chis[1](0, 0) - want1) < 1e-9);
  CHECK(tuple.product_defect < 1e-8);
}

TEST_CASE("zero field transports to the identity") {
  MatrixField f;
  f.n = 2;
  f.singularities = default_singularities(3);
  f.at = [](Cx) { return Mat(Mat::Zero(2, 2)); };
  std::vector<LoopPath> loops = build_loops(f.singularities, Cx(0.0, 0.0));
  for (const LoopPath& loop : loops) {
    Mat t = transport(f, loop, Mat(Mat::Identity(2, 2)));
    CHECK((t - Mat::Identity(2, 2)).norm() < 1e-12);
  }
}

TEST_CASE("transport along a path and back is the identity") {
  Rng rng(41);
  RationalSystem sys = triangular_system(rng, 3, 1, 0);
  MatrixField f = field_of(sys);
  std::vector<Segment> forward = {
      Segment::line(Cx(0.0, 0.0), Cx(0.2, 0.3)),
      Segment::line(Cx(0.2, 0.3), Cx(-0.1, 0.4)),
  };
  std::vector<Segment> backward = {
      Segment::line(Cx(-0.1, 0.4), Cx(0.2, 0.3)),
      Segment::line(Cx(0.2, 0.3), Cx(0.0, 0.0)),
  };
  Mat there = transport(f, forward, Mat(Mat::Identity(2, 2)));
  Mat roundtrip = transport(f, backward, there);
  CHECK((roundtrip - Mat::Identity(2, 2)).norm() < 1e-9);
}

TEST_CASE("tighter tolerances improve the loop product defect") {
  Rng rng(43);
  RationalSystem sys = triangular_system(rng, 3, 1, 0);

  IntegratorConfig loose;
  loose.rel_tol = 1e-6;
  loose.abs_tol = 1e-8;
  IntegratorConfig tight;
  tight.rel_tol = 1e-10;
  tight.abs_tol = 1e-12;

  MonodromyTuple a = monodromy(sys, Cx(0.0, 0.0), loose);
  MonodromyTuple b = monodromy(sys, Cx(0.0, 0.0), tight);
  CHECK(b.product_defect < 1e-8);
  CHECK(b.product_defect <= a.product_defect + 1e-12);
}

TEST_CASE("monodromy of a generated system matches its planted jump data") {
  Rng rng(47);
  RationalSystem sys = triangular_system(rng, 3, 1, 1);
  MonodromyTuple tuple = monodromy(sys);
  REQUIRE(tuple.chis.size() == 3);

  DataPair data = data_from_jumps(tuple.chis, 1.2);
  CHECK(data.kappa == 2);

  CHECK(invariant_subspace_propagation_check(sys, tuple.loops));
}

TEST_CASE("symbol reconstruction and factor assembly reach tight residuals") {
  Rng rng(53);
  RationalSystem sys = triangular_system(rng, 3, 1, 0);
  FactorAssembly fa = factor_assembly(sys, 1.2);
  REQUIRE(fa.powers.size() == 2);
  CHECK(fa.powers[0] == 1);
  CHECK(fa.powers[1] == 0);
  CHECK(fa.residual < 1e-7);

  PiecewiseSymbol sym = fa.symbol;
  CHECK(sym.n == 2);
  CHECK(sym.arc_count() == 3);
  CHECK(phi_criterion(sym).ok);

  // The symbol's own jump data reproduces the declared index total.
  DataPair data = extract_data(sym);
  CHECK(data.kappa == 1);
}

TEST_CASE("exterior field is analytic at the origin of the outer chart") {
  Rng rng(59);
  RationalSystem sys = triangular_system(rng, 3, 2, 0);
  MatrixField ext = exterior_field(sys);
  // w = 0 corresponds to z = infinity; a standard-form system must give a
  // finite field value there.
  Mat b0 = ext.at(Cx(0.0, 0.0));
  CHECK(b0.allFinite());
  Mat b1 = ext.at(Cx(0.05, 0.02));
  CHECK(b1.allFinite());
}
