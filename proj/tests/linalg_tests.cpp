#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "pcfactor/common.hpp"
#include "pcfactor/linalg.hpp"

using namespace pcfactor;

namespace {

Mat mat2(Cx a, Cx b, Cx c, Cx d) {
  Mat m(2, 2);
  m << a, b, c, d;
  return m;
}

double norm_diff(const Mat& a, const Mat& b) { return (a - b).norm(); }

}  // namespace

TEST_CASE("expm reproduces closed forms") {
  Mat nil = mat2(0.0, 1.0, 0.0, 0.0);
  CHECK(norm_diff(expm(nil), mat2(1.0, 1.0, 0.0, 1.0)) < 1e-14);

  double th = 0.7;
  Mat rot = mat2(0.0, -th, th, 0.0);
  Mat expected = mat2(std::cos(th), -std::sin(th), std::sin(th), std::cos(th));
  CHECK(norm_diff(expm(rot), expected) < 1e-13);

  Rng rng(11);
  for (int i = 0; i < 20; ++i) {
    Mat a(3, 3);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) a(r, c) = rng.unit_disk();
    CHECK(norm_diff(expm(a) * expm(-a), Mat::Identity(3, 3)) < 1e-11);
  }
}

TEST_CASE("branch_log on a unipotent jump gives the frozen nilpotent value") {
  Mat m = mat2(1.0, 1.0, 0.0, 1.0);
  Mat e = branch_log(m, -0.5);
  const Cx e01(0.0, 1.0 / (2.0 * kPi));
  CHECK(std::abs(e(0, 0)) < 1e-10);
  CHECK(std::abs(e(1, 0)) < 1e-10);
  CHECK(std::abs(e(1, 1)) < 1e-10);
  CHECK(std::abs(e(0, 1) - e01) < 1e-10);
  CHECK(norm_diff(expm(Cx(0.0, -2.0 * kPi) * e), m) < 1e-10);
}

TEST_CASE("branch_log picks exponents inside the requested strip") {
  Rng rng(5);
  for (int trial = 0; trial < 25; ++trial) {
    double lo = rng.uniform(-0.9, -0.1);
    Cx e1(rng.uniform(lo + 0.05, lo + 0.95), rng.uniform(-0.4, 0.4));
    Cx e2(rng.uniform(lo + 0.05, lo + 0.95), rng.uniform(-0.4, 0.4));
    if (std::abs(e1 - e2) < 0.05) continue;
    Mat d = Mat::Zero(2, 2);
    d(0, 0) = std::exp(Cx(0.0, -2.0 * kPi) * e1);
    d(1, 1) = std::exp(Cx(0.0, -2.0 * kPi) * e2);
    Mat s = mat2(1.0, 0.3, -0.2, 1.1);
    Mat m = s * d * s.inverse();
    Mat e = branch_log(m, lo);
    CHECK(norm_diff(expm(Cx(0.0, -2.0 * kPi) * e), m) < 1e-9);
    for (const EigenCluster& c : eigen(e).clusters) {
      CHECK(c.value.real() > lo);
      CHECK(c.value.real() < lo + 1.0);
    }
    CHECK(norm_diff(e * m, m * e) < 1e-9);
  }
}

TEST_CASE("branch_log rejects eigenvalues on the strip boundary") {
  Mat d = Mat::Zero(2, 2);
  d(0, 0) = Cx(0.0, 1.0);  // exponent -1/4 up to integers
  d(1, 1) = 2.0;
  try {
    branch_log(d, -0.25);
    CHECK(false);
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::BranchOnBoundary);
  }
}

TEST_CASE("branch_log rejects singular input") {
  Mat d = Mat::Zero(2, 2);
  d(0, 0) = 1.0;
  try {
    branch_log(d, -0.5);
    CHECK(false);
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::Singular);
  }
}

TEST_CASE("eigen clusters repeated eigenvalues with the right geometry") {
  Mat jordan = mat2(2.0, 1.0, 0.0, 2.0);
  Spectrum sp = eigen(jordan);
  REQUIRE(sp.clusters.size() == 1);
  CHECK(sp.clusters[0].alg == 2);
  CHECK(sp.clusters[0].geo == 1);
  CHECK(std::abs(sp.clusters[0].value - Cx(2.0)) < 1e-8);

  Mat diag = mat2(2.0, 0.0, 0.0, 2.0);
  sp = eigen(diag);
  REQUIRE(sp.clusters.size() == 1);
  CHECK(sp.clusters[0].alg == 2);
  CHECK(sp.clusters[0].geo == 2);

  Mat generic = mat2(1.0, 2.0, 3.0, 4.0);
  sp = eigen(generic);
  CHECK(sp.clusters.size() == 2);
  CHECK(sp.values_with_multiplicity().size() == 2);
}

TEST_CASE("rank, kernel, and subspace helpers agree on planted spans") {
  Mat a(3, 3);
  a << 1.0, 2.0, 3.0, 2.0, 4.0, 6.0, 0.0, 1.0, 1.0;  // rank 2
  CHECK(rank_of(a) == 2);
  Mat k = kernel_basis(a);
  REQUIRE(k.cols() == 1);
  CHECK((a * k).norm() < 1e-10);
  Mat cs = column_space(a);
  CHECK(cs.cols() == 2);
  Mat oc = orthogonal_complement(cs);
  CHECK(oc.cols() == 1);
  CHECK((cs.adjoint() * oc).norm() < 1e-10);

  Mat u(3, 2), w(3, 2);
  u << 1, 0, 0, 1, 0, 0;
  w << 0, 0, 1, 0, 0, 1;
  Mat inter = subspace_intersection(u, w);
  REQUIRE(inter.cols() == 1);
  CHECK(std::abs(inter(0, 0)) < 1e-10);
  CHECK(std::abs(inter(2, 0)) < 1e-10);
}

TEST_CASE("is_invariant_subspace detects planted invariance") {
  Mat m(3, 3);
  m << 1, 2, 0, 3, 4, 0, 0, 0, 5;
  Mat sub(3, 2);
  sub << 1, 0, 0, 1, 0, 0;
  CHECK(is_invariant_subspace(m, sub));
  Mat bad(3, 1);
  bad << 1, 1, 1;
  bad /= bad.norm();
  CHECK_FALSE(is_invariant_subspace(m, bad));
}

TEST_CASE("similar distinguishes Jordan structure") {
  Mat jordan = mat2(2.0, 1.0, 0.0, 2.0);
  Mat diag = mat2(2.0, 0.0, 0.0, 2.0);
  CHECK_FALSE(similar(jordan, diag));
  Mat s = mat2(1.0, 0.4, -0.3, 1.2);
  CHECK(similar(jordan, s * jordan * s.inverse()));
  CHECK_FALSE(similar(mat2(1, 0, 0, 2), mat2(1, 0, 0, 3)));
}

TEST_CASE("minimal_poly_degree counts distinct structure") {
  CHECK(minimal_poly_degree(Mat::Identity(3, 3)) == 1);
  CHECK(minimal_poly_degree(mat2(2.0, 1.0, 0.0, 2.0)) == 2);
  Mat d = Mat::Zero(3, 3);
  d(0, 0) = 1.0;
  d(1, 1) = 2.0;
  d(2, 2) = 3.0;
  CHECK(minimal_poly_degree(d) == 3);
}

TEST_CASE("common_eigenvector_subspaces finds planted joint lines") {
  // Upper triangular pair with a non-removable coupling: only e1 survives.
  Mat m1 = mat2(1.0, 1.0, 0.0, 2.0);
  Mat m2 = mat2(3.0, 0.5, 0.0, 1.0);
  std::vector<Mat> spaces = common_eigenvector_subspaces({m1, m2});
  REQUIRE(spaces.size() == 1);
  CHECK(spaces[0].cols() == 1);
  CHECK(std::abs(spaces[0](1, 0)) < 1e-8);

  // Commuting diagonals share both coordinate lines.
  Mat d1 = mat2(1.0, 0.0, 0.0, 2.0);
  Mat d2 = mat2(5.0, 0.0, 0.0, 3.0);
  spaces = common_eigenvector_subspaces({d1, d2});
  int dim = 0;
  for (const Mat& s : spaces) dim += static_cast<int>(s.cols());
  CHECK(dim == 2);

  // A generic pair shares nothing.
  Mat g1 = mat2(1.0, 2.0, 3.0, 4.0);
  Mat g2 = mat2(0.0, 1.0, -1.0, 1.0);
  CHECK(common_eigenvector_subspaces({g1, g2}).empty());
}

TEST_CASE("similarity_fingerprint lists traces of words up to length three") {
  std::vector<Mat> id3 = {Mat::Identity(2, 2), Mat::Identity(2, 2), Mat::Identity(2, 2)};
  std::vector<Cx> fp = similarity_fingerprint(id3);
  REQUIRE(fp.size() == 7);  // 3 singles, 3 pairs, 1 triple
  for (Cx v : fp) CHECK(std::abs(v - Cx(2.0)) < 1e-14);

  Rng rng(7);
  std::vector<Mat> ms;
  for (int k = 0; k < 3; ++k) {
    Mat m(2, 2);
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) m(r, c) = rng.unit_disk();
    ms.push_back(m);
  }
  Mat s = mat2(1.0, 0.2, -0.4, 1.3);
  std::vector<Mat> conj;
  for (const Mat& m : ms) conj.push_back(s * m * s.inverse());
  std::vector<Cx> fa = similarity_fingerprint(ms);
  std::vector<Cx> fb = similarity_fingerprint(conj);
  REQUIRE(fa.size() == fb.size());
  for (std::size_t i = 0; i < fa.size(); ++i) CHECK(std::abs(fa[i] - fb[i]) < 1e-10);
}
