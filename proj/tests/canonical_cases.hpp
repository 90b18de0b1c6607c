#pragma once

// Direct constructions of jump tuples whose ordered product is the identity
// and whose common invariant subspace lattice is planted by shape: coupled
// scalar flags, a scalar slot against an irreducible 2x2 block, and their
// block-diagonal degenerations. Planted exponents sit strictly inside the
// admissible strip for the stated Lebesgue exponent, so extracting data
// recovers them, and a random similarity hides the coordinates. Margins on
// couplings keep every planted structural feature numerically robust.

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "pcfactor/common.hpp"

namespace cases {

using pcfactor::Cx;
using pcfactor::Mat;
using pcfactor::Rng;

inline Cx mu_of(Cx eps) { return std::exp(Cx(0.0, -2.0 * pcfactor::kPi) * eps); }

inline double int_dist(Cx s) { return std::abs(s - Cx(std::round(s.real()), 0.0)); }

inline Cx ring_draw(Rng& rng, double lo_mag, double hi_mag) {
  double r = rng.uniform(lo_mag, hi_mag);
  double phi = rng.uniform(0.0, 2.0 * pcfactor::kPi);
  return std::polar(r, phi);
}

// Exponent rows over three points with exact integer row sums, real parts
// inside (lo + 0.05, lo + 0.95), and per-point slot separation across all
// rows of at least 0.08.
inline std::vector<std::vector<Cx>> rows_with_sums(Rng& rng, const std::vector<long long>& sums,
                                                   double lo) {
  const std::size_t r = sums.size();
  for (int attempt = 0; attempt < 20000; ++attempt) {
    std::vector<std::vector<Cx>> eps(r, std::vector<Cx>(3));
    bool ok = true;
    for (std::size_t j = 0; j < r && ok; ++j) {
      eps[j][0] = Cx(rng.uniform(lo + 0.1, lo + 0.9), rng.uniform(-0.25, 0.25));
      eps[j][1] = Cx(rng.uniform(lo + 0.1, lo + 0.9), rng.uniform(-0.25, 0.25));
      eps[j][2] = Cx(static_cast<double>(sums[j]), 0.0) - eps[j][0] - eps[j][1];
      if (eps[j][2].real() <= lo + 0.05 || eps[j][2].real() >= lo + 0.95) ok = false;
    }
    for (int k = 0; k < 3 && ok; ++k)
      for (std::size_t a = 0; a < r && ok; ++a)
        for (std::size_t b = a + 1; b < r && ok; ++b)
          if (std::abs(eps[a][k] - eps[b][k]) < 0.08) ok = false;
    if (ok) return eps;
  }
  throw std::runtime_error("rows_with_sums: no admissible draw");
}

// Two exponent rows over m points with the grand total pinned to an integer,
// per-point separation, and every one-slot-per-point selection sum at
// distance >= 0.02 from the integers. The last condition rules out common
// eigenvectors for tuples carrying these exponents.
inline std::vector<std::vector<Cx>> spread_rows(Rng& rng, int m, long long total, double lo) {
  for (int attempt = 0; attempt < 20000; ++attempt) {
    std::vector<std::vector<Cx>> eps(2, std::vector<Cx>(static_cast<std::size_t>(m)));
    Cx acc = 0.0;
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < m; ++k) {
        if (j == 1 && k == m - 1) break;
        Cx v(rng.uniform(lo + 0.1, lo + 0.9), rng.uniform(-0.2, 0.2));
        eps[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] = v;
        acc += v;
      }
    Cx last = Cx(static_cast<double>(total), 0.0) - acc;
    eps[1][static_cast<std::size_t>(m - 1)] = last;
    bool ok = last.real() > lo + 0.05 && last.real() < lo + 0.95 && std::abs(last.imag()) < 0.55;
    for (int k = 0; k < m && ok; ++k)
      if (std::abs(eps[0][static_cast<std::size_t>(k)] - eps[1][static_cast<std::size_t>(k)]) < 0.08)
        ok = false;
    for (long long code = 0; code < (1LL << m) && ok; ++code) {
      Cx s = 0.0;
      for (int k = 0; k < m; ++k)
        s += eps[static_cast<std::size_t>((code >> k) & 1)][static_cast<std::size_t>(k)];
      if (int_dist(s) < 0.02) ok = false;
    }
    if (ok) return eps;
  }
  throw std::runtime_error("spread_rows: no admissible draw");
}

// 2x2 tuple over m points with product identity and the planted per-point
// eigenvalue exponents. The first point is upper triangular, the second
// carries the lower coupling that matches the last point's trace, and any
// middle points are diagonal. Returns false when a coupling margin fails and
// the exponents should be redrawn.
inline bool irreducible_tuple_2(const std::vector<std::vector<Cx>>& eps, std::vector<Mat>* out) {
  const int m = static_cast<int>(eps[0].size());
  std::vector<std::array<Cx, 2>> mu(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k)
    mu[static_cast<std::size_t>(k)] = {mu_of(eps[0][static_cast<std::size_t>(k)]),
                                       mu_of(eps[1][static_cast<std::size_t>(k)])};

  Cx c1 = 1.0, c2 = 1.0;
  for (int k = 2; k + 1 < m; ++k) {
    c1 *= mu[static_cast<std::size_t>(k)][0];
    c2 *= mu[static_cast<std::size_t>(k)][1];
  }
  const Cx target = 1.0 / mu[static_cast<std::size_t>(m - 1)][0] +
                    1.0 / mu[static_cast<std::size_t>(m - 1)][1];
  const Cx a1 = mu[0][0], a2 = mu[0][1], b1 = mu[1][0], b2 = mu[1][1];
  const Cx u = (target - a1 * b1 * c1 - a2 * b2 * c2) / c1;
  if (std::abs(u) < 1e-2) return false;
  if (m == 3 && std::abs(u - (b1 - b2) * (a2 - a1)) < 1e-2) return false;

  out->clear();
  Mat m1(2, 2), m2(2, 2);
  m1 << a1, Cx(1.0), Cx(0.0), a2;
  m2 << b1, Cx(0.0), u, b2;
  out->push_back(m1);
  out->push_back(m2);
  Mat prod = m1 * m2;
  for (int k = 2; k + 1 < m; ++k) {
    Mat d = Mat::Zero(2, 2);
    d(0, 0) = mu[static_cast<std::size_t>(k)][0];
    d(1, 1) = mu[static_cast<std::size_t>(k)][1];
    out->push_back(d);
    prod = prod * d;
  }
  out->push_back(prod.inverse());
  return true;
}

inline Mat conjugator(Rng& rng, int n) {
  for (;;) {
    Mat s = Mat::Identity(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) s(r, c) += 0.6 * rng.unit_disk();
    if (std::abs(s.determinant()) < 0.2) continue;
    Mat si = s.inverse();
    if (s.norm() * si.norm() <= 50.0) return s;
  }
}

inline std::vector<Mat> conjugate_all(const std::vector<Mat>& ms, const Mat& s) {
  Mat si = s.inverse();
  std::vector<Mat> out;
  out.reserve(ms.size());
  for (const Mat& m : ms) out.push_back(s * m * si);
  return out;
}

// Relative least-squares residual of a*x = b over stacked equations; a large
// value certifies that no exact solution exists with a healthy margin.
inline double solve_residual(const Mat& a, const Mat& b) {
  Mat x = a.colPivHouseholderQr().solve(b);
  return (a * x - b).norm() / (b.norm() + 1e-30);
}

// Proportionality residual of coupling values against diagonal differences
// over the three points; a removable coupling makes this vanish.
inline double coupling_residual(const std::array<Cx, 3>& coup, const std::array<Cx, 3>& diff) {
  Eigen::Vector3cd c(coup[0], coup[1], coup[2]), d(diff[0], diff[1], diff[2]);
  Cx x = d.dot(c) / (d.dot(d) + Cx(1e-30, 0.0));
  return (c - x * d).norm() / (c.norm() + 1e-30);
}

// Scalar slot in front of an irreducible 2x2 block. With split the coupling
// row vanishes (a direct sum); otherwise it is drawn with a margin against
// the similarity that would split it off.
struct ScalarVsPair {
  std::vector<Mat> ms;
  long long nu = 0;
  long long N = 0;
};

inline ScalarVsPair line_plus_pair(Rng& rng, long long nu, long long N, double lo, bool split) {
  for (int attempt = 0; attempt < 4000; ++attempt) {
    std::vector<std::vector<Cx>> pair = spread_rows(rng, 3, N, lo);
    std::vector<std::vector<Cx>> scal;
    try {
      scal = rows_with_sums(rng, {nu}, lo);
    } catch (const std::runtime_error&) {
      continue;
    }
    bool sep = true;
    for (int k = 0; k < 3 && sep; ++k)
      for (int j = 0; j < 2; ++j)
        if (std::abs(scal[0][static_cast<std::size_t>(k)] - pair[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)]) < 0.08)
          sep = false;
    if (!sep) continue;

    std::vector<Mat> inner;
    if (!irreducible_tuple_2(pair, &inner)) continue;

    std::array<Cx, 3> mu0;
    for (int k = 0; k < 3; ++k) mu0[static_cast<std::size_t>(k)] = mu_of(scal[0][static_cast<std::size_t>(k)]);

    Eigen::RowVector2cd alpha1, alpha2;
    if (split) {
      alpha1.setZero();
      alpha2.setZero();
    } else {
      alpha1 << ring_draw(rng, 0.4, 1.2), ring_draw(rng, 0.4, 1.2);
      alpha2 << ring_draw(rng, 0.4, 1.2), ring_draw(rng, 0.4, 1.2);
      // A plane complementary to the line exists exactly when some row c
      // solves c*(mu0_k I - inner_k) = alpha_k for every k; block it on the
      // first two points with a margin.
      Mat lhs(4, 2), rhs(4, 1);
      Mat g1 = (mu0[0] * Mat::Identity(2, 2) - inner[0]).transpose();
      Mat g2 = (mu0[1] * Mat::Identity(2, 2) - inner[1]).transpose();
      lhs.block(0, 0, 2, 2) = g1;
      lhs.block(2, 0, 2, 2) = g2;
      rhs(0, 0) = alpha1(0);
      rhs(1, 0) = alpha1(1);
      rhs(2, 0) = alpha2(0);
      rhs(3, 0) = alpha2(1);
      if (solve_residual(lhs, rhs) < 0.05) continue;
    }

    Mat t1 = Mat::Zero(3, 3), t2 = Mat::Zero(3, 3);
    t1(0, 0) = mu0[0];
    t1.block(0, 1, 1, 2) = alpha1;
    t1.block(1, 1, 2, 2) = inner[0];
    t2(0, 0) = mu0[1];
    t2.block(0, 1, 1, 2) = alpha2;
    t2.block(1, 1, 2, 2) = inner[1];
    Mat t3 = (t1 * t2).inverse();

    Mat s = conjugator(rng, 3);
    return {conjugate_all({t1, t2, t3}, s), nu, N};
  }
  throw std::runtime_error("line_plus_pair: no admissible draw");
}

// Mirror shape: irreducible 2x2 block in front, scalar quotient slot behind,
// column coupling.
inline ScalarVsPair plane_plus_line(Rng& rng, long long nu, long long N, double lo, bool split) {
  for (int attempt = 0; attempt < 4000; ++attempt) {
    std::vector<std::vector<Cx>> pair = spread_rows(rng, 3, N, lo);
    std::vector<std::vector<Cx>> scal;
    try {
      scal = rows_with_sums(rng, {nu}, lo);
    } catch (const std::runtime_error&) {
      continue;
    }
    bool sep = true;
    for (int k = 0; k < 3 && sep; ++k)
      for (int j = 0; j < 2; ++j)
        if (std::abs(scal[0][static_cast<std::size_t>(k)] - pair[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)]) < 0.08)
          sep = false;
    if (!sep) continue;

    std::vector<Mat> inner;
    if (!irreducible_tuple_2(pair, &inner)) continue;

    std::array<Cx, 3> mu0;
    for (int k = 0; k < 3; ++k) mu0[static_cast<std::size_t>(k)] = mu_of(scal[0][static_cast<std::size_t>(k)]);

    Eigen::Vector2cd alpha1, alpha2;
    if (split) {
      alpha1.setZero();
      alpha2.setZero();
    } else {
      alpha1 << ring_draw(rng, 0.4, 1.2), ring_draw(rng, 0.4, 1.2);
      alpha2 << ring_draw(rng, 0.4, 1.2), ring_draw(rng, 0.4, 1.2);
      // A line inside the plane's complement exists exactly when some w
      // solves (inner_k - mu0_k I) w = -alpha_k for every k.
      Mat lhs(4, 2), rhs(4, 1);
      lhs.block(0, 0, 2, 2) = inner[0] - mu0[0] * Mat::Identity(2, 2);
      lhs.block(2, 0, 2, 2) = inner[1] - mu0[1] * Mat::Identity(2, 2);
      rhs(0, 0) = -alpha1(0);
      rhs(1, 0) = -alpha1(1);
      rhs(2, 0) = -alpha2(0);
      rhs(3, 0) = -alpha2(1);
      if (solve_residual(lhs, rhs) < 0.05) continue;
    }

    Mat t1 = Mat::Zero(3, 3), t2 = Mat::Zero(3, 3);
    t1.block(0, 0, 2, 2) = inner[0];
    t1.block(0, 2, 2, 1) = alpha1;
    t1(2, 2) = mu0[0];
    t2.block(0, 0, 2, 2) = inner[1];
    t2.block(0, 2, 2, 1) = alpha2;
    t2(2, 2) = mu0[1];
    Mat t3 = (t1 * t2).inverse();

    Mat s = conjugator(rng, 3);
    return {conjugate_all({t1, t2, t3}, s), nu, N};
  }
  throw std::runtime_error("plane_plus_line: no admissible draw");
}

// Upper triangular scalar flag over three points. Mask bits choose which
// coupling entries are drawn: 1 = (1,2), 2 = (1,3), 4 = (2,3). Every drawn
// coupling that shapes the invariant lattice keeps a margin against the
// similarity that would remove it.
struct Flag3 {
  std::vector<Mat> ms;
  long long n1 = 0, n2 = 0, n3 = 0;
  unsigned mask = 0;
};

inline Flag3 flag_tuple(Rng& rng, long long n1, long long n2, long long n3, double lo,
                        unsigned mask) {
  for (int attempt = 0; attempt < 4000; ++attempt) {
    std::vector<std::vector<Cx>> eps = rows_with_sums(rng, {n1, n2, n3}, lo);
    std::array<std::array<Cx, 3>, 3> mu;  // mu[slot][point]
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        mu[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] =
            mu_of(eps[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)]);

    Mat t1 = Mat::Zero(3, 3), t2 = Mat::Zero(3, 3);
    for (int j = 0; j < 3; ++j) {
      t1(j, j) = mu[static_cast<std::size_t>(j)][0];
      t2(j, j) = mu[static_cast<std::size_t>(j)][1];
    }
    if (mask & 1u) {
      t1(0, 1) = ring_draw(rng, 0.4, 1.2);
      t2(0, 1) = ring_draw(rng, 0.4, 1.2);
    }
    if (mask & 2u) {
      t1(0, 2) = ring_draw(rng, 0.4, 1.2);
      t2(0, 2) = ring_draw(rng, 0.4, 1.2);
    }
    if (mask & 4u) {
      t1(1, 2) = ring_draw(rng, 0.4, 1.2);
      t2(1, 2) = ring_draw(rng, 0.4, 1.2);
    }
    Mat t3 = (t1 * t2).inverse();

    auto diffs = [&](int a, int b) {
      return std::array<Cx, 3>{mu[static_cast<std::size_t>(a)][0] - mu[static_cast<std::size_t>(b)][0],
                               mu[static_cast<std::size_t>(a)][1] - mu[static_cast<std::size_t>(b)][1],
                               mu[static_cast<std::size_t>(a)][2] - mu[static_cast<std::size_t>(b)][2]};
    };
    auto coup = [&](int r, int c) { return std::array<Cx, 3>{t1(r, c), t2(r, c), t3(r, c)}; };

    bool ok = true;
    if (mask & 1u) ok = ok && coupling_residual(coup(0, 1), diffs(0, 1)) >= 0.05;
    if (mask & 4u) ok = ok && coupling_residual(coup(1, 2), diffs(1, 2)) >= 0.05;
    // The (1,3) entry only shapes the lattice when no chain through (1,2)
    // and (2,3) covers it.
    if ((mask & 2u) && (mask & 5u) != 5u) ok = ok && coupling_residual(coup(0, 2), diffs(0, 2)) >= 0.05;
    if (!ok) continue;

    Mat s = conjugator(rng, 3);
    return {conjugate_all({t1, t2, t3}, s), n1, n2, n3, mask};
  }
  throw std::runtime_error("flag_tuple: no admissible draw");
}

// 2x2 coupled (or split) scalar pair over three points: planted line slot n1
// and quotient slot n2.
struct Pair2 {
  std::vector<Mat> ms;
  long long n1 = 0, n2 = 0;
};

inline Pair2 coupled_pair_2(Rng& rng, long long n1, long long n2, double lo, bool split) {
  for (int attempt = 0; attempt < 4000; ++attempt) {
    std::vector<std::vector<Cx>> eps = rows_with_sums(rng, {n1, n2}, lo);
    std::array<std::array<Cx, 3>, 2> mu;
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 3; ++k)
        mu[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] =
            mu_of(eps[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)]);

    Mat t1 = Mat::Zero(2, 2), t2 = Mat::Zero(2, 2);
    t1(0, 0) = mu[0][0];
    t1(1, 1) = mu[1][0];
    t2(0, 0) = mu[0][1];
    t2(1, 1) = mu[1][1];
    if (!split) {
      t1(0, 1) = ring_draw(rng, 0.4, 1.2);
      t2(0, 1) = ring_draw(rng, 0.4, 1.2);
    }
    Mat t3 = (t1 * t2).inverse();
    if (!split) {
      std::array<Cx, 3> coup{t1(0, 1), t2(0, 1), t3(0, 1)};
      std::array<Cx, 3> diff{mu[0][0] - mu[1][0], mu[0][1] - mu[1][1], mu[0][2] - mu[1][2]};
      if (coupling_residual(coup, diff) < 0.05) continue;
    }

    Mat s = conjugator(rng, 2);
    return {conjugate_all({t1, t2, t3}, s), n1, n2};
  }
  throw std::runtime_error("coupled_pair_2: no admissible draw");
}

// Irreducible 2x2 tuple over m points with the stated total index.
inline std::vector<Mat> generic_tuple_2(Rng& rng, int m, long long total, double lo) {
  for (int attempt = 0; attempt < 4000; ++attempt) {
    std::vector<std::vector<Cx>> eps = spread_rows(rng, m, total, lo);
    std::vector<Mat> ms;
    if (!irreducible_tuple_2(eps, &ms)) continue;
    Mat s = conjugator(rng, 2);
    return conjugate_all(ms, s);
  }
  throw std::runtime_error("generic_tuple_2: no admissible draw");
}

}  // namespace cases
