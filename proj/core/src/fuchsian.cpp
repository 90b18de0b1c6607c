#include "pcfactor/fuchsian.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "pcfactor/linalg.hpp"
#include "pcfactor/monodromy.hpp"
#include "pcfactor/symbol.hpp"

namespace pcfactor {
namespace {

// Largest pairwise trace invariant of the monodromy tuple; a proxy for how
// well trace matching can resolve the tuple at floating-point accuracy.
double max_pair_trace(const RationalSystem& sys) {
  MonodromyTuple t = monodromy(sys);
  double worst = 0.0;
  for (std::size_t i = 0; i < t.chis.size(); ++i)
    for (std::size_t j = i + 1; j < t.chis.size(); ++j)
      worst = std::max(worst, std::abs((t.chis[i] * t.chis[j]).trace()));
  return worst;
}

void require_distinct(const std::vector<Cx>& pts) {
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      if (std::abs(pts[i] - pts[j]) < 1e-9)
        fail(ErrorCode::ColocatedSingularities, "singular points coincide");
}

// prod_{l != k} (z - a_l)
Poly lagrange_numerator(const std::vector<Cx>& sing, std::size_t k) {
  std::vector<Cx> roots;
  roots.reserve(sing.size() - 1);
  for (std::size_t l = 0; l < sing.size(); ++l)
    if (l != k) roots.push_back(sing[l]);
  return poly_from_roots(roots);
}

Cx denominator_derivative(const std::vector<Cx>& sing, std::size_t k) {
  Cx v = 1.0;
  for (std::size_t l = 0; l < sing.size(); ++l)
    if (l != k) v *= sing[k] - sing[l];
  return v;
}

// sum_k values[k] * prod_{l != k}(z - a_l); degree <= m - 1 with leading
// coefficient sum(values).
Poly assemble_from_point_values(const std::vector<Cx>& sing, const std::vector<Cx>& values) {
  Poly out;
  for (std::size_t k = 0; k < sing.size(); ++k) {
    if (values[k] == Cx(0.0, 0.0)) continue;
    out += values[k] * lagrange_numerator(sing, k);
  }
  return out;
}

Poly random_poly(long long max_degree, Rng& rng) {
  if (max_degree < 0) return Poly();
  std::vector<Cx> c(static_cast<std::size_t>(max_degree) + 1);
  for (Cx& v : c) v = rng.annulus(0.3, 1.0);
  return Poly(std::move(c));
}

void check_rows(const std::vector<std::vector<Cx>>& eps, const std::vector<long long>& sums,
                std::size_t m) {
  if (eps.size() != sums.size())
    fail(ErrorCode::InvalidArgument, "exponent table has a wrong number of rows");
  for (std::size_t j = 0; j < eps.size(); ++j) {
    if (eps[j].size() != m)
      fail(ErrorCode::InvalidArgument, "exponent row has a wrong number of points");
    Cx s = std::accumulate(eps[j].begin(), eps[j].end(), Cx(0.0, 0.0));
    if (std::abs(s - Cx(double(sums[j]), 0.0)) > 1e-9)
      fail(ErrorCode::InvalidArgument, "exponent row sum does not match the declared index");
  }
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t i = 0; i < eps.size(); ++i)
      for (std::size_t j = i + 1; j < eps.size(); ++j) {
        Cx d = eps[i][k] - eps[j][k];
        long long r = std::llround(d.real());
        if (r != 0 && std::abs(d.imag()) < tol::resonance &&
            std::abs(d.real() - double(r)) < tol::resonance)
          fail(ErrorCode::ResonantData, "prescribed exponents differ by a nonzero integer");
      }
}

void check_sorted_indices(const std::vector<long long>& idx) {
  if (!std::is_sorted(idx.rbegin(), idx.rend()))
    fail(ErrorCode::InvalidArgument, "declared indices must be non-increasing");
}

RationalSystem shell(int n, const std::vector<Cx>& sing, std::vector<long long> idx) {
  require_distinct(sing);
  check_sorted_indices(idx);
  RationalSystem sys;
  sys.n = n;
  sys.singularities = sing;
  sys.indices = std::move(idx);
  sys.numerators.assign(n, std::vector<Poly>(n));
  return sys;
}

long long entry_bound(const RationalSystem& sys, int i, int j) {
  return sys.m() - 2 + sys.indices[i] - sys.indices[j];
}

// Distance of a complex value to the nearest integer, treating the
// imaginary part as full distance.
double integer_distance(Cx v) {
  double re = std::abs(v.real() - std::llround(v.real()));
  return std::hypot(re, v.imag());
}

Poly falling_factorial_poly(int j) {
  std::vector<Cx> roots;
  for (int i = 0; i < j; ++i) roots.push_back(Cx(double(i), 0.0));
  return poly_from_roots(roots);
}

Poly rising_factorial_poly(int j) {
  std::vector<Cx> roots;
  for (int i = 0; i < j; ++i) roots.push_back(Cx(-double(i), 0.0));
  return poly_from_roots(roots);
}

double binom(int a, int b) {
  if (b < 0 || b > a) return 0.0;
  double v = 1.0;
  for (int i = 0; i < b; ++i) v = v * double(a - i) / double(i + 1);
  return v;
}

}  // namespace

Poly RationalSystem::denominator() const { return poly_from_roots(singularities); }

Mat RationalSystem::eval(Cx z) const {
  Cx p = 1.0;
  for (Cx a : singularities) p *= z - a;
  Mat out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = numerators[i][j].eval(z) / p;
  return out;
}

std::vector<std::string> validate_standard_form(const RationalSystem& sys) {
  std::vector<std::string> bad;
  if (sys.n < 1 || int(sys.indices.size()) != sys.n ||
      int(sys.numerators.size()) != sys.n) {
    bad.push_back("inconsistent dimensions");
    return bad;
  }
  for (const auto& row : sys.numerators)
    if (int(row.size()) != sys.n) {
      bad.push_back("inconsistent numerator shape");
      return bad;
    }
  if (!std::is_sorted(sys.indices.rbegin(), sys.indices.rend()))
    bad.push_back("indices not sorted non-increasing");
  const int m = sys.m();
  if (m < 1) {
    bad.push_back("no singular points");
    return bad;
  }
  for (std::size_t i = 0; i < sys.singularities.size(); ++i)
    for (std::size_t j = i + 1; j < sys.singularities.size(); ++j)
      if (std::abs(sys.singularities[i] - sys.singularities[j]) < 1e-9)
        bad.push_back("colocated singular points");
  if (!bad.empty()) return bad;

  for (int i = 0; i < sys.n; ++i)
    for (int j = 0; j < sys.n; ++j) {
      const Poly& q = sys.numerators[i][j];
      if (i == j) {
        if (q.degree() > m - 1) {
          bad.push_back("diagonal entry " + std::to_string(i) + " degree too high");
          continue;
        }
        Cx lead = q.degree() == m - 1 ? q.c[m - 1] : Cx(0.0, 0.0);
        if (std::abs(lead - Cx(double(sys.indices[i]), 0.0)) > 1e-9)
          bad.push_back("diagonal entry " + std::to_string(i) +
                        " leading coefficient differs from its index");
      } else {
        long long bound = m - 2 + sys.indices[i] - sys.indices[j];
        if (q.degree() > bound)
          bad.push_back("entry (" + std::to_string(i) + "," + std::to_string(j) +
                        ") exceeds its degree bound");
      }
    }

  std::vector<Mat> res = residues(sys);
  Cx trace_sum = 0.0;
  for (std::size_t k = 0; k < res.size(); ++k) {
    trace_sum += res[k].trace();
    std::vector<Cx> ev = eigen(res[k]).values_with_multiplicity();
    for (std::size_t i = 0; i < ev.size(); ++i)
      for (std::size_t j = i + 1; j < ev.size(); ++j) {
        Cx d = ev[i] - ev[j];
        long long r = std::llround(d.real());
        if (r != 0 && std::abs(d.imag()) < tol::resonance &&
            std::abs(d.real() - double(r)) < tol::resonance)
          bad.push_back("resonant residue at point " + std::to_string(k));
      }
  }
  long long kappa = std::accumulate(sys.indices.begin(), sys.indices.end(), 0LL);
  if (std::abs(trace_sum - Cx(double(kappa), 0.0)) > 1e-8 * (1.0 + std::abs(double(kappa))))
    bad.push_back("residue trace sum differs from the index total");
  return bad;
}

std::vector<Mat> residues(const RationalSystem& sys) {
  require_distinct(sys.singularities);
  std::vector<Mat> out;
  out.reserve(sys.singularities.size());
  for (std::size_t k = 0; k < sys.singularities.size(); ++k) {
    Cx a = sys.singularities[k];
    Cx dp = denominator_derivative(sys.singularities, k);
    Mat r(sys.n, sys.n);
    for (int i = 0; i < sys.n; ++i)
      for (int j = 0; j < sys.n; ++j) r(i, j) = sys.numerators[i][j].eval(a) / dp;
    out.push_back(std::move(r));
  }
  return out;
}

MatrixField field_of(const RationalSystem& sys) {
  MatrixField f;
  f.n = sys.n;
  f.singularities = sys.singularities;
  f.at = [sys](Cx z) { return sys.eval(z); };
  return f;
}

MatrixField scalar_field(const std::vector<Cx>& singularities, const std::vector<Cx>& eps) {
  if (singularities.size() != eps.size())
    fail(ErrorCode::InvalidArgument, "scalar_field: size mismatch");
  MatrixField f;
  f.n = 1;
  f.singularities = singularities;
  f.at = [singularities, eps](Cx z) {
    Cx v = 0.0;
    for (std::size_t k = 0; k < eps.size(); ++k) v += eps[k] / (z - singularities[k]);
    Mat out(1, 1);
    out(0, 0) = v;
    return out;
  };
  return f;
}

std::vector<Cx> default_singularities(int m) {
  std::vector<Cx> pts;
  pts.reserve(m);
  for (int k = 0; k < m; ++k) {
    double th = 2.0 * kPi * double(k) / double(m);
    pts.push_back(Cx(std::cos(th), std::sin(th)));
  }
  return pts;
}

std::vector<std::vector<Cx>> draw_exponent_rows(int n, int m,
                                                const std::vector<long long>& sums,
                                                double lo, Rng& rng) {
  if (int(sums.size()) != n || n < 1 || m < 1)
    fail(ErrorCode::InvalidArgument, "draw_exponent_rows: bad shape");
  const double margin = 0.05;
  const double sep = n >= 3 ? 0.25 : 0.15;
  for (int attempt = 0; attempt < 5000; ++attempt) {
    std::vector<std::vector<Cx>> eps(n, std::vector<Cx>(m));
    bool ok = true;
    for (int j = 0; j < n && ok; ++j) {
      Cx total = 0.0;
      for (int k = 0; k < m; ++k) {
        eps[j][k] = Cx(rng.uniform(lo + margin, lo + 1.0 - margin), rng.uniform(-0.3, 0.3));
        total += eps[j][k];
      }
      Cx d = (total - Cx(double(sums[j]), 0.0)) / double(m);
      for (int k = 0; k < m; ++k) {
        eps[j][k] -= d;
        if (eps[j][k].real() < lo + margin / 2 || eps[j][k].real() > lo + 1.0 - margin / 2 ||
            std::abs(eps[j][k].imag()) > 0.45)
          ok = false;
      }
    }
    if (!ok) continue;
    for (int k = 0; k < m && ok; ++k)
      for (int i = 0; i < n && ok; ++i)
        for (int j = i + 1; j < n; ++j)
          if (std::abs(eps[i][k] - eps[j][k]) < sep) {
            ok = false;
            break;
          }
    if (ok) return eps;
  }
  fail(ErrorCode::InvalidArgument, "draw_exponent_rows: strip cannot accommodate the sums");
}

std::vector<std::vector<Cx>> draw_extremal_exponents(int n, int m, long long kappa_n,
                                                     double lo, Rng& rng) {
  const double sel_margin = 1e-2;

  if (n == 2) {
    // Only the grand total is pinned; the index split comes from the
    // residue construction. Rigidity kills the tuple if any eigenvalue
    // selection sums to an integer, so rows must not sum to the indices.
    const long long kappa = 2 * kappa_n + (m - 2);
    const double margin = 0.05;
    for (int attempt = 0; attempt < 500; ++attempt) {
      std::vector<std::vector<Cx>> eps(2, std::vector<Cx>(std::size_t(m)));
      Cx total = 0.0;
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < m; ++k) {
          eps[j][k] = Cx(rng.uniform(lo + margin, lo + 1.0 - margin), rng.uniform(-0.3, 0.3));
          total += eps[j][k];
        }
      Cx d = (total - Cx(double(kappa), 0.0)) / double(2 * m);
      bool ok = true;
      for (int j = 0; j < 2 && ok; ++j)
        for (int k = 0; k < m; ++k) {
          eps[j][k] -= d;
          if (eps[j][k].real() < lo + margin / 2 || eps[j][k].real() > lo + 1.0 - margin / 2 ||
              std::abs(eps[j][k].imag()) > 0.45) {
            ok = false;
            break;
          }
        }
      for (int k = 0; k < m && ok; ++k)
        if (std::abs(eps[0][k] - eps[1][k]) < 0.15) ok = false;
      for (long long code = 0; code < (1LL << m) && ok; ++code) {
        Cx s = 0.0;
        for (int k = 0; k < m; ++k) s += eps[(code >> k) & 1][std::size_t(k)];
        if (integer_distance(s) < sel_margin) ok = false;
      }
      if (ok) return eps;
    }
    fail(ErrorCode::NonConvergence, "draw_extremal_exponents: no admissible draw found");
  }

  // n == 3 plants the rows on the diagonal, so row sums equal the indices
  // and only mixed selections need the genericity margin.
  std::vector<long long> sums(n);
  for (int j = 0; j < n; ++j) sums[j] = kappa_n + (long long)(n - 1 - j) * (m - 2);
  for (int attempt = 0; attempt < 200; ++attempt) {
    std::vector<std::vector<Cx>> eps = draw_exponent_rows(n, m, sums, lo, rng);
    bool ok = true;
    std::vector<int> choice(m, 0);
    for (long long code = 0; code < std::llround(std::pow(double(n), m)) && ok; ++code) {
      long long c = code;
      bool constant = true;
      for (int k = 0; k < m; ++k) {
        choice[k] = int(c % n);
        c /= n;
        if (choice[k] != choice[0]) constant = false;
      }
      if (constant) continue;
      Cx s = 0.0;
      for (int k = 0; k < m; ++k) s += eps[choice[k]][k];
      if (integer_distance(s) < sel_margin) ok = false;
    }
    if (ok) return eps;
  }
  fail(ErrorCode::NonConvergence, "draw_extremal_exponents: no admissible draw found");
}

RationalSystem generate_triangular_2(const std::vector<Cx>& sing,
                                     const std::vector<long long>& indices,
                                     const std::vector<std::vector<Cx>>& eps, Rng& rng) {
  if (indices.size() != 2) fail(ErrorCode::InvalidArgument, "generate_triangular_2: need 2 indices");
  check_rows(eps, indices, sing.size());
  RationalSystem sys = shell(2, sing, indices);
  sys.numerators[0][0] = assemble_from_point_values(sing, eps[0]);
  sys.numerators[1][1] = assemble_from_point_values(sing, eps[1]);
  sys.numerators[0][1] = random_poly(entry_bound(sys, 0, 1), rng);
  return sys;
}

RationalSystem generate_triangular_3(const std::vector<Cx>& sing,
                                     const std::vector<long long>& indices,
                                     const std::vector<std::vector<Cx>>& eps,
                                     unsigned coupling_mask, Rng& rng) {
  if (indices.size() != 3) fail(ErrorCode::InvalidArgument, "generate_triangular_3: need 3 indices");
  check_rows(eps, indices, sing.size());
  RationalSystem sys = shell(3, sing, indices);
  for (int i = 0; i < 3; ++i) sys.numerators[i][i] = assemble_from_point_values(sing, eps[i]);
  struct Slot {
    int i, j;
    unsigned bit;
  };
  for (Slot s : {Slot{0, 1, 1u}, Slot{0, 2, 2u}, Slot{1, 2, 4u}}) {
    if (!(coupling_mask & s.bit)) continue;
    long long bound = entry_bound(sys, s.i, s.j);
    if (bound < 0)
      fail(ErrorCode::InvalidArgument, "generate_triangular_3: coupling excluded by degree bound");
    sys.numerators[s.i][s.j] = random_poly(bound, rng);
  }
  return sys;
}

RationalSystem generate_block12_3(const std::vector<Cx>& sing,
                                  const std::vector<long long>& indices,
                                  const std::vector<std::vector<Cx>>& eps,
                                  bool coupling_on, bool inner_lower, Rng& rng) {
  if (indices.size() != 3) fail(ErrorCode::InvalidArgument, "generate_block12_3: need 3 indices");
  check_rows(eps, indices, sing.size());
  RationalSystem sys = shell(3, sing, indices);
  for (int i = 0; i < 3; ++i) sys.numerators[i][i] = assemble_from_point_values(sing, eps[i]);
  if (inner_lower) {
    long long bound = entry_bound(sys, 2, 1);
    if (bound < 0)
      fail(ErrorCode::InvalidArgument, "generate_block12_3: inner subdiagonal excluded by degree bound");
    sys.numerators[2][1] = random_poly(bound, rng);
    if (coupling_on) sys.numerators[0][1] = random_poly(entry_bound(sys, 0, 1), rng);
  } else {
    long long low = entry_bound(sys, 2, 1);
    if (low < 0)
      fail(ErrorCode::InvalidArgument, "generate_block12_3: inner block cannot be full");
    sys.numerators[1][2] = random_poly(entry_bound(sys, 1, 2), rng);
    sys.numerators[2][1] = random_poly(low, rng);
    if (coupling_on) {
      sys.numerators[0][1] = random_poly(entry_bound(sys, 0, 1), rng);
      sys.numerators[0][2] = random_poly(entry_bound(sys, 0, 2), rng);
    }
  }
  return sys;
}

RationalSystem generate_block21_3(const std::vector<Cx>& sing,
                                  const std::vector<long long>& indices,
                                  const std::vector<std::vector<Cx>>& eps,
                                  bool coupling_on, bool inner_lower, Rng& rng) {
  if (indices.size() != 3) fail(ErrorCode::InvalidArgument, "generate_block21_3: need 3 indices");
  check_rows(eps, indices, sing.size());
  RationalSystem sys = shell(3, sing, indices);
  for (int i = 0; i < 3; ++i) sys.numerators[i][i] = assemble_from_point_values(sing, eps[i]);
  if (inner_lower) {
    long long bound = entry_bound(sys, 1, 0);
    if (bound < 0)
      fail(ErrorCode::InvalidArgument, "generate_block21_3: inner subdiagonal excluded by degree bound");
    sys.numerators[1][0] = random_poly(bound, rng);
    if (coupling_on) sys.numerators[1][2] = random_poly(entry_bound(sys, 1, 2), rng);
  } else {
    long long low = entry_bound(sys, 1, 0);
    if (low < 0)
      fail(ErrorCode::InvalidArgument, "generate_block21_3: inner block cannot be full");
    sys.numerators[0][1] = random_poly(entry_bound(sys, 0, 1), rng);
    sys.numerators[1][0] = random_poly(low, rng);
    if (coupling_on) {
      sys.numerators[0][2] = random_poly(entry_bound(sys, 0, 2), rng);
      sys.numerators[1][2] = random_poly(entry_bound(sys, 1, 2), rng);
    }
  }
  return sys;
}

std::vector<Mat> build_2x2_residues(const std::vector<std::array<Cx, 2>>& pairs,
                                    long long gap, const std::vector<Cx>& sing, Rng& rng) {
  const std::size_t m = sing.size();
  if (pairs.size() != m || m < 2)
    fail(ErrorCode::InvalidArgument, "build_2x2_residues: bad shape");
  require_distinct(sing);
  Cx gamma = rng.annulus(0.5, 1.5);
  std::vector<Cx> s(m);
  Cx partial = 0.0;
  for (std::size_t k = 0; k + 1 < m; ++k) {
    s[k] = 0.4 * rng.unit_disk();
    partial += s[k];
  }
  s[m - 1] = Cx(double(gap) / 2.0, 0.0) - partial;
  std::vector<Mat> out;
  out.reserve(m);
  for (std::size_t k = 0; k < m; ++k) {
    Cx mean = (pairs[k][0] + pairs[k][1]) / 2.0;
    Cx delta = (pairs[k][0] - pairs[k][1]) / 2.0;
    Cx c = gamma / denominator_derivative(sing, k);
    Cx b = (delta * delta - s[k] * s[k]) / c;
    Mat r(2, 2);
    r << mean + s[k], b, c, mean - s[k];
    out.push_back(std::move(r));
  }
  return out;
}

RationalSystem generate_extremal(int n, int m, long long kappa_n,
                                 const std::vector<std::vector<Cx>>& eps, Rng& rng) {
  if (n < 2 || n > 3 || m < 3)
    fail(ErrorCode::InvalidArgument, "generate_extremal: unsupported shape");
  std::vector<long long> indices(n);
  for (int j = 0; j < n; ++j) indices[j] = kappa_n + (long long)(n - 1 - j) * (m - 2);
  if (n == 2) {
    // Rows carry free eigenvalue pairs; only the grand total is pinned.
    if (eps.size() != 2 || eps[0].size() != std::size_t(m) || eps[1].size() != std::size_t(m))
      fail(ErrorCode::InvalidArgument, "generate_extremal: exponent table has a wrong shape");
    Cx total = 0.0;
    for (const auto& row : eps)
      for (Cx v : row) total += v;
    if (std::abs(total - Cx(double(indices[0] + indices[1]), 0.0)) > 1e-9)
      fail(ErrorCode::InvalidArgument, "generate_extremal: exponents do not sum to the total index");
  } else {
    check_rows(eps, indices, std::size_t(m));
  }
  std::vector<Cx> sing = default_singularities(m);

  if (n == 2) {
    std::vector<std::array<Cx, 2>> pairs(m);
    for (int k = 0; k < m; ++k) pairs[k] = {eps[0][k], eps[1][k]};
    // Reject draws whose monodromy invariants are huge; downstream trace
    // matching needs them within reach of the integrator accuracy.
    for (int attempt = 0; attempt < 100; ++attempt) {
      std::vector<Mat> res = build_2x2_residues(pairs, m - 2, sing, rng);
      RationalSystem sys = shell(2, sing, indices);
      std::vector<Cx> values(m);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          if (i == 1 && j == 0) continue;
          for (int k = 0; k < m; ++k) values[k] = res[k](i, j);
          sys.numerators[i][j] = assemble_from_point_values(sing, values);
        }
      // The lower-left residue values are gamma / p'(a_k) by construction,
      // so that entry of the numerator is the constant gamma.
      Cx gamma = res[0](1, 0) * denominator_derivative(sing, 0);
      sys.numerators[1][0] = Poly::constant(gamma);
      if (max_pair_trace(sys) <= 150.0) return sys;
    }
    fail(ErrorCode::NonConvergence, "generate_extremal: draws stayed ill-conditioned");
  }

  const double tau = 0.02;
  for (int attempt = 0; attempt < 100; ++attempt) {
    RationalSystem sys = shell(3, sing, indices);
    for (int i = 0; i < 3; ++i) {
      std::vector<Cx> values(eps[i].begin(), eps[i].end());
      sys.numerators[i][i] = assemble_from_point_values(sing, values);
    }
    sys.numerators[1][0] = Poly::constant(tau * rng.annulus(0.5, 1.5));
    sys.numerators[2][1] = Poly::constant(tau * rng.annulus(0.5, 1.5));
    std::vector<Cx> values(m);
    for (auto [i, j] : {std::pair{0, 1}, std::pair{1, 2}, std::pair{0, 2}}) {
      for (int k = 0; k < m; ++k) values[k] = tau * rng.annulus(0.3, 1.0);
      sys.numerators[i][j] = assemble_from_point_values(sing, values);
    }
    // The couplings have zero diagonal, so residue eigenvalues drift from
    // the prescribed values only at second order; reject the rare draw
    // where the drift is visible.
    bool ok = true;
    std::vector<Mat> res = residues(sys);
    for (int k = 0; k < m && ok; ++k) {
      std::vector<Cx> ev = eigen(res[k]).values_with_multiplicity();
      std::vector<bool> used(3, false);
      for (Cx target : {eps[0][k], eps[1][k], eps[2][k]}) {
        double best = 1e300;
        int arg = -1;
        for (int i = 0; i < 3; ++i)
          if (!used[i] && std::abs(ev[i] - target) < best) {
            best = std::abs(ev[i] - target);
            arg = i;
          }
        used[arg] = true;
        if (best > 5e-3) ok = false;
      }
    }
    if (ok && max_pair_trace(sys) <= 300.0) return sys;
  }
  fail(ErrorCode::NonConvergence, "generate_extremal: could not keep eigenvalue drift small");
}

Cx ScalarFuchsEq::q(int j, Cx z) const {
  const auto& row = pf[j - 1];
  Cx v = 0.0;
  for (std::size_t k = 0; k < singularities.size(); ++k) {
    Cx inv = Cx(1.0, 0.0) / (z - singularities[k]);
    Cx power = inv;
    for (std::size_t o = 0; o < row[k].size(); ++o) {
      v += row[k][o] * power;
      power *= inv;
    }
  }
  return v;
}

MatrixField companion_system(const ScalarFuchsEq& eq) {
  MatrixField f;
  f.n = eq.order;
  f.singularities = eq.singularities;
  ScalarFuchsEq local = eq;
  f.at = [local](Cx z) {
    const int n = local.order;
    Mat a = Mat::Zero(n, n);
    for (int j = 1; j <= n; ++j) a(0, j - 1) = -local.q(j, z);
    for (int i = 1; i < n; ++i) a(i, i - 1) = 1.0;
    return a;
  };
  return f;
}

std::vector<Cx> indicial_exponents(const ScalarFuchsEq& eq, int k) {
  const int n = eq.order;
  if (k < 0 || k >= int(eq.singularities.size()))
    fail(ErrorCode::InvalidArgument, "indicial_exponents: bad point index");
  Poly p = falling_factorial_poly(n);
  for (int j = 1; j <= n; ++j) {
    const auto& coeffs = eq.pf[j - 1][k];
    Cx r = int(coeffs.size()) >= j ? coeffs[j - 1] : Cx(0.0, 0.0);
    if (r != Cx(0.0, 0.0)) p += r * falling_factorial_poly(n - j);
  }
  return poly_roots(p);
}

std::vector<Cx> indicial_exponents_at_infinity(const ScalarFuchsEq& eq) {
  const int n = eq.order;
  double scale = 0.0;
  for (const auto& row : eq.pf)
    for (const auto& cell : row)
      for (Cx v : cell) scale = std::max(scale, std::abs(v));
  Poly p = Cx(std::pow(-1.0, n), 0.0) * rising_factorial_poly(n);
  for (int j = 1; j <= n; ++j) {
    // s_j is the z^{-j} coefficient of q_j; slower-decaying terms must
    // vanish for a regular point at infinity.
    for (int r = 1; r <= j; ++r) {
      Cx t = 0.0;
      for (std::size_t k = 0; k < eq.singularities.size(); ++k) {
        const auto& cell = eq.pf[j - 1][k];
        for (std::size_t o = 0; o < cell.size(); ++o) {
          if (int(o) > r - 1) continue;
          t += cell[o] * binom(r - 1, int(o)) * cx_ipow(eq.singularities[k], r - 1 - int(o));
        }
      }
      if (r < j) {
        if (std::abs(t) > 1e-8 * (1.0 + scale))
          fail(ErrorCode::NotFuchsian, "coefficient decays too slowly at infinity");
      } else {
        p += (t * std::pow(-1.0, n - j)) * rising_factorial_poly(n - j);
      }
    }
  }
  return poly_roots(p);
}

double fuchs_relation_check(const ScalarFuchsEq& eq) {
  const int n = eq.order;
  const int mfin = int(eq.singularities.size());
  Cx total = 0.0;
  for (int k = 0; k < mfin; ++k)
    for (Cx r : indicial_exponents(eq, k)) total += r;
  for (Cx r : indicial_exponents_at_infinity(eq)) total += r;
  double target = double(mfin - 1) * double(n) * double(n - 1) / 2.0;
  return std::abs(total - Cx(target, 0.0));
}

ScalarFuchsEq AccessoryFamily::at(Cx t) const {
  ScalarFuchsEq out = base;
  for (std::size_t j = 0; j < out.pf.size(); ++j)
    for (std::size_t k = 0; k < out.pf[j].size(); ++k)
      for (std::size_t o = 0; o < out.pf[j][k].size(); ++o)
        out.pf[j][k][o] += t * direction.pf[j][k][o];
  return out;
}

namespace {

// Solves rows * x = rhs with a one-dimensional kernel; returns the
// least-norm particular solution and the kernel direction.
std::pair<Eigen::VectorXcd, Eigen::VectorXcd> affine_line(const Mat& rows,
                                                          const Eigen::VectorXcd& rhs) {
  Eigen::JacobiSVD<Mat> svd(rows, Eigen::ComputeThinU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  double cutoff = sv(0) * 1e-10;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++rank;
  if (rank != rows.rows() || rows.cols() - rank != 1)
    fail(ErrorCode::FuchsViolation, "exponent constraints are degenerate");
  Eigen::VectorXcd x = svd.solve(rhs);
  if ((rows * x - rhs).norm() > 1e-9 * (1.0 + rhs.norm()))
    fail(ErrorCode::FuchsViolation, "exponent constraints are inconsistent");
  Eigen::VectorXcd dir = svd.matrixV().col(rows.cols() - 1);
  return {x, dir};
}

}  // namespace

AccessoryFamily accessory_family(int n, const std::vector<Cx>& singularities,
                                 const std::vector<std::vector<Cx>>& exponents) {
  const int mfin = int(singularities.size());
  if (!((n == 2 && mfin == 4) || (n == 3 && mfin == 3)))
    fail(ErrorCode::InvalidArgument, "accessory_family: unsupported shape");
  require_distinct(singularities);
  if (int(exponents.size()) != mfin)
    fail(ErrorCode::InvalidArgument, "accessory_family: need one exponent set per point");
  for (const auto& e : exponents)
    if (int(e.size()) != n)
      fail(ErrorCode::InvalidArgument, "accessory_family: wrong exponent count at a point");

  // The exponent-sum identity with an ordinary point at infinity; tiny
  // defects are absorbed into the last exponent.
  std::vector<std::vector<Cx>> rho = exponents;
  Cx total = 0.0;
  for (const auto& e : rho)
    for (Cx v : e) total += v;
  double target = double(mfin - 2) * double(n) * double(n - 1) / 2.0;
  Cx defect = total - Cx(target, 0.0);
  if (std::abs(defect) > 1e-8)
    fail(ErrorCode::FuchsViolation, "exponents violate the sum identity");
  rho.back().back() -= defect;

  AccessoryFamily fam;
  fam.base.order = n;
  fam.base.singularities = singularities;
  fam.direction.order = n;
  fam.direction.singularities = singularities;

  Eigen::VectorXcd a(mfin);
  for (int k = 0; k < mfin; ++k) a(k) = singularities[k];

  if (n == 2) {
    std::vector<Cx> A(mfin), B(mfin);
    for (int k = 0; k < mfin; ++k) {
      A[k] = Cx(1.0, 0.0) - rho[k][0] - rho[k][1];
      B[k] = rho[k][0] * rho[k][1];
    }
    Mat rows = Mat::Zero(3, mfin);
    Eigen::VectorXcd rhs(3);
    Cx sb = 0.0, sba = 0.0;
    for (int k = 0; k < mfin; ++k) {
      rows(0, k) = 1.0;
      rows(1, k) = a(k);
      rows(2, k) = a(k) * a(k);
      sb += B[k];
      sba += B[k] * a(k);
    }
    rhs << Cx(0.0, 0.0), -sb, -2.0 * sba;
    auto [c, cdir] = affine_line(rows, rhs);

    fam.base.pf.assign(2, std::vector<std::vector<Cx>>(mfin));
    fam.direction.pf.assign(2, std::vector<std::vector<Cx>>(mfin));
    for (int k = 0; k < mfin; ++k) {
      fam.base.pf[0][k] = {A[k]};
      fam.base.pf[1][k] = {c(k), B[k]};
      fam.direction.pf[0][k] = {Cx(0.0, 0.0)};
      fam.direction.pf[1][k] = {cdir(k), Cx(0.0, 0.0)};
    }
    return fam;
  }

  // n == 3, three points.
  std::vector<Cx> A(mfin), B(mfin), D(mfin);
  for (int k = 0; k < mfin; ++k) {
    Cx e1 = rho[k][0] + rho[k][1] + rho[k][2];
    Cx e2 = rho[k][0] * rho[k][1] + rho[k][0] * rho[k][2] + rho[k][1] * rho[k][2];
    Cx e3 = rho[k][0] * rho[k][1] * rho[k][2];
    A[k] = Cx(3.0, 0.0) - e1;
    B[k] = e2 + Cx(1.0, 0.0) - e1;
    D[k] = -e3;
  }

  // Unique simple-pole part of q_2.
  Mat crows = Mat::Zero(3, 3);
  Eigen::VectorXcd crhs(3);
  Cx sb = 0.0, sba = 0.0, saa = 0.0;
  for (int k = 0; k < 3; ++k) {
    crows(0, k) = 1.0;
    crows(1, k) = a(k);
    crows(2, k) = a(k) * a(k);
    sb += B[k];
    sba += B[k] * a(k);
    saa += A[k] * a(k);
  }
  crhs << Cx(0.0, 0.0), Cx(6.0, 0.0) - sb, 2.0 * saa - 2.0 * sba;
  Eigen::VectorXcd c = crows.colPivHouseholderQr().solve(crhs);
  if ((crows * c - crhs).norm() > 1e-9 * (1.0 + crhs.norm()))
    fail(ErrorCode::FuchsViolation, "simple-pole constraints are inconsistent");

  // One-parameter (E, F) family for q_3.
  Mat rows = Mat::Zero(5, 6);
  Eigen::VectorXcd rhs(5);
  Cx sd = 0.0, sda = 0.0, sdaa = 0.0;
  for (int k = 0; k < 3; ++k) {
    rows(0, 3 + k) = 1.0;
    rows(1, k) = 1.0;
    rows(1, 3 + k) = a(k);
    rows(2, k) = 2.0 * a(k);
    rows(2, 3 + k) = a(k) * a(k);
    rows(3, k) = 3.0 * a(k) * a(k);
    rows(3, 3 + k) = a(k) * a(k) * a(k);
    rows(4, k) = 4.0 * a(k) * a(k) * a(k);
    rows(4, 3 + k) = a(k) * a(k) * a(k) * a(k);
    sd += D[k];
    sda += D[k] * a(k);
    sdaa += D[k] * a(k) * a(k);
  }
  rhs << Cx(0.0, 0.0), Cx(0.0, 0.0), -sd, -3.0 * sda, -6.0 * sdaa;
  auto [ef, efdir] = affine_line(rows, rhs);

  fam.base.pf.assign(3, std::vector<std::vector<Cx>>(3));
  fam.direction.pf.assign(3, std::vector<std::vector<Cx>>(3));
  for (int k = 0; k < 3; ++k) {
    fam.base.pf[0][k] = {A[k]};
    fam.base.pf[1][k] = {c(k), B[k]};
    fam.base.pf[2][k] = {ef(3 + k), ef(k), D[k]};
    fam.direction.pf[0][k] = {Cx(0.0, 0.0)};
    fam.direction.pf[1][k] = {Cx(0.0, 0.0), Cx(0.0, 0.0)};
    fam.direction.pf[2][k] = {efdir(3 + k), efdir(k), Cx(0.0, 0.0)};
  }
  return fam;
}

}  // namespace pcfactor
