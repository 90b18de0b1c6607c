#include "pcfactor/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pcfactor {

namespace {

void require_square(const Mat& m, const char* who) {
  if (m.rows() != m.cols() || m.rows() == 0)
    fail(ErrorCode::InvalidArgument, std::string(who) + " requires a nonempty square matrix");
}

Eigen::JacobiSVD<Mat> svd_full(const Mat& m) {
  return Eigen::JacobiSVD<Mat>(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
}

double sv_cutoff(const Eigen::JacobiSVD<Mat>& svd, double rel_cutoff, double scale = 0.0) {
  const double top = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  return rel_cutoff * std::max({top, scale, 1e-300});
}

}  // namespace

std::vector<Cx> Spectrum::values_with_multiplicity() const {
  std::vector<Cx> out;
  out.reserve(static_cast<std::size_t>(n));
  for (const auto& c : clusters)
    for (int i = 0; i < c.alg; ++i) out.push_back(c.value);
  return out;
}

Spectrum eigen(const Mat& m) {
  require_square(m, "eigen");
  const int n = static_cast<int>(m.rows());
  Eigen::ComplexEigenSolver<Mat> solver(m, false);
  if (solver.info() != Eigen::Success)
    fail(ErrorCode::NonConvergence, "eigenvalue iteration did not converge");

  std::vector<Cx> raw(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) raw[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);

  // Transitive clustering of eigenvalues within the matrix-scaled tolerance.
  const double tolc = cluster_tol(m);
  std::vector<int> group(raw.size());
  std::iota(group.begin(), group.end(), 0);
  const auto root = [&](int i) {
    while (group[static_cast<std::size_t>(i)] != i) i = group[static_cast<std::size_t>(i)];
    return i;
  };
  for (std::size_t i = 0; i < raw.size(); ++i)
    for (std::size_t j = i + 1; j < raw.size(); ++j)
      if (std::abs(raw[i] - raw[j]) <= tolc)
        group[static_cast<std::size_t>(root(static_cast<int>(j)))] = root(static_cast<int>(i));

  Spectrum spec;
  spec.n = n;
  std::vector<int> seen;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const int r = root(static_cast<int>(i));
    if (std::find(seen.begin(), seen.end(), r) != seen.end()) continue;
    seen.push_back(r);
    EigenCluster cluster;
    for (std::size_t j = 0; j < raw.size(); ++j)
      if (root(static_cast<int>(j)) == r) cluster.members.push_back(raw[j]);
    cluster.alg = static_cast<int>(cluster.members.size());
    Cx mean(0.0, 0.0);
    for (Cx v : cluster.members) mean += v;
    cluster.value = mean / static_cast<double>(cluster.alg);
    const int geo_raw =
        n - rank_of(m - cluster.value * Mat::Identity(n, n), tol::rank_rel, 1.0 + m.norm());
    cluster.geo = std::clamp(geo_raw, 1, cluster.alg);
    spec.clusters.push_back(std::move(cluster));
  }
  return spec;
}

int rank_of(const Mat& m, double rel_cutoff, double scale) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(m);
  const double cut = sv_cutoff(svd, rel_cutoff, scale);
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > cut) ++rank;
  return rank;
}

Mat kernel_basis(const Mat& m, double rel_cutoff, double scale) {
  if (m.rows() == 0 || m.cols() == 0) return Mat::Identity(m.cols(), m.cols());
  const auto svd = svd_full(m);
  const double cut = sv_cutoff(svd, rel_cutoff, scale);
  const int cols = static_cast<int>(m.cols());
  const int nsv = static_cast<int>(svd.singularValues().size());
  int rank = 0;
  for (int i = 0; i < nsv; ++i)
    if (svd.singularValues()(i) > cut) ++rank;
  return svd.matrixV().rightCols(cols - rank);
}

Mat column_space(const Mat& m, double rel_cutoff) {
  if (m.rows() == 0 || m.cols() == 0) return Mat(m.rows(), 0);
  const auto svd = svd_full(m);
  const double cut = sv_cutoff(svd, rel_cutoff);
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > cut) ++rank;
  return svd.matrixU().leftCols(rank);
}

Mat subspace_intersection(const Mat& u, const Mat& w, double rel_cutoff) {
  if (u.cols() == 0 || w.cols() == 0) return Mat(u.rows(), 0);
  Mat joint(u.rows(), u.cols() + w.cols());
  joint << u, w;
  const Mat null_joint = kernel_basis(joint, rel_cutoff);
  if (null_joint.cols() == 0) return Mat(u.rows(), 0);
  const Mat inter = u * null_joint.topRows(u.cols());
  return column_space(inter, rel_cutoff);
}

Mat orthogonal_complement(const Mat& u) {
  return kernel_basis(u.adjoint());
}

bool is_invariant_subspace(const Mat& m, const Mat& sub, double rel_tol) {
  if (sub.cols() == 0) return true;
  const Mat image = m * sub;
  const Mat residual = image - sub * (sub.adjoint() * image);
  return residual.norm() <= rel_tol * (1.0 + m.norm());
}

Mat branch_log(const Mat& m, double lo) {
  require_square(m, "branch_log");
  if (!is_invertible(m))
    fail(ErrorCode::Singular, "branch_log requires an invertible matrix");
  const int n = static_cast<int>(m.rows());
  const Spectrum spec = eigen(m);

  // Scaled logarithm f(z) = i/(2*pi) * log z, with the branch shifted per
  // cluster so that Re f lands in (lo, lo + 1).
  std::vector<Cx> xs, fs;        // confluent node list
  std::vector<int> cluster_of;   // which cluster a node belongs to
  for (std::size_t c = 0; c < spec.clusters.size(); ++c) {
    const auto& cl = spec.clusters[c];
    const Cx mu = cl.value;
    const Cx eps0 = kI / (2.0 * kPi) * std::log(mu);
    const double d = eps0.real() - lo;
    if (std::abs(d - std::round(d)) < tol::branch)
      fail(ErrorCode::BranchOnBoundary,
           "eigenvalue lands on the boundary of the admissible strip");
    const double shift = -std::floor(d);
    const Cx f0 = eps0 + Cx(shift, 0.0);
    for (int r = 0; r < cl.alg; ++r) {
      xs.push_back(mu);
      cluster_of.push_back(static_cast<int>(c));
      fs.push_back(f0);
    }
  }

  // Derivatives of f at mu: f^(l)(mu) = i/(2*pi) * (-1)^(l-1) (l-1)! / mu^l.
  const auto deriv = [](Cx mu, int l) {
    Cx v = kI / (2.0 * kPi);
    double fact = 1.0;
    for (int j = 1; j < l; ++j) fact *= j;
    double sign = (l % 2 == 1) ? 1.0 : -1.0;
    return v * sign * fact / std::pow(mu, l);
  };

  // Confluent Newton divided differences.
  const int N = static_cast<int>(xs.size());
  std::vector<std::vector<Cx>> table(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) {
    table[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(i) + 1);
    table[static_cast<std::size_t>(i)][0] = fs[static_cast<std::size_t>(i)];
  }
  for (int j = 1; j < N; ++j) {
    for (int i = j; i < N; ++i) {
      if (cluster_of[static_cast<std::size_t>(i)] == cluster_of[static_cast<std::size_t>(i - j)]) {
        double fact = 1.0;
        for (int t = 2; t <= j; ++t) fact *= t;
        table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
            deriv(xs[static_cast<std::size_t>(i)], j) / fact;
      } else {
        table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
            (table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j - 1)] -
             table[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)]) /
            (xs[static_cast<std::size_t>(i)] - xs[static_cast<std::size_t>(i - j)]);
      }
    }
  }

  // Horner evaluation of the interpolant at the matrix argument.
  Mat e = table[static_cast<std::size_t>(N - 1)][static_cast<std::size_t>(N - 1)] *
          Mat::Identity(n, n);
  for (int j = N - 2; j >= 0; --j) {
    e = e * (m - xs[static_cast<std::size_t>(j)] * Mat::Identity(n, n)) +
        table[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)] * Mat::Identity(n, n);
  }
  return e;
}

Mat expm(const Mat& m) {
  require_square(m, "expm");
  const int n = static_cast<int>(m.rows());
  const double norm1 = m.cwiseAbs().colwise().sum().maxCoeff();
  const double theta13 = 5.371920351148152;
  int s = 0;
  if (norm1 > theta13) s = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
  const Mat a = m / std::pow(2.0, s);

  static const double b[] = {64764752532480000., 32382376266240000., 7771770303897600.,
                             1187353796428800.,  129060195264000.,   10559470521600.,
                             670442572800.,      33522128640.,       1323241920.,
                             40840800.,          960960.,            16380.,
                             182.,               1.};
  const Mat id = Mat::Identity(n, n);
  const Mat a2 = a * a;
  const Mat a4 = a2 * a2;
  const Mat a6 = a2 * a4;
  const Mat u = a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 +
                     b[3] * a2 + b[1] * id);
  const Mat v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 +
                b[2] * a2 + b[0] * id;
  Mat r = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < s; ++i) r = r * r;
  return r;
}

int minimal_poly_degree(const Mat& m) {
  require_square(m, "minimal_poly_degree");
  const int n = static_cast<int>(m.rows());
  const int n2 = n * n;
  Mat power = Mat::Identity(n, n);
  Mat stacked(n2, n + 1);
  stacked.col(0) = power.reshaped();
  for (int d = 1; d <= n; ++d) {
    power = power * m;
    Mat col = power;
    const double scale = std::max(col.norm(), 1e-300);
    stacked.col(d) = col.reshaped() / scale;
    if (rank_of(stacked.leftCols(d + 1)) <= d) return d;
  }
  return n;
}

namespace {

// Clusters the concatenated spectra of two same-size matrices; each joint
// cluster must receive the same algebraic count from both sides.
bool spectra_match(const Mat& a, const Mat& b, std::vector<Cx>* joint_values) {
  const Spectrum sa = eigen(a);
  const Spectrum sb = eigen(b);
  const std::vector<Cx> va = sa.values_with_multiplicity();
  const std::vector<Cx> vb = sb.values_with_multiplicity();
  const double tolc = std::max(cluster_tol(a), cluster_tol(b));

  std::vector<Cx> all = va;
  all.insert(all.end(), vb.begin(), vb.end());
  std::vector<bool> used(all.size(), false);
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (used[i]) continue;
    int count_a = 0, count_b = 0;
    Cx mean(0.0, 0.0);
    int total = 0;
    // Gather everything transitively reachable from all[i].
    std::vector<std::size_t> stack{i};
    used[i] = true;
    std::vector<std::size_t> members;
    while (!stack.empty()) {
      const std::size_t j = stack.back();
      stack.pop_back();
      members.push_back(j);
      for (std::size_t k = 0; k < all.size(); ++k) {
        if (!used[k] && std::abs(all[j] - all[k]) <= tolc) {
          used[k] = true;
          stack.push_back(k);
        }
      }
    }
    for (std::size_t j : members) {
      mean += all[j];
      ++total;
      if (j < va.size()) ++count_a;
      else ++count_b;
    }
    if (count_a != count_b) return false;
    if (joint_values) joint_values->push_back(mean / static_cast<double>(total));
  }
  return true;
}

}  // namespace

bool similar(const Mat& a, const Mat& b) {
  require_square(a, "similar");
  require_square(b, "similar");
  if (a.rows() != b.rows()) return false;
  const int n = static_cast<int>(a.rows());

  std::vector<Cx> joint;
  if (!spectra_match(a, b, &joint)) return false;

  const Mat id = Mat::Identity(n, n);
  for (Cx mu : joint) {
    // Shared normalization keeps the power ranks comparable and gives the
    // cutoff an absolute floor, so a power that should vanish but carries
    // floating-point residue still counts as zero.
    Mat pa = a - mu * id;
    Mat pb = b - mu * id;
    const double s0 = std::max({pa.norm(), pb.norm(), 1e-300});
    pa /= s0;
    pb /= s0;
    Mat qa = id, qb = id;
    for (int k = 1; k <= n; ++k) {
      qa = qa * pa;
      qb = qb * pb;
      if (rank_of(qa, tol::rank_rel, 1.0) != rank_of(qb, tol::rank_rel, 1.0)) return false;
    }
  }
  return true;
}

std::vector<Mat> common_eigenvector_subspaces(const std::vector<Mat>& ms) {
  if (ms.empty()) fail(ErrorCode::InvalidArgument, "empty matrix tuple");
  const int n = static_cast<int>(ms[0].rows());
  for (const Mat& m : ms)
    if (m.rows() != n || m.cols() != n)
      fail(ErrorCode::InvalidArgument, "matrix tuple entries must share one square size");

  // Eigenspaces of the first matrix seed the candidates; each further matrix
  // refines them by intersecting with its own eigenspaces. A candidate
  // surviving all refinements consists entirely of joint eigenvectors.
  const Mat id = Mat::Identity(n, n);
  std::vector<Mat> current;
  {
    const Spectrum s = eigen(ms[0]);
    for (const auto& cl : s.clusters) {
      Mat basis = kernel_basis(ms[0] - cl.value * id, tol::rank_rel, 1.0 + ms[0].norm());
      if (basis.cols() > 0) current.push_back(std::move(basis));
    }
  }
  for (std::size_t i = 1; i < ms.size(); ++i) {
    const Spectrum s = eigen(ms[i]);
    std::vector<Mat> eigenspaces;
    for (const auto& cl : s.clusters) {
      Mat basis = kernel_basis(ms[i] - cl.value * id, tol::rank_rel, 1.0 + ms[i].norm());
      if (basis.cols() > 0) eigenspaces.push_back(std::move(basis));
    }
    std::vector<Mat> next;
    for (const Mat& v : current) {
      for (const Mat& w : eigenspaces) {
        Mat inter = subspace_intersection(v, w);
        if (inter.cols() > 0) next.push_back(std::move(inter));
      }
    }
    current = std::move(next);
  }
  return current;
}

InvariantSubspaces common_invariant_subspaces(const std::vector<Mat>& ms, int d) {
  if (ms.empty()) fail(ErrorCode::InvalidArgument, "empty matrix tuple");
  const int n = static_cast<int>(ms[0].rows());
  if (d < 1 || d > n - 1)
    fail(ErrorCode::InvalidArgument, "subspace dimension must satisfy 1 <= d <= n-1");

  InvariantSubspaces out;
  if (d == 1) {
    for (Mat& sub : common_eigenvector_subspaces(ms)) {
      const int dim = static_cast<int>(sub.cols());
      if (dim == 1) {
        out.spaces.push_back({1, std::move(sub)});
      } else {
        out.continuum = true;
        out.continuum_witnesses.push_back({dim, std::move(sub)});
      }
    }
    return out;
  }
  if (d == n - 1) {
    // A hyperplane {x : u^T x = 0} is invariant for the tuple exactly when u
    // is a joint eigenvector of the transposed tuple. The hyperplane basis is
    // the orthogonal complement of conj(u).
    std::vector<Mat> transposed;
    transposed.reserve(ms.size());
    for (const Mat& m : ms) transposed.push_back(m.transpose());
    for (Mat& sub : common_eigenvector_subspaces(transposed)) {
      const int dim = static_cast<int>(sub.cols());
      if (dim == 1) {
        Mat plane = orthogonal_complement(sub.conjugate());
        out.spaces.push_back({static_cast<int>(plane.cols()), std::move(plane)});
      } else {
        out.continuum = true;
        Mat representative = orthogonal_complement(sub.col(0).conjugate());
        out.continuum_witnesses.push_back(
            {static_cast<int>(representative.cols()), std::move(representative)});
      }
    }
    return out;
  }
  fail(ErrorCode::InvalidArgument,
       "only dimensions 1 and n-1 are supported for common invariant subspaces");
}

std::vector<Cx> similarity_fingerprint(const std::vector<Mat>& ms) {
  if (ms.empty()) fail(ErrorCode::InvalidArgument, "empty matrix tuple");
  const std::size_t m = ms.size();
  std::vector<Cx> out;
  for (std::size_t i = 0; i < m; ++i) out.push_back(ms[i].trace());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) out.push_back((ms[i] * ms[j]).trace());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      for (std::size_t l = j + 1; l < m; ++l) out.push_back((ms[i] * ms[j] * ms[l]).trace());
  return out;
}

}  // namespace pcfactor
