#pragma once

#include <vector>

#include "pcfactor/common.hpp"

namespace pcfactor {

// One cluster of nearby eigenvalues, treated as a single eigenvalue with
// algebraic multiplicity alg and geometric multiplicity geo.
struct EigenCluster {
  Cx value;                 // cluster mean
  int alg = 0;
  int geo = 0;
  std::vector<Cx> members;  // raw solver eigenvalues assigned to the cluster
};

struct Spectrum {
  int n = 0;
  std::vector<EigenCluster> clusters;

  // Eigenvalues with algebraic multiplicity, cluster means repeated alg times.
  std::vector<Cx> values_with_multiplicity() const;
};

// Clustered eigenvalue decomposition. Throws NonConvergence if the QR
// iteration fails.
Spectrum eigen(const Mat& m);

// Rank with a relative singular-value cutoff. The cutoff is rel_cutoff times
// the larger of the top singular value and scale, so differences that should
// vanish relative to a parent matrix of norm ~scale count as zero.
int rank_of(const Mat& m, double rel_cutoff = tol::rank_rel, double scale = 0.0);

// Orthonormal basis of the kernel (columns). May have zero columns. The
// cutoff scales like in rank_of.
Mat kernel_basis(const Mat& m, double rel_cutoff = tol::rank_rel, double scale = 0.0);

// Orthonormal basis of the column space.
Mat column_space(const Mat& m, double rel_cutoff = tol::rank_rel);

// Orthonormal basis of the intersection of two subspaces given by
// orthonormal-column bases.
Mat subspace_intersection(const Mat& u, const Mat& w, double rel_cutoff = tol::rank_rel);

// Orthonormal basis of the orthogonal complement.
Mat orthogonal_complement(const Mat& u);

// True if the column span of `sub` is mapped into itself by m, relative
// to the norm of m.
bool is_invariant_subspace(const Mat& m, const Mat& sub, double rel_tol = 1e-8);

// Matrix logarithm scaled by i/(2*pi): returns E with exp(-2*pi*i*E) = m and
// all eigenvalues of E having real part inside the open interval
// (lo, lo + 1). Branch choices on the boundary (within tol::branch) raise
// BranchOnBoundary; singular input raises Singular. E is a polynomial in m,
// so it commutes with m and inherits its invariant subspaces.
Mat branch_log(const Mat& m, double lo);

// Matrix exponential by scaling and squaring with a degree-13 Pade
// approximant. Independent of the eigenvalue-based routines above.
Mat expm(const Mat& m);

// Degree of the minimal polynomial.
int minimal_poly_degree(const Mat& m);

// True if a and b are similar: matching eigenvalue clusters with equal
// algebraic multiplicities and equal rank sequences of (x - mu)^k.
bool similar(const Mat& a, const Mat& b);

// Maximal subspaces consisting entirely of simultaneous eigenvectors of the
// tuple. Each returned matrix has orthonormal columns; distinct subspaces
// correspond to distinct joint eigenvalue combinations and are transverse.
// Every common invariant line of the tuple lies in exactly one of them.
std::vector<Mat> common_eigenvector_subspaces(const std::vector<Mat>& ms);

struct SubspaceBasis {
  int dim = 0;
  Mat basis;  // n x dim, orthonormal columns
};

struct InvariantSubspaces {
  // Isolated d-dimensional common invariant subspaces.
  std::vector<SubspaceBasis> spaces;
  // Set when an entire family exists (a joint eigenvector subspace of
  // dimension >= 2 for d = 1, or its transpose analogue for d = n-1).
  bool continuum = false;
  std::vector<SubspaceBasis> continuum_witnesses;
};

// Common invariant subspaces of dimension d for the tuple. Supports d = 1
// and d = n - 1 (via the transposed tuple); other d raise InvalidArgument.
InvariantSubspaces common_invariant_subspaces(const std::vector<Mat>& ms, int d);

// Trace coordinates of the tuple under simultaneous similarity:
// (tr m_k)_k, then (tr m_i m_j)_{i<j}, then (tr m_i m_j m_l)_{i<j<l}.
std::vector<Cx> similarity_fingerprint(const std::vector<Mat>& ms);

}  // namespace pcfactor
