#include "pcfactor/reducibility.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pcfactor/linalg.hpp"

namespace pcfactor {
namespace {

Cx rayleigh(const Mat& m, const Vec& v) {
  return (v.adjoint() * m * v).value() / (v.adjoint() * v).value();
}

// Sum over k of the exponent matched to the eigenvalue of ms[k] on the
// common eigenvector v.
Cx line_slot_sum(const DataPair& data, const Vec& v) {
  Cx s = 0.0;
  for (std::size_t k = 0; k < data.ms.size(); ++k)
    s += match_exponent(data.es[k], rayleigh(data.ms[k], v));
  return s;
}

// Same for the quotient by an invariant plane annihilated by the
// transpose eigenvector u.
Cx quotient_slot_sum(const DataPair& data, const Vec& u) {
  Cx s = 0.0;
  for (std::size_t k = 0; k < data.ms.size(); ++k)
    s += match_exponent(data.es[k], rayleigh(data.ms[k].transpose(), u));
  return s;
}

long long round_slot(Cx sum, const char* what) {
  long long r = 0;
  if (std::abs(sum.imag()) > tol::integer_round ||
      !near_integer(sum.real(), tol::integer_round, &r))
    fail(ErrorCode::InvalidArgument,
         std::string(what) + ": slot exponent sum is not an integer");
  return r;
}

std::vector<Mat> transposed(const std::vector<Mat>& ms) {
  std::vector<Mat> out;
  out.reserve(ms.size());
  for (const Mat& m : ms) out.push_back(m.transpose());
  return out;
}

// Expands joint eigenvector subspaces into one (slot sum, representative)
// entry per dimension. All vectors in one subspace share the eigenvalue
// tuple, hence the slot sum.
struct SlotEntry {
  long long slot = 0;
  Vec rep;
};

std::vector<SlotEntry> expand_line_slots(const DataPair& data, const std::vector<Mat>& spaces,
                                         bool quotient_side, const char* what) {
  std::vector<SlotEntry> out;
  for (const Mat& s : spaces) {
    Vec v = s.col(0);
    Cx sum = quotient_side ? quotient_slot_sum(data, v) : line_slot_sum(data, v);
    long long slot = round_slot(sum, what);
    for (Eigen::Index c = 0; c < s.cols(); ++c) out.push_back({slot, Vec(s.col(c))});
  }
  std::sort(out.begin(), out.end(),
            [](const SlotEntry& a, const SlotEntry& b) { return a.slot > b.slot; });
  return out;
}

long long total_dim(const std::vector<Mat>& spaces) {
  long long d = 0;
  for (const Mat& s : spaces) d += s.cols();
  return d;
}

bool has_witness(const std::vector<Mat>& spaces) {
  for (const Mat& s : spaces)
    if (s.cols() >= 2) return true;
  return false;
}

}  // namespace

Cx match_exponent(const Mat& e, Cx mu) {
  Spectrum sp = eigen(e);
  const Cx* hit = nullptr;
  int hits = 0;
  for (const EigenCluster& c : sp.clusters) {
    Cx image = std::exp(-2.0 * kPi * kI * c.value);
    if (std::abs(image - mu) <= tol::pairing * (1.0 + std::abs(mu))) {
      hit = &c.value;
      ++hits;
    }
  }
  if (hits != 1)
    fail(ErrorCode::AmbiguousPairing,
         hits == 0 ? "no exponent matches the jump eigenvalue"
                   : "several exponents match the jump eigenvalue");
  return *hit;
}

std::vector<Cx> pair_exponents(const Mat& m, const Mat& e, const std::vector<Mat>& chain) {
  const Eigen::Index n = m.rows();
  if (m.cols() != n || e.rows() != n || e.cols() != n)
    fail(ErrorCode::InvalidArgument, "pair_exponents: dimension mismatch");

  // Eigenvalues of m restricted to each chain member, then successive
  // multiset subtraction yields one eigenvalue group per slot.
  std::vector<std::vector<Cx>> restricted;
  for (const Mat& sub : chain) {
    if (sub.rows() != n || sub.cols() < 1 || sub.cols() >= n)
      fail(ErrorCode::InvalidArgument, "pair_exponents: bad chain member");
    if (!is_invariant_subspace(m, sub))
      fail(ErrorCode::InvalidArgument, "pair_exponents: chain member not invariant");
    Mat r = sub.adjoint() * m * sub;
    restricted.push_back(eigen(r).values_with_multiplicity());
  }
  restricted.push_back(eigen(m).values_with_multiplicity());

  double scale = 1.0 + m.norm();
  std::vector<std::vector<Cx>> groups;
  std::vector<Cx> prev;
  for (const std::vector<Cx>& cur : restricted) {
    std::vector<Cx> remaining = cur;
    for (Cx v : prev) {
      auto best = remaining.end();
      double best_d = tol::pairing * scale;
      for (auto it = remaining.begin(); it != remaining.end(); ++it) {
        double d = std::abs(*it - v);
        if (d < best_d) {
          best_d = d;
          best = it;
        }
      }
      if (best == remaining.end())
        fail(ErrorCode::AmbiguousPairing, "pair_exponents: nested spectra do not match");
      remaining.erase(best);
    }
    groups.push_back(std::move(remaining));
    prev = cur;
  }

  std::vector<Cx> out;
  for (const std::vector<Cx>& g : groups) {
    std::vector<Cx> eps;
    eps.reserve(g.size());
    for (Cx mu : g) eps.push_back(match_exponent(e, mu));
    std::sort(eps.begin(), eps.end(), [](Cx a, Cx b) {
      if (a.real() != b.real()) return a.real() > b.real();
      return a.imag() > b.imag();
    });
    out.insert(out.end(), eps.begin(), eps.end());
  }
  return out;
}

Reducibility2 classify2(const DataPair& data) {
  if (data.n != 2) fail(ErrorCode::InvalidArgument, "classify2: need 2x2 data");
  Reducibility2 rep;

  std::vector<Mat> spaces = common_eigenvector_subspaces(data.ms);
  long long dim = total_dim(spaces);
  rep.line_continuum = has_witness(spaces);
  for (const Mat& s : spaces)
    for (Eigen::Index c = 0; c < s.cols(); ++c) rep.lines.push_back(Mat(s.col(c)));

  if (dim == 0) {
    rep.type = ReducibilityType2::A;
    return rep;
  }
  if (dim == 1) {
    rep.type = ReducibilityType2::B;
    rep.n1 = round_slot(line_slot_sum(data, Vec(spaces[0].col(0))), "classify2");
    rep.n2 = data.kappa - rep.n1;
    return rep;
  }
  rep.type = ReducibilityType2::C;
  std::vector<SlotEntry> entries = expand_line_slots(data, spaces, false, "classify2");
  rep.n1 = entries[0].slot;
  rep.n2 = entries[1].slot;
  if (rep.n1 + rep.n2 != data.kappa)
    fail(ErrorCode::InvalidArgument, "classify2: slot sums disagree with the total index");
  return rep;
}

Reducibility3 classify3(const DataPair& data) {
  if (data.n != 3) fail(ErrorCode::InvalidArgument, "classify3: need 3x3 data");
  Reducibility3 rep;

  std::vector<Mat> line_spaces = common_eigenvector_subspaces(data.ms);
  std::vector<Mat> plane_spaces = common_eigenvector_subspaces(transposed(data.ms));
  long long ld = total_dim(line_spaces);
  long long pd = total_dim(plane_spaces);
  rep.line_continuum = has_witness(line_spaces);
  rep.plane_continuum = has_witness(plane_spaces);

  for (const Mat& s : line_spaces)
    for (Eigen::Index c = 0; c < s.cols(); ++c) rep.lines.push_back(Mat(s.col(c)));
  for (const Mat& s : plane_spaces)
    for (Eigen::Index c = 0; c < s.cols(); ++c)
      rep.planes.push_back(orthogonal_complement(s.col(c).conjugate()));

  if (ld >= 3 || pd >= 3) {
    rep.type = ReducibilityType3::D;
    std::vector<SlotEntry> entries = ld >= 3
                                         ? expand_line_slots(data, line_spaces, false, "classify3")
                                         : expand_line_slots(data, plane_spaces, true, "classify3");
    rep.n1 = entries[0].slot;
    rep.n2 = entries[1].slot;
    rep.n3 = entries[2].slot;
    if (rep.n1 + rep.n2 + rep.n3 != data.kappa)
      fail(ErrorCode::InvalidArgument, "classify3: slot sums disagree with the total index");
    return rep;
  }

  if (ld == 0 && pd == 0) {
    rep.type = ReducibilityType3::A;
    return rep;
  }

  if (ld == 1 && pd == 0) {
    rep.type = ReducibilityType3::B1;
    rep.nu = round_slot(line_slot_sum(data, Vec(line_spaces[0].col(0))), "classify3");
    rep.N = data.kappa - rep.nu;
    return rep;
  }

  if (ld == 0 && pd == 1) {
    rep.type = ReducibilityType3::B2;
    rep.nu = round_slot(quotient_slot_sum(data, Vec(plane_spaces[0].col(0))), "classify3");
    rep.N = data.kappa - rep.nu;
    return rep;
  }

  if (ld == 1 && pd == 1) {
    Vec v = line_spaces[0].col(0);
    Vec u = plane_spaces[0].col(0);
    long long line_slot = round_slot(line_slot_sum(data, v), "classify3");
    long long quot_slot = round_slot(quotient_slot_sum(data, u), "classify3");
    bool nested = std::abs((u.transpose() * v).value()) < 1e-6;
    if (nested) {
      rep.type = ReducibilityType3::C;
      rep.n1 = line_slot;
      rep.n3 = quot_slot;
      rep.n2 = data.kappa - rep.n1 - rep.n3;
    } else {
      rep.type = ReducibilityType3::B3;
      if (line_slot != quot_slot)
        fail(ErrorCode::InvalidArgument, "classify3: complementary slots disagree");
      rep.nu = line_slot;
      rep.N = data.kappa - rep.nu;
    }
    return rep;
  }

  if (ld >= 2 && pd == 1) {
    rep.type = ReducibilityType3::C1;
    std::vector<SlotEntry> entries = expand_line_slots(data, line_spaces, false, "classify3");
    rep.n1 = entries[0].slot;
    rep.n2 = entries[1].slot;
    rep.n3 = round_slot(quotient_slot_sum(data, Vec(plane_spaces[0].col(0))), "classify3");
    if (rep.n1 + rep.n2 + rep.n3 != data.kappa)
      fail(ErrorCode::InvalidArgument, "classify3: slot sums disagree with the total index");
    return rep;
  }

  if (ld == 1 && pd >= 2) {
    rep.type = ReducibilityType3::C2;
    std::vector<SlotEntry> entries = expand_line_slots(data, plane_spaces, true, "classify3");
    rep.n1 = round_slot(line_slot_sum(data, Vec(line_spaces[0].col(0))), "classify3");
    rep.n2 = entries[0].slot;
    rep.n3 = entries[1].slot;
    if (rep.n1 + rep.n2 + rep.n3 != data.kappa)
      fail(ErrorCode::InvalidArgument, "classify3: slot sums disagree with the total index");
    return rep;
  }

  // ld >= 2 && pd >= 2: all lines lie in one plane W and all planes meet in
  // one line V1. nu1 is the slot of V1, nu2 the slot of the quotient by W.
  rep.type = ReducibilityType3::C3;
  Mat u_all(3, pd);
  {
    Eigen::Index c = 0;
    for (const Mat& s : plane_spaces)
      for (Eigen::Index i = 0; i < s.cols(); ++i) u_all.col(c++) = s.col(i);
  }
  Mat v_all(3, ld);
  {
    Eigen::Index c = 0;
    for (const Mat& s : line_spaces)
      for (Eigen::Index i = 0; i < s.cols(); ++i) v_all.col(c++) = s.col(i);
  }
  Mat v1 = orthogonal_complement(Mat(column_space(u_all).conjugate()));
  Mat u_w = orthogonal_complement(Mat(column_space(v_all).conjugate()));
  if (v1.cols() != 1 || u_w.cols() != 1)
    fail(ErrorCode::InvalidArgument, "classify3: degenerate lattice geometry");
  rep.nu1 = round_slot(line_slot_sum(data, Vec(v1.col(0))), "classify3");
  rep.nu2 = round_slot(quotient_slot_sum(data, Vec(u_w.col(0))), "classify3");
  rep.nu_sharp = data.kappa - rep.nu1 - rep.nu2;
  return rep;
}

}  // namespace pcfactor
