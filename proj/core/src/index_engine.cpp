#include "pcfactor/index_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pcfactor/linalg.hpp"

namespace pcfactor {
namespace {

IndexResult determined(std::vector<long long> idx, long long kappa) {
  IndexResult r;
  r.kind = IndexKind::Determined;
  r.indices = std::move(idx);
  r.total = kappa;
  if (std::accumulate(r.indices.begin(), r.indices.end(), 0LL) != kappa)
    fail(ErrorCode::InvalidArgument, "index table produced a wrong total");
  if (!std::is_sorted(r.indices.rbegin(), r.indices.rend()))
    fail(ErrorCode::InvalidArgument, "index table produced an unsorted result");
  return r;
}

bool is_scalar_matrix(const Mat& m) {
  Mat d = m - m(0, 0) * Mat::Identity(m.rows(), m.cols());
  return d.norm() <= 1e-8 * (1.0 + m.norm());
}

std::vector<Cx> sorted_eigs(const Mat& e) {
  std::vector<Cx> v = eigen(e).values_with_multiplicity();
  std::sort(v.begin(), v.end(), [](Cx a, Cx b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
  return v;
}

// Exponent multisets per point, all entries at the last point shifted by
// 1 - kappa/n so that the scalar-equation family has an ordinary point at
// infinity.
std::vector<std::vector<Cx>> exponent_payload(const DataPair& data) {
  std::vector<std::vector<Cx>> out;
  out.reserve(data.es.size());
  for (const Mat& e : data.es) out.push_back(sorted_eigs(e));
  double shift = 1.0 - double(data.kappa) / double(data.n);
  for (Cx& v : out.back()) v += shift;
  return out;
}

ResolverRequest make_request(const DataPair& data, std::vector<long long> a,
                             std::vector<long long> b) {
  ResolverRequest req;
  req.n = data.n;
  req.m = int(data.ms.size());
  req.kappa = data.kappa;
  req.option_a = std::move(a);
  req.option_b = std::move(b);
  req.exponents = exponent_payload(data);
  req.ms = data.ms;
  return req;
}

IndexResult dichotomy(const DataPair& data, std::vector<long long> a, std::vector<long long> b) {
  IndexResult r;
  r.kind = IndexKind::Dichotomy;
  r.option_a = a;
  r.option_b = b;
  r.total = data.kappa;
  for (const auto* opt : {&r.option_a, &r.option_b}) {
    if (std::accumulate(opt->begin(), opt->end(), 0LL) != data.kappa)
      fail(ErrorCode::InvalidArgument, "dichotomy option has a wrong total");
  }
  r.request = make_request(data, std::move(a), std::move(b));
  return r;
}

IndexResult constraints(long long kappa, long long gap) {
  IndexResult r;
  r.kind = IndexKind::Constraints;
  r.gap_bound = gap;
  r.total = kappa;
  return r;
}

bool settled2(const Reducibility2& rep) {
  return rep.type == ReducibilityType2::C ||
         (rep.type == ReducibilityType2::B && rep.n1 >= rep.n2);
}

IndexResult settled2_result(const Reducibility2& rep, long long kappa) {
  return determined({std::max(rep.n1, rep.n2), std::min(rep.n1, rep.n2)}, kappa);
}

// Residual three-point rule shared by cases with no usable subspace
// structure: the gap bounds force near-equal indices, split by kappa mod 3.
IndexResult residual_3(const DataPair& data) {
  long long b = floor_div(data.kappa, 3);
  long long r = data.kappa - 3 * b;
  if (r == 1) return determined({b + 1, b, b}, data.kappa);
  if (r == 2) return determined({b + 1, b + 1, b}, data.kappa);
  for (const Mat& m : data.ms)
    if (minimal_poly_degree(m) <= 2) return determined({b, b, b}, data.kappa);
  return dichotomy(data, {b, b, b}, {b + 1, b, b - 1});
}

}  // namespace

bool GapBound::satisfied_by(const std::vector<long long>& indices) const {
  if (int(indices.size()) != n) return false;
  for (std::size_t k = 0; k + 1 < indices.size(); ++k) {
    if (indices[k] < indices[k + 1]) return false;
    if (indices[k] - indices[k + 1] > max_gap) return false;
  }
  return true;
}

GapBound index_gap_bound(int n, int m) {
  GapBound g;
  g.n = n;
  g.max_gap = std::max<long long>(m - 2, 0);
  return g;
}

long long floor_div(long long a, long long b) {
  long long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::pair<long long, long long> split2(long long k) {
  long long hi = floor_div(k + 1, 2);
  return {hi, k - hi};
}

IndexResult indices_2xm(const Reducibility2& rep, long long kappa, int m) {
  if (m < 2) fail(ErrorCode::InvalidArgument, "indices_2xm: need at least two jump points");
  if (settled2(rep)) return settled2_result(rep, kappa);
  if (m == 3) return indices_2x3(rep, kappa);
  if (m == 2) {
    if (kappa % 2 != 0)
      fail(ErrorCode::InvalidArgument, "indices_2xm: odd total with two points is inconsistent");
    return determined({kappa / 2, kappa / 2}, kappa);
  }
  return constraints(kappa, m - 2);
}

IndexResult indices_2x3(const Reducibility2& rep, long long kappa) {
  if (settled2(rep)) return settled2_result(rep, kappa);
  auto [hi, lo] = split2(kappa);
  return determined({hi, lo}, kappa);
}

IndexResult indices_2x4(const Reducibility2& rep, const DataPair& data) {
  if (data.n != 2 || data.ms.size() != 4)
    fail(ErrorCode::InvalidArgument, "indices_2x4: need 2x2 data with four jump points");
  if (settled2(rep)) return settled2_result(rep, data.kappa);
  long long kappa = data.kappa;
  if (kappa % 2 != 0) {
    auto [hi, lo] = split2(kappa);
    return determined({hi, lo}, kappa);
  }
  long long h = kappa / 2;
  for (const Mat& m : data.ms)
    if (is_scalar_matrix(m)) return determined({h, h}, kappa);
  return dichotomy(data, {h, h}, {h + 1, h - 1});
}

IndexResult indices_3x3(const Reducibility3& rep, const DataPair& data) {
  if (data.n != 3 || data.ms.size() != 3)
    fail(ErrorCode::InvalidArgument, "indices_3x3: need 3x3 data with three jump points");
  long long kappa = data.kappa;

  switch (rep.type) {
    case ReducibilityType3::B1: {
      if (2 * rep.nu >= rep.N) {
        auto [hi, lo] = split2(rep.N);
        return determined({rep.nu, hi, lo}, kappa);
      }
      return residual_3(data);
    }
    case ReducibilityType3::B2: {
      if (2 * rep.nu <= rep.N) {
        auto [hi, lo] = split2(rep.N);
        return determined({hi, lo, rep.nu}, kappa);
      }
      return residual_3(data);
    }
    case ReducibilityType3::B3: {
      auto [hi, lo] = split2(rep.N);
      if (2 * rep.nu >= rep.N) return determined({rep.nu, hi, lo}, kappa);
      return determined({hi, lo, rep.nu}, kappa);
    }
    case ReducibilityType3::C: {
      if (rep.n1 >= rep.n2 && rep.n2 >= rep.n3)
        return determined({rep.n1, rep.n2, rep.n3}, kappa);
      if (rep.n2 < rep.n3 && 2 * rep.n1 >= rep.n2 + rep.n3) {
        auto [hi, lo] = split2(rep.n2 + rep.n3);
        return determined({rep.n1, hi, lo}, kappa);
      }
      if (rep.n1 < rep.n2 && rep.n1 + rep.n2 >= 2 * rep.n3) {
        auto [hi, lo] = split2(rep.n1 + rep.n2);
        return determined({hi, lo, rep.n3}, kappa);
      }
      return residual_3(data);
    }
    case ReducibilityType3::C1: {
      if (rep.n2 >= rep.n3) return determined({rep.n1, rep.n2, rep.n3}, kappa);
      if (2 * rep.n1 >= rep.n2 + rep.n3) {
        auto [hi, lo] = split2(rep.n2 + rep.n3);
        return determined({rep.n1, hi, lo}, kappa);
      }
      return residual_3(data);
    }
    case ReducibilityType3::C2: {
      if (rep.n1 >= rep.n2) return determined({rep.n1, rep.n2, rep.n3}, kappa);
      if (rep.n1 + rep.n2 >= 2 * rep.n3) {
        auto [hi, lo] = split2(rep.n1 + rep.n2);
        return determined({hi, lo, rep.n3}, kappa);
      }
      return residual_3(data);
    }
    case ReducibilityType3::C3: {
      if (rep.nu1 >= rep.nu2) {
        std::vector<long long> idx = {rep.nu1, rep.nu2, rep.nu_sharp};
        std::sort(idx.rbegin(), idx.rend());
        return determined(std::move(idx), kappa);
      }
      long long pair_sum = rep.nu1 + rep.nu2;
      auto [hi, lo] = split2(pair_sum);
      if (2 * rep.nu_sharp >= pair_sum) return determined({rep.nu_sharp, hi, lo}, kappa);
      return determined({hi, lo, rep.nu_sharp}, kappa);
    }
    case ReducibilityType3::D:
      return determined({rep.n1, rep.n2, rep.n3}, kappa);
    case ReducibilityType3::A:
      return residual_3(data);
  }
  fail(ErrorCode::InvalidArgument, "indices_3x3: unknown reducibility type");
}

}  // namespace pcfactor
