#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "pcfactor/common.hpp"
#include "pcfactor/reducibility.hpp"
#include "pcfactor/symbol.hpp"

namespace pcfactor {

// Request to settle a balanced-vs-extremal index dichotomy by scanning the
// one-parameter scalar-equation family with the stated local exponents.
struct ResolverRequest {
  int n = 0;
  int m = 0;
  long long kappa = 0;
  std::vector<long long> option_a;  // balanced candidate
  std::vector<long long> option_b;  // extremal candidate
  // Exponent multiset per singular point. The last point's entries carry
  // the 1 - kappa/n shift that keeps infinity an ordinary point.
  std::vector<std::vector<Cx>> exponents;
  std::vector<Mat> ms;  // target jump tuple for the similarity match
  std::vector<Cx> singularities;  // empty: resolver picks roots of unity
};

enum class IndexKind { Determined, Dichotomy, Constraints };

struct IndexResult {
  IndexKind kind = IndexKind::Determined;
  std::vector<long long> indices;             // Determined
  std::vector<long long> option_a, option_b;  // Dichotomy candidates
  std::optional<ResolverRequest> request;     // Dichotomy
  long long gap_bound = 0;                    // Constraints
  long long total = 0;
};

struct GapBound {
  int n = 0;
  long long max_gap = 0;
  // True when the sorted candidate has all consecutive differences within
  // the bound.
  bool satisfied_by(const std::vector<long long>& indices) const;
};

// Consecutive-difference bound obeyed by the indices of irreducible-type
// data with m jump points.
GapBound index_gap_bound(int n, int m);

long long floor_div(long long a, long long b);

// Split a total into (ceil(k/2), floor(k/2)).
std::pair<long long, long long> split2(long long k);

// General 2x2 entry point. Emits the determined answer whenever the
// reducibility report settles it, the exact m=3 answer, and interval
// constraints otherwise.
IndexResult indices_2xm(const Reducibility2& rep, long long kappa, int m);
IndexResult indices_2x3(const Reducibility2& rep, long long kappa);
IndexResult indices_2x4(const Reducibility2& rep, const DataPair& data);
IndexResult indices_3x3(const Reducibility3& rep, const DataPair& data);

}  // namespace pcfactor
