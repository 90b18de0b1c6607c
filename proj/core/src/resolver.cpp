#include "pcfactor/resolver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <thread>

#include <Eigen/Dense>

#include "pcfactor/fuchsian.hpp"
#include "pcfactor/linalg.hpp"

namespace pcfactor {
namespace {

int thread_budget() {
  if (const char* env = std::getenv("PI_ENGINE_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return 1;
}

// Checks chi_k X = X m_k for a common invertible X via the stacked linear
// system; guards fingerprint matches against trace-coordinate degeneracies.
bool conjugacy_confirm(const std::vector<Mat>& chis, const std::vector<Mat>& ms) {
  const int n = int(chis.front().rows());
  const int nn = n * n;
  Mat big = Mat::Zero(Eigen::Index(chis.size()) * nn, nn);
  for (std::size_t k = 0; k < chis.size(); ++k) {
    // Column-major vec: (I kron chi - m^T kron I) vec(X) = vec(chi X - X m).
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q)
        for (int r = 0; r < n; ++r) {
          big(Eigen::Index(k) * nn + q * n + r, q * n + p) += chis[k](r, p);
          big(Eigen::Index(k) * nn + q * n + r, p * n + r) -= ms[k](p, q);
        }
  }
  Eigen::JacobiSVD<Mat> svd(big, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv(0) <= 0.0) return false;
  if (sv(sv.size() - 1) / sv(0) > 1e-6) return false;
  Eigen::VectorXcd x = svd.matrixV().col(nn - 1);
  Mat cand(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) cand(i, j) = x(j * n + i);
  return is_invertible(cand);
}

struct SimplexPoint {
  Cx t;
  double value = 1e300;
};

}  // namespace

double fingerprint_defect(const std::vector<Mat>& a, const std::vector<Mat>& b) {
  if (a.size() != b.size() || a.empty())
    fail(ErrorCode::InvalidArgument, "fingerprint_defect: tuples must have equal length");
  if (a.front().rows() != b.front().rows())
    fail(ErrorCode::InvalidArgument, "fingerprint_defect: dimension mismatch");
  std::vector<Cx> fa = similarity_fingerprint(a);
  std::vector<Cx> fb = similarity_fingerprint(b);
  double s = 0.0;
  for (std::size_t i = 0; i < fa.size(); ++i) s += std::norm(fa[i] - fb[i]);
  return std::sqrt(s);
}

ResolverVerdict resolve(const ResolverRequest& req, const ResolverConfig& cfg) {
  if (req.n < 2 || req.n > 3)
    fail(ErrorCode::InvalidArgument, "resolve: only 2x2 and 3x3 requests supported");
  if (int(req.ms.size()) != req.m || int(req.exponents.size()) != req.m)
    fail(ErrorCode::InvalidArgument, "resolve: request payload shape mismatch");
  std::vector<Cx> sing =
      req.singularities.empty() ? default_singularities(req.m) : req.singularities;
  if (int(sing.size()) != req.m)
    fail(ErrorCode::InvalidArgument, "resolve: wrong number of singularities");

  AccessoryFamily family = accessory_family(req.n, sing, req.exponents);
  std::vector<LoopPath> loops = build_loops(sing, Cx(0.0, 0.0), cfg.integ);
  std::vector<Cx> target = similarity_fingerprint(req.ms);

  auto defect_at = [&](Cx t) -> double {
    MatrixField field = companion_system(family.at(t));
    MonodromyTuple tuple = monodromy(field, loops, cfg.integ);
    std::vector<Cx> fp = similarity_fingerprint(tuple.chis);
    double s = 0.0;
    for (std::size_t i = 0; i < fp.size(); ++i) s += std::norm(fp[i] - target[i]);
    return std::sqrt(s);
  };

  const int g = std::max(cfg.grid, 2);
  const double R = cfg.scan_radius;
  std::vector<Cx> points;
  points.reserve(std::size_t(g) * std::size_t(g));
  for (int iy = 0; iy < g; ++iy)
    for (int ix = 0; ix < g; ++ix) {
      Cx t(-R + 2.0 * R * ix / (g - 1), -R + 2.0 * R * iy / (g - 1));
      if (std::abs(t) <= R + 1e-12) points.push_back(t);
    }

  std::vector<double> values(points.size(), 1e300);
  std::vector<char> failed(points.size(), 0);
  const int threads = std::min<int>(thread_budget(), int(points.size()));
  auto worker = [&](int id) {
    for (std::size_t i = std::size_t(id); i < points.size(); i += std::size_t(threads)) {
      try {
        values[i] = defect_at(points[i]);
      } catch (const Error&) {
        failed[i] = 1;
      }
    }
  };
  if (threads <= 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int id = 0; id < threads; ++id) pool.emplace_back(worker, id);
    for (auto& th : pool) th.join();
  }

  ResolverVerdict verdict;
  std::size_t best = points.size();
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (failed[i]) {
      ++verdict.skipped;
      continue;
    }
    ++verdict.evaluated;
    if (best == points.size() || values[i] < values[best]) best = i;
  }
  if (best == points.size())
    fail(ErrorCode::NonConvergence, "resolve: every grid point failed to integrate");

  // Derivative-free polish (Nelder-Mead on the real plane of t).
  auto safe_defect = [&](Cx t) -> double {
    try {
      return defect_at(t);
    } catch (const Error&) {
      return 1e300;
    }
  };
  double h = 2.0 * R / (g - 1);
  std::array<SimplexPoint, 3> sx{
      SimplexPoint{points[best], values[best]},
      SimplexPoint{points[best] + Cx(h, 0.0), safe_defect(points[best] + Cx(h, 0.0))},
      SimplexPoint{points[best] + Cx(0.0, h), safe_defect(points[best] + Cx(0.0, h))}};
  for (int iter = 0; iter < 500; ++iter) {
    std::sort(sx.begin(), sx.end(),
              [](const SimplexPoint& a, const SimplexPoint& b) { return a.value < b.value; });
    if (std::abs(sx[2].t - sx[0].t) + std::abs(sx[1].t - sx[0].t) < 1e-10) break;
    Cx centroid = (sx[0].t + sx[1].t) / 2.0;
    Cx refl = centroid + (centroid - sx[2].t);
    double fr = safe_defect(refl);
    if (fr < sx[0].value) {
      Cx expand = centroid + 2.0 * (centroid - sx[2].t);
      double fe = safe_defect(expand);
      sx[2] = fe < fr ? SimplexPoint{expand, fe} : SimplexPoint{refl, fr};
    } else if (fr < sx[1].value) {
      sx[2] = SimplexPoint{refl, fr};
    } else {
      Cx contract = centroid + 0.5 * (sx[2].t - centroid);
      double fc = safe_defect(contract);
      if (fc < sx[2].value) {
        sx[2] = SimplexPoint{contract, fc};
      } else {
        sx[1].t = sx[0].t + 0.5 * (sx[1].t - sx[0].t);
        sx[1].value = safe_defect(sx[1].t);
        sx[2].t = sx[0].t + 0.5 * (sx[2].t - sx[0].t);
        sx[2].value = safe_defect(sx[2].t);
      }
    }
  }
  std::sort(sx.begin(), sx.end(),
            [](const SimplexPoint& a, const SimplexPoint& b) { return a.value < b.value; });

  verdict.parameter = sx[0].t;
  verdict.defect = sx[0].value;
  if (verdict.defect < cfg.match_tol) {
    verdict.extremal_confirmed = true;
    if (req.n == 3) {
      MatrixField field = companion_system(family.at(verdict.parameter));
      MonodromyTuple tuple = monodromy(field, loops, cfg.integ);
      verdict.extremal_confirmed = conjugacy_confirm(tuple.chis, req.ms);
    }
  }
  return verdict;
}

}  // namespace pcfactor
