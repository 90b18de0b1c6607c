#pragma once

#include <functional>
#include <vector>

#include "pcfactor/common.hpp"
#include "pcfactor/fuchsian.hpp"
#include "pcfactor/symbol.hpp"

namespace pcfactor {

// One piece of a piecewise path: a straight line from a to b, or a circular
// arc around center with the given radius between angles t0 and t1 (radians,
// traversed from t0 to t1; t1 > t0 means counterclockwise).
struct Segment {
  bool is_arc = false;
  Cx a, b;
  Cx center;
  double radius = 0.0;
  double t0 = 0.0;
  double t1 = 0.0;

  static Segment line(Cx from, Cx to);
  static Segment arc(Cx center, double radius, double from_angle, double to_angle);

  // Position and velocity at parameter s in [0, 1].
  Cx point(double s) const;
  Cx velocity(double s) const;
};

// Closed path based at `base` winding once counterclockwise around the
// singularity with index `target` and around nothing else.
struct LoopPath {
  Cx base;
  int target = 0;
  std::vector<Segment> segments;
};

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = 0.25;
  // Keep-away distance from singularities for loop construction; 0 means
  // one quarter of the smallest pairwise singularity distance.
  double clearance = 0.0;
};

// Petal loops, one per singularity, in the order given. When the
// singularities are listed counterclockwise the loop transports compose to
// the identity around infinity for single-valued-at-infinity systems.
std::vector<LoopPath> build_loops(const std::vector<Cx>& singularities, Cx base,
                                  const IntegratorConfig& cfg = {});

// Solves Y' = A(z) Y along the path with initial value y0 at the path start
// using an adaptive embedded Runge-Kutta pair.
Mat transport(const MatrixField& field, const std::vector<Segment>& segments,
              const Mat& y0, const IntegratorConfig& cfg = {});
Mat transport(const MatrixField& field, const LoopPath& path, const Mat& y0,
              const IntegratorConfig& cfg = {});
Mat transport(const RationalSystem& sys, const LoopPath& path, const Mat& y0,
              const IntegratorConfig& cfg = {});

struct MonodromyTuple {
  std::vector<Mat> chis;
  Cx base;
  std::vector<LoopPath> loops;
  double product_defect = 0.0;
};

// chis[k] is the inverse of the transport of the identity around loop k, so
// a scalar residue eps at the loop target yields chi = exp(-2 pi i eps).
// That sign convention is pinned by a one-time internal self-test.
MonodromyTuple monodromy(const MatrixField& field, const std::vector<LoopPath>& loops,
                         const IntegratorConfig& cfg = {});
MonodromyTuple monodromy(const RationalSystem& sys, Cx base = Cx(0.0, 0.0),
                         const IntegratorConfig& cfg = {});

// Reconstructs the piecewise constant boundary quotient of a system whose
// singularities lie on the unit circle: the inner solution normalized at the
// origin against the outer solution normalized at infinity.
PiecewiseSymbol symbol_from_system(const RationalSystem& sys, double p,
                                   const IntegratorConfig& cfg = {});

struct FactorAssembly {
  PiecewiseSymbol symbol;
  // Analytic factor evaluators: plus(z) for |z| <= 1, minus(z) for |z| >= 1.
  std::function<Mat(Cx)> plus;
  std::function<Mat(Cx)> minus;
  // Middle factor diag(t^powers); equals the declared indices.
  std::vector<long long> powers;
  // max over fresh boundary samples of ||plus(t) diag(t^powers) minus(t) - G(t)||.
  double residual = 0.0;
};

FactorAssembly factor_assembly(const RationalSystem& sys, double p,
                               const IntegratorConfig& cfg = {});

// For systems with an identically-zero lower-left block pattern, checks that
// the computed monodromy matrices preserve the same coordinate subspaces.
// Vacuously true when the system has no such pattern.
bool invariant_subspace_propagation_check(const RationalSystem& sys,
                                          const std::vector<LoopPath>& loops,
                                          const IntegratorConfig& cfg = {},
                                          double rel_tol = 1e-8);

// Exterior-coordinate form of a standard-form system: the field B(w) with
// Z'(w) = B(w) Z(w) governing Z(w) = diag(z^{-k_i}) Y(z) at w = 1/z.
MatrixField exterior_field(const RationalSystem& sys);

}  // namespace pcfactor
