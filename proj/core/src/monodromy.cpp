#include "pcfactor/monodromy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "pcfactor/linalg.hpp"
#include "pcfactor/polynomial.hpp"

namespace pcfactor {
namespace {

double min_pairwise_distance(const std::vector<Cx>& pts) {
  double best = 1e300;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      best = std::min(best, std::abs(pts[i] - pts[j]));
  return best;
}

double effective_clearance(const std::vector<Cx>& sing, Cx base,
                           const IntegratorConfig& cfg) {
  if (cfg.clearance > 0.0) return cfg.clearance;
  if (sing.size() < 2) {
    double d = sing.empty() ? 1.0 : std::abs(base - sing[0]);
    return 0.25 * std::min(d, 1.0);
  }
  return 0.25 * min_pairwise_distance(sing);
}

double point_segment_distance(Cx p, Cx u, Cx v) {
  Cx d = v - u;
  double len2 = std::norm(d);
  if (len2 == 0.0) return std::abs(p - u);
  double t = std::clamp((std::conj(d) * (p - u)).real() / len2, 0.0, 1.0);
  return std::abs(p - (u + t * d));
}

// Appends straight segments from u to v, inserting perpendicular waypoints
// around any singularity the direct segment would approach too closely.
void append_clear_line(std::vector<Segment>& out, Cx u, Cx v,
                       const std::vector<Cx>& avoid, double clearance, int depth) {
  int worst = -1;
  double worst_d = clearance * 0.999;
  for (std::size_t i = 0; i < avoid.size(); ++i) {
    double d = point_segment_distance(avoid[i], u, v);
    if (d < worst_d) {
      worst_d = d;
      worst = int(i);
    }
  }
  if (worst < 0) {
    out.push_back(Segment::line(u, v));
    return;
  }
  if (depth <= 0) fail(ErrorCode::GeometryFailure, "cannot route a path around the singularities");
  Cx s = avoid[std::size_t(worst)];
  Cx d = v - u;
  double len2 = std::norm(d);
  if (len2 == 0.0) fail(ErrorCode::GeometryFailure, "degenerate segment near a singularity");
  double t = std::clamp((std::conj(d) * (s - u)).real() / len2, 0.0, 1.0);
  Cx foot = u + t * d;
  Cx dir;
  if (std::abs(foot - s) > 1e-12) {
    dir = (foot - s) / std::abs(foot - s);
  } else {
    dir = kI * d / std::sqrt(len2);
  }
  Cx waypoint = s + dir * (2.0 * clearance);
  append_clear_line(out, u, waypoint, avoid, clearance, depth - 1);
  append_clear_line(out, waypoint, v, avoid, clearance, depth - 1);
}

}  // namespace

Segment Segment::line(Cx from, Cx to) {
  Segment s;
  s.is_arc = false;
  s.a = from;
  s.b = to;
  return s;
}

Segment Segment::arc(Cx center, double radius, double from_angle, double to_angle) {
  Segment s;
  s.is_arc = true;
  s.center = center;
  s.radius = radius;
  s.t0 = from_angle;
  s.t1 = to_angle;
  return s;
}

Cx Segment::point(double s) const {
  if (!is_arc) return a + s * (b - a);
  double th = t0 + s * (t1 - t0);
  return center + std::polar(radius, th);
}

Cx Segment::velocity(double s) const {
  if (!is_arc) return b - a;
  double th = t0 + s * (t1 - t0);
  return kI * (t1 - t0) * std::polar(radius, th);
}

std::vector<LoopPath> build_loops(const std::vector<Cx>& singularities, Cx base,
                                  const IntegratorConfig& cfg) {
  if (singularities.empty()) fail(ErrorCode::InvalidArgument, "build_loops: no singularities");
  double clearance = effective_clearance(singularities, base, cfg);
  if (singularities.size() >= 2 && clearance >= 0.5 * min_pairwise_distance(singularities))
    fail(ErrorCode::InvalidArgument, "build_loops: clearance too large for the configuration");
  for (Cx a : singularities)
    if (std::abs(base - a) < 2.0 * clearance)
      fail(ErrorCode::InvalidArgument, "build_loops: base point too close to a singularity");

  std::vector<LoopPath> loops;
  loops.reserve(singularities.size());
  for (std::size_t k = 0; k < singularities.size(); ++k) {
    Cx a = singularities[k];
    Cx dir = (base - a) / std::abs(base - a);
    Cx entry = a + dir * clearance;
    std::vector<Segment> corridor;
    append_clear_line(corridor, base, entry, singularities, clearance, 8);

    LoopPath lp;
    lp.base = base;
    lp.target = int(k);
    lp.segments = corridor;
    double phi0 = std::arg(entry - a);
    lp.segments.push_back(Segment::arc(a, clearance, phi0, phi0 + 2.0 * kPi));
    for (auto it = corridor.rbegin(); it != corridor.rend(); ++it)
      lp.segments.push_back(Segment::line(it->b, it->a));
    loops.push_back(std::move(lp));
  }
  return loops;
}

Mat transport(const MatrixField& field, const std::vector<Segment>& segments,
              const Mat& y0, const IntegratorConfig& cfg) {
  if (y0.rows() != field.n)
    fail(ErrorCode::InvalidArgument, "transport: initial value has the wrong size");

  // Dormand-Prince 5(4) pair with first-same-as-last reuse.
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  Mat y = y0;
  const int n = field.n;
  for (const Segment& seg : segments) {
    auto rhs = [&](double s, const Mat& m) -> Mat {
      return seg.velocity(s) * (field.at(seg.point(s)) * m);
    };
    double s = 0.0;
    double h = std::min(cfg.max_step, 0.1);
    double errprev = 1.0;
    Mat k1 = rhs(0.0, y);
    long steps = 0;
    while (s < 1.0) {
      if (++steps > 200000) fail(ErrorCode::StepUnderflow, "transport: step budget exhausted");
      h = std::min(h, 1.0 - s);
      if (h < 1e-14) fail(ErrorCode::StepUnderflow, "transport: step size underflow");
      Mat k2 = rhs(s + c2 * h, y + h * (a21 * k1));
      Mat k3 = rhs(s + c3 * h, y + h * (a31 * k1 + a32 * k2));
      Mat k4 = rhs(s + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
      Mat k5 = rhs(s + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
      Mat k6 = rhs(s + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
      Mat ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      Mat k7 = rhs(s + h, ynew);
      Mat diff = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      double err = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double sc = cfg.abs_tol +
                      cfg.rel_tol * std::max(std::abs(y(i, j)), std::abs(ynew(i, j)));
          double q = std::abs(diff(i, j)) / sc;
          err += q * q;
        }
      err = std::sqrt(err / double(n * n));
      if (err <= 1.0) {
        s += h;
        y = std::move(ynew);
        k1 = std::move(k7);
        double safe = std::max(err, 1e-10);
        double fac = 0.9 * std::pow(safe, -0.7 / 5.0) * std::pow(errprev, 0.4 / 5.0);
        errprev = safe;
        h = std::min(h * std::clamp(fac, 0.2, 5.0), cfg.max_step);
      } else {
        h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
      }
    }
  }
  return y;
}

Mat transport(const MatrixField& field, const LoopPath& path, const Mat& y0,
              const IntegratorConfig& cfg) {
  return transport(field, path.segments, y0, cfg);
}

Mat transport(const RationalSystem& sys, const LoopPath& path, const Mat& y0,
              const IntegratorConfig& cfg) {
  return transport(field_of(sys), path.segments, y0, cfg);
}

namespace {

// Pins the orientation convention: counterclockwise loop transport of a
// scalar residue eps multiplies by exp(2 pi i eps), so chi = T^{-1} equals
// exp(-2 pi i eps). Runs once per process.
void ensure_orientation_convention() {
  static const bool ok = [] {
    std::vector<Cx> pts{Cx(1.0, 0.0)};
    std::vector<Cx> eps{Cx(0.3, 0.0)};
    MatrixField f = scalar_field(pts, eps);
    IntegratorConfig cfg;
    std::vector<LoopPath> loops = build_loops(pts, Cx(0.0, 0.0), cfg);
    Mat t = transport(f, loops[0], Mat::Identity(1, 1), cfg);
    Cx chi = Cx(1.0, 0.0) / t(0, 0);
    return std::abs(chi - std::exp(-2.0 * kPi * kI * 0.3)) < 1e-6;
  }();
  if (!ok) fail(ErrorCode::NonConvergence, "orientation convention self-test failed");
}

}  // namespace

MonodromyTuple monodromy(const MatrixField& field, const std::vector<LoopPath>& loops,
                         const IntegratorConfig& cfg) {
  ensure_orientation_convention();
  MonodromyTuple out;
  out.base = loops.empty() ? Cx(0.0, 0.0) : loops[0].base;
  out.loops = loops;
  Mat eye = Mat::Identity(field.n, field.n);
  for (const LoopPath& lp : loops) {
    Mat t = transport(field, lp, eye, cfg);
    out.chis.push_back(inverse_checked(t, "loop transport"));
  }
  Mat prod = eye;
  for (const Mat& chi : out.chis) prod = prod * chi;
  out.product_defect = (prod - eye).norm();
  return out;
}

MonodromyTuple monodromy(const RationalSystem& sys, Cx base, const IntegratorConfig& cfg) {
  return monodromy(field_of(sys), build_loops(sys.singularities, base, cfg), cfg);
}

MatrixField exterior_field(const RationalSystem& sys) {
  const int n = sys.n;
  const int m = sys.m();
  if (m < 1) fail(ErrorCode::InvalidArgument, "exterior_field: no singularities");

  // P(w) = prod_k (1 - a_k w); the outer-coordinate denominator.
  Poly pw = Poly::constant(Cx(1.0, 0.0));
  for (Cx a : sys.singularities) pw *= Poly(std::vector<Cx>{Cx(1.0, 0.0), -a});
  // (1 - P(w)) / w, a polynomial since P(0) = 1.
  std::vector<Cx> qc;
  for (int r = 1; r <= pw.degree(); ++r) qc.push_back(-pw.c[std::size_t(r)]);
  Poly qw(std::move(qc));

  auto reversal = [](const Poly& q, long long length) {
    if (length < 0) return Poly();
    std::vector<Cx> c(std::size_t(length) + 1, Cx(0.0, 0.0));
    for (long long r = 0; r <= length; ++r) {
      long long idx = length - r;
      if (idx <= q.degree()) c[std::size_t(r)] = q.c[std::size_t(idx)];
    }
    return Poly(std::move(c));
  };

  std::vector<std::vector<Poly>> num;
  num.assign(std::size_t(n), std::vector<Poly>(std::size_t(n)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) {
        Poly tail = sys.numerators[std::size_t(i)][std::size_t(i)] -
                    Poly::monomial(m - 1, Cx(double(sys.indices[std::size_t(i)]), 0.0));
        num[std::size_t(i)][std::size_t(i)] =
            Cx(double(sys.indices[std::size_t(i)]), 0.0) * qw + reversal(tail, m - 2);
      } else {
        long long bound = m - 2 + sys.indices[std::size_t(i)] - sys.indices[std::size_t(j)];
        num[std::size_t(i)][std::size_t(j)] =
            reversal(sys.numerators[std::size_t(i)][std::size_t(j)], bound);
      }
    }

  MatrixField f;
  f.n = n;
  f.singularities.reserve(std::size_t(m));
  for (Cx a : sys.singularities) f.singularities.push_back(Cx(1.0, 0.0) / a);
  f.at = [n, pw, num](Cx w) {
    Cx p = pw.eval(w);
    Mat b(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) b(i, j) = -num[std::size_t(i)][std::size_t(j)].eval(w) / p;
    return b;
  };
  return f;
}

namespace {

struct ArcGrid {
  std::vector<double> jump_angles;          // sorted ascending in [0, 2 pi)
  std::vector<std::size_t> order;           // original singularity index per jump
  std::vector<std::pair<double, double>> arcs;  // (start, end), end may exceed 2 pi
};

ArcGrid arc_grid(const std::vector<Cx>& sing) {
  const std::size_t m = sing.size();
  ArcGrid g;
  g.order.resize(m);
  std::iota(g.order.begin(), g.order.end(), std::size_t(0));
  auto angle = [&](std::size_t k) {
    double th = std::arg(sing[k]);
    if (th < 0.0) th += 2.0 * kPi;
    return th;
  };
  std::sort(g.order.begin(), g.order.end(),
            [&](std::size_t x, std::size_t y) { return angle(x) < angle(y); });
  for (std::size_t k : g.order) g.jump_angles.push_back(angle(k));
  for (std::size_t k = 0; k < m; ++k) {
    double lo = g.jump_angles[k];
    double hi = k + 1 < m ? g.jump_angles[k + 1] : g.jump_angles[0] + 2.0 * kPi;
    g.arcs.emplace_back(lo, hi);
  }
  return g;
}

Mat middle_power(const std::vector<long long>& powers, Cx z) {
  Mat lam = Mat::Zero(Eigen::Index(powers.size()), Eigen::Index(powers.size()));
  for (std::size_t i = 0; i < powers.size(); ++i)
    lam(Eigen::Index(i), Eigen::Index(i)) = cx_ipow(z, powers[i]);
  return lam;
}

void check_symbol_preconditions(const RationalSystem& sys, double p) {
  if (p <= 1.0) fail(ErrorCode::InvalidArgument, "exponent p must exceed 1");
  std::vector<std::string> bad = validate_standard_form(sys);
  if (!bad.empty())
    fail(ErrorCode::InvalidArgument, "system not in standard form: " + bad.front());
  for (Cx a : sys.singularities)
    if (std::abs(std::abs(a) - 1.0) > 1e-9)
      fail(ErrorCode::InvalidArgument, "singularities must lie on the unit circle");
  const double lo = strip_lo(p);
  for (const Mat& r : residues(sys))
    for (Cx v : eigen(r).values_with_multiplicity())
      if (v.real() <= lo + 1e-12 || v.real() >= lo + 1.0 - 1e-12)
        fail(ErrorCode::InvalidArgument, "residue exponents leave the admissible strip");
}

}  // namespace

PiecewiseSymbol symbol_from_system(const RationalSystem& sys, double p,
                                   const IntegratorConfig& cfg) {
  check_symbol_preconditions(sys, p);
  const int n = sys.n;
  MatrixField inner = field_of(sys);
  MatrixField outer = exterior_field(sys);
  ArcGrid grid = arc_grid(sys.singularities);

  auto boundary_value = [&](Cx z) {
    Mat y1 = transport(inner, {Segment::line(Cx(0.0, 0.0), z)}, Mat::Identity(n, n), cfg);
    Mat z2 = transport(outer, {Segment::line(Cx(0.0, 0.0), Cx(1.0, 0.0) / z)},
                       Mat::Identity(n, n), cfg);
    return Mat(inverse_checked(y1, "inner solution") * middle_power(sys.indices, z) * z2);
  };

  const int samples = 8;
  PiecewiseSymbol symbol;
  symbol.n = n;
  symbol.p = p;
  symbol.jump_angles = grid.jump_angles;
  for (auto [lo, hi] : grid.arcs) {
    double width = hi - lo;
    double mid = 0.5 * (lo + hi);
    double half = 0.5 * 0.8 * width;
    std::vector<Mat> values;
    Mat mean = Mat::Zero(n, n);
    for (int j = 0; j < samples; ++j) {
      double theta = mid + half * std::cos(kPi * (2.0 * j + 1.0) / (2.0 * samples));
      Mat g = boundary_value(std::polar(1.0, theta));
      mean += g;
      values.push_back(std::move(g));
    }
    mean /= double(samples);
    double scale = 1.0 + mean.norm();
    for (const Mat& v : values)
      if ((v - mean).norm() > tol::arc_const * scale)
        fail(ErrorCode::NotConstant, "boundary quotient is not constant on an arc");
    symbol.arc_values.push_back(std::move(mean));
  }
  symbol.validate();
  return symbol;
}

FactorAssembly factor_assembly(const RationalSystem& sys, double p,
                               const IntegratorConfig& cfg) {
  FactorAssembly fa;
  fa.symbol = symbol_from_system(sys, p, cfg);
  fa.powers = sys.indices;
  const int n = sys.n;
  MatrixField inner = field_of(sys);
  MatrixField outer = exterior_field(sys);
  IntegratorConfig local = cfg;
  fa.plus = [inner, local, n](Cx z) {
    Mat y1 = transport(inner, {Segment::line(Cx(0.0, 0.0), z)}, Mat::Identity(n, n), local);
    return Mat(inverse_checked(y1, "inner solution"));
  };
  fa.minus = [outer, local, n](Cx z) {
    return transport(outer, {Segment::line(Cx(0.0, 0.0), Cx(1.0, 0.0) / z)},
                     Mat::Identity(n, n), local);
  };

  ArcGrid grid = arc_grid(sys.singularities);
  const int samples = 64;
  double residual = 0.0;
  for (std::size_t k = 0; k < grid.arcs.size(); ++k) {
    auto [lo, hi] = grid.arcs[k];
    double width = hi - lo;
    for (int j = 0; j < samples; ++j) {
      double theta = lo + width * (0.1 + 0.8 * (j + 0.5) / samples);
      Cx z = std::polar(1.0, theta);
      Mat g = fa.plus(z) * middle_power(fa.powers, z) * fa.minus(z);
      residual = std::max(residual, (g - fa.symbol.arc_values[k]).norm());
    }
  }
  fa.residual = residual;
  return fa;
}

bool invariant_subspace_propagation_check(const RationalSystem& sys,
                                          const std::vector<LoopPath>& loops,
                                          const IntegratorConfig& cfg, double rel_tol) {
  const int n = sys.n;
  std::vector<int> dims;
  for (int d = 1; d < n; ++d) {
    bool zero = true;
    for (int i = d; i < n && zero; ++i)
      for (int j = 0; j < d && zero; ++j)
        if (!sys.numerators[std::size_t(i)][std::size_t(j)].is_zero()) zero = false;
    if (zero) dims.push_back(d);
  }
  if (dims.empty()) return true;
  MonodromyTuple tuple = monodromy(field_of(sys), loops, cfg);
  for (const Mat& chi : tuple.chis) {
    double scale = rel_tol * (1.0 + chi.norm());
    for (int d : dims)
      if (chi.bottomLeftCorner(n - d, d).norm() > scale) return false;
  }
  return true;
}

}  // namespace pcfactor
