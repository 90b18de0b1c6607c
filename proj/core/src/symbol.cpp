#include "pcfactor/symbol.hpp"

#include <algorithm>
#include <cmath>

#include "pcfactor/linalg.hpp"

namespace pcfactor {

namespace {

double wrap_angle(double theta) {
  const double two_pi = 2.0 * kPi;
  double t = std::fmod(theta, two_pi);
  if (t < 0.0) t += two_pi;
  return t;
}

// Midpoint angle of arc k.
double arc_midpoint(const PiecewiseSymbol& symbol, int k) {
  const int m = symbol.arc_count();
  const double lo = symbol.jump_angles[static_cast<std::size_t>(k)];
  const double hi = (k + 1 < m) ? symbol.jump_angles[static_cast<std::size_t>(k + 1)]
                                : symbol.jump_angles[0] + 2.0 * kPi;
  return 0.5 * (lo + hi);
}

}  // namespace

const Mat& PiecewiseSymbol::value_at_angle(double theta) const {
  const double t = wrap_angle(theta);
  const auto& angles = jump_angles;
  // Last jump angle <= t; wrap to the final arc when t precedes the first jump.
  int k = static_cast<int>(angles.size()) - 1;
  for (std::size_t i = 0; i < angles.size(); ++i) {
    if (angles[i] <= t) k = static_cast<int>(i);
    else break;
  }
  return arc_values[static_cast<std::size_t>(k)];
}

void PiecewiseSymbol::validate() const {
  if (n < 1) fail(ErrorCode::InvalidArgument, "symbol dimension must be positive");
  if (!(p > 1.0) || !std::isfinite(p))
    fail(ErrorCode::InvalidArgument, "Lebesgue exponent must satisfy 1 < p < infinity");
  if (jump_angles.empty() || jump_angles.size() != arc_values.size())
    fail(ErrorCode::InvalidArgument, "symbol needs one arc value per jump angle");
  for (std::size_t k = 0; k < jump_angles.size(); ++k) {
    const double a = jump_angles[k];
    if (!(a >= 0.0) || !(a < 2.0 * kPi))
      fail(ErrorCode::InvalidArgument, "jump angles must lie in [0, 2*pi)");
    if (k > 0 && !(a > jump_angles[k - 1]))
      fail(ErrorCode::InvalidArgument, "jump angles must be strictly increasing");
    const Mat& v = arc_values[k];
    if (v.rows() != n || v.cols() != n)
      fail(ErrorCode::InvalidArgument, "arc value has the wrong shape");
  }
}

std::vector<Mat> jump_matrices(const PiecewiseSymbol& symbol) {
  symbol.validate();
  const int m = symbol.arc_count();
  std::vector<Mat> ms(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    const Mat& before = symbol.arc_values[static_cast<std::size_t>((k - 1 + m) % m)];
    const Mat& after = symbol.arc_values[static_cast<std::size_t>(k)];
    ms[static_cast<std::size_t>(k)] =
        before * inverse_checked(after, "one-sided symbol value");
  }
  return ms;
}

PhiReport phi_criterion(const PiecewiseSymbol& symbol) {
  symbol.validate();
  PhiReport report;
  const int m = symbol.arc_count();
  for (int k = 0; k < m; ++k) {
    if (!is_invertible(symbol.arc_values[static_cast<std::size_t>(k)])) {
      report.ok = false;
      report.failures.push_back({k, Cx(0.0, 0.0), 0.0, true});
    }
  }
  if (!report.ok) return report;

  const std::vector<Mat> ms = jump_matrices(symbol);
  for (int k = 0; k < m; ++k) {
    const Spectrum spec = eigen(ms[static_cast<std::size_t>(k)]);
    for (const auto& cl : spec.clusters) {
      const double x = std::arg(cl.value) / (2.0 * kPi) + 1.0 / symbol.p;
      const double dist = std::abs(x - std::round(x));
      if (dist < tol::branch) {
        report.ok = false;
        report.failures.push_back({k, cl.value, dist, false});
      }
    }
  }
  return report;
}

DataPair data_from_jumps(const std::vector<Mat>& ms, double p) {
  if (ms.empty()) fail(ErrorCode::InvalidArgument, "empty jump tuple");
  if (!(p > 1.0) || !std::isfinite(p))
    fail(ErrorCode::InvalidArgument, "Lebesgue exponent must satisfy 1 < p < infinity");
  const int n = static_cast<int>(ms[0].rows());

  Mat product = Mat::Identity(n, n);
  for (const Mat& m : ms) {
    if (m.rows() != n || m.cols() != n)
      fail(ErrorCode::InvalidArgument, "jump matrices must share one square size");
    product = product * m;
  }
  if ((product - Mat::Identity(n, n)).norm() > 1e-6 * (1.0 + product.norm()))
    fail(ErrorCode::InvalidArgument, "ordered jump product must be the identity");

  DataPair data;
  data.n = n;
  data.p = p;
  data.ms = ms;
  const double lo = strip_lo(p);
  Cx trace_sum(0.0, 0.0);
  for (const Mat& m : ms) {
    Mat e = branch_log(m, lo);
    trace_sum += e.trace();

    const Spectrum spec = eigen(e);
    // Non-resonance: no two exponent values of one jump may differ by a
    // nonzero integer.
    for (std::size_t i = 0; i < spec.clusters.size(); ++i) {
      for (std::size_t j = i + 1; j < spec.clusters.size(); ++j) {
        const Cx diff = spec.clusters[i].value - spec.clusters[j].value;
        long long rounded = 0;
        if (std::abs(diff.imag()) < tol::resonance &&
            near_integer(diff.real(), tol::resonance, &rounded) && rounded != 0)
          fail(ErrorCode::ResonantData, "exponents of one jump differ by a nonzero integer");
      }
    }
    std::vector<double> zeta;
    for (Cx v : spec.values_with_multiplicity()) zeta.push_back(v.real());
    std::sort(zeta.rbegin(), zeta.rend());
    data.zetas.push_back(std::move(zeta));
    data.es.push_back(std::move(e));
  }

  long long kappa = 0;
  if (std::abs(trace_sum.imag()) > tol::integer_round ||
      !near_integer(trace_sum.real(), tol::integer_round, &kappa))
    fail(ErrorCode::InvalidArgument, "total index did not round to an integer");
  data.kappa = kappa;
  return data;
}

DataPair extract_data(const PiecewiseSymbol& symbol) {
  DataPair data = data_from_jumps(jump_matrices(symbol), symbol.p);
  data.n = symbol.n;
  return data;
}

namespace {

// Branch of log(z - a) analytic off the ray from a radially away from the
// origin; smooth on the closed unit disk except at a itself.
Cx log_inner(Cx z, Cx a) { return std::log(1.0 - z / a) + std::log(-a); }

}  // namespace

ScalarFactorization scalar_factorize(const PiecewiseSymbol& symbol) {
  if (symbol.n != 1)
    fail(ErrorCode::InvalidArgument, "scalar factorization requires a 1x1 symbol");
  const DataPair data = extract_data(symbol);
  const int m = symbol.arc_count();

  ScalarFactorization out;
  out.kappa = data.kappa;
  std::vector<Cx> eps(static_cast<std::size_t>(m));
  std::vector<Cx> points(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    eps[static_cast<std::size_t>(k)] = data.es[static_cast<std::size_t>(k)](0, 0);
    points[static_cast<std::size_t>(k)] = symbol.jump_point(k);
  }
  out.exponents = eps;

  auto plus_raw = [eps, points](Cx z) {
    Cx sum(0.0, 0.0);
    for (std::size_t k = 0; k < eps.size(); ++k) sum += eps[k] * log_inner(z, points[k]);
    return std::exp(-sum);
  };
  auto minus = [eps, points](Cx z) {
    Cx sum(0.0, 0.0);
    for (std::size_t k = 0; k < eps.size(); ++k) sum += eps[k] * std::log(1.0 - points[k] / z);
    return std::exp(sum);
  };

  const Cx t0 = std::polar(1.0, arc_midpoint(symbol, 0));
  const Cx lhs = symbol.arc_values[0](0, 0);
  const Cx c = lhs / (plus_raw(t0) * cx_ipow(t0, data.kappa) * minus(t0));
  out.constant = c;
  out.plus = [plus_raw, c](Cx z) { return c * plus_raw(z); };
  out.minus = minus;
  return out;
}

CommutingFactorization commuting_factorize_m2(const PiecewiseSymbol& symbol) {
  if (symbol.arc_count() != 2)
    fail(ErrorCode::InvalidArgument, "commuting factorization requires exactly two jumps");
  const DataPair data = extract_data(symbol);
  const int n = symbol.n;
  const Mat e1 = data.es[0];
  const Mat e2 = data.es[1];
  const Mat s = e1 + e2;

  const Spectrum spec = eigen(s);
  struct Slot {
    long long value;
    Mat basis;
  };
  std::vector<Slot> slots;
  for (const auto& cl : spec.clusters) {
    if (cl.geo < cl.alg)
      fail(ErrorCode::NonDiagonalizableSum,
           "sum of jump logarithms is not diagonalizable");
    long long rounded = 0;
    if (std::abs(cl.value.imag()) > tol::integer_round ||
        !near_integer(cl.value.real(), tol::integer_round, &rounded))
      fail(ErrorCode::InvalidArgument, "index eigenvalues did not round to integers");
    Mat basis = kernel_basis(s - cl.value * Mat::Identity(n, n), tol::rank_rel, 1.0 + s.norm());
    if (basis.cols() != cl.alg)
      fail(ErrorCode::NonDiagonalizableSum,
           "eigenspace dimension mismatch for the logarithm sum");
    slots.push_back({rounded, std::move(basis)});
  }
  std::sort(slots.begin(), slots.end(),
            [](const Slot& a, const Slot& b) { return a.value > b.value; });

  CommutingFactorization out;
  Mat v(n, n);
  int col = 0;
  for (const auto& slot : slots) {
    for (int j = 0; j < slot.basis.cols(); ++j) {
      v.col(col++) = slot.basis.col(j);
      out.indices.push_back(slot.value);
    }
  }
  const Mat vinv = inverse_checked(v, "index eigenbasis");
  out.index_basis = v;

  const Cx a1 = symbol.jump_point(0);
  const Cx a2 = symbol.jump_point(1);
  const std::vector<long long> idx = out.indices;

  auto hplus = [e1, e2, a1, a2](Cx z) {
    return Mat(expm(-(std::log(1.0 - z / a1) + std::log(-a1)) * e1) *
               expm(-(std::log(1.0 - z / a2) + std::log(-a2)) * e2));
  };
  auto hminus = [e1, e2, a1, a2](Cx z) {
    return Mat(expm(std::log(1.0 - a1 / z) * e1) * expm(std::log(1.0 - a2 / z) * e2));
  };
  auto lambda = [idx, n](Cx z) {
    Mat d = Mat::Zero(n, n);
    for (int j = 0; j < n; ++j) d(j, j) = cx_ipow(z, idx[static_cast<std::size_t>(j)]);
    return d;
  };

  // The raw product has the same jumps as the symbol, so their quotient is a
  // single constant, fitted on the first arc and absorbed into the minus
  // factor.
  const Cx t0 = std::polar(1.0, arc_midpoint(symbol, 0));
  const Mat f0 = hplus(t0) * v * lambda(t0) * vinv * hminus(t0);
  const Mat fit = inverse_checked(f0, "factor product at the fit point") * symbol.arc_values[0];

  out.plus = [hplus, v](Cx z) { return Mat(hplus(z) * v); };
  out.minus = [hminus, vinv, fit](Cx z) { return Mat(vinv * hminus(z) * fit); };
  return out;
}

}  // namespace pcfactor
