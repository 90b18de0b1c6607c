#include "pcfactor/polynomial.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>

namespace pcfactor {

Poly Poly::monomial(int degree, Cx a) {
  if (degree < 0) fail(ErrorCode::InvalidArgument, "monomial degree must be >= 0");
  std::vector<Cx> c(static_cast<std::size_t>(degree) + 1, Cx(0.0, 0.0));
  c.back() = a;
  return Poly(std::move(c));
}

Cx Poly::eval(Cx z) const {
  Cx acc(0.0, 0.0);
  for (std::size_t i = c.size(); i-- > 0;) acc = acc * z + c[i];
  return acc;
}

Poly Poly::derivative() const {
  if (c.size() <= 1) return Poly();
  std::vector<Cx> d(c.size() - 1);
  for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = static_cast<double>(i) * c[i];
  return Poly(std::move(d));
}

void Poly::trim() {
  while (!c.empty() && c.back() == Cx(0.0, 0.0)) c.pop_back();
}

Poly& Poly::operator+=(const Poly& rhs) {
  if (c.size() < rhs.c.size()) c.resize(rhs.c.size(), Cx(0.0, 0.0));
  for (std::size_t i = 0; i < rhs.c.size(); ++i) c[i] += rhs.c[i];
  trim();
  return *this;
}

Poly& Poly::operator-=(const Poly& rhs) {
  if (c.size() < rhs.c.size()) c.resize(rhs.c.size(), Cx(0.0, 0.0));
  for (std::size_t i = 0; i < rhs.c.size(); ++i) c[i] -= rhs.c[i];
  trim();
  return *this;
}

Poly& Poly::operator*=(const Poly& rhs) {
  *this = *this * rhs;
  return *this;
}

Poly& Poly::operator*=(Cx s) {
  for (auto& x : c) x *= s;
  trim();
  return *this;
}

Poly operator+(Poly lhs, const Poly& rhs) {
  lhs += rhs;
  return lhs;
}

Poly operator-(Poly lhs, const Poly& rhs) {
  lhs -= rhs;
  return lhs;
}

Poly operator*(const Poly& lhs, const Poly& rhs) {
  if (lhs.is_zero() || rhs.is_zero()) return Poly();
  std::vector<Cx> out(lhs.c.size() + rhs.c.size() - 1, Cx(0.0, 0.0));
  for (std::size_t i = 0; i < lhs.c.size(); ++i)
    for (std::size_t j = 0; j < rhs.c.size(); ++j) out[i + j] += lhs.c[i] * rhs.c[j];
  return Poly(std::move(out));
}

Poly operator*(Cx s, Poly p) {
  p *= s;
  return p;
}

Poly poly_from_roots(const std::vector<Cx>& roots) {
  Poly p = Poly::constant(Cx(1.0, 0.0));
  for (Cx r : roots) p *= Poly(std::vector<Cx>{-r, Cx(1.0, 0.0)});
  return p;
}

std::vector<Cx> poly_roots(const Poly& p) {
  const int d = p.degree();
  if (d < 1) return {};
  Mat comp = Mat::Zero(d, d);
  const Cx lead = p.c.back();
  for (int i = 0; i < d; ++i) comp(0, i) = -p.c[static_cast<std::size_t>(d - 1 - i)] / lead;
  for (int i = 1; i < d; ++i) comp(i, i - 1) = Cx(1.0, 0.0);
  Eigen::ComplexEigenSolver<Mat> solver(comp, false);
  if (solver.info() != Eigen::Success)
    fail(ErrorCode::NonConvergence, "companion eigenvalue iteration failed");
  std::vector<Cx> roots(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) roots[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
  return roots;
}

Poly interpolate(const std::vector<Cx>& nodes, const std::vector<Cx>& values) {
  if (nodes.size() != values.size())
    fail(ErrorCode::InvalidArgument, "interpolation nodes/values size mismatch");
  const std::size_t n = nodes.size();
  Poly result;
  for (std::size_t k = 0; k < n; ++k) {
    Poly basis = Poly::constant(Cx(1.0, 0.0));
    Cx denom(1.0, 0.0);
    for (std::size_t l = 0; l < n; ++l) {
      if (l == k) continue;
      basis *= Poly(std::vector<Cx>{-nodes[l], Cx(1.0, 0.0)});
      denom *= nodes[k] - nodes[l];
    }
    if (denom == Cx(0.0, 0.0))
      fail(ErrorCode::ColocatedSingularities, "interpolation nodes must be distinct");
    result += (values[k] / denom) * basis;
  }
  return result;
}

}  // namespace pcfactor
