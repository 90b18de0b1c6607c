#pragma once

#include <vector>

#include "pcfactor/common.hpp"

namespace pcfactor {

// Polynomial over C in the monomial basis; c[k] multiplies z^k.
// The zero polynomial is represented by an empty coefficient vector.
struct Poly {
  std::vector<Cx> c;

  Poly() = default;
  explicit Poly(std::vector<Cx> coeffs) : c(std::move(coeffs)) { trim(); }

  static Poly constant(Cx a) { return Poly(std::vector<Cx>{a}); }
  static Poly monomial(int degree, Cx a = Cx(1.0, 0.0));

  // Degree of the zero polynomial is -1.
  int degree() const { return static_cast<int>(c.size()) - 1; }
  bool is_zero() const { return c.empty(); }

  Cx eval(Cx z) const;
  Poly derivative() const;

  // Drops trailing coefficients that are exactly zero.
  void trim();

  Poly& operator+=(const Poly& rhs);
  Poly& operator-=(const Poly& rhs);
  Poly& operator*=(const Poly& rhs);
  Poly& operator*=(Cx s);
};

Poly operator+(Poly lhs, const Poly& rhs);
Poly operator-(Poly lhs, const Poly& rhs);
Poly operator*(const Poly& lhs, const Poly& rhs);
Poly operator*(Cx s, Poly p);

// Monic polynomial with the given roots.
Poly poly_from_roots(const std::vector<Cx>& roots);

// All roots, computed as eigenvalues of the companion matrix.
std::vector<Cx> poly_roots(const Poly& p);

// Unique polynomial of degree < nodes.size() taking the given values.
// Nodes must be pairwise distinct.
Poly interpolate(const std::vector<Cx>& nodes, const std::vector<Cx>& values);

}  // namespace pcfactor
