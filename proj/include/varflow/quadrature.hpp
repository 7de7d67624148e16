#pragma once

#include <string>
#include <vector>

#include "varflow/geometry.hpp"

namespace varflow {

/// Quadrature rule on the reference triangle {(0,0),(1,0),(0,1)}.
/// Weights are positive, points interior, and sum(weights) = 1/2.
struct QuadRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
  int degree = -1;  ///< total polynomial degree integrated exactly

  int size() const { return static_cast<int>(points.size()); }
};

/// Quadrature rule on the reference segment [0,1] (Gauss-Legendre).
struct EdgeRule {
  std::vector<double> points;
  std::vector<double> weights;
  int degree = -1;

  int size() const { return static_cast<int>(points.size()); }
};

/// Maximum polynomial degree the module contracts to integrate exactly.
inline constexpr int kMaxQuadDegree = 12;

/// Triangle rule exact for all polynomials of total degree <= degree.
/// Symmetric positive-weight point sets up to degree 6; a tensor
/// Gauss-Legendre rule collapsed onto the triangle (Duffy transform) above
/// that, so exactness is inherited from the 1D rules.  Every rule is checked
/// against monomial integrals by the self-test suite.
/// Throws std::invalid_argument outside [0, kMaxQuadDegree].
QuadRule triangle_rule(int degree);

/// Gauss-Legendre rule on [0,1] exact for degree <= degree.
EdgeRule edge_rule(int degree);

/// Exact integral of x^a y^b over the reference triangle: a! b! / (a+b+2)!.
double reference_triangle_monomial_integral(int a, int b);

/// Verify a triangle rule integrates every monomial of total degree <= degree
/// to within tol (absolute; the integrals are all <= 1/2). Used both by the
/// self-checks and by fault-injection tests. Optionally reports the first
/// failing monomial.
bool triangle_rule_is_exact(const QuadRule& rule, int degree, double tol = 1e-14,
                            std::string* detail = nullptr);

/// Same for an edge rule against 1/(k+1) on [0,1].
bool edge_rule_is_exact(const EdgeRule& rule, int degree, double tol = 1e-14,
                        std::string* detail = nullptr);

}  // namespace varflow
