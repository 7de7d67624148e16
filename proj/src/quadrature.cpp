#include "varflow/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace varflow {

namespace {

/// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_n.
/// Standard construction; converges to machine precision in a few steps.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Chebyshev-style initial guess for the i-th root.
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      // Evaluate P_n(z) and P_n'(z) by the three-term recurrence.
      double p0 = 1.0, p1 = 0.0;
      for (int k = 0; k < n; ++k) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k + 1.0) * z * p1 - k * p2) / (k + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
}

/// Gauss-Legendre on [0,1].
void gauss_legendre_01(int n, std::vector<double>& x, std::vector<double>& w) {
  gauss_legendre(n, x, w);
  for (int i = 0; i < n; ++i) {
    x[i] = 0.5 * (x[i] + 1.0);
    w[i] *= 0.5;
  }
}

/// Appends the three cyclic permutations of the barycentric point
/// (1-2a, a, a) mapped onto the reference triangle, each with weight w
/// (already scaled by the reference area 1/2).
void push_group3(QuadRule& rule, double a, double w) {
  const double b = 1.0 - 2.0 * a;
  rule.points.push_back({b, a});
  rule.points.push_back({a, b});
  rule.points.push_back({a, a});
  for (int i = 0; i < 3; ++i) rule.weights.push_back(w);
}

/// Appends the six permutations of the barycentric point (a, b, 1-a-b).
void push_group6(QuadRule& rule, double a, double b, double w) {
  const double c = 1.0 - a - b;
  const double xs[6] = {a, b, a, c, b, c};
  const double ys[6] = {b, a, c, a, c, b};
  for (int i = 0; i < 6; ++i) {
    rule.points.push_back({xs[i], ys[i]});
    rule.weights.push_back(w);
  }
}

/// Symmetric positive-weight rules on the reference triangle for low degree.
/// Returns an empty rule if no table is provided for the requested degree.
QuadRule symmetric_triangle_rule(int degree) {
  QuadRule rule;
  rule.degree = degree;
  switch (degree) {
    case 0:
    case 1:
      rule.points.push_back({1.0 / 3.0, 1.0 / 3.0});
      rule.weights.push_back(0.5);
      break;
    case 2:
      push_group3(rule, 1.0 / 6.0, 1.0 / 6.0);
      break;
    case 3:
    case 4:
      // Six-point degree-4 rule (two three-point orbits); the classical
      // four-point degree-3 rule has a negative centroid weight, so degree-3
      // requests share this table to keep all weights positive.
      push_group3(rule, 0.445948490915965, 0.5 * 0.223381589678011);
      push_group3(rule, 0.091576213509771, 0.5 * 0.109951743655322);
      break;
    case 5: {
      // Seven-point degree-5 rule in closed form.
      const double s = std::sqrt(15.0);
      rule.points.push_back({1.0 / 3.0, 1.0 / 3.0});
      rule.weights.push_back(0.5 * 9.0 / 40.0);
      push_group3(rule, (6.0 + s) / 21.0, 0.5 * (155.0 + s) / 1200.0);
      push_group3(rule, (6.0 - s) / 21.0, 0.5 * (155.0 - s) / 1200.0);
      break;
    }
    case 6:
      // Twelve-point degree-6 rule (two three-point orbits, one six-point).
      push_group3(rule, 0.249286745170910, 0.5 * 0.116786275726379);
      push_group3(rule, 0.063089014491502, 0.5 * 0.050844906370207);
      push_group6(rule, 0.310352451033785, 0.053145049844816,
                  0.5 * 0.082851075618374);
      break;
    default:
      rule.points.clear();
      rule.weights.clear();
      break;
  }
  return rule;
}

}  // namespace

QuadRule triangle_rule(int degree) {
  if (degree < 0 || degree > kMaxQuadDegree)
    throw std::invalid_argument("triangle_rule: degree must be in [0, " +
                                std::to_string(kMaxQuadDegree) + "]");

  // Symmetric positive-weight rules where tabulated (degree <= 6); the
  // Duffy tensor construction below covers the remaining degrees.
  if (degree <= 6) return symmetric_triangle_rule(degree);

  // Duffy collapse: (a,b) in [0,1]^2 -> (x,y) = (a(1-b), b), Jacobian (1-b).
  // A degree-d polynomial pulls back to degree <= d in a and, including the
  // Jacobian factor, degree <= d+1 in b.
  const int na = (degree + 2) / 2;      // 2*na - 1 >= degree
  const int nb = (degree + 3) / 2;      // 2*nb - 1 >= degree + 1
  std::vector<double> xa, wa, xb, wb;
  gauss_legendre_01(std::max(na, 1), xa, wa);
  gauss_legendre_01(std::max(nb, 1), xb, wb);

  QuadRule rule;
  rule.degree = degree;
  rule.points.reserve(xa.size() * xb.size());
  rule.weights.reserve(xa.size() * xb.size());
  for (size_t j = 0; j < xb.size(); ++j) {
    for (size_t i = 0; i < xa.size(); ++i) {
      const double a = xa[i], b = xb[j];
      rule.points.push_back({a * (1.0 - b), b});
      rule.weights.push_back(wa[i] * wb[j] * (1.0 - b));
    }
  }
  return rule;
}

EdgeRule edge_rule(int degree) {
  if (degree < 0 || degree > kMaxQuadDegree)
    throw std::invalid_argument("edge_rule: degree must be in [0, " +
                                std::to_string(kMaxQuadDegree) + "]");
  const int n = std::max((degree + 2) / 2, 1);  // 2n - 1 >= degree
  EdgeRule rule;
  rule.degree = degree;
  gauss_legendre_01(n, rule.points, rule.weights);
  return rule;
}

double reference_triangle_monomial_integral(int a, int b) {
  // a! b! / (a+b+2)! computed stably as a product of ratios.
  double val = 1.0;
  int denom = 1;
  for (int k = 1; k <= a; ++k) val *= static_cast<double>(k) / (denom++);
  for (int k = 1; k <= b; ++k) val *= static_cast<double>(k) / (denom++);
  while (denom <= a + b + 2) val /= (denom++);
  return val;
}

bool triangle_rule_is_exact(const QuadRule& rule, int degree, double tol, std::string* detail) {
  for (int d = 0; d <= degree; ++d) {
    for (int a = 0; a <= d; ++a) {
      const int b = d - a;
      double sum = 0.0;
      for (int q = 0; q < rule.size(); ++q)
        sum += rule.weights[q] * std::pow(rule.points[q].x, a) * std::pow(rule.points[q].y, b);
      const double exact = reference_triangle_monomial_integral(a, b);
      if (std::abs(sum - exact) > tol) {
        if (detail)
          *detail = "monomial x^" + std::to_string(a) + " y^" + std::to_string(b) +
                    ": quadrature " + std::to_string(sum) + " vs exact " + std::to_string(exact);
        return false;
      }
    }
  }
  return true;
}

bool edge_rule_is_exact(const EdgeRule& rule, int degree, double tol, std::string* detail) {
  for (int k = 0; k <= degree; ++k) {
    double sum = 0.0;
    for (int q = 0; q < rule.size(); ++q) sum += rule.weights[q] * std::pow(rule.points[q], k);
    const double exact = 1.0 / (k + 1);
    if (std::abs(sum - exact) > tol) {
      if (detail)
        *detail = "monomial t^" + std::to_string(k) + ": quadrature " + std::to_string(sum) +
                  " vs exact " + std::to_string(exact);
      return false;
    }
  }
  return true;
}

}  // namespace varflow
