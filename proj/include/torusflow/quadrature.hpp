#pragma once

#include <vector>

namespace torusflow {

/// Gauss-Legendre rule on [0, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussRule gauss_legendre(int q);

/// A[l][i] = integral over [0, nodes[l]] of the i-th Lagrange basis polynomial
/// through `nodes`. Row sums equal nodes[l].
std::vector<std::vector<double>> integration_matrix(const std::vector<double>& nodes);

/// Barycentric Lagrange interpolation through fixed abscissae.
class Interpolator {
 public:
  explicit Interpolator(std::vector<double> abscissae);

  const std::vector<double>& abscissae() const { return x_; }
  /// Weights l_i(t) such that p(t) = sum_i l_i(t) y_i.
  std::vector<double> basis(double t) const;
  /// Weights l_i'(t).
  std::vector<double> basis_derivative(double t) const;

 private:
  std::vector<double> x_;
  std::vector<double> w_;
};

/// M with c_j = sum_i M[j][i] y_i the ascending monomial coefficients (in the
/// local variable s) of the polynomial of degree < n through (s_i, y_i).
std::vector<std::vector<double>> monomial_fit_matrix(const std::vector<double>& s);

}  // namespace torusflow
