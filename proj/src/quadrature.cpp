#include "torusflow/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "torusflow/errors.hpp"

namespace torusflow {

GaussRule gauss_legendre(int q) {
  require(q >= 1 && q <= 64, "Gauss rule size out of range");
  GaussRule rule;
  rule.nodes.resize(q);
  rule.weights.resize(q);
  for (int i = 0; i < q; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (q + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int n = 2; n <= q; ++n) {
        const double p2 = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p0) / n;
        p0 = p1;
        p1 = p2;
      }
      if (q == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = q * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Map [-1, 1] -> [0, 1], ascending.
    rule.nodes[q - 1 - i] = 0.5 * (x + 1.0);
    rule.weights[q - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

std::vector<std::vector<double>> integration_matrix(const std::vector<double>& nodes) {
  const int q = static_cast<int>(nodes.size());
  const GaussRule inner = gauss_legendre(q);  // exact for degree 2q - 1
  const Interpolator interp(nodes);
  std::vector<std::vector<double>> a(q, std::vector<double>(q, 0.0));
  for (int l = 0; l < q; ++l) {
    for (int g = 0; g < q; ++g) {
      const double s = nodes[l] * inner.nodes[g];
      const auto b = interp.basis(s);
      for (int i = 0; i < q; ++i) a[l][i] += nodes[l] * inner.weights[g] * b[i];
    }
  }
  return a;
}

Interpolator::Interpolator(std::vector<double> abscissae) : x_(std::move(abscissae)) {
  w_.assign(x_.size(), 1.0);
  for (std::size_t i = 0; i < x_.size(); ++i) {
    for (std::size_t j = 0; j < x_.size(); ++j) {
      if (i != j) w_[i] /= (x_[i] - x_[j]);
    }
  }
}

std::vector<double> Interpolator::basis(double t) const {
  std::vector<double> out(x_.size(), 0.0);
  for (std::size_t i = 0; i < x_.size(); ++i) {
    if (t == x_[i]) {
      out[i] = 1.0;
      return out;
    }
  }
  double denom = 0.0;
  for (std::size_t i = 0; i < x_.size(); ++i) {
    out[i] = w_[i] / (t - x_[i]);
    denom += out[i];
  }
  for (double& v : out) v /= denom;
  return out;
}

std::vector<double> Interpolator::basis_derivative(double t) const {
  // l_i'(t) = l_i(t) * sum_{j != i} 1 / (t - x_j), with a direct product form
  // when t hits a node.
  const std::size_t n = x_.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double prod = 1.0 / (x_[i] - x_[j]);
      for (std::size_t k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        prod *= (t - x_[k]) / (x_[i] - x_[k]);
      }
      sum += prod;
    }
    out[i] = sum;
  }
  return out;
}

std::vector<std::vector<double>> monomial_fit_matrix(const std::vector<double>& s) {
  const int n = static_cast<int>(s.size());
  double h = 0.0;
  for (double v : s) h = std::max(h, std::abs(v));
  if (h == 0.0) h = 1.0;
  // Invert the Vandermonde matrix in s / h to keep it well conditioned.
  Eigen::MatrixXd v(n, n);
  for (int i = 0; i < n; ++i) {
    double p = 1.0;
    for (int j = 0; j < n; ++j) {
      v(i, j) = p;
      p *= s[i] / h;
    }
  }
  const Eigen::MatrixXd inv = v.fullPivLu().inverse();
  std::vector<std::vector<double>> out(n, std::vector<double>(n));
  double scale = 1.0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) out[j][i] = inv(j, i) / scale;
    scale *= h;
  }
  return out;
}

}  // namespace torusflow
