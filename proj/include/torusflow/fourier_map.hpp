#pragma once

#include <array>
#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "torusflow/lattice.hpp"

namespace torusflow {

using Complex = std::complex<double>;
using CPoint = std::array<Complex, 2>;
using RPoint = std::array<double, 2>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Coefficient majorants of a map on the strip {|Im z|_inf <= eps}.
struct NormReport {
  double eps = 0.0;
  double nu = 0.0;    // sum_k |c_k|_inf w_k,  w_k = exp(2 pi |k|_1 eps)
  double mu = 0.0;    // max_i sum_k 2 pi |k|_1 |c_k,i| w_k
  double beta = 0.0;  // max(nu, mu)
  double tail_ratio = 0.0;  // share of nu carried by |k|_1 > order/2
};

/// A periodic map T^dim -> C^components stored as a truncated Fourier series
/// sum_k c_k exp(2 pi i k.x) over |k|_1 <= order.
///
/// Real maps (the default) satisfy c_{-k} = conj(c_k); writes through
/// set_coeff keep the mirror coefficient in sync. Complex maps drop that
/// constraint and model elements of the complexified spaces.
class FourierMap {
 public:
  FourierMap() = default;

  static FourierMap zero(int dim, int components, int order, bool real = true);
  /// Vector field on T^dim (components == dim).
  static FourierMap field(int dim, int order) { return zero(dim, dim, order); }
  static FourierMap scalar(int dim, int order) { return zero(dim, 1, order); }
  static FourierMap constant(int dim, int order, std::span<const double> value);

  int dim() const { return lattice_ ? lattice_->dim() : 0; }
  int components() const { return components_; }
  int order() const { return lattice_ ? lattice_->order() : 0; }
  bool is_real() const { return real_; }
  bool empty() const { return !lattice_; }
  const Lattice& lattice() const { return *lattice_; }
  std::size_t mode_count() const { return lattice_ ? lattice_->size() : 0; }

  Complex coeff(const Index& k, int component) const;
  /// For real maps also writes conj(c) at -k; c_0 must then be real.
  void set_coeff(const Index& k, int component, Complex c);

  Complex& raw(std::size_t mode, int component) { return coeffs_[mode * components_ + component]; }
  Complex raw(std::size_t mode, int component) const { return coeffs_[mode * components_ + component]; }
  std::span<const Complex> data() const { return coeffs_; }

  CPoint eval(const CPoint& z) const;
  RPoint eval_real(const RPoint& x) const;

  double nu(double eps) const;
  double mu(double eps) const;
  double beta(double eps) const;
  NormReport norms(double eps) const;
  /// max_k max_i |c_k,i|
  double max_abs_coeff() const;

  /// d/dx_j, coefficients 2 pi i k_j c_k.
  FourierMap derivative(int j) const;
  FourierMap component(int i) const;
  static FourierMap stack(std::span<const FourierMap> parts);

  /// x -> f(x + shift); exact (phase multiplication).
  FourierMap translated(const RPoint& shift) const;
  /// Truncate or zero-pad to a new order.
  FourierMap with_order(int order) const;
  FourierMap as_complex() const;

  /// max over modes of |c_{-k} - conj(c_k)|.
  double reality_defect() const;
  /// Replace c_k by the average of c_k and conj(c_{-k}) and mark real.
  FourierMap symmetrized() const;

  FourierMap& operator+=(const FourierMap& other);
  FourierMap& operator-=(const FourierMap& other);
  FourierMap& operator*=(double s);
  FourierMap operator-() const;
  FourierMap scaled(Complex s) const;

  bool same_shape(const FourierMap& other) const;

 private:
  FourierMap(std::shared_ptr<const Lattice> lattice, int components, bool real);

  std::shared_ptr<const Lattice> lattice_;
  int components_ = 0;
  bool real_ = true;
  std::vector<Complex> coeffs_;
};

inline FourierMap operator+(FourierMap a, const FourierMap& b) { return a += b; }
inline FourierMap operator-(FourierMap a, const FourierMap& b) { return a -= b; }
inline FourierMap operator*(double s, FourierMap a) { return a *= s; }
inline FourierMap operator*(FourierMap a, double s) { return a *= s; }

/// max over common modes of |a_k,i - b_k,i|; missing modes count as zero.
double coefficient_distance(const FourierMap& a, const FourierMap& b);

/// Product of two scalar maps; the result has order a.order + b.order and is
/// exact (no truncation).
FourierMap multiply(const FourierMap& a, const FourierMap& b);

/// Restriction to a thinner strip. Coefficients are unchanged; the report
/// carries the majorants at the new width and the per-mode decay factors
/// exp(-2 pi |k|_1 (from - to)) that make restriction compact.
struct Restriction {
  FourierMap map;
  NormReport at_target;
  std::vector<double> decay;  // indexed like the lattice
  double max_derivative_gain = 0.0;  // sup_k 2 pi |k|_1 exp(-2 pi |k|_1 (from - to))
};
Restriction restrict_to(const FourierMap& f, double from_eps, double to_eps);

}  // namespace torusflow
