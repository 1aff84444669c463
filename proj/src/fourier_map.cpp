#include "torusflow/fourier_map.hpp"

#include <algorithm>
#include <cmath>

#include "torusflow/errors.hpp"

namespace torusflow {

namespace {

std::vector<double> weights(const Lattice& lat, double eps) {
  std::vector<double> w(lat.size());
  for (std::size_t i = 0; i < lat.size(); ++i) {
    w[i] = std::exp(kTwoPi * l1_norm(lat[i], lat.dim()) * eps);
  }
  return w;
}

}  // namespace

FourierMap::FourierMap(std::shared_ptr<const Lattice> lattice, int components, bool real)
    : lattice_(std::move(lattice)), components_(components), real_(real) {
  require(components_ >= 1 && components_ <= 2, "component count must be 1 or 2");
  coeffs_.assign(lattice_->size() * components_, Complex{});
}

FourierMap FourierMap::zero(int dim, int components, int order, bool real) {
  return FourierMap(Lattice::get(dim, order), components, real);
}

FourierMap FourierMap::constant(int dim, int order, std::span<const double> value) {
  FourierMap f = zero(dim, static_cast<int>(value.size()), order);
  for (int i = 0; i < f.components(); ++i) f.set_coeff({0, 0}, i, value[i]);
  return f;
}

Complex FourierMap::coeff(const Index& k, int component) const {
  const long pos = lattice_->find(k);
  return pos < 0 ? Complex{} : raw(static_cast<std::size_t>(pos), component);
}

void FourierMap::set_coeff(const Index& k, int component, Complex c) {
  const long pos = lattice_->find(k);
  require(pos >= 0, "mode outside truncation");
  require(component >= 0 && component < components_, "component out of range");
  const auto i = static_cast<std::size_t>(pos);
  if (real_) {
    const std::size_t j = lattice_->mirror(i);
    if (i == j) c = Complex(c.real(), 0.0);
    raw(j, component) = std::conj(c);
  }
  raw(i, component) = c;
}

CPoint FourierMap::eval(const CPoint& z) const {
  CPoint out{};
  const Lattice& lat = *lattice_;
  const int n = lat.order();
  const int d = lat.dim();
  // Powers exp(2 pi i k z_j) for k in [-n, n].
  std::array<std::vector<Complex>, 2> pw;
  for (int j = 0; j < d; ++j) {
    pw[j].resize(2 * n + 1);
    const Complex base = std::exp(Complex(0.0, kTwoPi) * z[j]);
    const Complex inv = 1.0 / base;
    pw[j][n] = 1.0;
    for (int k = 1; k <= n; ++k) {
      pw[j][n + k] = pw[j][n + k - 1] * base;
      pw[j][n - k] = pw[j][n - k + 1] * inv;
    }
  }
  for (std::size_t m = 0; m < lat.size(); ++m) {
    const Index& k = lat[m];
    Complex e = pw[0][n + k[0]];
    if (d == 2) e *= pw[1][n + k[1]];
    for (int i = 0; i < components_; ++i) out[i] += raw(m, i) * e;
  }
  return out;
}

RPoint FourierMap::eval_real(const RPoint& x) const {
  const CPoint v = eval({Complex(x[0]), Complex(x[1])});
  return {v[0].real(), v[1].real()};
}

double FourierMap::nu(double eps) const {
  const auto w = weights(*lattice_, eps);
  double s = 0.0;
  for (std::size_t m = 0; m < w.size(); ++m) {
    double c = 0.0;
    for (int i = 0; i < components_; ++i) c = std::max(c, std::sqrt(std::norm(raw(m, i))));
    s += c * w[m];
  }
  return s;
}

double FourierMap::mu(double eps) const {
  const auto w = weights(*lattice_, eps);
  double best = 0.0;
  for (int i = 0; i < components_; ++i) {
    double s = 0.0;
    for (std::size_t m = 0; m < w.size(); ++m) {
      s += kTwoPi * l1_norm((*lattice_)[m], dim()) * std::sqrt(std::norm(raw(m, i))) * w[m];
    }
    best = std::max(best, s);
  }
  return best;
}

double FourierMap::beta(double eps) const { return std::max(nu(eps), mu(eps)); }

NormReport FourierMap::norms(double eps) const {
  NormReport r;
  r.eps = eps;
  r.nu = nu(eps);
  r.mu = mu(eps);
  r.beta = std::max(r.nu, r.mu);
  const auto w = weights(*lattice_, eps);
  double tail = 0.0;
  for (std::size_t m = 0; m < w.size(); ++m) {
    if (2 * l1_norm((*lattice_)[m], dim()) <= order()) continue;
    double c = 0.0;
    for (int i = 0; i < components_; ++i) c = std::max(c, std::sqrt(std::norm(raw(m, i))));
    tail += c * w[m];
  }
  r.tail_ratio = r.nu > 0.0 ? tail / r.nu : 0.0;
  return r;
}

double FourierMap::max_abs_coeff() const {
  double m = 0.0;
  for (const Complex& c : coeffs_) m = std::max(m, std::abs(c));
  return m;
}

FourierMap FourierMap::derivative(int j) const {
  require(j >= 0 && j < dim(), "derivative direction out of range");
  FourierMap out(lattice_, components_, real_);
  for (std::size_t m = 0; m < lattice_->size(); ++m) {
    const Complex factor(0.0, kTwoPi * (*lattice_)[m][j]);
    for (int i = 0; i < components_; ++i) out.raw(m, i) = factor * raw(m, i);
  }
  return out;
}

FourierMap FourierMap::component(int i) const {
  require(i >= 0 && i < components_, "component out of range");
  FourierMap out(lattice_, 1, real_);
  for (std::size_t m = 0; m < lattice_->size(); ++m) out.raw(m, 0) = raw(m, i);
  return out;
}

FourierMap FourierMap::stack(std::span<const FourierMap> parts) {
  require(!parts.empty() && parts.size() <= 2, "can stack one or two components");
  FourierMap out(parts[0].lattice_, static_cast<int>(parts.size()), true);
  for (std::size_t p = 0; p < parts.size(); ++p) {
    require(parts[p].lattice_ == out.lattice_ && parts[p].components_ == 1,
            "stacked parts must be scalar maps on one lattice");
    out.real_ = out.real_ && parts[p].real_;
    for (std::size_t m = 0; m < out.mode_count(); ++m) {
      out.raw(m, static_cast<int>(p)) = parts[p].raw(m, 0);
    }
  }
  return out;
}

FourierMap FourierMap::translated(const RPoint& shift) const {
  FourierMap out = *this;
  for (std::size_t m = 0; m < lattice_->size(); ++m) {
    const Index& k = (*lattice_)[m];
    double phase = k[0] * shift[0];
    if (dim() == 2) phase += k[1] * shift[1];
    const Complex e = std::polar(1.0, kTwoPi * phase);
    for (int i = 0; i < components_; ++i) out.raw(m, i) *= e;
  }
  return out;
}

FourierMap FourierMap::with_order(int new_order) const {
  if (new_order == order()) return *this;
  FourierMap out(Lattice::get(dim(), new_order), components_, real_);
  const Lattice& lat = out.lattice();
  for (std::size_t m = 0; m < lat.size(); ++m) {
    const long src = lattice_->find(lat[m]);
    if (src < 0) continue;
    for (int i = 0; i < components_; ++i) out.raw(m, i) = raw(static_cast<std::size_t>(src), i);
  }
  return out;
}

FourierMap FourierMap::as_complex() const {
  FourierMap out = *this;
  out.real_ = false;
  return out;
}

double FourierMap::reality_defect() const {
  double d = 0.0;
  for (std::size_t m = 0; m < lattice_->size(); ++m) {
    const std::size_t j = lattice_->mirror(m);
    for (int i = 0; i < components_; ++i) {
      d = std::max(d, std::abs(raw(j, i) - std::conj(raw(m, i))));
    }
  }
  return d;
}

FourierMap FourierMap::symmetrized() const {
  FourierMap out(lattice_, components_, true);
  for (std::size_t m = 0; m < lattice_->size(); ++m) {
    const std::size_t j = lattice_->mirror(m);
    for (int i = 0; i < components_; ++i) {
      out.raw(m, i) = 0.5 * (raw(m, i) + std::conj(raw(j, i)));
    }
  }
  return out;
}

bool FourierMap::same_shape(const FourierMap& other) const {
  return lattice_ == other.lattice_ && components_ == other.components_;
}

FourierMap& FourierMap::operator+=(const FourierMap& other) {
  require(same_shape(other), "adding maps of different shape");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
  real_ = real_ && other.real_;
  return *this;
}

FourierMap& FourierMap::operator-=(const FourierMap& other) {
  require(same_shape(other), "subtracting maps of different shape");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= other.coeffs_[i];
  real_ = real_ && other.real_;
  return *this;
}

FourierMap& FourierMap::operator*=(double s) {
  for (Complex& c : coeffs_) c *= s;
  return *this;
}

FourierMap FourierMap::operator-() const {
  FourierMap out = *this;
  out *= -1.0;
  return out;
}

FourierMap FourierMap::scaled(Complex s) const {
  FourierMap out = *this;
  for (Complex& c : out.coeffs_) c *= s;
  if (s.imag() != 0.0) out.real_ = false;
  return out;
}

double coefficient_distance(const FourierMap& a, const FourierMap& b) {
  require(a.dim() == b.dim() && a.components() == b.components(),
          "distance between maps of different shape");
  const FourierMap& big = a.order() >= b.order() ? a : b;
  const FourierMap& small = a.order() >= b.order() ? b : a;
  double d = 0.0;
  for (std::size_t m = 0; m < big.mode_count(); ++m) {
    const Index& k = big.lattice()[m];
    for (int i = 0; i < big.components(); ++i) {
      d = std::max(d, std::abs(big.raw(m, i) - small.coeff(k, i)));
    }
  }
  return d;
}

FourierMap multiply(const FourierMap& a, const FourierMap& b) {
  require(a.dim() == b.dim() && a.components() == 1 && b.components() == 1,
          "multiply expects scalar maps of one dimension");
  FourierMap out = FourierMap::zero(a.dim(), 1, a.order() + b.order(), a.is_real() && b.is_real());
  const Lattice& la = a.lattice();
  const Lattice& lb = b.lattice();
  const Lattice& lo = out.lattice();
  for (std::size_t i = 0; i < la.size(); ++i) {
    const Complex ca = a.raw(i, 0);
    if (ca == Complex{}) continue;
    for (std::size_t j = 0; j < lb.size(); ++j) {
      const Index k{la[i][0] + lb[j][0], la[i][1] + lb[j][1]};
      out.raw(static_cast<std::size_t>(lo.find(k)), 0) += ca * b.raw(j, 0);
    }
  }
  return out;
}

Restriction restrict_to(const FourierMap& f, double from_eps, double to_eps) {
  require(to_eps < from_eps, "restriction needs a thinner target strip");
  require(to_eps >= 0.0, "strip half-width must be nonnegative");
  Restriction r;
  r.map = f;
  r.at_target = f.norms(to_eps);
  const double gap = from_eps - to_eps;
  const Lattice& lat = f.lattice();
  r.decay.resize(lat.size());
  for (std::size_t m = 0; m < lat.size(); ++m) {
    r.decay[m] = std::exp(-kTwoPi * l1_norm(lat[m], lat.dim()) * gap);
  }
  // sup over all integers n >= 0 of 2 pi n exp(-2 pi n gap); the continuous
  // maximiser sits at n = 1 / (2 pi gap).
  const int peak = static_cast<int>(std::ceil(1.0 / (kTwoPi * gap))) + 1;
  for (int n = 0; n <= std::max(peak, f.order()); ++n) {
    r.max_derivative_gain = std::max(r.max_derivative_gain, kTwoPi * n * std::exp(-kTwoPi * n * gap));
  }
  return r;
}

}  // namespace torusflow
