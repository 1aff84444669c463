#include "torusflow/composition.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fft.hpp"
#include "torusflow/errors.hpp"

namespace torusflow {

namespace {

bool five_smooth(int n) {
  for (int p : {2, 3, 5}) {
    while (n % p == 0) n /= p;
  }
  return n == 1;
}

int wrap(int k, int size) { return k >= 0 ? k : k + size; }

int unwrap(int j, int size) { return 2 * j < size ? j : j - size; }

void check_tail(double tail, double tol, const char* what) {
  if (tail > tol) {
    std::ostringstream msg;
    msg << what << ": spectral tail ratio " << tail << " exceeds budget " << tol;
    fail(ErrorKind::TruncationBudgetExceeded, msg.str());
  }
}

FourierMap finish(const GridValues& values, int order, bool real, double tol, const char* what) {
  Spectrum s = analyze(values, order, real);
  check_tail(s.tail_ratio, tol, what);
  return std::move(s.map);
}

}  // namespace

RPoint GridSpec::point(std::size_t p) const {
  if (dim == 1) return {static_cast<double>(p) / size, 0.0};
  return {static_cast<double>(p / size) / size, static_cast<double>(p % size) / size};
}

GridSpec composition_grid(int dim, int order, int oversample) {
  int n = std::max(1, oversample * (2 * order + 1));
  while (!five_smooth(n)) ++n;
  return GridSpec{dim, n};
}

GridValues sample(const FourierMap& f, const GridSpec& grid) {
  require(grid.dim == f.dim(), "grid dimension mismatch");
  require(grid.size >= 2 * f.order() + 1, "grid too coarse for the map's order");
  GridValues out{grid, f.components(), std::vector<Complex>(grid.points() * f.components())};
  std::vector<Complex> buf(grid.points());
  const Lattice& lat = f.lattice();
  for (int i = 0; i < f.components(); ++i) {
    std::fill(buf.begin(), buf.end(), Complex{});
    for (std::size_t m = 0; m < lat.size(); ++m) {
      const Index& k = lat[m];
      const std::size_t pos = grid.dim == 1
                                  ? wrap(k[0], grid.size)
                                  : static_cast<std::size_t>(wrap(k[0], grid.size)) * grid.size +
                                        wrap(k[1], grid.size);
      buf[pos] = f.raw(m, i);
    }
    detail::fft_inplace(buf, grid.dim, grid.size, +1);
    for (std::size_t p = 0; p < buf.size(); ++p) out.at(p, i) = buf[p];
  }
  return out;
}

Spectrum analyze(const GridValues& values, int order, bool real) {
  const GridSpec& grid = values.grid;
  require(2 * order + 1 <= grid.size, "grid too coarse for requested order");
  const std::size_t n = grid.points();
  const double scale = 1.0 / static_cast<double>(n);
  Spectrum out;
  out.map = FourierMap::zero(grid.dim, values.components, order, false);
  const Lattice& lat = out.map.lattice();

  std::vector<double> mass(n, 0.0);
  std::vector<Complex> buf(n);
  for (int i = 0; i < values.components; ++i) {
    for (std::size_t p = 0; p < n; ++p) buf[p] = values.at(p, i);
    detail::fft_inplace(buf, grid.dim, grid.size, -1);
    for (std::size_t p = 0; p < n; ++p) {
      buf[p] *= scale;
      mass[p] = std::max(mass[p], std::sqrt(std::norm(buf[p])));
    }
    for (std::size_t m = 0; m < lat.size(); ++m) {
      const Index& k = lat[m];
      const std::size_t pos = grid.dim == 1
                                  ? wrap(k[0], grid.size)
                                  : static_cast<std::size_t>(wrap(k[0], grid.size)) * grid.size +
                                        wrap(k[1], grid.size);
      out.map.raw(m, i) = buf[pos];
    }
  }

  double total = 0.0;
  double tail = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    Index k{};
    if (grid.dim == 1) {
      k = {unwrap(static_cast<int>(p), grid.size), 0};
    } else {
      k = {unwrap(static_cast<int>(p / grid.size), grid.size),
           unwrap(static_cast<int>(p % grid.size), grid.size)};
    }
    const bool nyquist = grid.size % 2 == 0 &&
                         (2 * std::abs(k[0]) == grid.size || 2 * std::abs(k[1]) == grid.size);
    total += mass[p];
    if (nyquist || l1_norm(k, grid.dim) > order) tail += mass[p];
  }
  out.tail_ratio = total > 0.0 ? tail / total : 0.0;
  if (real) out.map = out.map.symmetrized();
  return out;
}

namespace {

struct Cx {
  double re;
  double im;
};

inline Cx mul(Cx a, Cx b) { return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re}; }

// sum_{k=0}^{n} c[k] w^k by Horner.
inline Cx horner(const Cx* c, int n, Cx w) {
  Cx acc = c[n];
  for (int k = n - 1; k >= 0; --k) {
    acc = mul(acc, w);
    acc.re += c[k].re;
    acc.im += c[k].im;
  }
  return acc;
}

inline Cx unit_power(double x, double y) {
  // exp(2 pi i (x + i y))
  const double r = std::exp(-kTwoPi * y);
  return {r * std::cos(kTwoPi * x), r * std::sin(kTwoPi * x)};
}

}  // namespace

std::vector<Complex> evaluate_many(const FourierMap& f, std::span<const CPoint> points) {
  const int comps = f.components();
  std::vector<Complex> out(points.size() * comps);
  const Lattice& lat = f.lattice();
  const int n = lat.order();
  const int d = lat.dim();

  if (d == 1) {
    // pos[i][k] = c_k and neg[i][k] = c_{-k}, k = 0..n.
    std::vector<Cx> pos(static_cast<std::size_t>(n + 1) * comps);
    std::vector<Cx> neg(static_cast<std::size_t>(n + 1) * comps);
    for (std::size_t m = 0; m < lat.size(); ++m) {
      const int k = lat[m][0];
      for (int i = 0; i < comps; ++i) {
        const Complex c = f.raw(m, i);
        if (k >= 0) pos[i * (n + 1) + k] = {c.real(), c.imag()};
        if (k <= 0) neg[i * (n + 1) - k] = {c.real(), c.imag()};
      }
    }
    const bool real_map = f.is_real();
    for (std::size_t p = 0; p < points.size(); ++p) {
      const Complex z = points[p][0];
      const Cx w = unit_power(z.real(), z.imag());
      const bool real_point = z.imag() == 0.0;
      Cx winv{};
      if (!(real_map && real_point)) {
        const double r2 = w.re * w.re + w.im * w.im;
        winv = {w.re / r2, -w.im / r2};
      }
      for (int i = 0; i < comps; ++i) {
        const Cx* cp = pos.data() + i * (n + 1);
        const Cx* cn = neg.data() + i * (n + 1);
        const Cx a = horner(cp, n, w);
        if (real_map && real_point) {
          // c_{-k} = conj(c_k) and |w| = 1: the sum is 2 Re P(w) - c_0.
          out[p * comps + i] = Complex(2.0 * a.re - cp[0].re, 0.0);
        } else {
          const Cx b = horner(cn, n, winv);
          out[p * comps + i] = Complex(a.re + b.re - cn[0].re, a.im + b.im - cn[0].im);
        }
      }
    }
    return out;
  }

  std::array<std::vector<Cx>, 2> pw{std::vector<Cx>(2 * n + 1), std::vector<Cx>(2 * n + 1)};
  for (std::size_t p = 0; p < points.size(); ++p) {
    for (int j = 0; j < 2; ++j) {
      const Cx base = unit_power(points[p][j].real(), points[p][j].imag());
      const double r2 = base.re * base.re + base.im * base.im;
      const Cx inv{base.re / r2, -base.im / r2};
      pw[j][n] = {1.0, 0.0};
      for (int k = 1; k <= n; ++k) {
        pw[j][n + k] = mul(pw[j][n + k - 1], base);
        pw[j][n - k] = mul(pw[j][n - k + 1], inv);
      }
    }
    std::array<Cx, 2> acc{};
    for (std::size_t m = 0; m < lat.size(); ++m) {
      const Cx e = mul(pw[0][n + lat[m][0]], pw[1][n + lat[m][1]]);
      for (int i = 0; i < comps; ++i) {
        const Complex c = f.raw(m, i);
        acc[i].re += c.real() * e.re - c.imag() * e.im;
        acc[i].im += c.real() * e.im + c.imag() * e.re;
      }
    }
    for (int i = 0; i < comps; ++i) out[p * comps + i] = Complex(acc[i].re, acc[i].im);
  }
  return out;
}

double imaginary_reach(const FourierMap& u, double eps) {
  const double nu = u.nu(eps);
  if (!u.is_real()) return nu;
  return std::min(nu, eps * u.beta(eps));
}

namespace {

FourierMap compose_points(const FourierMap& g, const FourierMap& inner, bool add_identity,
                          const CompositionOptions& options, const char* what) {
  require(g.dim() == inner.dim(), "composition of maps on different tori");
  require(inner.components() == inner.dim(), "inner map must take values in R^dim");
  const int out_order = options.out_order.value_or(std::max(g.order(), inner.order()));
  const int grid_order = std::max({out_order, g.order(), inner.order()});
  const GridSpec grid = composition_grid(g.dim(), grid_order, options.oversample);
  const GridValues in = sample(inner, grid);
  std::vector<CPoint> pts(grid.points());
  const bool real_inner = inner.is_real();
  for (std::size_t p = 0; p < pts.size(); ++p) {
    const RPoint x = grid.point(p);
    for (int j = 0; j < grid.dim; ++j) {
      Complex y = in.at(p, j);
      if (real_inner) y = Complex(y.real(), 0.0);
      pts[p][j] = add_identity ? y + x[j] : y;
    }
  }
  GridValues vals{grid, g.components(), evaluate_many(g, pts)};
  return finish(vals, out_order, g.is_real() && real_inner, options.tol_trunc, what);
}

}  // namespace

FourierMap compose(const FourierMap& g, const FourierMap& perturbation,
                   const CompositionOptions& options, std::optional<StripReach> reach) {
  if (reach) {
    const double r = imaginary_reach(perturbation, reach->domain_eps);
    if (reach->domain_eps + r > reach->target_eps) {
      std::ostringstream msg;
      msg << "composition argument reaches |Im| <= " << reach->domain_eps + r
          << " beyond the controlled strip " << reach->target_eps;
      fail(ErrorKind::DomainEscape, msg.str());
    }
  }
  return compose_points(g, perturbation, true, options, "compose");
}

FourierMap compose_periodic(const FourierMap& g, const FourierMap& inner,
                            const CompositionOptions& options) {
  return compose_points(g, inner, false, options, "compose_periodic");
}

std::vector<FourierMap> jacobian(const FourierMap& f) {
  std::vector<FourierMap> out;
  out.reserve(static_cast<std::size_t>(f.components()) * f.dim());
  for (int i = 0; i < f.components(); ++i) {
    const FourierMap fi = f.component(i);
    for (int j = 0; j < f.dim(); ++j) out.push_back(fi.derivative(j));
  }
  return out;
}

FourierMap apply_jacobian(const FourierMap& u, const FourierMap& v,
                          const CompositionOptions& options) {
  require(u.dim() == v.dim() && v.components() == v.dim(), "apply_jacobian shape mismatch");
  const int d = u.dim();
  const int out_order = options.out_order.value_or(std::max(u.order(), v.order()));
  const GridSpec grid =
      composition_grid(d, std::max({out_order, u.order(), v.order()}), options.oversample);
  const auto jac = jacobian(u);
  const GridValues vv = sample(v, grid);
  GridValues out{grid, u.components(), std::vector<Complex>(grid.points() * u.components())};
  for (int i = 0; i < u.components(); ++i) {
    for (int j = 0; j < d; ++j) {
      const GridValues dij = sample(jac[i * d + j], grid);
      for (std::size_t p = 0; p < grid.points(); ++p) out.at(p, i) += dij.at(p, 0) * vv.at(p, j);
    }
  }
  return finish(out, out_order, u.is_real() && v.is_real(), options.tol_trunc, "apply_jacobian");
}

FourierMap pointwise_multiply(const FourierMap& a, const FourierMap& b,
                              const CompositionOptions& options) {
  require(a.dim() == b.dim(), "pointwise product of maps on different tori");
  require(a.components() == b.components() || a.components() == 1,
          "pointwise product needs matching components or a scalar left factor");
  const int out_order = options.out_order.value_or(std::max(a.order(), b.order()));
  const GridSpec grid =
      composition_grid(a.dim(), std::max({out_order, a.order(), b.order()}), options.oversample);
  const GridValues va = sample(a, grid);
  GridValues vb = sample(b, grid);
  for (std::size_t p = 0; p < grid.points(); ++p) {
    for (int i = 0; i < b.components(); ++i) {
      vb.at(p, i) *= va.at(p, a.components() == 1 ? 0 : i);
    }
  }
  return finish(vb, out_order, a.is_real() && b.is_real(), options.tol_trunc, "pointwise_multiply");
}

}  // namespace torusflow
