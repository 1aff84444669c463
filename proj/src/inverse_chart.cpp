#include "torusflow/inverse_chart.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "torusflow/errors.hpp"

namespace torusflow {

namespace {

Complex power(const CPoint& w, const Index& p, int dim) {
  Complex out = 1.0;
  for (int j = 0; j < dim; ++j) {
    for (int e = 0; e < p[j]; ++e) out *= w[j];
  }
  return out;
}

// d/dw_j of w^p
Complex power_derivative(const CPoint& w, const Index& p, int j, int dim) {
  if (p[j] == 0) return 0.0;
  Index q = p;
  --q[j];
  return static_cast<double>(p[j]) * power(w, q, dim);
}

double max_abs(const CPoint& a, int dim) {
  double m = 0.0;
  for (int i = 0; i < dim; ++i) m = std::max(m, std::abs(a[i]));
  return m;
}

bool is_constant_unit(const FourierMap& c, int component) {
  const Lattice& lat = c.lattice();
  for (std::size_t m = 0; m < lat.size(); ++m) {
    const bool zero_mode = lat[m][0] == 0 && lat[m][1] == 0;
    for (int i = 0; i < c.components(); ++i) {
      const Complex want = zero_mode && i == component ? Complex(1.0) : Complex(0.0);
      if (c.raw(m, i) != want) return false;
    }
  }
  return true;
}

double op_norm_minus_identity(const std::array<Complex, 4>& d, int dim) {
  double h = 0.0;
  for (int i = 0; i < dim; ++i) {
    double row = 0.0;
    for (int j = 0; j < dim; ++j) row += std::abs(d[i * dim + j] - (i == j ? 1.0 : 0.0));
    h = std::max(h, row);
  }
  return h;
}

// max_i sum_j sum_t M_{t,i} p_j delta^{|p| - 1}
double majorant(const LocalAddition& alpha, double eps, double delta) {
  const int dim = alpha.dim();
  double worst = 0.0;
  for (int i = 0; i < dim; ++i) {
    double row = 0.0;
    for (const auto& t : alpha.nonlinear_terms()) {
      const double m = t.coeff.component(i).nu(eps);
      const int degree = t.power[0] + t.power[1];
      for (int j = 0; j < dim; ++j) row += m * t.power[j] * std::pow(delta, degree - 1);
    }
    worst = std::max(worst, row);
  }
  return worst;
}

}  // namespace

LocalAddition LocalAddition::flat(int dim) { return with_identity(dim, {}); }

LocalAddition::LocalAddition(int dim, std::vector<AdditionTerm> terms) : dim_(dim) {
  require(dim == 1 || dim == 2, "local addition needs m in {1, 2}");
  std::map<Index, FourierMap> merged;
  for (auto& t : terms) {
    require(t.power[0] >= 0 && t.power[1] >= 0, "negative power in local addition");
    require(dim == 2 || t.power[1] == 0, "second w-power on the circle");
    require(t.coeff.dim() == dim && t.coeff.components() == dim, "coefficient map has the wrong shape");
    require(t.coeff.is_real(), "coefficient maps must be real");
    auto it = merged.find(t.power);
    if (it == merged.end()) {
      merged.emplace(t.power, t.coeff);
    } else {
      const int order = std::max(it->second.order(), t.coeff.order());
      it->second = it->second.with_order(order) + t.coeff.with_order(order);
    }
  }
  for (auto& [p, c] : merged) {
    const int degree = p[0] + p[1];
    if (degree == 0) {
      require(c.max_abs_coeff() == 0.0, "alpha(z, 0) != z: constant term does not vanish");
    } else if (degree == 1) {
      const int j = p[0] == 1 ? 0 : 1;
      require(is_constant_unit(c, j), "d_w alpha(z, 0) != id: linear term is not the identity");
    } else if (c.max_abs_coeff() != 0.0) {
      terms_.push_back({p, c});
    }
  }
  for (int j = 0; j < dim; ++j) {
    const Index e = j == 0 ? Index{1, 0} : Index{0, 1};
    require(merged.count(e) == 1, "d_w alpha(z, 0) != id: linear term missing");
  }
}

LocalAddition LocalAddition::with_identity(int dim, std::vector<AdditionTerm> nonlinear) {
  for (int j = 0; j < dim; ++j) {
    FourierMap c = FourierMap::field(dim, 0);
    c.set_coeff({0, 0}, j, 1.0);
    nonlinear.push_back({j == 0 ? Index{1, 0} : Index{0, 1}, c});
  }
  return LocalAddition(dim, std::move(nonlinear));
}

CPoint LocalAddition::operator()(const CPoint& z, const CPoint& w) const {
  CPoint out{};
  for (int i = 0; i < dim_; ++i) out[i] = z[i] + w[i];
  for (const auto& t : terms_) {
    const Complex wp = power(w, t.power, dim_);
    const CPoint c = t.coeff.eval(z);
    for (int i = 0; i < dim_; ++i) out[i] += c[i] * wp;
  }
  return out;
}

std::array<Complex, 4> LocalAddition::dw(const CPoint& z, const CPoint& w) const {
  std::array<Complex, 4> d{};
  for (int i = 0; i < dim_; ++i) d[i * dim_ + i] = 1.0;
  for (const auto& t : terms_) {
    const CPoint c = t.coeff.eval(z);
    for (int j = 0; j < dim_; ++j) {
      const Complex dp = power_derivative(w, t.power, j, dim_);
      if (dp == 0.0) continue;
      for (int i = 0; i < dim_; ++i) d[i * dim_ + j] += c[i] * dp;
    }
  }
  return d;
}

LocalAddition LocalAddition::translated(const RPoint& shift) const {
  LocalAddition out = *this;
  const RPoint back{-shift[0], -shift[1]};
  for (auto& t : out.terms_) t.coeff = t.coeff.translated(back);
  return out;
}

InverseChartCert find_delta0(const LocalAddition& alpha, double eps) {
  require(eps >= 0.0, "negative strip half-width");
  InverseChartCert cert;
  cert.eps = eps;
  if (alpha.is_flat()) {
    cert.unbounded = true;
    cert.delta0 = 1.0;
    return cert;
  }
  constexpr int kSteps = 64 * 44;
  auto delta_at = [](int j) { return std::exp2(4.0 - j / 64.0); };
  auto ok = [&](int j) {
    const double b = majorant(alpha, eps, delta_at(j));
    cert.derivation_log.emplace_back(delta_at(j), b);
    return b <= 0.5;
  };
  if (!ok(kSteps)) {
    std::ostringstream msg;
    msg << "h exceeds 1/2 already at delta = " << delta_at(kSteps);
    fail(ErrorKind::NoPositiveRadius, msg.str());
  }
  int lo = kSteps;  // certified
  int hi = -1;      // not certified or off the grid
  if (ok(0)) lo = 0;
  else hi = 0;
  while (hi >= 0 && lo - hi > 1) {
    const int mid = (lo + hi) / 2;
    (ok(mid) ? lo : hi) = mid;
  }
  cert.delta0 = delta_at(lo);

  // Point scan at delta0: 64 abscissae x 3 heights x 16 w-phases.
  const int dim = alpha.dim();
  for (int a = 0; a < 64; ++a) {
    for (double y : {-eps, 0.0, eps}) {
      CPoint z{Complex(a / 64.0, y), Complex(0.0, 0.0)};
      if (dim == 2) z[1] = Complex((a % 8) / 8.0, y);
      for (int k = 0; k < 16; ++k) {
        CPoint w{std::polar(cert.delta0, kTwoPi * k / 16.0), 0.0};
        if (dim == 2) w[1] = std::polar(cert.delta0, kTwoPi * ((5 * k) % 16) / 16.0);
        cert.scanned_max = std::max(cert.scanned_max, op_norm_minus_identity(alpha.dw(z, w), dim));
        ++cert.scanned_points;
      }
    }
  }
  return cert;
}

CPoint invert_local(const LocalAddition& alpha, const InverseChartCert& cert, const CPoint& z,
                    const CPoint& target, double delta, std::vector<double>* residuals) {
  const int dim = alpha.dim();
  require(delta > 0.0 && delta <= cert.delta0, "radius must lie in (0, delta0]");
  CPoint gap{};
  for (int i = 0; i < dim; ++i) gap[i] = target[i] - z[i];
  if (!(max_abs(gap, dim) < 0.5 * delta)) {
    std::ostringstream msg;
    msg << "target is " << max_abs(gap, dim) << " from the base point; needs < delta/2 = " << 0.5 * delta;
    fail(ErrorKind::OutOfRange, msg.str());
  }
  if (alpha.is_flat()) {
    if (residuals) residuals->push_back(0.0);
    return gap;
  }
  const double floor = 1e-15 * (1.0 + max_abs(target, dim));
  bool real = true;
  for (int i = 0; i < dim; ++i) real = real && z[i].imag() == 0.0 && target[i].imag() == 0.0;
  CPoint w{};
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 200; ++it) {
    const CPoint a = alpha(z, w);
    CPoint r{};
    for (int i = 0; i < dim; ++i) r[i] = real ? Complex((target[i] - a[i]).real()) : target[i] - a[i];
    const double res = max_abs(r, dim);
    if (residuals) residuals->push_back(res);
    if (res <= floor) return w;
    if (res >= prev) {
      if (prev <= kTolLocalInverse) return w;
      std::ostringstream msg;
      msg << "local inverse residual plateaued at " << res;
      fail(ErrorKind::ContractionStall, msg.str());
    }
    prev = res;
    for (int i = 0; i < dim; ++i) w[i] += r[i];
  }
  if (prev <= kTolLocalInverse) return w;
  fail(ErrorKind::ContractionStall, "local inverse did not converge in 200 steps");
}

namespace {

struct ChartSampler {
  const LocalAddition& alpha;
  const InverseChartCert& cert;
  GridSpec grid;
  int order;
  CompositionOptions options;

  Spectrum finish(const GridValues& v) const {
    Spectrum s = analyze(v, order, true);
    if (s.tail_ratio > options.tol_trunc) {
      std::ostringstream msg;
      msg << "chart vector: spectral tail ratio " << s.tail_ratio << " exceeds budget " << options.tol_trunc;
      fail(ErrorKind::TruncationBudgetExceeded, msg.str());
    }
    return s;
  }

  GridValues chart_values(const FourierMap& u) const {
    const int dim = u.dim();
    const GridValues uv = sample(u, grid);
    GridValues out{grid, dim, std::vector<Complex>(uv.data.size())};
    for (std::size_t p = 0; p < grid.points(); ++p) {
      const RPoint x = grid.point(p);
      CPoint z{Complex(x[0]), Complex(x[1])};
      CPoint target = z;
      for (int i = 0; i < dim; ++i) target[i] += uv.at(p, i);
      const CPoint w = invert_local(alpha, cert, z, target, cert.delta0);
      for (int i = 0; i < dim; ++i) out.at(p, i) = w[i];
    }
    return out;
  }

  FourierMap chart(const FourierMap& u) const { return finish(chart_values(u)).map; }

  // w' = (d_w alpha)^{-1} u'
  FourierMap chart_rate(const FourierMap& u, const FourierMap& rate) const {
    const int dim = u.dim();
    const GridValues w = chart_values(u);
    const GridValues r = sample(rate, grid);
    GridValues out{grid, dim, std::vector<Complex>(r.data.size())};
    for (std::size_t p = 0; p < grid.points(); ++p) {
      const RPoint x = grid.point(p);
      const CPoint z{Complex(x[0]), Complex(x[1])};
      const CPoint wp{w.at(p, 0), dim == 2 ? w.at(p, 1) : Complex(0.0)};
      const auto d = alpha.dw(z, wp);
      if (dim == 1) {
        out.at(p, 0) = r.at(p, 0) / d[0];
      } else {
        const Complex det = d[0] * d[3] - d[1] * d[2];
        out.at(p, 0) = (d[3] * r.at(p, 0) - d[1] * r.at(p, 1)) / det;
        out.at(p, 1) = (d[0] * r.at(p, 1) - d[2] * r.at(p, 0)) / det;
      }
    }
    return finish(out).map;
  }
};

}  // namespace

ACPath flow_to_chart(const FlowPath& flow, const LocalAddition& alpha, const InverseChartCert& cert,
                     const CompositionOptions& options) {
  const FourierMap& shape = flow.end();
  require(shape.dim() == alpha.dim(), "flow and local addition live on different tori");
  double displacement = 0.0;
  for (const auto& u : flow.breakpoints()) displacement = std::max(displacement, u.nu(0.0));
  for (const auto& u : flow.stages()) displacement = std::max(displacement, u.nu(0.0));
  if (!(displacement < 0.5 * cert.delta0)) {
    std::ostringstream msg;
    msg << "flow displacement " << displacement << " is not below delta0/2 = " << 0.5 * cert.delta0;
    fail(ErrorKind::OutOfRange, msg.str());
  }
  ACPath out;
  out.grid = flow.grid();
  if (alpha.is_flat()) {
    out.values = flow.breakpoints();
    out.derivative = sample_cubic(out.grid, flow.eps(), [&](double t) { return flow.rate(t); });
    return out;
  }
  const ChartSampler s{alpha, cert, composition_grid(shape.dim(), shape.order(), options.oversample),
                       options.out_order.value_or(shape.order()), options};
  for (const auto& u : flow.breakpoints()) out.values.push_back(s.chart(u));
  out.derivative = sample_cubic(out.grid, flow.eps(), [&](double t) { return s.chart_rate(flow.at(t), flow.rate(t)); });
  return out;
}

double chart_relatedness_defect(const FlowPath& flow, const LocalAddition& alpha, double eps,
                                const RPoint& shift) {
  const InverseChartCert cert = find_delta0(alpha, eps);
  const ACPath base = flow_to_chart(flow, alpha, cert);
  // In the shifted chart x' = x + shift the flow reads u'(x') = u(x' - shift).
  const RPoint back{-shift[0], -shift[1]};
  FlowPath moved = flow;
  for (auto& u : moved.breakpoints()) u = u.translated(back);
  for (auto& u : moved.stages()) u = u.translated(back);
  const LocalAddition alpha2 = alpha.translated(shift);
  const ACPath other = flow_to_chart(moved, alpha2, find_delta0(alpha2, eps));
  double d = 0.0;
  for (std::size_t j = 0; j < base.values.size(); ++j) {
    d = std::max(d, coefficient_distance(other.values[j], base.values[j].translated(back)));
  }
  return d;
}

}  // namespace torusflow
