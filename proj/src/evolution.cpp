#include "torusflow/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "torusflow/errors.hpp"

namespace torusflow {

namespace {

double sup_diff(const CPoint& a, const CPoint& b, int dim) {
  double d = 0.0;
  for (int i = 0; i < dim; ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

CPoint shifted(const CPoint& x, const CPoint& v, int dim) {
  CPoint out = x;
  for (int i = 0; i < dim; ++i) out[i] += v[i];
  return out;
}

// Fixed-point inverse perturbation: v <- -u o (id + v).
FourierMap invert_perturbation(const FourierMap& u, const CompositionOptions& options) {
  FourierMap v = -u;
  if (u.max_abs_coeff() == 0.0) return v;
  const double floor = 1e-16 * (1.0 + u.nu(0.0));
  double prev = std::numeric_limits<double>::infinity();
  int stalls = 0;
  for (int it = 0; it < 200; ++it) {
    FourierMap next = -compose(u, v, options);
    const double d = (next - v).nu(0.0);
    v = std::move(next);
    if (d <= floor) break;
    stalls = d >= 0.999 * prev ? stalls + 1 : 0;
    if (stalls >= 5) break;
    prev = d;
  }
  const int dim = u.dim();
  double residual = 0.0;
  for (const CPoint& x : sample_points(dim)) {
    const CPoint y = shifted(x, v.eval(x), dim);
    residual = std::max(residual, sup_diff(shifted(y, u.eval(y), dim), x, dim));
  }
  if (!(residual <= kTolInverse)) {
    std::ostringstream msg;
    msg << "inverse iteration stalled with sampled residual " << residual;
    fail(ErrorKind::ContractionStall, msg.str());
  }
  return v;
}

AnalyticDiffeo certified_inverse(const AnalyticDiffeo& phi, FourierMap v) {
  const double eps = phi.eps - imaginary_reach(phi.u, phi.eps);
  if (!(eps > 0.0)) fail(ErrorKind::DomainEscape, "inverse has no strip left");
  return AnalyticDiffeo::certify(std::move(v), eps);
}

FourierMap matched(const FourierMap& f, int order) { return f.order() == order ? f : f.with_order(order); }

}  // namespace

AnalyticDiffeo AnalyticDiffeo::certify(FourierMap u, double eps) {
  require(eps >= 0.0, "negative strip half-width");
  require(u.components() == u.dim(), "diffeomorphism perturbation must be a vector field");
  AnalyticDiffeo out;
  out.mu = u.mu(eps);
  out.u = std::move(u);
  out.eps = eps;
  if (out.mu < 1.0) return out;
  try {
    const FourierMap v = invert_perturbation(out.u, {});
    out.inverse_residual = composition_residual(out, AnalyticDiffeo{v, eps, 0.0, -1.0});
  } catch (const FlowError&) {
    out.inverse_residual = std::numeric_limits<double>::infinity();
  }
  if (!(out.inverse_residual <= kTolInverse)) {
    std::ostringstream msg;
    msg << "mu_eps(u) = " << out.mu << " >= 1 and no inverse within " << kTolInverse;
    fail(ErrorKind::InvertibilityLost, msg.str());
  }
  return out;
}

AnalyticDiffeo AnalyticDiffeo::identity(int dim, int order, double eps) {
  return certify(FourierMap::field(dim, order), eps);
}

CPoint AnalyticDiffeo::eval(const CPoint& z) const { return shifted(z, u.eval(z), u.dim()); }

std::vector<CPoint> sample_points(int dim) {
  std::vector<CPoint> out;
  if (dim == 1) {
    for (int i = 0; i < 256; ++i) out.push_back({Complex(i / 256.0, 0.0), 0.0});
  } else {
    for (int i = 0; i < 16; ++i) {
      for (int j = 0; j < 16; ++j) out.push_back({Complex(i / 16.0, 0.0), Complex(j / 16.0, 0.0)});
    }
  }
  return out;
}

double sampled_distance(const FourierMap& a, const FourierMap& b) {
  require(a.dim() == b.dim() && a.components() == b.components(), "maps of different shape");
  const auto pts = sample_points(a.dim());
  const auto va = evaluate_many(a, pts);
  const auto vb = evaluate_many(b, pts);
  double d = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) d = std::max(d, std::abs(va[i] - vb[i]));
  return d;
}

double composition_residual(const AnalyticDiffeo& phi, const AnalyticDiffeo& psi) {
  const int dim = phi.u.dim();
  double r = 0.0;
  for (const CPoint& x : sample_points(dim)) r = std::max(r, sup_diff(phi.eval(psi.eval(x)), x, dim));
  return r;
}

AnalyticDiffeo compose_diffeo(const AnalyticDiffeo& phi, const AnalyticDiffeo& psi,
                              const CompositionOptions& options) {
  require(phi.u.dim() == psi.u.dim(), "diffeomorphisms of different dimension");
  const double reach = imaginary_reach(psi.u, psi.eps);
  const double eps = std::min(psi.eps, phi.eps - reach);
  if (!(eps > 0.0)) {
    std::ostringstream msg;
    msg << "inner map reaches " << reach << " out of the outer strip " << phi.eps;
    fail(ErrorKind::DomainEscape, msg.str());
  }
  const int order = options.out_order.value_or(std::max(phi.u.order(), psi.u.order()));
  CompositionOptions opts = options;
  opts.out_order = order;
  return AnalyticDiffeo::certify(matched(psi.u, order) + compose(phi.u, psi.u, opts), eps);
}

AnalyticDiffeo invert_diffeo(const AnalyticDiffeo& phi, const CompositionOptions& options) {
  return certified_inverse(phi, invert_perturbation(phi.u, options));
}

JacobianReport jacobian_report(const AnalyticDiffeo& phi) {
  const int dim = phi.u.dim();
  const auto pts = sample_points(dim);
  const auto jac = jacobian(phi.u);
  std::vector<std::vector<Complex>> entries;
  for (const auto& e : jac) entries.push_back(evaluate_many(e, pts));
  JacobianReport out;
  out.min_value = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < pts.size(); ++p) {
    double det;
    if (dim == 1) {
      det = std::abs(1.0 + entries[0][p]);
    } else {
      det = std::abs((1.0 + entries[0][p]) * (1.0 + entries[3][p]) - entries[1][p] * entries[2][p]);
    }
    out.min_value = std::min(out.min_value, det);
  }
  out.bound = std::pow(std::max(0.0, 1.0 - phi.mu), dim);
  return out;
}

AnalyticDiffeo EvolutionResult::at(double t) const { return AnalyticDiffeo::certify(path.at(t), path.eps()); }

EvolutionResult evol_right(const AdmissibleField& gamma, const SolveOptions& options) {
  return {Side::Right, gamma.gamma, solve_flow(gamma, options)};
}

EvolutionResult evol_left(const AdmissibleField& gamma, const SolveOptions& options) {
  const auto neg = AdmissibleField::certify(gamma.gamma.scaled(-1.0), gamma.eps);
  const FlowPath right = solve_flow(neg, options);
  const double eps = gamma.eps - right.max_reach();
  if (!(eps > 0.0)) fail(ErrorKind::DomainEscape, "left evolution has no strip left");
  const FourierMap& shape = right.end();
  FlowPath path(right.grid(), right.nodes(), eps, shape.dim(), shape.order());
  for (std::size_t i = 0; i < right.breakpoints().size(); ++i) {
    path.breakpoints()[i] = invert_perturbation(right.breakpoints()[i], options.composition);
  }
  for (std::size_t i = 0; i < right.stages().size(); ++i) {
    path.stages()[i] = invert_perturbation(right.stages()[i], options.composition);
  }
  path.log = right.log;
  path.residual = right.residual;
  path.theta = right.theta;
  return {Side::Left, gamma.gamma, std::move(path)};
}

AnalyticDiffeo evol_left_direct(const AdmissibleField& gamma, double t, const SolveOptions& options) {
  const TimeDependentField& g = gamma.gamma;
  if (t == 0.0) return AnalyticDiffeo::identity(g.dim(), g.order(), gamma.eps);
  // Fl^{-gamma}_{0,t}: y' = t gamma(t (1 - r))(y) on r in [0, 1].
  const auto back = AdmissibleField::certify(g.reparametrized(t, 0.0).scaled(-1.0), gamma.eps);
  return AnalyticDiffeo::certify(solve_flow(back, options).end(), gamma.eps);
}

AnalyticDiffeo flow_two_param(const EvolutionResult& right, double t, double t0) {
  require(right.side == Side::Right, "two-parameter flow needs a right evolution");
  require(t >= 0.0 && t <= 1.0 && t0 >= 0.0 && t0 <= 1.0, "times must lie in [0, 1]");
  const AnalyticDiffeo a = right.at(t);
  if (t == t0) return AnalyticDiffeo::identity(a.u.dim(), a.u.order(), a.eps);
  if (t0 == 0.0) return a;
  return compose_diffeo(a, invert_diffeo(right.at(t0)));
}

AnalyticDiffeo flow_two_param(const AdmissibleField& gamma, double t, double t0, const SolveOptions& options) {
  return flow_two_param(evol_right(gamma, options), t, t0);
}

FourierMap pullback_field(const AnalyticDiffeo& phi, const FourierMap& x, const CompositionOptions& options) {
  const int dim = phi.u.dim();
  require(x.dim() == dim && x.components() == dim, "pullback needs a vector field on the same torus");
  const int order = options.out_order.value_or(x.order());
  const GridSpec grid =
      composition_grid(dim, std::max({order, x.order(), phi.u.order()}), options.oversample);
  const GridValues u = sample(phi.u, grid);
  std::vector<CPoint> pts(grid.points());
  for (std::size_t p = 0; p < pts.size(); ++p) {
    const RPoint r = grid.point(p);
    for (int i = 0; i < dim; ++i) pts[p][i] = r[i] + u.at(p, i);
  }
  const auto xv = evaluate_many(x, pts);
  std::vector<GridValues> jac;
  for (const auto& e : jacobian(phi.u)) jac.push_back(sample(e, grid));
  GridValues out{grid, dim, std::vector<Complex>(pts.size() * dim)};
  for (std::size_t p = 0; p < pts.size(); ++p) {
    if (dim == 1) {
      out.at(p, 0) = xv[p] / (1.0 + jac[0].at(p, 0));
    } else {
      const Complex a = 1.0 + jac[0].at(p, 0), b = jac[1].at(p, 0);
      const Complex c = jac[2].at(p, 0), d = 1.0 + jac[3].at(p, 0);
      const Complex det = a * d - b * c;
      const Complex y0 = xv[2 * p], y1 = xv[2 * p + 1];
      out.at(p, 0) = (d * y0 - b * y1) / det;
      out.at(p, 1) = (a * y1 - c * y0) / det;
    }
  }
  Spectrum s = analyze(out, order, x.is_real() && phi.u.is_real());
  if (s.tail_ratio > options.tol_trunc) {
    std::ostringstream msg;
    msg << "pullback: spectral tail ratio " << s.tail_ratio << " exceeds budget " << options.tol_trunc;
    fail(ErrorKind::TruncationBudgetExceeded, msg.str());
  }
  return std::move(s.map);
}

FourierMap adjoint(const AnalyticDiffeo& phi, const FourierMap& x, const CompositionOptions& options) {
  return pullback_field(invert_diffeo(phi, options), x, options);
}

TimeDependentField odot(const AdmissibleField& gamma, const AdmissibleField& eta, const SolveOptions& options) {
  require(gamma.gamma.dim() == eta.gamma.dim() && gamma.gamma.order() == eta.gamma.order(),
          "odot needs fields of the same shape");
  const EvolutionResult e = evol_left(eta, options);
  const TimeGrid grid = e.path.grid().merged(gamma.gamma.grid()).refined(options.max_step);
  const double scale = std::min(gamma.gamma.scale(), eta.gamma.scale());
  CompositionOptions comp = options.composition;
  comp.out_order = gamma.gamma.order();
  const TimeDependentField moved = sample_cubic(grid, scale, [&](double t) {
    const FourierMap g = gamma.gamma.value(t);
    return pullback_field(e.at(t), g, comp) - g;
  });
  return moved + gamma.gamma.with_scale(scale) + eta.gamma.with_scale(scale);
}

DerivativeReport derivative_at_zero(const TimeDependentField& gamma, double eps, double t, double tau,
                                    const SolveOptions& options) {
  require(tau > 0.0, "finite-difference step must be positive");
  SolveOptions tight = options;
  tight.tol_solve = std::min(options.tol_solve, 1e-14);
  const auto plus = AdmissibleField::certify(gamma.scaled(tau), eps);
  const auto minus = AdmissibleField::certify(gamma.scaled(-tau), eps);
  DerivativeReport out;
  out.finite_difference =
      (0.5 / tau) * (evol_left_direct(plus, t, tight).u - evol_left_direct(minus, t, tight).u);
  out.formula = gamma.integral(0.0, t);
  out.discrepancy = (out.finite_difference - out.formula).nu(eps);
  return out;
}

ProbeDerivativeReport derivative_at_eta(const AdmissibleField& eta, const TimeDependentField& gamma, double t,
                                        double tau, const SolveOptions& options) {
  require(eta.gamma.dim() == 1, "derivative_at_eta probes the circle");
  require(tau > 0.0, "finite-difference step must be positive");
  SolveOptions tight = options;
  tight.tol_solve = std::min(options.tol_solve, 1e-14);
  const double eps = eta.eps;
  const auto neg = AdmissibleField::certify(eta.gamma.scaled(-1.0), eps);
  tight.extra_grid = gamma.grid();
  const FlowPath z = solve_flow(neg, tight);
  const AnalyticDiffeo e = invert_diffeo(AnalyticDiffeo::certify(z.at(t), z.eps()));

  // W(t) by Gauss quadrature; Ad(Evol(eta)(s)) gamma(s) = pullback of gamma(s) by Evol(eta)(s)^{-1}.
  const GaussRule& rule = z.scheme().rule;
  CompositionOptions comp = tight.composition;
  comp.out_order = gamma.order();
  FourierMap w = FourierMap::field(1, gamma.order());
  for (std::size_t j = 0; j < z.grid().intervals() && z.grid().start(j) < t; ++j) {
    const double a = z.grid().start(j);
    const double h = std::min(z.grid().end(j), t) - a;
    for (std::size_t l = 0; l < rule.nodes.size(); ++l) {
      const double s = a + h * rule.nodes[l];
      w += (h * rule.weights[l]) *
           pullback_field(AnalyticDiffeo::certify(z.at(s), z.eps()), gamma.value(s), comp);
    }
  }

  const auto plus = AdmissibleField::certify(eta.gamma + gamma.scaled(tau), eps);
  const auto minus = AdmissibleField::certify(eta.gamma - gamma.scaled(tau), eps);
  const AnalyticDiffeo ep = evol_left_direct(plus, t, tight);
  const AnalyticDiffeo em = evol_left_direct(minus, t, tight);
  ProbeDerivativeReport out;
  out.w = w;
  for (int i = 0; i < 32; ++i) {
    const CPoint x{Complex(i / 32.0, 0.0), 0.0};
    out.probes.push_back(i / 32.0);
    out.finite_difference.push_back((0.5 / tau) * (ep.u.eval(x)[0] - em.u.eval(x)[0]).real());
    out.formula.push_back(w.eval(e.eval(x))[0].real());
    out.discrepancy = std::max(out.discrepancy, std::abs(out.finite_difference.back() - out.formula.back()));
  }
  return out;
}

std::vector<TrotterPoint> trotter(const FourierMap& v, const FourierMap& w, double eps,
                                  const std::vector<int>& ns, const SolveOptions& options) {
  require(v.same_shape(w), "Trotter factors must have the same shape");
  SolveOptions tight = options;
  tight.tol_solve = std::min(options.tol_solve, 1e-13);
  auto exp_map = [&](const FourierMap& x) {
    const auto f = AdmissibleField::certify(TimeDependentField::constant(x, 2.0 * eps), eps);
    return AnalyticDiffeo::certify(solve_flow(f, tight).end(), eps);
  };
  const AnalyticDiffeo target = exp_map(v + w);
  std::vector<TrotterPoint> out;
  for (int n : ns) {
    require(n >= 1, "Trotter step count must be positive");
    const AnalyticDiffeo step = compose_diffeo(exp_map((1.0 / n) * v), exp_map((1.0 / n) * w));
    AnalyticDiffeo power = step;
    if ((n & (n - 1)) == 0) {
      for (int k = 1; k < n; k *= 2) power = compose_diffeo(power, power, tight.composition);
    } else {
      for (int k = 1; k < n; ++k) power = compose_diffeo(step, power, tight.composition);
    }
    out.push_back({n, sampled_distance(power.u, target.u)});
  }
  return out;
}

PointwiseReport verify_evolution_pointwise(const EvolutionResult& candidate, const TimeDependentField& gamma,
                                           const std::vector<CPoint>& probes, double tol) noexcept {
  PointwiseReport out;
  try {
    const FlowPath& path = candidate.path;
    const TimeGrid& grid = path.grid();
    const int q = path.nodes();
    const int dim = gamma.dim();
    const GaussRule& rule = path.scheme().rule;
    std::vector<FourierMap> field;
    std::vector<std::vector<FourierMap>> jac;
    for (std::size_t j = 0; j < grid.intervals(); ++j) {
      for (int l = 0; l < q; ++l) {
        field.push_back(gamma.value(path.stage_time(j, l)));
        if (candidate.side == Side::Left) jac.push_back(jacobian(path.stage(j, l)));
      }
    }
    for (std::size_t p = 0; p < probes.size(); ++p) {
      const CPoint& y0 = probes[p];
      CPoint acc{};
      auto record = [&](std::size_t i, double t) {
        const double r = sup_diff(path.breakpoints()[i].eval(y0), acc, dim);
        out.rows.push_back({p, t, r});
        if (!(r <= out.max_residual)) {
          out.max_residual = r;
          out.worst_time = t;
        }
      };
      record(0, 0.0);
      for (std::size_t j = 0; j < grid.intervals(); ++j) {
        const double h = grid.width(j);
        for (int l = 0; l < q; ++l) {
          const std::size_t k = j * q + l;
          CPoint g;
          if (candidate.side == Side::Right) {
            g = field[k].eval(shifted(y0, path.stage(j, l).eval(y0), dim));
          } else {
            const CPoint v = field[k].eval(y0);
            g = v;
            for (int a = 0; a < dim; ++a) {
              for (int b = 0; b < dim; ++b) g[a] += jac[k][a * dim + b].eval(y0)[0] * v[b];
            }
          }
          for (int a = 0; a < dim; ++a) acc[a] += h * rule.weights[l] * g[a];
        }
        record(j + 1, grid.end(j));
      }
    }
    out.pass = out.max_residual <= tol;
  } catch (...) {
    out.pass = false;
    out.max_residual = std::numeric_limits<double>::infinity();
  }
  return out;
}

}  // namespace torusflow
