#include "torusflow/local_flow.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include "torusflow/errors.hpp"

namespace torusflow {

// --------------------------------------------------------- AdmissibleField

AdmissibleField AdmissibleField::certify(const TimeDependentField& gamma, double eps,
                                         std::optional<double> chart_delta0) {
  require(eps > 0.0, "working half-width must be positive");
  require(gamma.components() == gamma.dim(), "flow field must be a vector field");
  if (gamma.scale() < 2.0 * eps) {
    std::ostringstream msg;
    msg << "field scale " << gamma.scale() << " is below twice the working half-width " << eps;
    fail(ErrorKind::ScaleMismatch, msg.str());
  }
  AdmissibleField out{gamma, eps};
  out.theta = lp_norm(gamma, 1, StripNorm::beta(2.0 * eps));
  out.l1_nu = lp_norm(gamma, 1, StripNorm::nu(2.0 * eps));
  if (!(out.theta < 0.5)) {
    std::ostringstream msg;
    msg << "||gamma||_{L1,beta_{2eps}} = " << out.theta
        << " violates the 1/2 bound of the admissibility ball Q_eps (eps = " << eps << ")";
    fail(ErrorKind::Inadmissible, msg.str());
  }
  if (chart_delta0) {
    if (!(out.l1_nu < *chart_delta0 / 4.0)) {
      std::ostringstream msg;
      msg << "||gamma||_{L1,nu} = " << out.l1_nu << " violates the chart bound delta0/4 = "
          << *chart_delta0 / 4.0;
      fail(ErrorKind::Inadmissible, msg.str());
    }
    out.chart_delta0 = chart_delta0;
  }
  return out;
}

// ------------------------------------------------------------- Collocation

std::shared_ptr<const Collocation> Collocation::get(int q) {
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const Collocation>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[q];
  if (!slot) {
    GaussRule rule = gauss_legendre(q);
    std::vector<double> abscissae{0.0};
    abscissae.insert(abscissae.end(), rule.nodes.begin(), rule.nodes.end());
    abscissae.push_back(1.0);
    auto a = integration_matrix(rule.nodes);
    slot = std::make_shared<const Collocation>(
        Collocation{q, std::move(rule), std::move(a), Interpolator(std::move(abscissae))});
  }
  return slot;
}

// ---------------------------------------------------------------- FlowPath

FlowPath::FlowPath(TimeGrid grid, int q, double eps, int dim, int order)
    : grid_(std::move(grid)), scheme_(Collocation::get(q)), eps_(eps) {
  const FourierMap zero = FourierMap::field(dim, order);
  breakpoints_.assign(grid_.points().size(), zero);
  stages_.assign(grid_.intervals() * q, zero);
}

double FlowPath::stage_time(std::size_t interval, int l) const {
  return grid_.start(interval) + grid_.width(interval) * scheme_->rule.nodes[l];
}

namespace {

template <class Weights>
FourierMap combine(const FlowPath& path, std::size_t j, const Weights& w) {
  const int q = path.nodes();
  FourierMap out = w[0] * path.breakpoints()[j];
  for (int l = 0; l < q; ++l) {
    if (w[l + 1] != 0.0) out += w[l + 1] * path.stage(j, l);
  }
  if (w[q + 1] != 0.0) out += w[q + 1] * path.breakpoints()[j + 1];
  return out;
}

}  // namespace

FourierMap FlowPath::at(double t) const {
  const std::size_t j = grid_.locate(t);
  const double s = (t - grid_.start(j)) / grid_.width(j);
  return combine(*this, j, scheme_->dense.basis(s));
}

FourierMap FlowPath::rate(double t) const {
  const std::size_t j = grid_.locate(t);
  const double h = grid_.width(j);
  auto w = scheme_->dense.basis_derivative((t - grid_.start(j)) / h);
  for (double& x : w) x /= h;
  return combine(*this, j, w);
}

CPoint FlowPath::eval(double t, const CPoint& z) const {
  const std::size_t j = grid_.locate(t);
  const auto w = scheme_->dense.basis((t - grid_.start(j)) / grid_.width(j));
  CPoint out = z;
  auto add = [&](double weight, const FourierMap& u) {
    if (weight == 0.0) return;
    const CPoint v = u.eval(z);
    for (int i = 0; i < u.dim(); ++i) out[i] += weight * v[i];
  };
  add(w[0], breakpoints_[j]);
  for (int l = 0; l < nodes(); ++l) add(w[l + 1], stage(j, l));
  add(w[nodes() + 1], breakpoints_[j + 1]);
  return out;
}

double FlowPath::max_reach() const {
  double r = 0.0;
  for (const auto& u : breakpoints_) r = std::max(r, imaginary_reach(u, eps_));
  for (const auto& u : stages_) r = std::max(r, imaginary_reach(u, eps_));
  return r;
}

double FlowPath::distance(const FlowPath& other) const { return distance(other, eps_); }

double FlowPath::distance(const FlowPath& other, double eps) const {
  require(grid_ == other.grid_ && nodes() == other.nodes(), "paths on different solver grids");
  double d = 0.0;
  for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
    d = std::max(d, (breakpoints_[i] - other.breakpoints_[i]).nu(eps));
  }
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    d = std::max(d, (stages_[i] - other.stages_[i]).nu(eps));
  }
  return d;
}

// ------------------------------------------------------------------ solver

TimeGrid solver_grid(const TimeDependentField& gamma, const SolveOptions& options) {
  return gamma.grid().merged(options.extra_grid).refined(options.max_step);
}

FlowPath identity_path(const AdmissibleField& field, const SolveOptions& options) {
  return FlowPath(solver_grid(field.gamma, options), options.nodes, field.eps, field.gamma.dim(),
                  field.gamma.order());
}

FlowPath picard_step(const AdmissibleField& field, const FlowPath& eta,
                     const CompositionOptions& options) {
  const TimeDependentField& gamma = field.gamma;
  const TimeGrid& grid = eta.grid();
  const int q = eta.nodes();
  const Collocation& scheme = eta.scheme();
  const StripReach reach{field.eps, 2.0 * field.eps};

  FlowPath out(grid, q, field.eps, gamma.dim(), gamma.order());
  std::vector<FourierMap> g(q);
  for (std::size_t j = 0; j < grid.intervals(); ++j) {
    const double h = grid.width(j);
    for (int l = 0; l < q; ++l) {
      const FourierMap vf = gamma.value(eta.stage_time(j, l));
      g[l] = compose(vf, eta.stage(j, l), options, reach);
    }
    const FourierMap& base = out.breakpoints()[j];
    for (int l = 0; l < q; ++l) {
      FourierMap stage = base;
      for (int i = 0; i < q; ++i) stage += (h * scheme.a[l][i]) * g[i];
      out.stage(j, l) = std::move(stage);
    }
    FourierMap next = base;
    for (int i = 0; i < q; ++i) next += (h * scheme.rule.weights[i]) * g[i];
    out.breakpoints()[j + 1] = std::move(next);
  }
  const double r = out.max_reach();
  if (!(r < field.eps)) {
    std::ostringstream msg;
    msg << "flow snapshot reaches imaginary part " << r << ", not below eps = " << field.eps;
    fail(ErrorKind::DomainEscape, msg.str());
  }
  return out;
}

FlowPath solve_flow(const AdmissibleField& field, const SolveOptions& options,
                    const FlowPath* initial) {
  require(options.tol_solve > 0.0, "solver tolerance must be positive");
  FlowPath current = initial ? *initial : identity_path(field, options);
  require(current.grid() == solver_grid(field.gamma, options) || initial != nullptr,
          "initial path grid mismatch");
  const double target = options.tol_solve * (1.0 - field.theta);
  std::vector<IterationRecord> log;
  double previous = 0.0;
  for (int step = 1; step <= options.max_iterations; ++step) {
    FlowPath next = picard_step(field, current, options.composition);
    const double d = next.distance(current);
    double scale = 1.0;
    for (const auto& u : next.breakpoints()) scale = std::max(scale, 1.0 + u.nu(field.eps));
    const double floor = 1e-15 * scale;
    const double ratio = step == 1 || previous == 0.0 ? 0.0 : d / previous;
    log.push_back({step, d, ratio});
    current = std::move(next);
    if (d <= std::max(target, floor)) {
      current.log = std::move(log);
      current.theta = field.theta;
      current.residual = picard_step(field, current, options.composition).distance(current);
      return current;
    }
    if (ratio > 1.0 && d > 10.0 * floor) {
      std::ostringstream msg;
      msg << "Picard ratio " << ratio << " exceeds 1 at step " << step;
      fail(ErrorKind::NonContraction, msg.str());
    }
    previous = d;
  }
  std::ostringstream msg;
  msg << "no convergence within " << options.max_iterations << " Picard steps";
  fail(ErrorKind::NonContraction, msg.str());
}

LipschitzReport param_lipschitz_check(const AdmissibleField& a, const AdmissibleField& b,
                                      const SolveOptions& options) {
  require(a.eps == b.eps, "Lipschitz check needs a common half-width");
  SolveOptions opts = options;
  opts.extra_grid = options.extra_grid.merged(a.gamma.grid()).merged(b.gamma.grid());
  const FlowPath fa = solve_flow(a, opts);
  const FlowPath fb = solve_flow(b, opts);
  LipschitzReport r;
  r.flow_distance = fa.distance(fb);
  r.field_distance = lp_norm(b.gamma - a.gamma, 1, StripNorm::nu(2.0 * a.eps));
  r.ratio = r.field_distance > 0.0 ? r.flow_distance / r.field_distance : 0.0;
  return r;
}

// ------------------------------------------------------- pointwise solution

CPoint invert_point(const FlowPath& flow, double t, const CPoint& y) {
  const FourierMap u = flow.at(t);
  CPoint x = y;
  const int d = u.dim();
  for (int it = 0; it < 200; ++it) {
    const CPoint v = u.eval(x);
    double step = 0.0;
    CPoint nx = x;
    for (int i = 0; i < d; ++i) {
      nx[i] = y[i] - v[i];
      step = std::max(step, std::abs(nx[i] - x[i]));
    }
    x = nx;
    if (step <= 1e-15 * (1.0 + std::abs(x[0]))) return x;
  }
  fail(ErrorKind::ContractionStall, "point inversion of a flow snapshot did not converge");
}

Trajectory pointwise_solution(const FlowPath& flow, const TimeDependentField& gamma, double t0,
                              const CPoint& y0) {
  require(t0 >= 0.0 && t0 <= 1.0, "start time outside [0, 1]");
  const double eps = flow.eps();
  const int d = gamma.dim();
  for (int i = 0; i < d; ++i) {
    if (std::abs(y0[i].imag()) > 0.5 * eps) {
      std::ostringstream msg;
      msg << "start point has |Im| = " << std::abs(y0[i].imag()) << " beyond eps/2 = " << 0.5 * eps;
      fail(ErrorKind::DomainEscape, msg.str());
    }
  }
  const CPoint x0 = t0 == 0.0 ? y0 : invert_point(flow, t0, y0);
  auto y = [&](double t) { return flow.eval(t, x0); };

  Trajectory out;
  out.times.push_back(t0);
  for (double t : flow.grid().points()) {
    if (t > t0) out.times.push_back(t);
  }
  const GaussRule& rule = flow.scheme().rule;
  CPoint integral{};
  for (std::size_t n = 0; n < out.times.size(); ++n) {
    const double t = out.times[n];
    if (n > 0) {
      const double a = out.times[n - 1];
      const double h = t - a;
      for (std::size_t l = 0; l < rule.nodes.size(); ++l) {
        const double s = a + h * rule.nodes[l];
        const CPoint g = gamma.value(s).eval(y(s));
        for (int i = 0; i < d; ++i) integral[i] += h * rule.weights[l] * g[i];
      }
    }
    const CPoint v = y(t);
    double res = 0.0;
    for (int i = 0; i < d; ++i) res = std::max(res, std::abs(v[i] - y0[i] - integral[i]));
    out.values.push_back(v);
    out.residuals.push_back(res);
    out.max_residual = std::max(out.max_residual, res);
  }
  return out;
}

double restriction_consistency(const TimeDependentField& gamma, double eps, double delta,
                               const SolveOptions& options) {
  require(delta > 0.0 && delta < eps, "restriction needs 0 < delta < eps");
  const FlowPath wide = solve_flow(AdmissibleField::certify(gamma, eps), options);
  const FlowPath thin = solve_flow(AdmissibleField::certify(gamma, delta), options);
  double d = 0.0;
  for (std::size_t i = 0; i < wide.breakpoints().size(); ++i) {
    d = std::max(d, coefficient_distance(wide.breakpoints()[i], thin.breakpoints()[i]));
  }
  for (std::size_t i = 0; i < wide.stages().size(); ++i) {
    d = std::max(d, coefficient_distance(wide.stages()[i], thin.stages()[i]));
  }
  return d;
}

}  // namespace torusflow
