#include "torusflow/pullback.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "torusflow/errors.hpp"

namespace torusflow {

namespace {

constexpr int kContravarianceMargin = 24;

FourierMap exponential(int dim, int order, std::size_t mode) {
  FourierMap e = FourierMap::zero(dim, 1, order, false);
  e.raw(mode, 0) = 1.0;
  return e;
}

// cos and sin of 2 pi k.x for a few k.
std::vector<FourierMap> test_basket(int dim, int order) {
  std::vector<Index> ks{{1, 0}, {3, 0}, {order, 0}};
  if (dim == 2) ks.insert(ks.end(), {{0, 1}, {1, 1}, {0, order}});
  std::vector<FourierMap> out;
  for (const Index& k : ks) {
    const Index neg{-k[0], -k[1]};
    FourierMap c = FourierMap::scalar(dim, order);
    c.set_coeff(k, 0, 0.5);
    c.set_coeff(neg, 0, 0.5);
    FourierMap s = FourierMap::scalar(dim, order);
    s.set_coeff(k, 0, Complex(0.0, -0.5));
    s.set_coeff(neg, 0, Complex(0.0, 0.5));
    out.push_back(c);
    out.push_back(s);
  }
  return out;
}

double max_entry(const Eigen::MatrixXcd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace

FourierMap PullbackMatrix::apply(const FourierMap& f) const {
  require(f.dim() == dim && f.components() == 1, "pullback acts on scalar functions of the same torus");
  require(f.order() <= cols_order, "test function exceeds the matrix window");
  const FourierMap g = f.with_order(cols_order);
  Eigen::VectorXcd c(g.mode_count());
  for (std::size_t m = 0; m < g.mode_count(); ++m) c(m) = g.raw(m, 0);
  const Eigen::VectorXcd r = a * c;
  FourierMap out = FourierMap::zero(dim, 1, rows_order, false);
  for (std::size_t m = 0; m < out.mode_count(); ++m) out.raw(m, 0) = r(m);
  return f.is_real() ? out.symmetrized() : out;
}

double PullbackMatrix::reality_defect() const {
  const auto rows = Lattice::get(dim, rows_order);
  const auto cols = Lattice::get(dim, cols_order);
  double d = 0.0;
  for (std::size_t j = 0; j < rows->size(); ++j) {
    for (std::size_t k = 0; k < cols->size(); ++k) {
      d = std::max(d, std::abs(a(rows->mirror(j), cols->mirror(k)) - std::conj(a(j, k))));
    }
  }
  return d;
}

FourierMap pullback_apply(const AnalyticDiffeo& phi, const FourierMap& f, const CompositionOptions& options) {
  require(f.components() == 1, "pullback acts on scalar functions");
  return compose(f, phi.u, options);
}

PullbackMatrix pullback_matrix(const AnalyticDiffeo& phi, int cols_order, int rows_order) {
  require(cols_order >= 0, "negative window order");
  if (rows_order < 0) rows_order = cols_order;
  const int dim = phi.u.dim();
  PullbackMatrix out{dim, rows_order, cols_order, {}};
  const auto cols = Lattice::get(dim, cols_order);
  const auto rows = Lattice::get(dim, rows_order);
  out.a.resize(static_cast<Eigen::Index>(rows->size()), static_cast<Eigen::Index>(cols->size()));
  // Columns are projections of e_k o phi onto the row window, not truncation errors.
  CompositionOptions opts;
  opts.out_order = rows_order;
  opts.tol_trunc = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < cols->size(); ++k) {
    const FourierMap col = compose(exponential(dim, cols_order, k), phi.u, opts);
    for (std::size_t j = 0; j < rows->size(); ++j) out.a(j, k) = col.raw(j, 0);
  }
  require(out.reality_defect() <= 1e-12, "pullback matrix of a real diffeomorphism lost reality symmetry");
  return out;
}

double contravariance_defect(const AnalyticDiffeo& phi, const AnalyticDiffeo& psi, int order) {
  const int wide = order + kContravarianceMargin;
  const PullbackMatrix lhs = pullback_matrix(compose_diffeo(phi, psi), order);
  const PullbackMatrix a = pullback_matrix(psi, wide, order);
  const PullbackMatrix b = pullback_matrix(phi, order, wide);
  return max_entry(lhs.a - a.a * b.a);
}

PullbackPath pullback_path(const AdmissibleField& gamma, double t0, int order, const SolveOptions& options) {
  const EvolutionResult right = evol_right(gamma, options);
  const FlowPath& path = right.path;
  const int dim = gamma.gamma.dim();
  FourierMap v0 = FourierMap::field(dim, path.end().order());
  if (t0 != 0.0) v0 = invert_diffeo(right.at(t0)).u;

  PullbackPath out;
  for (double t : path.grid().points()) {
    out.times.push_back(t);
    out.matrices.push_back(pullback_matrix(flow_two_param(right, t, t0), order));
  }

  const auto cols = Lattice::get(dim, order);
  for (std::size_t i = 0; i + 1 < out.times.size(); ++i) {
    AcIncrement inc{out.times[i], out.times[i + 1], 0.0, 0.0};
    const Eigen::MatrixXcd d = out.matrices[i + 1].a - out.matrices[i].a;
    for (std::size_t k = 0; k < cols->size(); ++k) {
      const double weight = kTwoPi * std::max(l1_norm((*cols)[k], dim), 1);
      inc.increment = std::max(inc.increment, d.col(static_cast<Eigen::Index>(k)).cwiseAbs().maxCoeff() / weight);
    }
    inc.bound = lp_norm(gamma.gamma.reparametrized(inc.ta, inc.tb), 1, StripNorm::nu(0.0));
    if (inc.increment > inc.bound * (1 + 1e-9) + 1e-13) ++out.violations;
    out.increments.push_back(inc);
  }

  // d/dt f o (id + w(t)) = grad f o (id + w) . w'(t), w = v0 + u(t) o (id + v0).
  const auto basket = test_basket(dim, order);
  for (std::size_t j = 0; j < path.grid().intervals(); ++j) {
    const double t = 0.5 * (path.grid().start(j) + path.grid().end(j));
    const FourierMap w = v0 + compose(path.at(t), v0);
    const FourierMap wdot = compose(path.rate(t), v0);
    const FourierMap g = gamma.gamma.value(t);
    for (const FourierMap& f : basket) {
      FourierMap lhs = FourierMap::scalar(dim, w.order());
      FourierMap flow_along = FourierMap::scalar(dim, w.order());
      for (int c = 0; c < dim; ++c) {
        const FourierMap df = f.derivative(c);
        lhs += pointwise_multiply(compose(df, w), wdot.component(c), {.out_order = w.order()});
        flow_along += pointwise_multiply(g.component(c), df, {.out_order = w.order()});
      }
      const FourierMap rhs = compose(flow_along, w, {.out_order = w.order()});
      out.transport_residual = std::max(out.transport_residual, (lhs - rhs).nu(0.0));
    }
  }
  return out;
}

double pullback_cocycle_defect(const EvolutionResult& right, double t, double s, double t0, int order) {
  const int wide = order + kContravarianceMargin;
  const PullbackMatrix whole = pullback_matrix(flow_two_param(right, t, t0), order);
  const PullbackMatrix first = pullback_matrix(flow_two_param(right, s, t0), wide, order);
  const PullbackMatrix second = pullback_matrix(flow_two_param(right, t, s), order, wide);
  return max_entry(whole.a - first.a * second.a);
}

}  // namespace torusflow
