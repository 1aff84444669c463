#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "torusflow/composition.hpp"
#include "torusflow/quadrature.hpp"
#include "torusflow/time_field.hpp"

namespace torusflow {

/// A time-dependent field certified for the flow solver at half-width eps:
/// ||gamma||_{L1, beta_{2 eps}} < 1/2, optionally ||gamma||_{L1, nu_{2 eps}} < delta0 / 4.
struct AdmissibleField {
  TimeDependentField gamma;
  double eps = 0.0;
  double theta = 0.0;    // ||gamma||_{L1, beta_{2 eps}}
  double l1_nu = 0.0;    // ||gamma||_{L1, nu_{2 eps}}
  std::optional<double> chart_delta0;

  /// Throws ScaleMismatch if gamma.scale() < 2 eps and Inadmissible if a
  /// certificate fails; the message names the violated bound.
  static AdmissibleField certify(const TimeDependentField& gamma, double eps,
                                 std::optional<double> chart_delta0 = std::nullopt);
};

struct IterationRecord {
  int step = 0;
  double sup_diff = 0.0;
  double ratio = 0.0;  // sup_diff / previous sup_diff; 0 for the first step
};

/// Gauss-Legendre collocation data shared by all paths with the same node count.
struct Collocation {
  int q = 0;
  GaussRule rule;
  std::vector<std::vector<double>> a;  // stage integration matrix
  Interpolator dense;                  // through {0, c_1, ..., c_q, 1}

  static std::shared_ptr<const Collocation> get(int q);
};

/// t -> id + u(t). Snapshots live at the solver breakpoints and at the q
/// collocation nodes of every interval; between them the path is the
/// polynomial through {u(t_j), stages, u(t_{j+1})}.
class FlowPath {
 public:
  FlowPath() = default;
  FlowPath(TimeGrid grid, int q, double eps, int dim, int order);

  const TimeGrid& grid() const { return grid_; }
  int nodes() const { return scheme_->q; }
  const Collocation& scheme() const { return *scheme_; }
  double eps() const { return eps_; }

  std::vector<FourierMap>& breakpoints() { return breakpoints_; }
  const std::vector<FourierMap>& breakpoints() const { return breakpoints_; }
  FourierMap& stage(std::size_t interval, int l) { return stages_[interval * nodes() + l]; }
  const FourierMap& stage(std::size_t interval, int l) const { return stages_[interval * nodes() + l]; }
  double stage_time(std::size_t interval, int l) const;
  const std::vector<FourierMap>& stages() const { return stages_; }
  std::vector<FourierMap>& stages() { return stages_; }

  FourierMap at(double t) const;
  /// Time derivative of the dense output.
  FourierMap rate(double t) const;
  const FourierMap& end() const { return breakpoints_.back(); }
  /// Point value of id + u(t) at z.
  CPoint eval(double t, const CPoint& z) const;

  /// Largest imaginary reach over all snapshots, measured on the eps strip.
  double max_reach() const;
  /// max over snapshots of nu_eps(this - other); paths must share grid and q.
  double distance(const FlowPath& other) const;
  double distance(const FlowPath& other, double eps) const;

  std::vector<IterationRecord> log;
  double residual = 0.0;
  double theta = 0.0;

 private:
  TimeGrid grid_;
  std::shared_ptr<const Collocation> scheme_;
  double eps_ = 0.0;
  std::vector<FourierMap> breakpoints_;
  std::vector<FourierMap> stages_;
};

struct SolveOptions {
  double tol_solve = 1e-10;
  double max_step = 1.0 / 64.0;
  int nodes = 4;
  int max_iterations = 200;
  /// Extra breakpoints merged into the solver grid (for comparing solves).
  TimeGrid extra_grid;
  CompositionOptions composition;
};

/// Solver grid for a field: its own breakpoints merged with extra_grid,
/// refined to max_step.
TimeGrid solver_grid(const TimeDependentField& gamma, const SolveOptions& options);

FlowPath identity_path(const AdmissibleField& field, const SolveOptions& options = {});

/// eta -> id + integral_0^t gamma(s) o eta(s) ds on eta's grid.
FlowPath picard_step(const AdmissibleField& field, const FlowPath& eta,
                     const CompositionOptions& options = {});

FlowPath solve_flow(const AdmissibleField& field, const SolveOptions& options = {},
                    const FlowPath* initial = nullptr);

struct LipschitzReport {
  double flow_distance = 0.0;  // sup_t nu_eps(u_2(t) - u_1(t))
  double field_distance = 0.0; // ||gamma_2 - gamma_1||_{L1, nu_{2 eps}}
  double ratio = 0.0;
};

LipschitzReport param_lipschitz_check(const AdmissibleField& a, const AdmissibleField& b,
                                      const SolveOptions& options = {});

struct Trajectory {
  std::vector<double> times;
  std::vector<CPoint> values;
  std::vector<double> residuals;  // integral-equation residual per time
  double max_residual = 0.0;
};

inline constexpr double kTolPointwise = 1e-9;

/// t -> Fl_{t, t0}(y0) = zeta(t)(zeta(t0)^{-1}(y0)) at t0 and every solver
/// breakpoint after it, with the scalar integral-equation residual.
Trajectory pointwise_solution(const FlowPath& flow, const TimeDependentField& gamma, double t0,
                              const CPoint& y0);

/// Point inverse of id + u(t) near y, by the fixed-point iteration x <- y - u(x).
CPoint invert_point(const FlowPath& flow, double t, const CPoint& y);

/// max over snapshots of the coefficient distance between the solves at eps and delta.
double restriction_consistency(const TimeDependentField& gamma, double eps, double delta,
                               const SolveOptions& options = {});

}  // namespace torusflow
