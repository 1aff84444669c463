#pragma once

#include <vector>

#include "torusflow/local_flow.hpp"

namespace torusflow {

inline constexpr double kTolInverse = 1e-10;

/// id + u on the strip of half-width eps. Valid values satisfy mu_eps(u) < 1 or
/// carry an explicit inverse whose sampled composition residual is within kTolInverse.
struct AnalyticDiffeo {
  FourierMap u;
  double eps = 0.0;
  double mu = 0.0;                // mu_eps(u)
  double inverse_residual = -1.0; // < 0 when the mu certificate was enough

  /// Throws InvertibilityLost if neither certificate holds.
  static AnalyticDiffeo certify(FourierMap u, double eps);
  static AnalyticDiffeo identity(int dim, int order, double eps);

  CPoint eval(const CPoint& z) const;
};

/// Real sample points: 256 on T^1, a 16 x 16 grid on T^2.
std::vector<CPoint> sample_points(int dim);

/// sup over sample_points of |a(x) - b(x)|_inf.
double sampled_distance(const FourierMap& a, const FourierMap& b);

/// sup over sample_points of |(id + u)(id + v)(x) - x|, with u evaluated pointwise.
double composition_residual(const AnalyticDiffeo& phi, const AnalyticDiffeo& psi);

/// phi o psi.
AnalyticDiffeo compose_diffeo(const AnalyticDiffeo& phi, const AnalyticDiffeo& psi,
                              const CompositionOptions& options = {});

AnalyticDiffeo invert_diffeo(const AnalyticDiffeo& phi, const CompositionOptions& options = {});

struct JacobianReport {
  double min_value = 0.0;  // min over samples of |det(I + Du)|
  double bound = 0.0;      // (1 - mu_eps(u))^dim
};

JacobianReport jacobian_report(const AnalyticDiffeo& phi);

enum class Side { Left, Right };

struct EvolutionResult {
  Side side = Side::Right;
  TimeDependentField source;
  FlowPath path;

  AnalyticDiffeo at(double t) const;
};

EvolutionResult evol_right(const AdmissibleField& gamma, const SolveOptions& options = {});
/// t -> evol_right(-gamma)(t)^{-1}, inverted snapshot by snapshot.
EvolutionResult evol_left(const AdmissibleField& gamma, const SolveOptions& options = {});
/// Evol(gamma)(t) from one backward solve of the time-reversed field on [0, t].
AnalyticDiffeo evol_left_direct(const AdmissibleField& gamma, double t, const SolveOptions& options = {});

/// Fl_{t, t0} = zeta(t) o zeta(t0)^{-1} for a right evolution zeta.
AnalyticDiffeo flow_two_param(const EvolutionResult& right, double t, double t0);
AnalyticDiffeo flow_two_param(const AdmissibleField& gamma, double t, double t0,
                              const SolveOptions& options = {});

/// (D phi)^{-1} (X o phi), i.e. Ad(phi^{-1}) X.
FourierMap pullback_field(const AnalyticDiffeo& phi, const FourierMap& x,
                          const CompositionOptions& options = {});
/// (D phi X) o phi^{-1}.
FourierMap adjoint(const AnalyticDiffeo& phi, const FourierMap& x, const CompositionOptions& options = {});

/// t -> Ad(Evol(eta)(t))^{-1} gamma(t) + eta(t).
TimeDependentField odot(const AdmissibleField& gamma, const AdmissibleField& eta,
                        const SolveOptions& options = {});

struct DerivativeReport {
  FourierMap finite_difference;
  FourierMap formula;
  double discrepancy = 0.0;
};

/// Central difference of u(Evol(tau gamma)(t)) at tau = 0 against int_0^t gamma;
/// discrepancy in nu_eps. Only tau gamma needs to be admissible.
DerivativeReport derivative_at_zero(const TimeDependentField& gamma, double eps, double t, double tau,
                                    const SolveOptions& options = {});

struct ProbeDerivativeReport {
  std::vector<double> probes;
  std::vector<double> finite_difference;
  std::vector<double> formula;
  FourierMap w;  // W(t)
  double discrepancy = 0.0;
};

/// Central difference of Evol(eta + tau gamma)(t) at 32 real probes against
/// W(t) o Evol(eta)(t), W(t) = int_0^t Ad(Evol(eta)(s)) gamma(s) ds. One-dimensional.
ProbeDerivativeReport derivative_at_eta(const AdmissibleField& eta, const TimeDependentField& gamma, double t,
                                        double tau, const SolveOptions& options = {});

struct TrotterPoint {
  int n = 0;
  double distance = 0.0;
};

/// Sampled distance between (exp(v/n) exp(w/n))^n and exp(v + w) for each n.
std::vector<TrotterPoint> trotter(const FourierMap& v, const FourierMap& w, double eps,
                                  const std::vector<int>& ns, const SolveOptions& options = {});

struct PointwiseRow {
  std::size_t probe = 0;
  double time = 0.0;
  double residual = 0.0;
};

struct PointwiseReport {
  bool pass = true;
  double max_residual = 0.0;
  double worst_time = 0.0;
  std::vector<PointwiseRow> rows;
};

/// Scalar integral equation of the candidate's side at every grid time, for each real probe.
PointwiseReport verify_evolution_pointwise(const EvolutionResult& candidate, const TimeDependentField& gamma,
                                           const std::vector<CPoint>& probes,
                                           double tol = kTolPointwise) noexcept;

}  // namespace torusflow
