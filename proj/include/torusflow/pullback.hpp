#pragma once

#include <Eigen/Dense>
#include <vector>

#include "torusflow/evolution.hpp"

namespace torusflow {

/// Window onto f -> f o phi: a(j, k) = coefficient j of e_k o phi, e_k(x) = exp(2 pi i k.x),
/// rows over |j|_1 <= rows_order, columns over |k|_1 <= cols_order (lattice order).
struct PullbackMatrix {
  int dim = 1;
  int rows_order = 0;
  int cols_order = 0;
  Eigen::MatrixXcd a;

  /// Matrix-vector product on the coefficients of a scalar f of order <= cols_order.
  FourierMap apply(const FourierMap& f) const;
  /// max |a(-j, -k) - conj(a(j, k))|
  double reality_defect() const;
};

/// f o phi for a scalar f.
FourierMap pullback_apply(const AnalyticDiffeo& phi, const FourierMap& f, const CompositionOptions& options = {});

/// Columns are the truncations of e_k o phi; rows_order < 0 means rows_order = cols_order.
PullbackMatrix pullback_matrix(const AnalyticDiffeo& phi, int cols_order, int rows_order = -1);

/// || M(phi o psi) - M(psi; K x K2) M(phi; K2 x K) ||_max with K2 = K + 24.
double contravariance_defect(const AnalyticDiffeo& phi, const AnalyticDiffeo& psi, int order);

struct AcIncrement {
  double ta = 0.0;
  double tb = 0.0;
  double increment = 0.0;  // max_{j,k} |dA_jk| / (2 pi max(|k|_1, 1))
  double bound = 0.0;      // int_ta^tb nu_0(gamma(s)) ds
};

struct PullbackPath {
  std::vector<double> times;
  std::vector<PullbackMatrix> matrices;
  std::vector<AcIncrement> increments;
  int violations = 0;
  /// max over grid midpoints and test functions of
  /// nu_0(d/dt (Fl_{t,t0})^* f - (Fl_{t,t0})^*(gamma(t).grad f)).
  double transport_residual = 0.0;
};

/// Matrices of (Fl_{t, t0})^* along the solver grid with the absolute-continuity
/// and transport-identity reports.
PullbackPath pullback_path(const AdmissibleField& gamma, double t0, int order, const SolveOptions& options = {});

/// || M(Fl_{t,t0}) - M(Fl_{s,t0}; K x K2) M(Fl_{t,s}; K2 x K) ||_max.
double pullback_cocycle_defect(const EvolutionResult& right, double t, double s, double t0, int order);

}  // namespace torusflow
