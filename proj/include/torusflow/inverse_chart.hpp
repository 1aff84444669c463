#pragma once

#include <utility>
#include <vector>

#include "torusflow/local_flow.hpp"

namespace torusflow {

/// coeff(z) * w^power, componentwise; coeff has dim components.
struct AdditionTerm {
  Index power{0, 0};
  FourierMap coeff;
};

/// alpha(z, w) = z + sum of terms. The constant and linear parts must reduce
/// symbolically to 0 and to w; only the higher-order terms are kept.
class LocalAddition {
 public:
  static LocalAddition flat(int dim);
  /// Throws InvalidArgument unless alpha(z, 0) = z and d_w alpha(z, 0) = id.
  LocalAddition(int dim, std::vector<AdditionTerm> terms);
  /// z + w plus the given terms of degree >= 2.
  static LocalAddition with_identity(int dim, std::vector<AdditionTerm> nonlinear);

  int dim() const { return dim_; }
  bool is_flat() const { return terms_.empty(); }
  const std::vector<AdditionTerm>& nonlinear_terms() const { return terms_; }

  CPoint operator()(const CPoint& z, const CPoint& w) const;
  /// d_w alpha(z, w), row-major.
  std::array<Complex, 4> dw(const CPoint& z, const CPoint& w) const;
  /// (z, w) -> alpha(z - shift, w) + shift.
  LocalAddition translated(const RPoint& shift) const;

 private:
  int dim_ = 1;
  std::vector<AdditionTerm> terms_;
};

struct InverseChartCert {
  double delta0 = 0.0;
  double eps = 0.0;
  bool unbounded = false;  // flat addition; delta0 is the sentinel 1
  /// (delta, majorant of h on the strip) for every delta tried.
  std::vector<std::pair<double, double>> derivation_log;
  /// max of h(z, w) = ||d_w alpha(z, w) - id||_op over the point scan at delta0.
  double scanned_max = 0.0;
  std::size_t scanned_points = 0;
};

/// Largest delta = 2^(4 - j/64) whose majorant of h on |Im z| <= eps, |w| <= delta is <= 1/2.
InverseChartCert find_delta0(const LocalAddition& alpha, double eps);

inline constexpr double kTolLocalInverse = 1e-12;

/// w with alpha(z, w) = target by w <- w + (target - alpha(z, w)); residuals
/// max|target - alpha(z, w)| per step go to `residuals` if given.
CPoint invert_local(const LocalAddition& alpha, const InverseChartCert& cert, const CPoint& z,
                    const CPoint& target, double delta, std::vector<double>* residuals = nullptr);

/// t -> w(t) with alpha(x, w(t)(x)) = x + u(t)(x) on the sampling grid.
ACPath flow_to_chart(const FlowPath& flow, const LocalAddition& alpha, const InverseChartCert& cert,
                     const CompositionOptions& options = {});

/// max over breakpoints of the coefficient distance between the chart path of
/// the flow seen through x -> x + shift and the translated chart path.
double chart_relatedness_defect(const FlowPath& flow, const LocalAddition& alpha, double eps,
                                const RPoint& shift);

}  // namespace torusflow
