#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "torusflow/composition.hpp"
#include "torusflow/fourier_map.hpp"

namespace torusflow {

/// Breakpoints 0 = t_0 < t_1 < ... < t_M = 1.
class TimeGrid {
 public:
  TimeGrid() : points_{0.0, 1.0} {}
  explicit TimeGrid(std::vector<double> breakpoints);
  static TimeGrid uniform(int intervals);

  const std::vector<double>& points() const { return points_; }
  std::size_t intervals() const { return points_.size() - 1; }
  double start(std::size_t i) const { return points_[i]; }
  double end(std::size_t i) const { return points_[i + 1]; }
  double width(std::size_t i) const { return points_[i + 1] - points_[i]; }
  /// Interval containing t; intervals are [t_i, t_{i+1}) except the last, which is closed.
  std::size_t locate(double t) const;

  TimeGrid merged(const TimeGrid& other) const;
  /// Split every interval into equal parts no wider than max_step.
  TimeGrid refined(double max_step) const;
  /// Add breakpoints (ignoring ones already present).
  TimeGrid with_points(const std::vector<double>& extra) const;

  bool operator==(const TimeGrid& other) const { return points_ == other.points_; }

 private:
  std::vector<double> points_;
};

/// Time dependence on one grid interval [a, b):
///   gamma(t) = sum_j (t - a)^j poly[j] + cos(omega t) cosine + sin(omega t) sine.
/// Constant pieces carry one poly term and no harmonic part.
struct Piece {
  std::vector<FourierMap> poly;  // 1 to 4 terms
  double omega = 0.0;
  std::optional<FourierMap> cosine;
  std::optional<FourierMap> sine;

  enum class Kind { Constant, Polynomial, Harmonic, Mixed };
  Kind kind() const;
  bool has_harmonic() const { return cosine.has_value(); }
  const FourierMap& shape() const { return poly.front(); }

  FourierMap value(double t, double a) const;
  /// Integral over [t0, t1], both inside the piece whose left end is a.
  FourierMap integral(double t0, double t1, double a) const;
  /// Same function written relative to a new left end.
  Piece rebased(double old_a, double new_a) const;
  Piece scaled(double s) const;
  static Piece constant(FourierMap value);
};

/// A representative of an L^p path of vector fields: piecewise polynomial or
/// harmonic in time, with a strip half-width at which the field is admissible.
class TimeDependentField {
 public:
  TimeDependentField() = default;
  TimeDependentField(TimeGrid grid, std::vector<Piece> pieces, double scale);

  static TimeDependentField constant(const FourierMap& value, double scale);
  static TimeDependentField zero(int dim, int components, int order, double scale);

  const TimeGrid& grid() const { return grid_; }
  const std::vector<Piece>& pieces() const { return pieces_; }
  double scale() const { return scale_; }
  int dim() const { return shape().dim(); }
  int components() const { return shape().components(); }
  int order() const { return shape().order(); }
  const FourierMap& shape() const { return pieces_.front().shape(); }

  FourierMap value(double t) const;
  FourierMap integral(double t0, double t1) const;

  /// Same field on a finer grid containing this one.
  TimeDependentField on_grid(const TimeGrid& finer) const;
  TimeDependentField scaled(double s) const;
  TimeDependentField with_scale(double scale) const;
  /// t -> -gamma(1 - t)
  TimeDependentField reversed_negated() const;
  /// r -> (b - a) gamma(a + (b - a) r) on [0, 1]; b < a runs backwards.
  TimeDependentField reparametrized(double a, double b) const;

  friend TimeDependentField operator+(const TimeDependentField& a, const TimeDependentField& b);
  friend TimeDependentField operator-(const TimeDependentField& a, const TimeDependentField& b);

 private:
  TimeGrid grid_;
  std::vector<Piece> pieces_;
  double scale_ = 0.0;
};

struct StripNorm {
  enum class Kind { Nu, Beta };
  Kind kind = Kind::Nu;
  double eps = 0.0;

  double operator()(const FourierMap& f) const { return kind == Kind::Nu ? f.nu(eps) : f.beta(eps); }
  static StripNorm nu(double eps) { return {Kind::Nu, eps}; }
  static StripNorm beta(double eps) { return {Kind::Beta, eps}; }
};

/// p in {1, 2, inf}; pass p = 0 for the sup norm.
double lp_norm(const TimeDependentField& gamma, int p, StripNorm seminorm);
inline constexpr int kInfinity = 0;

/// An absolutely continuous path: snapshots at grid breakpoints plus the
/// derivative class.
struct ACPath {
  TimeGrid grid;
  std::vector<FourierMap> values;
  TimeDependentField derivative;

  FourierMap value(double t) const;
  /// max_j |values_j - values_0 - integral of derivative over [0, t_j]|
  /// (coefficient-wise), relative to max(1, max_j |values_j|).
  double integral_defect() const;
  /// Largest coefficient jump when re-deriving each snapshot from its left
  /// neighbour; zero for paths built from a primitive.
  double continuity_defect() const;
};

inline constexpr double kTolIntegral = 1e-12;

ACPath integrate_primitive(const TimeDependentField& gamma);

/// A map on FourierMaps used as a superposition operator u -> f(u), with its
/// differential df(u; v) and a norm-bound domain test.
struct SuperpositionRule {
  std::string name;
  std::function<FourierMap(const FourierMap&)> apply;
  std::function<FourierMap(const FourierMap&, const FourierMap&)> differential;
  std::function<bool(const FourierMap&)> in_domain;
  /// Present for affine rules; maps derivative pieces exactly.
  std::function<FourierMap(const FourierMap&)> linear_part;
};

SuperpositionRule identity_rule();
SuperpositionRule scaling_rule(double factor);
/// u -> u o u on scalar maps over T^1; domain nu_eps(u) <= radius.
SuperpositionRule self_composition_rule(double eps, double radius,
                                        const CompositionOptions& options = {});

struct PostcomposeOptions {
  double max_step = 1.0 / 64.0;
  double tol_chain = 1e-9;
};

ACPath ac_postcompose(const ACPath& eta, const SuperpositionRule& f,
                      const PostcomposeOptions& options = {});

/// Piecewise-cubic field through 4 Gauss-Legendre samples per interval of
/// `grid`. The interpolant integrates exactly like the 4-point Gauss rule.
TimeDependentField sample_cubic(const TimeGrid& grid, double scale,
                                const std::function<FourierMap(double)>& sampler);

}  // namespace torusflow
