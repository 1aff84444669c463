#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "torusflow/fourier_map.hpp"
#include "torusflow/random_fields.hpp"

namespace torusflow {

inline constexpr int kMaxLevels = 6;

/// Level n of the strip scale: A_{eps_n} truncated at |k|_1 <= order, q_n = nu_{eps_n},
/// U_n = open q_n-ball of radius r_n.
struct ScaleLevel {
  int n = 1;
  int dim = 1;
  double eps = 0.1;
  int order = 8;
  double radius = 1.0;

  double q(const FourierMap& f) const { return f.nu(eps); }
  bool contains(const FourierMap& f) const { return q(f) < radius; }
};

/// Checks eps_1 > eps_2 > ... > 0, r_1 <= r_2 <= ..., shared order, at most kMaxLevels levels.
void validate_scale(const std::vector<ScaleLevel>& levels);

/// eps_n = eps1 2^{1-n}, r_n = r1 (1 + growth (n - 1)).
std::vector<ScaleLevel> geometric_scale(int count, double eps1, int order, double r1, double growth = 0.0,
                                        int dim = 1);

/// A concrete map between strip spaces with its analytic constants.
struct TestMap {
  std::string name;
  std::function<FourierMap(const FourierMap&)> eval;
  /// L_n with p(f(x) - f(y)) <= L_n q_n(x - y) on U_n.
  std::function<double(const ScaleLevel&)> lipschitz;
  /// M_n >= sup p(f(U_n)).
  std::function<double(const ScaleLevel&)> sup_bound;
  std::string derivation;
};

/// u -> c u
TestMap linear_map(double c);
/// u -> value (a real scalar map)
TestMap constant_map(const FourierMap& value);
/// u -> u u, exact product at twice the order. L_n = 2 r_n, M_n = r_n^2 from nu(uv) <= nu(u) nu(v).
TestMap square_map();

/// Per-level data p(f(x)-f(y)) <= lipschitz * q_n(x-y) on U_n.
struct LevelLipschitzCert {
  int n = 1;
  double lipschitz = 0.0;
  std::string derivation;
};

std::vector<LevelLipschitzCert> certify_levels(const TestMap& f, const std::vector<ScaleLevel>& levels);

struct NeighborhoodSample {
  std::uint64_t id = 0;
  int depth = 0;
  std::vector<FourierMap> z;        // z_1 .. z_depth
  std::vector<FourierMap> partial;  // y_0 = 0, y_1, .., y_depth
  std::vector<double> radius;       // min(eps 2^{-k} / L_k, 2^{-k} r_k)
  const FourierMap& y() const { return partial.back(); }
};

/// Points y = z_1 + .. + z_n with z_k in B^{L_k q_k}_{eps 2^{-k}}(0) cap 2^{-k} U_k.
class NeighborhoodSampler {
 public:
  NeighborhoodSampler(std::vector<ScaleLevel> levels, std::vector<LevelLipschitzCert> certs, double eps_target,
                      std::uint64_t seed, double rho = 0.3);

  /// Sample `id` depends only on (seed, id); a share of the draws sits at 0.99 of the boundary.
  NeighborhoodSample draw(std::uint64_t id, int depth) const;
  /// Same bookkeeping for caller-supplied z_k.
  NeighborhoodSample assemble(std::vector<FourierMap> z) const;

  const std::vector<ScaleLevel>& levels() const { return levels_; }
  const std::vector<LevelLipschitzCert>& certs() const { return certs_; }
  double eps_target() const { return eps_target_; }
  double level_radius(int k) const { return radius_[k - 1]; }

 private:
  std::vector<ScaleLevel> levels_;
  std::vector<LevelLipschitzCert> certs_;
  double eps_target_;
  std::uint64_t seed_;
  double rho_;
  std::vector<double> radius_;
};

/// Target seminorm p = nu_{eps}.
struct TargetSeminorm {
  double eps = 0.0;
  double operator()(const FourierMap& f) const { return f.nu(eps); }
};

struct ContinuityRow {
  std::uint64_t sample_id = 0;
  int depth = 0;
  double telescoped_bound = 0.0;  // sum_k L_k q_k(z_k)
  double observed_p = 0.0;        // p(f(y) - f(0))
  bool pass = false;
};

struct ContinuityReport {
  double max_observed = 0.0;
  int violations = 0;
  long assertions = 0;
  std::string first_failure;
  std::vector<ContinuityRow> rows;
};

/// Depths cycle through 1..levels. Each telescoping step is asserted on its own:
/// y_{k-1}, y_k in U_k; q_{k} <= q_{k-1} on z_k; p(f(y_k)-f(y_{k-1})) <= L_k q_k(z_k) < eps 2^{-k};
/// p(f(y)-f(0)) <= sum of steps <= telescoped bound < eps.
ContinuityReport verify_continuity_estimate(const TestMap& f, const NeighborhoodSampler& sampler,
                                            const TargetSeminorm& p, int count, int workers = 1);

struct RatioReport {
  double max_ratio = 0.0;
  int samples = 0;
};

/// max p(df(v, w)) / (M_n q(w)), q = 3 q_n / r_n the gauge of U_n / 3, v in U_n / 3,
/// df by central differences with step 1e-5 / q_n(w).
RatioReport cauchy_bound_check(const TestMap& f, const ScaleLevel& level, const TargetSeminorm& p, int samples,
                               std::uint64_t seed);

/// max p(f(w) - f(v)) / (M_n q(w - v)) over pairs in U_n / 3.
RatioReport third_ball_lipschitz(const TestMap& f, const ScaleLevel& level, const TargetSeminorm& p, int samples,
                                 std::uint64_t seed);

/// CSV with header sample_id,depth,telescoped_bound,observed_p,pass.
std::string continuity_csv(const ContinuityReport& report);

}  // namespace torusflow
