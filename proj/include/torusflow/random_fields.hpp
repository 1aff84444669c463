#pragma once

#include <random>

#include "torusflow/time_field.hpp"

namespace torusflow {

using Rng = std::mt19937_64;

/// Real map with Gaussian coefficients damped by exp(-2 pi |k|_1 rho).
FourierMap random_map(Rng& rng, int dim, int components, int order, double rho = 0.2);

struct RandomFieldSpec {
  int dim = 1;
  int order = 32;
  int pieces = 4;       // piecewise-constant in time on a uniform grid
  double eps = 0.05;    // working half-width; the field scale is 2 eps
  double theta_min = 0.05;
  double theta_max = 0.45;
  double rho = 0.2;
};

/// Piecewise-constant field with L1-in-time beta_{2 eps} norm drawn uniformly
/// from [theta_min, theta_max].
TimeDependentField random_admissible_field(Rng& rng, const RandomFieldSpec& spec);

}  // namespace torusflow
