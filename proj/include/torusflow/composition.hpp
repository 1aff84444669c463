#pragma once

#include <optional>
#include <span>
#include <vector>

#include "torusflow/fourier_map.hpp"

namespace torusflow {

/// Uniform real grid with `size` points per dimension on [0,1)^dim.
struct GridSpec {
  int dim = 1;
  int size = 0;

  std::size_t points() const { return dim == 1 ? size : static_cast<std::size_t>(size) * size; }
  RPoint point(std::size_t p) const;
};

/// Smallest 2^a 3^b 5^c >= oversample * (2 * order + 1).
GridSpec composition_grid(int dim, int order, int oversample = 4);

/// Point values of a map on a grid, stored point-major: data[p * components + i].
struct GridValues {
  GridSpec grid;
  int components = 1;
  std::vector<Complex> data;

  Complex& at(std::size_t p, int i) { return data[p * components + i]; }
  Complex at(std::size_t p, int i) const { return data[p * components + i]; }
};

GridValues sample(const FourierMap& f, const GridSpec& grid);

struct Spectrum {
  FourierMap map;
  /// Share of the coefficient l1 mass carried by modes beyond the kept order.
  double tail_ratio = 0.0;
};

/// Forward transform of grid values, truncated to `order`.
Spectrum analyze(const GridValues& values, int order, bool real);

/// Values of f at arbitrary points (complex allowed), point-major as in GridValues.
std::vector<Complex> evaluate_many(const FourierMap& f, std::span<const CPoint> points);

struct CompositionOptions {
  double tol_trunc = 1e-9;
  int oversample = 4;
  /// Output truncation; defaults to the larger input order.
  std::optional<int> out_order;
};

/// Certified strip bookkeeping for a composition g(x + u(x)): the inner map is
/// used on |Im x| <= domain_eps and g is controlled on |Im z| <= target_eps.
struct StripReach {
  double domain_eps = 0.0;
  double target_eps = 0.0;
};

/// Bound on sup |Im u(x+iy)| over |y| <= eps for a real map u:
/// min(nu_eps(u), eps * beta_eps(u)).
double imaginary_reach(const FourierMap& u, double eps);

/// x -> g(x + perturbation(x)) for a degree-one torus map id + perturbation.
FourierMap compose(const FourierMap& g, const FourierMap& perturbation,
                   const CompositionOptions& options = {},
                   std::optional<StripReach> reach = std::nullopt);

/// x -> g(inner(x)) for a periodic inner map with values in R^dim.
FourierMap compose_periodic(const FourierMap& g, const FourierMap& inner,
                            const CompositionOptions& options = {});

/// Jacobian of a vector field as scalar entries, row-major (i * dim + j).
std::vector<FourierMap> jacobian(const FourierMap& f);

/// Pointwise x -> Du(x) v(x), truncated to u's order.
FourierMap apply_jacobian(const FourierMap& u, const FourierMap& v,
                          const CompositionOptions& options = {});

/// Pointwise product of two maps with equal component counts (componentwise),
/// or of a scalar map with a vector map.
FourierMap pointwise_multiply(const FourierMap& a, const FourierMap& b,
                              const CompositionOptions& options = {});

}  // namespace torusflow
