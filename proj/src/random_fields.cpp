#include "torusflow/random_fields.hpp"

#include <cmath>

#include "torusflow/errors.hpp"

namespace torusflow {

FourierMap random_map(Rng& rng, int dim, int components, int order, double rho) {
  std::normal_distribution<double> normal;
  FourierMap f = FourierMap::zero(dim, components, order);
  const Lattice& lat = f.lattice();
  for (std::size_t m = 0; m < lat.size(); ++m) {
    const Index& k = lat[m];
    if (lat.mirror(m) < m) continue;
    const double damp = std::exp(-kTwoPi * l1_norm(k, dim) * rho);
    for (int i = 0; i < components; ++i) {
      const bool self_mirror = lat.mirror(m) == m;
      const Complex c(normal(rng) * damp, self_mirror ? 0.0 : normal(rng) * damp);
      f.set_coeff(k, i, c);
    }
  }
  return f;
}

TimeDependentField random_admissible_field(Rng& rng, const RandomFieldSpec& spec) {
  require(spec.pieces >= 1, "random field needs at least one piece");
  require(spec.theta_min > 0.0 && spec.theta_max < 0.5 && spec.theta_min <= spec.theta_max,
          "target norm range must lie inside (0, 1/2)");
  std::uniform_real_distribution<double> unit(0.2, 1.0);
  std::uniform_real_distribution<double> theta_dist(spec.theta_min, spec.theta_max);
  const TimeGrid grid = TimeGrid::uniform(spec.pieces);
  std::vector<Piece> pieces;
  double total = 0.0;
  for (int j = 0; j < spec.pieces; ++j) {
    FourierMap f = random_map(rng, spec.dim, spec.dim, spec.order, spec.rho);
    f *= unit(rng) / f.beta(2.0 * spec.eps);
    total += f.beta(2.0 * spec.eps) * grid.width(j);
    pieces.push_back(Piece::constant(std::move(f)));
  }
  const double theta = theta_dist(rng);
  TimeDependentField out(grid, std::move(pieces), 2.0 * spec.eps);
  return out.scaled(theta / total);
}

}  // namespace torusflow
