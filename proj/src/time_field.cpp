#include "torusflow/time_field.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "torusflow/errors.hpp"
#include "torusflow/quadrature.hpp"

namespace torusflow {

// ---------------------------------------------------------------- TimeGrid

TimeGrid::TimeGrid(std::vector<double> breakpoints) : points_(std::move(breakpoints)) {
  require(points_.size() >= 2, "time grid needs at least two breakpoints");
  require(points_.front() == 0.0 && points_.back() == 1.0, "time grid must span [0, 1]");
  for (std::size_t i = 1; i < points_.size(); ++i) {
    require(points_[i] > points_[i - 1], "time grid must be strictly increasing");
  }
}

TimeGrid TimeGrid::uniform(int intervals) {
  require(intervals >= 1, "uniform grid needs at least one interval");
  std::vector<double> p(intervals + 1);
  for (int i = 0; i <= intervals; ++i) p[i] = static_cast<double>(i) / intervals;
  p.back() = 1.0;
  return TimeGrid(std::move(p));
}

std::size_t TimeGrid::locate(double t) const {
  if (t >= points_.back()) return intervals() - 1;
  if (t <= points_.front()) return 0;
  auto it = std::upper_bound(points_.begin(), points_.end(), t);
  return static_cast<std::size_t>(it - points_.begin()) - 1;
}

TimeGrid TimeGrid::merged(const TimeGrid& other) const {
  std::vector<double> p;
  std::set_union(points_.begin(), points_.end(), other.points_.begin(), other.points_.end(),
                 std::back_inserter(p));
  return TimeGrid(std::move(p));
}

TimeGrid TimeGrid::refined(double max_step) const {
  require(max_step > 0.0, "refinement step must be positive");
  std::vector<double> p{0.0};
  for (std::size_t i = 0; i < intervals(); ++i) {
    const double a = start(i);
    const double b = end(i);
    const int parts = std::max(1, static_cast<int>(std::ceil((b - a) / max_step - 1e-12)));
    for (int j = 1; j < parts; ++j) p.push_back(a + (b - a) * j / parts);
    p.push_back(b);
  }
  return TimeGrid(std::move(p));
}

TimeGrid TimeGrid::with_points(const std::vector<double>& extra) const {
  std::vector<double> p = points_;
  for (double t : extra) {
    require(t >= 0.0 && t <= 1.0, "extra breakpoint outside [0, 1]");
    p.push_back(t);
  }
  std::sort(p.begin(), p.end());
  p.erase(std::unique(p.begin(), p.end()), p.end());
  return TimeGrid(std::move(p));
}

// ------------------------------------------------------------------- Piece

Piece::Kind Piece::kind() const {
  if (has_harmonic()) return poly.size() > 1 ? Kind::Mixed : Kind::Harmonic;
  return poly.size() > 1 ? Kind::Polynomial : Kind::Constant;
}

FourierMap Piece::value(double t, double a) const {
  const double s = t - a;
  FourierMap out = poly.back();
  for (std::size_t j = poly.size() - 1; j-- > 0;) {
    out *= s;
    out += poly[j];
  }
  if (has_harmonic()) {
    out += std::cos(omega * t) * *cosine;
    out += std::sin(omega * t) * *sine;
  }
  return out;
}

FourierMap Piece::integral(double t0, double t1, double a) const {
  const double s0 = t0 - a;
  const double s1 = t1 - a;
  FourierMap out = FourierMap::zero(shape().dim(), shape().components(), shape().order());
  double p0 = s0;
  double p1 = s1;
  for (std::size_t j = 0; j < poly.size(); ++j) {
    out += ((p1 - p0) / static_cast<double>(j + 1)) * poly[j];
    p0 *= s0;
    p1 *= s1;
  }
  if (has_harmonic()) {
    out += ((std::sin(omega * t1) - std::sin(omega * t0)) / omega) * *cosine;
    out += ((std::cos(omega * t0) - std::cos(omega * t1)) / omega) * *sine;
  }
  return out;
}

Piece Piece::rebased(double old_a, double new_a) const {
  const double d = new_a - old_a;
  if (d == 0.0) return *this;
  Piece out = *this;
  // q_i = sum_{j >= i} C(j, i) d^{j - i} p_j
  for (std::size_t i = 0; i < poly.size(); ++i) {
    FourierMap acc = poly[i];
    double binom = 1.0;
    double dp = 1.0;
    for (std::size_t j = i + 1; j < poly.size(); ++j) {
      binom = binom * static_cast<double>(j) / static_cast<double>(j - i);
      dp *= d;
      acc += (binom * dp) * poly[j];
    }
    out.poly[i] = std::move(acc);
  }
  return out;
}

Piece Piece::scaled(double s) const {
  Piece out = *this;
  for (auto& p : out.poly) p *= s;
  if (out.cosine) *out.cosine *= s;
  if (out.sine) *out.sine *= s;
  return out;
}

Piece Piece::constant(FourierMap value) {
  Piece p;
  p.poly.push_back(std::move(value));
  return p;
}

// ------------------------------------------------------ TimeDependentField

TimeDependentField::TimeDependentField(TimeGrid grid, std::vector<Piece> pieces, double scale)
    : grid_(std::move(grid)), pieces_(std::move(pieces)), scale_(scale) {
  require(pieces_.size() == grid_.intervals(), "one piece per grid interval required");
  require(scale_ > 0.0, "field scale must be positive");
  const FourierMap& ref = pieces_.front().shape();
  auto check = [&](const FourierMap& f) {
    require(f.same_shape(ref), "all pieces must share dimension, components and truncation");
    require(f.is_real(), "field pieces must be real maps");
  };
  for (const Piece& p : pieces_) {
    require(!p.poly.empty() && p.poly.size() <= 4, "piece polynomial degree must be at most 3");
    for (const auto& f : p.poly) check(f);
    require(p.cosine.has_value() == p.sine.has_value(), "harmonic part needs cosine and sine");
    if (p.has_harmonic()) {
      require(p.omega != 0.0, "harmonic piece needs nonzero frequency");
      check(*p.cosine);
      check(*p.sine);
    }
  }
}

TimeDependentField TimeDependentField::constant(const FourierMap& value, double scale) {
  return TimeDependentField(TimeGrid(), {Piece::constant(value)}, scale);
}

TimeDependentField TimeDependentField::zero(int dim, int components, int order, double scale) {
  return constant(FourierMap::zero(dim, components, order), scale);
}

FourierMap TimeDependentField::value(double t) const {
  const std::size_t i = grid_.locate(t);
  return pieces_[i].value(t, grid_.start(i));
}

FourierMap TimeDependentField::integral(double t0, double t1) const {
  if (t1 < t0) return -integral(t1, t0);
  FourierMap out = FourierMap::zero(dim(), components(), order());
  if (t1 == t0) return out;
  std::size_t i = grid_.locate(t0);
  double lo = t0;
  while (lo < t1) {
    const double hi = std::min(t1, grid_.end(i));
    out += pieces_[i].integral(lo, hi, grid_.start(i));
    lo = hi;
    if (++i >= grid_.intervals()) break;
  }
  return out;
}

TimeDependentField TimeDependentField::on_grid(const TimeGrid& finer) const {
  if (finer == grid_) return *this;
  std::vector<Piece> out;
  out.reserve(finer.intervals());
  for (std::size_t j = 0; j < finer.intervals(); ++j) {
    const double mid = 0.5 * (finer.start(j) + finer.end(j));
    const std::size_t i = grid_.locate(mid);
    require(finer.start(j) >= grid_.start(i) && finer.end(j) <= grid_.end(i),
            "target grid must refine the field's grid");
    out.push_back(pieces_[i].rebased(grid_.start(i), finer.start(j)));
  }
  return TimeDependentField(finer, std::move(out), scale_);
}

TimeDependentField TimeDependentField::scaled(double s) const {
  TimeDependentField out = *this;
  for (auto& p : out.pieces_) p = p.scaled(s);
  return out;
}

TimeDependentField TimeDependentField::with_scale(double scale) const {
  TimeDependentField out = *this;
  require(scale > 0.0, "field scale must be positive");
  out.scale_ = scale;
  return out;
}

TimeDependentField TimeDependentField::reversed_negated() const {
  std::vector<double> pts(grid_.points().size());
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = 1.0 - grid_.points()[pts.size() - 1 - i];
  pts.front() = 0.0;
  pts.back() = 1.0;
  TimeGrid rev(std::move(pts));
  std::vector<Piece> out;
  out.reserve(pieces_.size());
  for (std::size_t j = 0; j < pieces_.size(); ++j) {
    const std::size_t i = pieces_.size() - 1 - j;
    const Piece& src = pieces_[i];
    // Source local variable s = t - a_i with t = 1 - t'; on the new interval
    // [1 - b_i, 1 - a_i) write s = (b_i - a_i) - s' where s' = t' - (1 - b_i).
    const double w = grid_.width(i);
    Piece p;
    p.poly.assign(src.poly.size(), FourierMap::zero(dim(), components(), order()));
    for (std::size_t k = 0; k < src.poly.size(); ++k) {
      // (w - s')^k = sum_r C(k, r) w^{k - r} (-s')^r
      double binom = 1.0;
      for (std::size_t r = 0; r <= k; ++r) {
        if (r > 0) binom = binom * static_cast<double>(k - r + 1) / static_cast<double>(r);
        const double coef = -binom * std::pow(w, static_cast<double>(k - r)) * ((r % 2) ? -1.0 : 1.0);
        p.poly[r] += coef * src.poly[k];
      }
    }
    if (src.has_harmonic()) {
      // cos(w(1 - t)) = cos w cos wt + sin w sin wt
      // sin(w(1 - t)) = sin w cos wt - cos w sin wt
      const double c = std::cos(src.omega);
      const double s = std::sin(src.omega);
      p.omega = src.omega;
      p.cosine = -(c * *src.cosine + s * *src.sine);
      p.sine = -(s * *src.cosine - c * *src.sine);
    }
    out.push_back(std::move(p));
  }
  return TimeDependentField(std::move(rev), std::move(out), scale_);
}

TimeDependentField TimeDependentField::reparametrized(double a, double b) const {
  require(a >= 0.0 && a <= 1.0 && b >= 0.0 && b <= 1.0 && a != b,
          "reparametrization endpoints must be distinct times in [0, 1]");
  const double c = b - a;
  std::vector<double> pts{0.0, 1.0};
  for (double t : grid_.points()) {
    const double r = (t - a) / c;
    if (r > 0.0 && r < 1.0) pts.push_back(r);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  TimeGrid grid(std::move(pts));
  std::vector<Piece> out;
  out.reserve(grid.intervals());
  for (std::size_t j = 0; j < grid.intervals(); ++j) {
    const double r0 = grid.start(j);
    const std::size_t i = grid_.locate(a + c * 0.5 * (r0 + grid.end(j)));
    const Piece& src = pieces_[i];
    // s - a_i = sigma + c r' with r' = r - r0
    const double sigma = a + c * r0 - grid_.start(i);
    Piece p;
    p.poly.assign(src.poly.size(), FourierMap::zero(dim(), components(), order()));
    for (std::size_t k = 0; k < src.poly.size(); ++k) {
      double binom = 1.0;
      for (std::size_t r = 0; r <= k; ++r) {
        if (r > 0) binom = binom * static_cast<double>(k - r + 1) / static_cast<double>(r);
        const double coef = c * binom * std::pow(sigma, static_cast<double>(k - r)) *
                            std::pow(c, static_cast<double>(r));
        p.poly[r] += coef * src.poly[k];
      }
    }
    if (src.has_harmonic()) {
      // cos(w (a + c r)) and sin(w (a + c r)) in terms of frequency w c.
      const double ca = std::cos(src.omega * a);
      const double sa = std::sin(src.omega * a);
      p.omega = src.omega * c;
      p.cosine = c * (ca * *src.cosine + sa * *src.sine);
      p.sine = c * (ca * *src.sine - sa * *src.cosine);
    }
    out.push_back(std::move(p));
  }
  return TimeDependentField(std::move(grid), std::move(out), scale_);
}

namespace {

Piece add_pieces(const Piece& a, const Piece& b, double sign) {
  Piece out;
  const std::size_t n = std::max(a.poly.size(), b.poly.size());
  for (std::size_t j = 0; j < n; ++j) {
    FourierMap term = j < a.poly.size() ? a.poly[j] : FourierMap::zero(a.shape().dim(), a.shape().components(), a.shape().order());
    if (j < b.poly.size()) term += sign * b.poly[j];
    out.poly.push_back(std::move(term));
  }
  if (a.has_harmonic() && b.has_harmonic()) {
    require(a.omega == b.omega, "cannot add harmonic pieces with different frequencies");
    out.omega = a.omega;
    out.cosine = *a.cosine + sign * *b.cosine;
    out.sine = *a.sine + sign * *b.sine;
  } else if (a.has_harmonic()) {
    out.omega = a.omega;
    out.cosine = a.cosine;
    out.sine = a.sine;
  } else if (b.has_harmonic()) {
    out.omega = b.omega;
    out.cosine = sign * *b.cosine;
    out.sine = sign * *b.sine;
  }
  return out;
}

TimeDependentField combine(const TimeDependentField& a, const TimeDependentField& b, double sign) {
  require(a.shape().same_shape(b.shape()), "adding fields of different shape");
  const TimeGrid grid = a.grid().merged(b.grid());
  const TimeDependentField fa = a.on_grid(grid);
  const TimeDependentField fb = b.on_grid(grid);
  std::vector<Piece> pieces;
  pieces.reserve(grid.intervals());
  for (std::size_t i = 0; i < grid.intervals(); ++i) {
    pieces.push_back(add_pieces(fa.pieces()[i], fb.pieces()[i], sign));
  }
  return TimeDependentField(grid, std::move(pieces), std::min(a.scale(), b.scale()));
}

}  // namespace

TimeDependentField operator+(const TimeDependentField& a, const TimeDependentField& b) {
  return combine(a, b, 1.0);
}

TimeDependentField operator-(const TimeDependentField& a, const TimeDependentField& b) {
  return combine(a, b, -1.0);
}

// ----------------------------------------------------------------- lp_norm

double lp_norm(const TimeDependentField& gamma, int p, StripNorm seminorm) {
  require(p == 1 || p == 2 || p == kInfinity, "p must be 1, 2 or infinity");
  if (seminorm.eps > gamma.scale()) {
    std::ostringstream msg;
    msg << "requested strip half-width " << seminorm.eps << " exceeds field scale " << gamma.scale();
    fail(ErrorKind::ScaleMismatch, msg.str());
  }
  const TimeGrid& grid = gamma.grid();
  double acc = 0.0;
  for (std::size_t i = 0; i < grid.intervals(); ++i) {
    const Piece& piece = gamma.pieces()[i];
    const double a = grid.start(i);
    const double b = grid.end(i);
    auto q = [&](double t) { return seminorm(piece.value(t, a)); };
    if (piece.kind() == Piece::Kind::Constant) {
      const double v = seminorm(piece.poly.front());
      acc = p == kInfinity ? std::max(acc, v) : acc + std::pow(v, p) * (b - a);
      continue;
    }
    if (p == kInfinity) {
      // Dense scan, then golden-section polish around the best sample.
      constexpr int kSamples = 257;
      int best = 0;
      double best_v = -1.0;
      for (int s = 0; s < kSamples; ++s) {
        const double v = q(a + (b - a) * s / (kSamples - 1));
        if (v > best_v) {
          best_v = v;
          best = s;
        }
      }
      double lo = a + (b - a) * std::max(0, best - 1) / (kSamples - 1);
      double hi = a + (b - a) * std::min(kSamples - 1, best + 1) / (kSamples - 1);
      const double g = 0.5 * (std::sqrt(5.0) - 1.0);
      for (int it = 0; it < 60; ++it) {
        const double x1 = hi - g * (hi - lo);
        const double x2 = lo + g * (hi - lo);
        if (q(x1) > q(x2)) hi = x2; else lo = x1;
      }
      acc = std::max({acc, best_v, q(0.5 * (lo + hi))});
      continue;
    }
    // The seminorm of a polynomial or harmonic piece has kinks where
    // coefficients vanish; adaptive Gauss-Kronrod resolves them.
    auto integrand = [&](double t) { return std::pow(q(t), p); };
    acc += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(integrand, a, b, 10, 1e-12);
  }
  return p == 2 ? std::sqrt(acc) : acc;
}

// ------------------------------------------------------------------ ACPath

FourierMap ACPath::value(double t) const {
  const std::size_t i = grid.locate(t);
  return values[i] + derivative.integral(grid.start(i), t);
}

double ACPath::integral_defect() const {
  double scale = 1.0;
  for (const auto& v : values) scale = std::max(scale, v.max_abs_coeff());
  double worst = 0.0;
  FourierMap acc = values.front();
  for (std::size_t j = 0; j < grid.intervals(); ++j) {
    acc += derivative.integral(grid.start(j), grid.end(j));
    worst = std::max(worst, coefficient_distance(values[j + 1], acc));
  }
  return worst / scale;
}

double ACPath::continuity_defect() const {
  double worst = 0.0;
  for (std::size_t j = 0; j < grid.intervals(); ++j) {
    const FourierMap right = values[j] + derivative.integral(grid.start(j), grid.end(j));
    worst = std::max(worst, coefficient_distance(values[j + 1], right));
  }
  return worst;
}

ACPath integrate_primitive(const TimeDependentField& gamma) {
  ACPath path;
  path.grid = gamma.grid();
  path.derivative = gamma;
  path.values.reserve(path.grid.points().size());
  path.values.push_back(FourierMap::zero(gamma.dim(), gamma.components(), gamma.order()));
  for (std::size_t i = 0; i < path.grid.intervals(); ++i) {
    path.values.push_back(path.values.back() +
                          gamma.pieces()[i].integral(path.grid.start(i), path.grid.end(i),
                                                     path.grid.start(i)));
  }
  return path;
}

// ------------------------------------------------------ superposition rules

SuperpositionRule identity_rule() {
  SuperpositionRule r;
  r.name = "identity";
  r.apply = [](const FourierMap& u) { return u; };
  r.differential = [](const FourierMap&, const FourierMap& v) { return v; };
  r.in_domain = [](const FourierMap&) { return true; };
  r.linear_part = [](const FourierMap& v) { return v; };
  return r;
}

SuperpositionRule scaling_rule(double factor) {
  SuperpositionRule r;
  r.name = "scaling";
  r.apply = [factor](const FourierMap& u) { return factor * u; };
  r.differential = [factor](const FourierMap&, const FourierMap& v) { return factor * v; };
  r.in_domain = [](const FourierMap&) { return true; };
  r.linear_part = [factor](const FourierMap& v) { return factor * v; };
  return r;
}

SuperpositionRule self_composition_rule(double eps, double radius, const CompositionOptions& options) {
  SuperpositionRule r;
  r.name = "self_composition";
  r.apply = [options](const FourierMap& u) { return compose_periodic(u, u, options); };
  r.differential = [options](const FourierMap& u, const FourierMap& v) {
    // d(u o u)(v) = v o u + (u' o u) v
    const FourierMap du = u.derivative(0);
    return compose_periodic(v, u, options) +
           pointwise_multiply(compose_periodic(du, u, options), v, options);
  };
  r.in_domain = [eps, radius](const FourierMap& u) {
    return u.dim() == 1 && u.components() == 1 && u.nu(eps) <= radius;
  };
  return r;
}

TimeDependentField sample_cubic(const TimeGrid& grid, double scale,
                                const std::function<FourierMap(double)>& sampler) {
  static const GaussRule rule = gauss_legendre(4);
  std::vector<Piece> pieces;
  pieces.reserve(grid.intervals());
  for (std::size_t i = 0; i < grid.intervals(); ++i) {
    const double a = grid.start(i);
    const double h = grid.width(i);
    std::vector<double> s(4);
    std::vector<FourierMap> values;
    for (int l = 0; l < 4; ++l) {
      s[l] = h * rule.nodes[l];
      values.push_back(sampler(a + s[l]));
    }
    const auto fit = monomial_fit_matrix(s);
    Piece p;
    for (int j = 0; j < 4; ++j) {
      FourierMap term = fit[j][0] * values[0];
      for (int l = 1; l < 4; ++l) term += fit[j][l] * values[l];
      p.poly.push_back(term.symmetrized());
    }
    pieces.push_back(std::move(p));
  }
  return TimeDependentField(grid, std::move(pieces), scale);
}

ACPath ac_postcompose(const ACPath& eta, const SuperpositionRule& f, const PostcomposeOptions& options) {
  ACPath out;
  out.grid = eta.grid.merged(eta.derivative.grid()).refined(options.max_step);
  out.values.reserve(out.grid.points().size());
  std::vector<FourierMap> inputs;
  for (double t : out.grid.points()) {
    inputs.push_back(eta.value(t));
    if (!f.in_domain(inputs.back())) {
      std::ostringstream msg;
      msg << "path leaves the domain of '" << f.name << "' at t = " << t;
      fail(ErrorKind::DomainEscape, msg.str());
    }
  }
  for (const auto& v : inputs) out.values.push_back(f.apply(v));
  const TimeDependentField gamma = eta.derivative.on_grid(out.grid);
  if (f.linear_part) {
    std::vector<Piece> pieces;
    for (const Piece& p : gamma.pieces()) {
      Piece q = p;
      for (auto& term : q.poly) term = f.linear_part(term);
      if (q.cosine) *q.cosine = f.linear_part(*q.cosine);
      if (q.sine) *q.sine = f.linear_part(*q.sine);
      pieces.push_back(std::move(q));
    }
    out.derivative = TimeDependentField(out.grid, std::move(pieces), gamma.scale());
  } else {
    out.derivative = sample_cubic(out.grid, gamma.scale(), [&](double t) {
      return f.differential(eta.value(t), gamma.value(t));
    });
  }
  const double defect = out.integral_defect();
  if (defect > options.tol_chain) {
    std::ostringstream msg;
    msg << "chain-rule derivative misses the composed values by " << defect;
    fail(ErrorKind::TruncationBudgetExceeded, msg.str());
  }
  return out;
}

}  // namespace torusflow
