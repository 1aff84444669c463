#include "torusflow/direct_limit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <thread>

#include "torusflow/composition.hpp"
#include "torusflow/errors.hpp"

namespace torusflow {

namespace {

// Non-strict steps allow rounding of the seminorm sums; strict ones are exact comparisons.
constexpr double kRoundoff = 1e-12;

Rng stream(std::uint64_t seed, std::uint64_t id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(id >> 32)};
  return Rng(seq);
}

// Random real scalar with q(f) = 1.
FourierMap unit_direction(Rng& rng, const ScaleLevel& level, double rho) {
  FourierMap d = random_map(rng, level.dim, 1, level.order, rho);
  const double n = level.q(d);
  require(n > 0.0, "degenerate random direction");
  return (1.0 / n) * d;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct Checker {
  std::string failure;
  long count = 0;
  void operator()(bool ok, const std::string& what) {
    ++count;
    if (!ok && failure.empty()) failure = what;
  }
};

}  // namespace

void validate_scale(const std::vector<ScaleLevel>& levels) {
  require(!levels.empty(), "the scale needs at least one level");
  require(static_cast<int>(levels.size()) <= kMaxLevels, "at most 6 levels");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const ScaleLevel& l = levels[i];
    require(l.n == static_cast<int>(i) + 1, "levels must be numbered 1, 2, ...");
    require(l.eps > 0.0 && std::isfinite(l.eps), "strip half-widths must be positive");
    require(l.radius >= 0.0 && std::isfinite(l.radius), "radii must be finite and nonnegative");
    require(l.order == levels.front().order && l.dim == levels.front().dim, "levels share the truncation");
    if (i > 0) {
      require(l.eps < levels[i - 1].eps, "strip half-widths must decrease along the scale");
      require(l.radius >= levels[i - 1].radius, "radii must be nondecreasing along the scale");
    }
  }
}

std::vector<ScaleLevel> geometric_scale(int count, double eps1, int order, double r1, double growth, int dim) {
  std::vector<ScaleLevel> out;
  for (int n = 1; n <= count; ++n) {
    out.push_back({n, dim, eps1 * std::exp2(1 - n), order, r1 * (1.0 + growth * (n - 1))});
  }
  validate_scale(out);
  return out;
}

TestMap linear_map(double c) {
  const double a = std::abs(c);
  return {"linear",
          [c](const FourierMap& u) { return c * u; },
          [a](const ScaleLevel&) { return a; },
          [a](const ScaleLevel& l) { return a * l.radius; },
          "p(c u) = |c| p(u) <= |c| q_n(u)"};
}

TestMap constant_map(const FourierMap& value) {
  require(value.components() == 1 && value.is_real(), "constant map takes a real scalar value");
  return {"constant",
          [value](const FourierMap&) { return value; },
          [](const ScaleLevel&) { return 0.0; },
          [value](const ScaleLevel&) { return value.nu(0.0); },
          "f(x) - f(y) = 0; sup p(f) <= nu_0(value)"};
}

TestMap square_map() {
  return {"square",
          [](const FourierMap& u) { return pointwise_multiply(u, u, {.out_order = 2 * u.order()}); },
          [](const ScaleLevel& l) { return 2.0 * l.radius; },
          [](const ScaleLevel& l) { return l.radius * l.radius; },
          "x^2 - y^2 = (x + y)(x - y) and nu(uv) <= nu(u) nu(v): L_n = 2 r_n; sup nu(u^2) on U_n <= r_n^2"};
}

std::vector<LevelLipschitzCert> certify_levels(const TestMap& f, const std::vector<ScaleLevel>& levels) {
  validate_scale(levels);
  std::vector<LevelLipschitzCert> out;
  for (const ScaleLevel& l : levels) {
    const double L = f.lipschitz(l);
    require(L >= 0.0, "Lipschitz constants are nonnegative");
    out.push_back({l.n, L, f.derivation});
  }
  return out;
}

NeighborhoodSampler::NeighborhoodSampler(std::vector<ScaleLevel> levels, std::vector<LevelLipschitzCert> certs,
                                         double eps_target, std::uint64_t seed, double rho)
    : levels_(std::move(levels)), certs_(std::move(certs)), eps_target_(eps_target), seed_(seed), rho_(rho) {
  validate_scale(levels_);
  require(certs_.size() == levels_.size(), "Lipschitz certificates must cover every level");
  require(eps_target_ >= 0.0, "target radius must be nonnegative");
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    require(certs_[i].n == levels_[i].n && std::isfinite(certs_[i].lipschitz), "certificate does not match level");
    const double scale = std::exp2(-static_cast<double>(levels_[i].n));
    const double by_target =
        certs_[i].lipschitz > 0.0 ? eps_target_ * scale / certs_[i].lipschitz : std::numeric_limits<double>::infinity();
    const double r = std::min(by_target, scale * levels_[i].radius);
    if (!(r > 0.0)) fail(ErrorKind::EmptyLevel, "level " + std::to_string(levels_[i].n) + " has an empty intersection");
    radius_.push_back(r);
  }
}

NeighborhoodSample NeighborhoodSampler::draw(std::uint64_t id, int depth) const {
  require(depth >= 1 && depth <= static_cast<int>(levels_.size()), "depth outside the scale");
  Rng rng = stream(seed_, id);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<FourierMap> z;
  for (int k = 1; k <= depth; ++k) {
    const ScaleLevel& l = levels_[k - 1];
    const double s = unit(rng) < 0.1 ? 0.99 : 0.99 * unit(rng);
    z.push_back((s * radius_[k - 1]) * unit_direction(rng, l, rho_));
  }
  NeighborhoodSample out = assemble(std::move(z));
  out.id = id;
  return out;
}

NeighborhoodSample NeighborhoodSampler::assemble(std::vector<FourierMap> z) const {
  require(!z.empty() && z.size() <= levels_.size(), "depth outside the scale");
  NeighborhoodSample out;
  out.depth = static_cast<int>(z.size());
  out.partial.push_back(FourierMap::scalar(levels_.front().dim, levels_.front().order));
  for (std::size_t k = 0; k < z.size(); ++k) {
    require(z[k].components() == 1 && z[k].is_real(), "neighborhood points are real scalars");
    out.partial.push_back(out.partial.back() + z[k]);
    out.radius.push_back(radius_[k]);
  }
  out.z = std::move(z);
  return out;
}

ContinuityReport verify_continuity_estimate(const TestMap& f, const NeighborhoodSampler& sampler,
                                            const TargetSeminorm& p, int count, int workers) {
  require(count >= 0 && workers >= 1, "sample count and worker count must be positive");
  const auto& levels = sampler.levels();
  const auto& certs = sampler.certs();
  require(p.eps <= levels.back().eps, "target seminorm must be dominated by every level seminorm");
  const double eps = sampler.eps_target();
  const int depth_max = static_cast<int>(levels.size());

  std::vector<ContinuityRow> rows(static_cast<std::size_t>(count));
  std::vector<std::string> failures(rows.size());
  std::vector<long> asserted(rows.size(), 0);

  auto run = [&](std::size_t i) {
    const NeighborhoodSample s = sampler.draw(i, static_cast<int>(i % depth_max) + 1);
    Checker check;
    const std::string tag = "sample " + std::to_string(i) + ": ";
    const FourierMap f0 = f.eval(s.partial.front());
    double steps = 0.0;
    double bound = 0.0;
    for (int k = 1; k <= s.depth; ++k) {
      const ScaleLevel& l = levels[k - 1];
      const double lk = certs[k - 1].lipschitz;
      const double qz = l.q(s.z[k - 1]);
      const double tail = eps * std::exp2(-k);
      const std::string at = tag + "level " + std::to_string(k) + ": ";
      check(qz < s.radius[k - 1], at + "z_k outside its ball");
      check(qz < std::exp2(-k) * l.radius, at + "z_k outside 2^{-k} U_k");
      if (k > 1) check(qz <= levels[k - 2].q(s.z[k - 1]) * (1 + kRoundoff), at + "q_k > q_{k-1}");
      check(l.contains(s.partial[k - 1]), at + "y_{k-1} outside U_k");
      check(l.contains(s.partial[k]), at + "y_k outside U_k");
      const double step = p(f.eval(s.partial[k]) - f.eval(s.partial[k - 1]));
      check(step <= lk * qz * (1 + kRoundoff), at + "Lipschitz step exceeded");
      check(lk * qz < tail || lk == 0.0, at + "L_k q_k(z_k) >= eps 2^{-k}");
      steps += step;
      bound += lk * qz;
    }
    const double observed = p(f.eval(s.y()) - f0);
    check(observed <= steps * (1 + kRoundoff), tag + "triangle inequality over the steps");
    check(steps <= bound * (1 + kRoundoff), tag + "sum of steps above the telescoped bound");
    check(bound < eps || bound == 0.0, tag + "telescoped bound >= eps");
    check(observed < eps || (eps == 0.0 && observed == 0.0), tag + "p(f(y) - f(0)) >= eps");
    rows[i] = {i, s.depth, bound, observed, check.failure.empty()};
    failures[i] = check.failure;
    asserted[i] = check.count;
  };

  if (workers == 1 || count < 2) {
    for (std::size_t i = 0; i < rows.size(); ++i) run(i);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < rows.size(); i += workers) run(i);
      });
    }
    for (auto& t : pool) t.join();
  }

  ContinuityReport out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.max_observed = std::max(out.max_observed, rows[i].observed_p);
    out.assertions += asserted[i];
    if (!rows[i].pass) {
      ++out.violations;
      if (out.first_failure.empty()) out.first_failure = failures[i];
    }
  }
  out.rows = std::move(rows);
  return out;
}

namespace {

template <class Ratio>
RatioReport sweep_third_ball(const TestMap& f, const ScaleLevel& level, int samples, std::uint64_t seed,
                             Ratio ratio) {
  require(level.radius > 0.0, "U_n must be nonempty");
  const double m = f.sup_bound(level);
  require(m >= 0.0, "sup bound must be nonnegative");
  RatioReport out{0.0, samples};
  for (int i = 0; i < samples; ++i) {
    Rng rng = stream(seed, static_cast<std::uint64_t>(i));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double third = level.radius / 3.0;
    const FourierMap v = (0.999 * third * unit(rng)) * unit_direction(rng, level, 0.3);
    const FourierMap w = (0.999 * third * unit(rng)) * unit_direction(rng, level, 0.3);
    out.max_ratio = std::max(out.max_ratio, ratio(v, w, m));
  }
  return out;
}

}  // namespace

RatioReport cauchy_bound_check(const TestMap& f, const ScaleLevel& level, const TargetSeminorm& p, int samples,
                               std::uint64_t seed) {
  require(p.eps <= level.eps, "target seminorm must be dominated by q_n");
  return sweep_third_ball(f, level, samples, seed, [&](const FourierMap& v, const FourierMap& w, double m) {
    const double qw = level.q(w);
    if (qw == 0.0) return 0.0;
    const double h = 1e-5 / qw;
    const FourierMap df = (1.0 / (2.0 * h)) * (f.eval(v + h * w) - f.eval(v + (-h) * w));
    const double num = p(df);
    if (num == 0.0) return 0.0;
    return num / (m * 3.0 * qw / level.radius);
  });
}

RatioReport third_ball_lipschitz(const TestMap& f, const ScaleLevel& level, const TargetSeminorm& p, int samples,
                                 std::uint64_t seed) {
  require(p.eps <= level.eps, "target seminorm must be dominated by q_n");
  return sweep_third_ball(f, level, samples, seed, [&](const FourierMap& v, const FourierMap& w, double m) {
    const double num = p(f.eval(w) - f.eval(v));
    if (num == 0.0) return 0.0;
    return num / (m * 3.0 * level.q(w - v) / level.radius);
  });
}

std::string continuity_csv(const ContinuityReport& report) {
  std::ostringstream os;
  os << "sample_id,depth,telescoped_bound,observed_p,pass\n";
  for (const ContinuityRow& r : report.rows) {
    os << r.sample_id << ',' << r.depth << ',' << fmt(r.telescoped_bound) << ',' << fmt(r.observed_p) << ','
       << (r.pass ? "true" : "false") << '\n';
  }
  return os.str();
}

}  // namespace torusflow
