#include "runner.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "torusflow/direct_limit.hpp"
#include "torusflow/errors.hpp"
#include "torusflow/io.hpp"
#include "torusflow/pullback.hpp"
#include "torusflow/random_fields.hpp"

namespace torusflow::cli {

namespace {

constexpr const char* kVersion = "1.0.0";

// Thrown for certificate failures found while preparing a scenario.
struct AdmissibilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

Rng stream(std::uint64_t seed, std::uint64_t id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(id >> 32)};
  return Rng(seq);
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body) {
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr error;
  std::mutex mutex;
  std::vector<std::thread> pool;
  const auto count = static_cast<std::size_t>(workers);
  for (std::size_t w = 0; w < std::min(count, n); ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += count) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

template <class T>
T value_or(const Json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(ErrorKind::InvalidArgument, std::string("key '") + key + "' has the wrong type");
  }
}

const Json& block(const Json& j, const char* key) {
  static const Json empty = Json::object();
  if (!j.contains(key)) return empty;
  require(j.at(key).is_object(), std::string("'") + key + "' must be an object");
  return j.at(key);
}

FourierMap mode_field(int dim, int order, double a, bool sine) {
  FourierMap f = FourierMap::field(dim, order);
  f.set_coeff({1, 0}, 0, sine ? Complex(0.0, -0.5 * a) : Complex(0.5 * a, 0.0));
  return f;
}

class Context {
 public:
  Context(const RunOptions& opts, Json scenario) : opts_(opts), s_(std::move(scenario)) {
    require(s_.is_object(), "scenario must be a JSON object");
    if (s_.contains("kind")) {
      require(value_or<std::string>(s_, "kind", "") == opts_.command,
              "scenario kind '" + value_or<std::string>(s_, "kind", "") + "' does not match the command");
    }
    require(opts_.workers >= 1, "--workers must be positive");
    const Json& sc = block(s_, "scale");
    dim = value_or(sc, "dim", 1);
    order = value_or(sc, "order", 32);
    eps = value_or(sc, "eps", 0.05);
    ladder = value_or(sc, "ladder", std::vector<double>{eps, eps / 2});
    require(dim == 1 || dim == 2, "scale.dim must be 1 or 2");
    require(order >= 1 && order <= 256, "scale.order must lie in [1, 256]");
    require(eps > 0.0 && std::isfinite(eps), "scale.eps must be positive");
    for (double e : ladder) require(e > 0.0 && std::isfinite(e), "scale.ladder entries must be positive");
    const Json& sv = block(s_, "solver");
    solve.tol_solve = value_or(sv, "tol_solve", solve.tol_solve);
    solve.max_step = value_or(sv, "max_step", solve.max_step);
    solve.nodes = value_or(sv, "nodes", solve.nodes);
    require(solve.tol_solve > 0.0 && solve.max_step > 0.0 && solve.nodes >= 1, "solver options must be positive");
    tolerances_ = block(s_, "tolerances");
    if (opts_.seed) {
      seed_ = opts_.seed;
    } else if (s_.contains("seed")) {
      seed_ = value_or<std::uint64_t>(s_, "seed", 0);
    }
  }

  const Json& scenario() const { return s_; }
  int workers() const { return opts_.workers; }

  double tol(const char* name, double fallback) const {
    const double t = value_or(tolerances_, name, fallback);
    require(t >= 0.0 && std::isfinite(t), std::string("tolerance '") + name + "' must be nonnegative");
    return t;
  }

  std::uint64_t seed() const {
    require(seed_.has_value(), "this scenario samples randomly and needs a seed (scenario 'seed' or --seed)");
    return *seed_;
  }
  std::optional<std::uint64_t> seed_if_any() const { return seed_; }

  TimeDependentField field(const Json& spec) const {
    require(spec.is_object(), "field spec must be an object");
    const std::string type = value_or<std::string>(spec, "type", "");
    const double scale = value_or(spec, "scale", 2.0 * *std::max_element(ladder.begin(), ladder.end()));
    require(scale > 0.0, "field scale must be positive");
    if (type == "zero") return TimeDependentField::zero(dim, dim, order, scale);
    if (type == "sine" || type == "cosine") {
      const double a = value_or(spec, "amplitude", 0.0);
      return TimeDependentField::constant(mode_field(dim, order, a, type == "sine"), scale);
    }
    if (type == "map") {
      require(spec.contains("map"), "field of type 'map' needs 'map'");
      const FourierMap f = fourier_map_from_json(spec.at("map"));
      require(f.dim() == dim && f.components() == dim && f.is_real(), "field map must be a real vector field");
      return TimeDependentField::constant(f, scale);
    }
    if (type == "pieces") {
      const TimeDependentField g = field_from_json(spec);
      require(g.dim() == dim, "field dimension differs from scale.dim");
      return g;
    }
    if (type == "random") {
      RandomFieldSpec r;
      r.dim = dim;
      r.order = order;
      r.eps = eps;
      r.pieces = value_or(spec, "pieces", r.pieces);
      r.theta_min = value_or(spec, "theta_min", r.theta_min);
      r.theta_max = value_or(spec, "theta_max", r.theta_max);
      r.rho = value_or(spec, "rho", r.rho);
      Rng rng = stream(seed(), value_or<std::uint64_t>(spec, "stream", 0));
      return random_admissible_field(rng, r).with_scale(std::max(scale, 2.0 * eps));
    }
    fail(ErrorKind::InvalidArgument, "unknown field type '" + type + "'");
  }

  FourierMap vector_map(const Json& spec) const {
    const TimeDependentField g = field(spec);
    require(g.pieces().size() == 1 && g.pieces().front().kind() == Piece::Kind::Constant,
            "expected an autonomous field");
    return g.shape();
  }

  static AdmissibleField certify(const TimeDependentField& g, double e) {
    try {
      return AdmissibleField::certify(g, e);
    } catch (const FlowError& err) {
      if (err.kind() == ErrorKind::Inadmissible || err.kind() == ErrorKind::ScaleMismatch) {
        throw AdmissibilityError(err.what());
      }
      throw;
    }
  }

  void check(const std::string& name, double value, double tolerance, bool pass) {
    checks_.push_back({name, value, tolerance, pass});
  }
  void check_le(const std::string& name, double value, double tolerance) {
    check(name, value, tolerance, value <= tolerance);
  }

  void write(const std::string& file, const std::string& content) {
    std::filesystem::create_directories(opts_.out_dir);
    std::ofstream os(opts_.out_dir / file, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + (opts_.out_dir / file).string());
    os << content;
    outputs_.push_back(file);
  }
  void write(const std::string& file, const CsvTable& t) { write(file, t.str()); }
  void write(const std::string& file, const Json& j) { write(file, j.dump(2) + "\n"); }

  bool all_pass() const {
    return std::all_of(checks_.begin(), checks_.end(), [](const Check& c) { return c.pass; });
  }

  void finish(const std::string& error = {}) {
    Json summary;
    summary["command"] = opts_.command;
    Json list = Json::array();
    for (const Check& c : checks_) {
      list.push_back({{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"pass", c.pass}});
    }
    summary["checks"] = list;
    summary["pass"] = error.empty() && all_pass();
    if (!error.empty()) summary["error"] = error;
    write("summary.json", summary);

    Json manifest;
    manifest["command"] = opts_.command;
    manifest["scenario_file"] = opts_.scenario.string();
    manifest["scenario"] = s_;
    manifest["seed"] = seed_ ? Json(*seed_) : Json(nullptr);
    manifest["workers"] = opts_.workers;
    manifest["versions"] = {{"torusflow", kVersion},
                            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                          "." + std::to_string(EIGEN_MINOR_VERSION)},
                            {"boost", BOOST_LIB_VERSION},
                            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                            {"compiler", __VERSION__}};
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    manifest["timestamp"] = stamp;
    outputs_.push_back("manifest.json");
    manifest["outputs"] = outputs_;
    std::filesystem::create_directories(opts_.out_dir);
    std::ofstream(opts_.out_dir / "manifest.json", std::ios::binary) << manifest.dump(2) << "\n";
  }

  int dim = 1;
  int order = 32;
  double eps = 0.05;
  std::vector<double> ladder;
  SolveOptions solve;

 private:
  RunOptions opts_;
  Json s_;
  Json tolerances_;
  std::optional<std::uint64_t> seed_;
  std::vector<Check> checks_;
  std::vector<std::string> outputs_;
};

using Compute = std::function<void(Context&)>;

double max_picard_ratio(const FlowPath& p) {
  double r = 0.0;
  for (const auto& rec : p.log) {
    if (rec.step >= 2) r = std::max(r, rec.ratio);
  }
  return r;
}

// Worst inverse residual over the breakpoint maps; throws InvertibilityLost on a failed certificate.
double certificate_residual(const FlowPath& path) {
  double worst = 0.0;
  for (const FourierMap& u : path.breakpoints()) {
    const AnalyticDiffeo phi = AnalyticDiffeo::certify(u, path.eps());
    worst = std::max(worst, composition_residual(phi, invert_diffeo(phi)));
  }
  return worst;
}

// tan(pi y(t)) = exp(2 pi a t) tan(pi y0) for the field a sin(2 pi y).
double sine_closed_form(double a, double t, double y0) {
  const double turns = std::floor(y0);
  const double r = y0 - turns;
  return turns + std::atan2(std::exp(kTwoPi * a * t) * std::sin(M_PI * r), std::cos(M_PI * r)) / M_PI;
}

// ---------------------------------------------------------------- commands

Compute prepare_solve(Context& ctx) {
  const Json& spec = ctx.scenario().contains("field") ? ctx.scenario().at("field") : Json{{"type", "zero"}};
  const AdmissibleField f = Context::certify(ctx.field(spec), ctx.eps);
  const Json& b = block(ctx.scenario(), "solve");
  const int probes = value_or(b, "probes", 64);
  require(probes >= 1, "solve.probes must be positive");
  const bool closed = value_or<std::string>(spec, "type", "") == "sine" && ctx.dim == 1;
  const double amplitude = value_or(spec, "amplitude", 0.0);
  const double tol_closed = ctx.tol("closed_form", 1e-8);
  const double tol_inverse = ctx.tol("inverse_residual", kTolInverse);
  return [=](Context& c) {
    const FlowPath p = solve_flow(f, c.solve);
    c.write("flow.json", to_json(p));
    c.write("iteration_log.csv", iteration_log_csv(p.log));
    const double bound = std::min(f.theta + 0.05, 0.55);
    c.check_le("contraction_ratio", max_picard_ratio(p), bound);
    CsvTable t(closed ? std::vector<std::string>{"probe", "y0", "y1", "exact", "error"}
                      : std::vector<std::string>{"probe", "y0", "y1"});
    double worst = 0.0;
    for (int i = 0; i < probes; ++i) {
      const double y0 = (i + 0.5) / probes;
      CPoint z{Complex(y0), Complex(0.0)};
      if (c.dim == 2) z[1] = 0.5;
      const double y1 = p.eval(1.0, z)[0].real();
      t.row() << i << y0 << y1;
      if (closed) {
        const double exact = sine_closed_form(amplitude, 1.0, y0);
        worst = std::max(worst, std::abs(y1 - exact));
        t << exact << std::abs(y1 - exact);
      }
    }
    c.write("probes.csv", t);
    if (closed) c.check_le("closed_form_max_error", worst, tol_closed);
    c.check_le("diffeo_inverse_residual", certificate_residual(p), tol_inverse);
  };
}

Compute prepare_verify(Context& ctx) {
  require(ctx.scenario().contains("field"), "verify needs a 'field'");
  const Json& spec = ctx.scenario().at("field");
  const TimeDependentField g = ctx.field(spec);
  const AdmissibleField f = Context::certify(g, ctx.eps);
  const AdmissibleField neg = Context::certify(g.scaled(-1.0), ctx.eps);
  require(ctx.ladder.size() >= 2, "verify needs scale.ladder with at least two half-widths");
  const double e0 = ctx.ladder[0], e1 = ctx.ladder[1];
  Context::certify(g, std::max(e0, e1));
  const Json& b = block(ctx.scenario(), "verify");
  const int starts = value_or(b, "starts", 1000);
  const int probes = value_or(b, "probes", 16);
  require(starts >= 0 && probes >= 1, "verify.starts and verify.probes must be positive");
  const std::uint64_t seed = starts > 0 ? ctx.seed() : 0;
  const double tol_restriction = ctx.tol("restriction", 1e-9);
  const double tol_left_right = ctx.tol("left_right", 1e-8);
  const double tol_pointwise = ctx.tol("pointwise", kTolPointwise);
  const double tol_inverse = ctx.tol("inverse_residual", kTolInverse);
  return [=](Context& c) {
    CsvTable norms({"eps", "piece", "nu", "beta", "tail_ratio"});
    for (double e : c.ladder) {
      for (std::size_t j = 0; j < g.pieces().size(); ++j) {
        const NormReport r = g.pieces()[j].shape().norms(e);
        norms.row() << e << j << r.nu << r.beta << r.tail_ratio;
      }
    }
    c.write("norms.csv", norms);

    c.check_le("restriction_consistency", restriction_consistency(g, std::max(e0, e1), std::min(e0, e1), c.solve),
               tol_restriction);

    const FlowPath flow = solve_flow(f, c.solve);
    std::vector<double> max_im(static_cast<std::size_t>(starts), 0.0);
    std::vector<CPoint> y0s(max_im.size());
    for (std::size_t i = 0; i < y0s.size(); ++i) {
      Rng rng = stream(seed, i);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (int d = 0; d < 2; ++d) y0s[i][d] = d < c.dim ? Complex(u(rng), (u(rng) - 0.5) * c.eps) : Complex(0.0);
    }
    parallel_for(y0s.size(), c.workers(), [&](std::size_t i) {
      const Trajectory tr = pointwise_solution(flow, f.gamma, 0.0, y0s[i]);
      for (const CPoint& y : tr.values) {
        for (int d = 0; d < c.dim; ++d) max_im[i] = std::max(max_im[i], std::abs(y[d].imag()));
      }
    });
    CsvTable im({"start", "re_y0", "im_y0", "max_im", "pass"});
    int violations = 0;
    for (std::size_t i = 0; i < y0s.size(); ++i) {
      const bool ok = max_im[i] < c.eps;
      violations += ok ? 0 : 1;
      im.row() << i << y0s[i][0].real() << y0s[i][0].imag() << max_im[i] << ok;
    }
    c.write("im_invariance.csv", im);
    c.check("im_invariance_violations", violations, 0, violations == 0);

    std::vector<CPoint> pts;
    for (int i = 0; i < probes; ++i) pts.push_back({Complex((i + 0.5) / probes), Complex(c.dim == 2 ? 0.5 : 0.0)});
    const EvolutionResult right = evol_right(f, c.solve);
    const EvolutionResult left = evol_left(f, c.solve);
    const PointwiseReport rr = verify_evolution_pointwise(right, g, pts, tol_pointwise);
    const PointwiseReport lr = verify_evolution_pointwise(left, g, pts, tol_pointwise);
    c.write("evolution_right.csv", pointwise_csv(rr));
    c.write("evolution_left.csv", pointwise_csv(lr));
    c.write("evolution_right.json", to_json(right));
    c.write("evolution_left.json", to_json(left));
    c.check("evolution_right_pointwise", rr.max_residual, tol_pointwise, rr.pass);
    c.check("evolution_left_pointwise", lr.max_residual, tol_pointwise, lr.pass);

    double lr_dist = 0.0;
    for (double t : {0.5, 1.0}) {
      lr_dist = std::max(lr_dist, sampled_distance(right.at(t).u, invert_diffeo(evol_left_direct(neg, t)).u));
      lr_dist = std::max(lr_dist, sampled_distance(left.at(t).u, evol_left_direct(f, t).u));
    }
    c.check_le("left_right_identity", lr_dist, tol_left_right);
    c.check_le("diffeo_inverse_residual", certificate_residual(right.path), tol_inverse);
  };
}

Compute prepare_sweep(Context& ctx) {
  const Json& b = block(ctx.scenario(), "sweep");
  const int fields = value_or(b, "fields", 50);
  require(fields >= 1, "sweep.fields must be positive");
  RandomFieldSpec r;
  r.dim = ctx.dim;
  r.order = ctx.order;
  r.eps = ctx.eps;
  r.pieces = value_or(b, "pieces", r.pieces);
  r.theta_min = value_or(b, "theta_min", r.theta_min);
  r.theta_max = value_or(b, "theta_max", r.theta_max);
  r.rho = value_or(b, "rho", r.rho);
  require(r.pieces >= 1 && r.theta_min > 0.0 && r.theta_max < 0.5 && r.theta_min <= r.theta_max,
          "sweep field parameters out of range");
  const std::uint64_t seed = ctx.seed();
  const double tol_lip = ctx.tol("lipschitz", 2.0 + 1e-6);
  return [=](Context& c) {
    struct Row {
      double theta = 0.0, ratio = 0.0, bound = 0.0, lipschitz = 0.0;
    };
    std::vector<Row> rows(static_cast<std::size_t>(fields));
    parallel_for(rows.size(), c.workers(), [&](std::size_t i) {
      Rng rng = stream(seed, i);
      const AdmissibleField a = AdmissibleField::certify(random_admissible_field(rng, r), r.eps);
      const AdmissibleField bb = AdmissibleField::certify(random_admissible_field(rng, r), r.eps);
      const FlowPath p = solve_flow(a, c.solve);
      rows[i] = {a.theta, max_picard_ratio(p), std::min(a.theta + 0.05, 0.55),
                 param_lipschitz_check(a, bb, c.solve).ratio};
    });
    CsvTable t({"sample", "theta", "max_ratio", "ratio_bound", "lipschitz_ratio", "pass"});
    double worst_excess = -1.0, worst_lip = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Row& row = rows[i];
      worst_excess = std::max(worst_excess, row.ratio - row.bound);
      worst_lip = std::max(worst_lip, row.lipschitz);
      t.row() << i << row.theta << row.ratio << row.bound << row.lipschitz
              << (row.ratio <= row.bound && row.lipschitz <= tol_lip);
    }
    c.write("sweep.csv", t);
    c.check_le("contraction_ratio_excess", worst_excess, 0.0);
    c.check_le("lipschitz_ratio", worst_lip, tol_lip);
  };
}

Compute prepare_trotter(Context& ctx) {
  const Json& b = block(ctx.scenario(), "trotter");
  const FourierMap v = ctx.vector_map(b.contains("v") ? b.at("v") : Json{{"type", "sine"}, {"amplitude", 0.02}});
  const FourierMap w = ctx.vector_map(b.contains("w") ? b.at("w") : Json{{"type", "cosine"}, {"amplitude", 0.02}});
  const std::vector<int> ns = value_or(b, "ns", std::vector<int>{8, 16, 32, 64, 128});
  require(!ns.empty(), "trotter.ns must be nonempty");
  for (int n : ns) require(n >= 1, "trotter.ns entries must be positive");
  Context::certify(TimeDependentField::constant(v + w, 2.0 * ctx.eps), ctx.eps);
  const double lo = value_or(b, "ratio_min", 0.35), hi = value_or(b, "ratio_max", 0.65);
  const double decay = value_or(b, "decay", 10.0);
  return [=](Context& c) {
    const auto curve = trotter(v, w, c.eps, ns, c.solve);
    CsvTable t({"n", "distance", "ratio"});
    double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
    for (std::size_t i = 0; i < curve.size(); ++i) {
      const double ratio = i == 0 ? 0.0 : curve[i].distance / curve[i - 1].distance;
      if (i > 0) {
        rmin = std::min(rmin, ratio);
        rmax = std::max(rmax, ratio);
      }
      t.row() << curve[i].n << curve[i].distance << ratio;
    }
    c.write("trotter.csv", t);
    if (curve.size() > 1) {
      c.check("trotter_ratio_min", rmin, lo, rmin >= lo);
      c.check("trotter_ratio_max", rmax, hi, rmax <= hi);
      const double ratio = curve.back().distance / curve.front().distance;
      c.check_le("trotter_decay", ratio, 1.0 / decay);
    }
  };
}

Compute prepare_limits(Context& ctx) {
  const Json& b = block(ctx.scenario(), "limits");
  const int levels = value_or(b, "levels", kMaxLevels);
  const double eps1 = value_or(b, "eps1", 0.2);
  const double radius = value_or(b, "radius", 1.0);
  const double growth = value_or(b, "growth", 0.25);
  const double eps_target = value_or(b, "eps_target", 0.05);
  const int count = value_or(b, "count", 10000);
  const int d_samples = value_or(b, "ratio_samples", 1000);
  const double target_eps = value_or(b, "target_eps", 0.0);
  const std::string map = value_or<std::string>(b, "map", "square");
  require(count >= 1 && d_samples >= 1, "limits sample counts must be positive");
  const auto scale = geometric_scale(levels, eps1, ctx.order, radius, growth, ctx.dim);
  TestMap f;
  if (map == "square") {
    f = square_map();
  } else if (map == "linear") {
    f = linear_map(value_or(b, "coefficient", 1.0));
  } else if (map == "constant") {
    FourierMap c = FourierMap::scalar(ctx.dim, ctx.order);
    c.set_coeff({0, 0}, 0, value_or(b, "coefficient", 1.0));
    f = constant_map(c);
  } else {
    fail(ErrorKind::InvalidArgument, "unknown limits map '" + map + "'");
  }
  require(target_eps >= 0.0 && target_eps <= scale.back().eps, "limits.target_eps must lie in [0, eps_last]");
  const std::uint64_t seed = ctx.seed();
  const NeighborhoodSampler sampler(scale, certify_levels(f, scale), eps_target, seed);
  const double tol_ratio = ctx.tol("cauchy_ratio", 1.0 + 1e-3);
  return [=](Context& c) {
    const TargetSeminorm p{target_eps};
    const ContinuityReport r = verify_continuity_estimate(f, sampler, p, count, c.workers());
    c.write("limits.csv", continuity_csv(r));
    c.check("continuity_violations", r.violations, 0, r.violations == 0);
    c.check("continuity_max_observed", r.max_observed, eps_target, r.max_observed < eps_target || r.max_observed == 0.0);
    CsvTable t({"check", "level", "max_ratio", "samples"});
    double worst = 0.0;
    for (const ScaleLevel& l : scale) {
      const RatioReport cb = cauchy_bound_check(f, l, p, d_samples, seed + 1000 + l.n);
      const RatioReport tb = third_ball_lipschitz(f, l, p, d_samples, seed + 2000 + l.n);
      t.row() << std::string("cauchy_bound") << l.n << cb.max_ratio << cb.samples;
      t.row() << std::string("third_ball_lipschitz") << l.n << tb.max_ratio << tb.samples;
      worst = std::max({worst, cb.max_ratio, tb.max_ratio});
    }
    c.write("cauchy_ratios.csv", t);
    c.check_le("cauchy_max_ratio", worst, tol_ratio);
  };
}

Compute prepare_pullback(Context& ctx) {
  require(ctx.scenario().contains("field"), "pullback needs a 'field'");
  const AdmissibleField f = Context::certify(ctx.field(ctx.scenario().at("field")), ctx.eps);
  const Json& b = block(ctx.scenario(), "pullback");
  const double t0 = value_or(b, "t0", 0.0);
  const double s = value_or(b, "s", 0.5 * (1.0 + t0));
  const int window = value_or(b, "window", 6);
  require(t0 >= 0.0 && t0 <= 1.0 && s >= 0.0 && s <= 1.0, "pullback times must lie in [0, 1]");
  require(window >= 0 && window <= 32, "pullback.window must lie in [0, 32]");
  const std::uint64_t seed = ctx.seed();
  const double tol_lin = ctx.tol("linearity", 1e-12);
  const double tol_contra = ctx.tol("contravariance", 1e-8);
  const double tol_transport = ctx.tol("transport", 1e-7);
  return [=](Context& c) {
    const PullbackPath path = pullback_path(f, t0, window, c.solve);
    const EvolutionResult right = evol_right(f, c.solve);
    const AnalyticDiffeo whole = flow_two_param(right, 1.0, t0);
    c.write("pullback_matrix.csv", pullback_matrix_csv(pullback_matrix(whole, window)));
    c.write("ac_modulus.csv", ac_modulus_csv(path));

    Rng rng = stream(seed, 0);
    const FourierMap g1 = random_map(rng, c.dim, 1, window, 0.3);
    const FourierMap g2 = random_map(rng, c.dim, 1, window, 0.3);
    const CompositionOptions wide{.out_order = whole.u.order()};
    const double lin =
        coefficient_distance(pullback_apply(whole, 0.7 * g1 + (-1.3) * g2, wide),
                             0.7 * pullback_apply(whole, g1, wide) + (-1.3) * pullback_apply(whole, g2, wide));
    c.check_le("linearity", lin, tol_lin);
    c.check_le("contravariance",
               contravariance_defect(flow_two_param(right, 1.0, s), flow_two_param(right, s, t0), window), tol_contra);
    c.check_le("cocycle", pullback_cocycle_defect(right, 1.0, s, t0, window), tol_contra);
    c.check_le("transport_residual", path.transport_residual, tol_transport);
    c.check("ac_violations", path.violations, 0, path.violations == 0);
  };
}

Compute prepare(Context& ctx, const std::string& command) {
  if (command == "solve") return prepare_solve(ctx);
  if (command == "verify") return prepare_verify(ctx);
  if (command == "sweep") return prepare_sweep(ctx);
  if (command == "trotter") return prepare_trotter(ctx);
  if (command == "limits") return prepare_limits(ctx);
  if (command == "pullback") return prepare_pullback(ctx);
  fail(ErrorKind::InvalidArgument, "unknown command '" + command + "'");
}

}  // namespace

RunResult run_scenario_text(const RunOptions& options, const std::string& text) {
  std::unique_ptr<Context> ctx;
  Compute compute;
  try {
    ctx = std::make_unique<Context>(options, Json::parse(text));
    compute = prepare(*ctx, options.command);
  } catch (const AdmissibilityError& e) {
    return {kExitInadmissible, e.what()};
  } catch (const nlohmann::json::exception& e) {
    return {kExitValidation, std::string("scenario is not valid JSON: ") + e.what()};
  } catch (const FlowError& e) {
    return {kExitValidation, e.what()};
  }
  try {
    compute(*ctx);
  } catch (const std::exception& e) {
    ctx->finish(e.what());
    return {kExitCheckFailed, e.what()};
  }
  ctx->finish();
  return ctx->all_pass() ? RunResult{kExitOk, "all checks passed"} : RunResult{kExitCheckFailed, "a check failed"};
}

RunResult run_scenario(const RunOptions& options) {
  std::ifstream in(options.scenario, std::ios::binary);
  if (!in) return {kExitValidation, "cannot read scenario file " + options.scenario.string()};
  std::stringstream buf;
  buf << in.rdbuf();
  return run_scenario_text(options, buf.str());
}

}  // namespace torusflow::cli
