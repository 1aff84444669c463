#include <gtest/gtest.h>

#include <cmath>

#include "torusflow/errors.hpp"
#include "torusflow/evolution.hpp"
#include "torusflow/random_fields.hpp"

using namespace torusflow;

namespace {

constexpr int kOrder = 32;
constexpr double kEps = 0.05;

FourierMap sine(double a, int order = kOrder) {
  FourierMap f = FourierMap::field(1, order);
  f.set_coeff({1, 0}, 0, Complex(0.0, -0.5 * a));
  return f;
}

FourierMap cosine(double a, int order = kOrder) {
  FourierMap f = FourierMap::field(1, order);
  f.set_coeff({1, 0}, 0, Complex(0.5 * a, 0.0));
  return f;
}

FourierMap translation(double c, int order = kOrder) {
  const double v[] = {c};
  return FourierMap::constant(1, order, v);
}

AdmissibleField autonomous(const FourierMap& v) {
  return AdmissibleField::certify(TimeDependentField::constant(v, 2 * kEps), kEps);
}

AdmissibleField random_field(Rng& rng, double theta_max = 0.3) {
  return AdmissibleField::certify(random_admissible_field(rng, {.pieces = 3, .theta_max = theta_max}), kEps);
}

AnalyticDiffeo diffeo(const FourierMap& u) { return AnalyticDiffeo::certify(u, kEps); }

}  // namespace

TEST(Diffeo, IdentityAndTranslations) {
  const AnalyticDiffeo phi = diffeo(sine(0.03));
  const AnalyticDiffeo id = AnalyticDiffeo::identity(1, kOrder, kEps);
  EXPECT_LE(coefficient_distance(compose_diffeo(phi, id).u, phi.u), 1e-17);
  const AnalyticDiffeo ab = compose_diffeo(diffeo(translation(0.1)), diffeo(translation(0.25)));
  EXPECT_NEAR(ab.u.coeff({0, 0}, 0).real(), 0.35, 1e-16);
  EXPECT_LE(invert_diffeo(id).u.max_abs_coeff(), 0.0);
  EXPECT_LE(coefficient_distance(invert_diffeo(diffeo(translation(0.2))).u, translation(-0.2)), 1e-17);
}

TEST(Diffeo, InverseRoundTrip) {
  const AnalyticDiffeo phi = diffeo(sine(0.02));
  const AnalyticDiffeo inv = invert_diffeo(phi);
  EXPECT_LE(composition_residual(phi, inv), 1e-10);
  EXPECT_LE(compose_diffeo(phi, inv).u.nu(0.0), 1e-9);
  EXPECT_LE(compose_diffeo(inv, phi).u.nu(0.0), 1e-9);
}

TEST(Diffeo, Associativity) {
  Rng rng(41);
  const AnalyticDiffeo a = diffeo(0.02 * random_map(rng, 1, 1, kOrder, 0.3));
  const AnalyticDiffeo b = diffeo(0.02 * random_map(rng, 1, 1, kOrder, 0.3));
  const AnalyticDiffeo c = diffeo(0.02 * random_map(rng, 1, 1, kOrder, 0.3));
  EXPECT_LE(sampled_distance(compose_diffeo(compose_diffeo(a, b), c).u, compose_diffeo(a, compose_diffeo(b, c)).u),
            1e-9);
}

TEST(Diffeo, FoldedMapIsRejected) {
  // 1 + u' changes sign, so no inverse exists.
  try {
    diffeo(sine(0.2));
    FAIL();
  } catch (const FlowError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvertibilityLost);
  }
}

TEST(Diffeo, JacobianAboveCertificate) {
  const JacobianReport r = jacobian_report(diffeo(sine(0.05)));
  EXPECT_GT(r.bound, 0.0);
  EXPECT_GE(r.min_value, r.bound);
  // min of 1 + 0.1 pi cos(2 pi x)
  EXPECT_NEAR(r.min_value, 1.0 - 0.1 * M_PI, 1e-12);
}

TEST(Evolution, ZeroAndConstantFields) {
  const auto zero = AdmissibleField::certify(TimeDependentField::zero(1, 1, kOrder, 0.1), kEps);
  const auto c = autonomous(translation(0.2));
  for (const auto& e : {evol_right(zero), evol_left(zero)}) EXPECT_EQ(e.path.end().max_abs_coeff(), 0.0);
  for (const auto& e : {evol_right(c), evol_left(c)}) {
    for (double t : {0.25, 0.6, 1.0}) EXPECT_LE(coefficient_distance(e.at(t).u, translation(0.2 * t)), 1e-15);
  }
}

TEST(Evolution, RightMatchesPointwiseTrajectories) {
  const auto f = autonomous(sine(0.02));
  const EvolutionResult e = evol_right(f);
  for (int i = 0; i < 16; ++i) {
    const CPoint y0{Complex(i / 16.0 + 0.01, 0.0), 0.0};
    const Trajectory tr = pointwise_solution(e.path, f.gamma, 0.0, y0);
    for (std::size_t n = 0; n < tr.times.size(); ++n) {
      EXPECT_LE(std::abs(e.at(tr.times[n]).eval(y0)[0] - tr.values[n][0]), 1e-8);
    }
  }
}

TEST(Evolution, LeftDerivativeConvention) {
  const auto f = autonomous(sine(0.02));
  const EvolutionResult e = evol_left(f);
  const double h = 1e-4;
  double worst = 0.0;
  for (double t : {0.2, 0.5, 0.83}) {
    const FourierMap u = e.path.at(t);
    const FourierMap du = u.derivative(0);
    const FourierMap g = f.gamma.value(t);
    for (int i = 0; i < 32; ++i) {
      const RPoint x{i / 32.0, 0.0};
      const double fd = (e.path.at(t + h).eval_real(x)[0] - e.path.at(t - h).eval_real(x)[0]) / (2 * h);
      const double want = (1.0 + du.eval_real(x)[0]) * g.eval_real(x)[0];
      worst = std::max(worst, std::abs(fd - want));
    }
  }
  EXPECT_LE(worst, 1e-7);
}

TEST(Evolution, LeftAndRightAreInverse) {
  Rng rng(42);
  for (int s = 0; s < 3; ++s) {
    const AdmissibleField g = random_field(rng);
    const auto neg = AdmissibleField::certify(g.gamma.scaled(-1.0), kEps);
    const EvolutionResult right = evol_right(g);
    const EvolutionResult left = evol_left(g);
    for (double t : {0.5, 1.0}) {
      const AnalyticDiffeo direct = evol_left_direct(neg, t);
      EXPECT_LE(sampled_distance(right.at(t).u, invert_diffeo(direct).u), 1e-8);
      EXPECT_LE(sampled_distance(left.at(t).u, evol_left_direct(g, t).u), 1e-8);
    }
  }
}

TEST(TwoParameterFlow, TrivialCases) {
  const auto c = autonomous(translation(0.3));
  const EvolutionResult e = evol_right(c);
  EXPECT_EQ(flow_two_param(e, 0.4, 0.4).u.max_abs_coeff(), 0.0);
  EXPECT_LE(coefficient_distance(flow_two_param(e, 0.9, 0.2).u, translation(0.3 * 0.7)), 1e-15);
  EXPECT_LE(coefficient_distance(flow_two_param(e, 0.1, 0.8).u, translation(-0.3 * 0.7)), 1e-15);
}

TEST(TwoParameterFlow, Cocycle) {
  Rng rng(43);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const EvolutionResult e = evol_right(random_field(rng, 0.2));
  for (int s = 0; s < 4; ++s) {
    const double t = u(rng), m = u(rng), t0 = u(rng);
    const AnalyticDiffeo lhs = compose_diffeo(flow_two_param(e, t, m), flow_two_param(e, m, t0));
    EXPECT_LE(sampled_distance(lhs.u, flow_two_param(e, t, t0).u), 1e-8);
  }
}

TEST(TwoParameterFlow, CertificateAndAbsoluteContinuity) {
  Rng rng(44);
  const AdmissibleField g = random_field(rng);
  const EvolutionResult e = evol_right(g);
  for (double t0 : {0.0, 0.5}) {
    for (int k = 0; k <= 4; ++k) {
      const double t = k / 4.0;
      const AnalyticDiffeo fl = flow_two_param(e, t, t0);
      EXPECT_LT(fl.mu, 1.0);
      const JacobianReport jr = jacobian_report(fl);
      EXPECT_GE(jr.min_value, jr.bound);
      EXPECT_GT(jr.bound, 0.0);
    }
    for (int level = 1; level <= 3; ++level) {
      const int n = 1 << level;
      for (int k = 0; k < n; ++k) {
        const double t1 = static_cast<double>(k) / n, t2 = static_cast<double>(k + 1) / n;
        const double step = sampled_distance(flow_two_param(e, t2, t0).u, flow_two_param(e, t1, t0).u);
        const double modulus = lp_norm(g.gamma.reparametrized(t1, t2), 1, StripNorm::nu(0.0));
        EXPECT_LE(step, modulus * (1 + 1e-9) + 1e-12);
      }
    }
  }
}

TEST(Adjoint, IdentityTranslationRoundTrip) {
  Rng rng(45);
  const FourierMap x = 0.1 * random_map(rng, 1, 1, kOrder, 0.3);
  EXPECT_LE(coefficient_distance(adjoint(AnalyticDiffeo::identity(1, kOrder, kEps), x), x), 1e-16);
  const FourierMap shifted = adjoint(diffeo(translation(0.15)), x);
  for (double p : {0.0, 0.3, 0.77}) {
    EXPECT_NEAR(shifted.eval_real({p, 0})[0], x.eval_real({p - 0.15, 0})[0], 1e-14);
  }
  const AnalyticDiffeo phi = diffeo(0.02 * random_map(rng, 1, 1, kOrder, 0.3));
  const FourierMap back = adjoint(phi, adjoint(invert_diffeo(phi), x));
  EXPECT_LE(sampled_distance(back, x), 1e-8);
}

TEST(Adjoint, PullbackIsInverseAdjoint) {
  Rng rng(46);
  const FourierMap x = 0.1 * random_map(rng, 1, 1, kOrder, 0.3);
  const AnalyticDiffeo phi = diffeo(0.03 * random_map(rng, 1, 1, kOrder, 0.3));
  EXPECT_LE(sampled_distance(pullback_field(phi, x), adjoint(invert_diffeo(phi), x)), 1e-9);
  // Oracle: (1 + u'(x))^{-1} X(x + u(x)) at a point.
  const RPoint p{0.41, 0.0};
  const double up = phi.u.derivative(0).eval_real(p)[0];
  const double want = x.eval_real({p[0] + phi.u.eval_real(p)[0], 0})[0] / (1.0 + up);
  EXPECT_NEAR(pullback_field(phi, x).eval_real(p)[0], want, 1e-12);
}

TEST(Odot, NeutralElementAndTranslations) {
  const auto g = autonomous(sine(0.02));
  const auto zero = AdmissibleField::certify(TimeDependentField::zero(1, 1, kOrder, 0.1), kEps);
  for (double t : {0.1, 0.55, 0.9}) {
    EXPECT_LE(coefficient_distance(odot(g, zero).value(t), g.gamma.value(t)), 1e-16);
    EXPECT_LE(coefficient_distance(odot(zero, g).value(t), g.gamma.value(t)), 1e-16);
  }
  const auto a = autonomous(translation(0.1));
  const auto b = autonomous(translation(-0.3));
  EXPECT_LE(coefficient_distance(odot(a, b).value(0.4), translation(-0.2)), 1e-15);
}

TEST(Odot, Homomorphism) {
  Rng rng(47);
  for (int s = 0; s < 2; ++s) {
    const AdmissibleField g = random_field(rng, 0.2);
    const AdmissibleField h = random_field(rng, 0.2);
    const auto prod = AdmissibleField::certify(odot(g, h), kEps);
    const EvolutionResult lhs = evol_left(prod);
    const EvolutionResult eg = evol_left(g);
    const EvolutionResult eh = evol_left(h);
    for (double t : {0.25, 0.5, 1.0}) {
      const AnalyticDiffeo rhs = compose_diffeo(eg.at(t), eh.at(t));
      EXPECT_LE(sampled_distance(lhs.at(t).u, rhs.u), 1e-7);
    }
  }
}

TEST(Odot, AffineInFirstArgument) {
  Rng rng(48);
  const AdmissibleField g1 = random_field(rng, 0.2);
  const AdmissibleField g2 = random_field(rng, 0.2);
  const AdmissibleField h = random_field(rng, 0.2);
  const double a = 0.3;
  const auto mix = AdmissibleField::certify(g1.gamma.scaled(a) + g2.gamma.scaled(1 - a), kEps);
  const TimeDependentField lhs = odot(mix, h);
  const TimeDependentField rhs = odot(g1, h).scaled(a) + odot(g2, h).scaled(1 - a);
  for (double t : {0.05, 0.33, 0.71, 0.99}) {
    EXPECT_LE(coefficient_distance(lhs.value(t), rhs.value(t)), 1e-10);
  }
}

TEST(Derivative, AtZeroTrivial) {
  const auto zero = TimeDependentField::zero(1, 1, kOrder, 0.1);
  EXPECT_EQ(derivative_at_zero(zero, kEps, 0.7, 1e-3).discrepancy, 0.0);
  const auto c = TimeDependentField::constant(translation(0.3), 0.1);
  EXPECT_LE(derivative_at_zero(c, kEps, 0.7, 1e-3).discrepancy, 1e-15);
}

TEST(Derivative, AtZeroRichardson) {
  const auto g = TimeDependentField::constant(sine(0.2), 0.1);
  const double d1 = derivative_at_zero(g, kEps, 1.0, 1e-3).discrepancy;
  const double d2 = derivative_at_zero(g, kEps, 1.0, 5e-4).discrepancy;
  EXPECT_LE(d1, 1e-6);
  EXPECT_NEAR(d1 / d2, 4.0, 0.2);
}

TEST(Derivative, AtEtaTrivial) {
  const auto zero = AdmissibleField::certify(TimeDependentField::zero(1, 1, kOrder, 0.1), kEps);
  const auto g = TimeDependentField::constant(sine(0.2), 0.1);
  const ProbeDerivativeReport r = derivative_at_eta(zero, g, 0.8, 1e-3);
  const FourierMap w = g.integral(0.0, 0.8);
  for (std::size_t i = 0; i < r.probes.size(); ++i) {
    EXPECT_NEAR(r.formula[i], w.eval_real({r.probes[i], 0})[0], 1e-14);
  }
  EXPECT_LE(r.discrepancy, 1e-6);
  const ProbeDerivativeReport z = derivative_at_eta(autonomous(sine(0.02)), TimeDependentField::zero(1, 1, kOrder, 0.1), 0.8, 1e-3);
  EXPECT_LE(z.discrepancy, 1e-12);
  for (double v : z.formula) EXPECT_EQ(v, 0.0);
}

TEST(Derivative, AtEtaMatchesFiniteDifference) {
  const auto eta = autonomous(sine(0.02));
  const auto g = TimeDependentField::constant(cosine(0.3), 0.1);
  const ProbeDerivativeReport r = derivative_at_eta(eta, g, 1.0, 1e-3);
  EXPECT_LE(r.discrepancy, 1e-5);
  // Dropping the right translation by Evol(eta)(t) breaks the match.
  double untranslated = 0.0;
  for (std::size_t i = 0; i < r.probes.size(); ++i) {
    untranslated = std::max(untranslated,
                            std::abs(r.finite_difference[i] - r.w.eval_real({r.probes[i], 0})[0]));
  }
  EXPECT_GT(untranslated, 1e-4);
}

TEST(Trotter, TrivialCases) {
  for (const auto& p : trotter(sine(0.02), FourierMap::field(1, kOrder), kEps, {1, 4, 16})) {
    EXPECT_LE(p.distance, 1e-10);
  }
  for (const auto& p : trotter(translation(0.1), translation(0.2), kEps, {2, 8})) {
    EXPECT_LE(p.distance, 1e-14);
  }
}

TEST(Trotter, FirstOrderConvergence) {
  const auto curve = trotter(sine(0.02), cosine(0.02), kEps, {8, 16, 32, 64, 128});
  for (std::size_t i = 1; i < curve.size(); ++i) {
    const double r = curve[i].distance / curve[i - 1].distance;
    EXPECT_GE(r, 0.35);
    EXPECT_LE(r, 0.65);
  }
  EXPECT_LE(curve.back().distance, curve.front().distance / 10);
}

TEST(VerifyPointwise, SelfConsistency) {
  Rng rng(49);
  const AdmissibleField g = random_field(rng);
  std::vector<CPoint> probes;
  for (int i = 0; i < 8; ++i) probes.push_back({Complex(i / 8.0 + 0.03, 0.0), 0.0});
  const PointwiseReport right = verify_evolution_pointwise(evol_right(g), g.gamma, probes);
  EXPECT_TRUE(right.pass) << right.max_residual;
  const PointwiseReport left = verify_evolution_pointwise(evol_left(g), g.gamma, probes);
  EXPECT_TRUE(left.pass) << left.max_residual;
}

TEST(VerifyPointwise, IdentityPathFails) {
  const auto g = autonomous(sine(0.02));
  EvolutionResult id = evol_right(AdmissibleField::certify(TimeDependentField::zero(1, 1, kOrder, 0.1), kEps));
  const std::vector<CPoint> probes{{Complex(0.25, 0.0), 0.0}};
  const PointwiseReport r = verify_evolution_pointwise(id, g.gamma, probes);
  EXPECT_FALSE(r.pass);
  EXPECT_NEAR(r.max_residual, 0.02, 1e-12);
  EXPECT_EQ(r.worst_time, 1.0);
}

TEST(VerifyPointwise, InjectedFaultIsLocalized) {
  const auto g = autonomous(sine(0.02));
  EvolutionResult e = evol_right(g);
  const std::size_t j = 17;
  e.path.breakpoints()[j] += translation(1e-4);
  const std::vector<CPoint> probes{{Complex(0.1, 0.0), 0.0}, {Complex(0.6, 0.0), 0.0}};
  const PointwiseReport r = verify_evolution_pointwise(e, g.gamma, probes);
  EXPECT_FALSE(r.pass);
  EXPECT_EQ(r.worst_time, e.path.grid().points()[j]);
  for (const auto& row : r.rows) {
    if (row.time != r.worst_time) EXPECT_LE(row.residual, kTolPointwise);
  }
}
