#include <gtest/gtest.h>

#include <cmath>

#include "torusflow/errors.hpp"
#include "torusflow/random_fields.hpp"
#include "torusflow/time_field.hpp"

using namespace torusflow;

namespace {

FourierMap sine(double a, int order = 8) {
  FourierMap f = FourierMap::field(1, order);
  f.set_coeff({1, 0}, 0, Complex(0.0, -0.5 * a));
  return f;
}

FourierMap translation(double c, int order = 8) {
  const double v[] = {c};
  return FourierMap::constant(1, order, v);
}

// gamma(t) = sin(2 pi t) v
TimeDependentField sine_in_time(const FourierMap& v) {
  Piece p = Piece::constant(FourierMap::zero(v.dim(), v.components(), v.order()));
  p.omega = kTwoPi;
  p.cosine = FourierMap::zero(v.dim(), v.components(), v.order());
  p.sine = v;
  return TimeDependentField(TimeGrid(), {p}, 0.1);
}

TimeDependentField linear_in_time(const FourierMap& c) {
  Piece p;
  p.poly = {FourierMap::zero(c.dim(), c.components(), c.order()), c};
  return TimeDependentField(TimeGrid(), {p}, 0.1);
}

}  // namespace

TEST(TimeGrid, RejectsBadBreakpoints) {
  EXPECT_THROW(TimeGrid({0.0, 0.5, 0.5, 1.0}), FlowError);
  EXPECT_THROW(TimeGrid({0.1, 1.0}), FlowError);
  EXPECT_THROW(TimeGrid({0.0, 0.9}), FlowError);
}

TEST(TimeGrid, RefineAndMerge) {
  const TimeGrid g({0.0, 0.3, 1.0});
  const TimeGrid r = g.refined(0.25);
  EXPECT_EQ(r.intervals(), 5u);
  const TimeGrid m = g.merged(TimeGrid::uniform(2));
  EXPECT_EQ(m.points(), (std::vector<double>{0.0, 0.3, 0.5, 1.0}));
  EXPECT_EQ(m.locate(1.0), 2u);
  EXPECT_EQ(m.locate(0.3), 1u);
}

TEST(LpNorm, ZeroField) {
  const auto z = TimeDependentField::zero(1, 1, 8, 0.1);
  EXPECT_EQ(lp_norm(z, 1, StripNorm::nu(0.05)), 0.0);
}

TEST(LpNorm, StepIntegral) {
  // nu_0 of a translation by 0.2 is 0.2 on both halves.
  const TimeDependentField f(TimeGrid::uniform(2),
                             {Piece::constant(translation(0.2)), Piece::constant(translation(-0.2))}, 0.1);
  EXPECT_NEAR(lp_norm(f, 1, StripNorm::nu(0.05)), 0.2, 1e-15);
}

TEST(LpNorm, LinearRamp) {
  const auto f = linear_in_time(translation(0.3));
  EXPECT_NEAR(lp_norm(f, 1, StripNorm::nu(0.05)), 0.15, 1e-13);
  EXPECT_NEAR(lp_norm(f, 2, StripNorm::nu(0.05)), 0.3 / std::sqrt(3.0), 1e-13);
  EXPECT_NEAR(lp_norm(f, kInfinity, StripNorm::nu(0.05)), 0.3, 1e-12);
}

TEST(LpNorm, HarmonicPiece) {
  const auto f = sine_in_time(translation(1.0));
  EXPECT_NEAR(lp_norm(f, 1, StripNorm::nu(0.0)), 2.0 / M_PI, 1e-12);
  EXPECT_NEAR(lp_norm(f, kInfinity, StripNorm::nu(0.0)), 1.0, 1e-12);
}

TEST(LpNorm, ScaleMismatch) {
  const auto f = TimeDependentField::constant(sine(0.1), 0.1);
  try {
    lp_norm(f, 1, StripNorm::beta(0.2));
    FAIL();
  } catch (const FlowError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ScaleMismatch);
  }
}

TEST(LpNorm, HolderOrdering) {
  Rng rng(21);
  for (int s = 0; s < 20; ++s) {
    const TimeDependentField c = random_admissible_field(rng, {.order = 12, .pieces = 5});
    Piece p;
    p.poly = {random_map(rng, 1, 1, 12), random_map(rng, 1, 1, 12), random_map(rng, 1, 1, 12)};
    const TimeDependentField f = c + TimeDependentField(TimeGrid({0.0, 0.37, 1.0}), {p, p}, 0.1);
    const StripNorm q = StripNorm::beta(0.1);
    const double n1 = lp_norm(f, 1, q);
    const double n2 = lp_norm(f, 2, q);
    const double ni = lp_norm(f, kInfinity, q);
    EXPECT_LE(n1, n2 * (1 + 1e-12));
    EXPECT_LE(n2, ni * (1 + 1e-12));
  }
}

TEST(Primitive, ConstantIntegrand) {
  const FourierMap c = sine(0.1);
  const ACPath p = integrate_primitive(TimeDependentField::constant(c, 0.1));
  for (double t : {0.0, 0.3, 1.0}) EXPECT_LE(coefficient_distance(p.value(t), t * c), 1e-16);
}

TEST(Primitive, Cancellation) {
  const TimeDependentField f(TimeGrid::uniform(2),
                             {Piece::constant(translation(0.2)), Piece::constant(translation(-0.2))}, 0.1);
  const ACPath p = integrate_primitive(f);
  EXPECT_LE(p.values.back().max_abs_coeff(), 1e-17);
  EXPECT_LE(p.integral_defect(), kTolIntegral);
  EXPECT_LE(p.continuity_defect(), kTolIntegral);
}

TEST(Primitive, HarmonicAntiderivative) {
  const FourierMap v = sine(0.3);
  const ACPath p = integrate_primitive(sine_in_time(v));
  for (double t : {0.1, 0.25, 0.6, 1.0}) {
    const FourierMap want = ((1.0 - std::cos(kTwoPi * t)) / kTwoPi) * v;
    EXPECT_LE(coefficient_distance(p.value(t), want), 1e-16);
  }
}

TEST(Primitive, DifferentiationRecoversField) {
  Rng rng(22);
  Piece a;
  a.poly = {random_map(rng, 1, 1, 8), random_map(rng, 1, 1, 8), random_map(rng, 1, 1, 8),
            random_map(rng, 1, 1, 8)};
  const TimeDependentField f(TimeGrid({0.0, 0.4, 1.0}), {a, a.scaled(-2.0)}, 0.1);
  const ACPath p = integrate_primitive(f);
  // Five-point stencil, exact on quartics.
  const double h = 1e-3;
  for (double mid : {0.2, 0.7}) {
    const FourierMap fd = (1.0 / (12.0 * h)) * (8.0 * (p.value(mid + h) - p.value(mid - h)) -
                                                 (p.value(mid + 2 * h) - p.value(mid - 2 * h)));
    EXPECT_LE(coefficient_distance(fd, f.value(mid)), 1e-9);
  }
}

TEST(FieldAlgebra, ReversedNegated) {
  Rng rng(23);
  Piece a;
  a.poly = {random_map(rng, 1, 1, 6), random_map(rng, 1, 1, 6)};
  Piece b = Piece::constant(random_map(rng, 1, 1, 6));
  b.omega = 3.0;
  b.cosine = random_map(rng, 1, 1, 6);
  b.sine = random_map(rng, 1, 1, 6);
  const TimeDependentField f(TimeGrid({0.0, 0.3, 1.0}), {a, b}, 0.1);
  const TimeDependentField r = f.reversed_negated();
  for (double t : {0.05, 0.5, 0.69, 0.9}) {
    EXPECT_LE(coefficient_distance(r.value(t), -f.value(1.0 - t)), 1e-14);
  }
}

TEST(FieldAlgebra, Reparametrized) {
  Rng rng(25);
  Piece a;
  a.poly = {random_map(rng, 1, 1, 6), random_map(rng, 1, 1, 6), random_map(rng, 1, 1, 6)};
  Piece b = Piece::constant(random_map(rng, 1, 1, 6));
  b.omega = 5.0;
  b.cosine = random_map(rng, 1, 1, 6);
  b.sine = random_map(rng, 1, 1, 6);
  const TimeDependentField f(TimeGrid({0.0, 0.45, 1.0}), {a, b}, 0.1);
  for (auto [t0, t1] : {std::pair{0.7, 0.1}, std::pair{0.2, 0.9}, std::pair{1.0, 0.0}}) {
    const TimeDependentField g = f.reparametrized(t0, t1);
    for (double r : {0.05, 0.3, 0.62, 0.97}) {
      const FourierMap want = (t1 - t0) * f.value(t0 + (t1 - t0) * r);
      EXPECT_LE(coefficient_distance(g.value(r), want), 1e-13);
    }
  }
}

TEST(FieldAlgebra, SumOnMergedGrid) {
  const TimeDependentField f(TimeGrid::uniform(2),
                             {Piece::constant(translation(0.2)), Piece::constant(translation(-0.2))}, 0.1);
  const auto g = linear_in_time(translation(1.0));
  const auto s = f + g;
  EXPECT_EQ(s.grid().intervals(), 2u);
  EXPECT_NEAR(s.value(0.75).eval_real({0, 0})[0], 0.55, 1e-15);
}

TEST(Postcompose, IdentityLeavesPathUnchanged) {
  const ACPath eta = integrate_primitive(sine_in_time(sine(0.05)));
  const ACPath out = ac_postcompose(eta, identity_rule());
  for (double t : {0.0, 0.33, 1.0}) EXPECT_LE(coefficient_distance(out.value(t), eta.value(t)), 1e-16);
}

TEST(Postcompose, DoublingIsExact) {
  const ACPath eta = integrate_primitive(linear_in_time(sine(0.05)));
  const ACPath out = ac_postcompose(eta, scaling_rule(2.0));
  for (double t : {0.1, 0.5, 0.9}) {
    EXPECT_LE(coefficient_distance(out.value(t), 2.0 * eta.value(t)), 1e-17);
    EXPECT_LE(coefficient_distance(out.derivative.value(t), 2.0 * eta.derivative.value(t)), 1e-17);
  }
}

TEST(Postcompose, SelfCompositionMatchesFiniteDifferences) {
  Rng rng(24);
  const FourierMap v = 0.05 * random_map(rng, 1, 1, 32);
  const ACPath eta = integrate_primitive(sine_in_time(v));
  const SuperpositionRule f = self_composition_rule(0.05, 1.0);
  const ACPath out = ac_postcompose(eta, f);
  const double h = 1e-4;
  for (double t : {0.15, 0.4, 0.8}) {
    const FourierMap fd = (1.0 / (2.0 * h)) * (f.apply(eta.value(t + h)) - f.apply(eta.value(t - h)));
    EXPECT_LE(coefficient_distance(out.derivative.value(t), fd), 1e-6);
  }
}

TEST(Postcompose, DomainEscape) {
  const ACPath eta = integrate_primitive(TimeDependentField::constant(sine(2.0), 0.1));
  try {
    ac_postcompose(eta, self_composition_rule(0.05, 0.5));
    FAIL();
  } catch (const FlowError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DomainEscape);
  }
}
