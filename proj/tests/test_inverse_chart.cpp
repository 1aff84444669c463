#include <gtest/gtest.h>

#include <cmath>

#include "torusflow/errors.hpp"
#include "torusflow/evolution.hpp"
#include "torusflow/inverse_chart.hpp"
#include "torusflow/random_fields.hpp"

using namespace torusflow;

namespace {

FourierMap sine(double a, int order) {
  FourierMap f = FourierMap::field(1, order);
  f.set_coeff({1, 0}, 0, Complex(0.0, -0.5 * a));
  return f;
}

// z + w + 0.05 sin(2 pi z) w^2
LocalAddition quadratic() { return LocalAddition::with_identity(1, {{{2, 0}, sine(0.05, 1)}}); }

CPoint pt(Complex a, Complex b = 0.0) { return {a, b}; }

}  // namespace

TEST(LocalAddition, RejectsBrokenNormalization) {
  FourierMap c = FourierMap::field(1, 1);
  c.set_coeff({0, 0}, 0, 0.1);
  EXPECT_THROW(LocalAddition::with_identity(1, {{{0, 0}, c}}), FlowError);
  // d_w alpha(z, 0) = 1 + 0.1
  EXPECT_THROW(LocalAddition::with_identity(1, {{{1, 0}, c}}), FlowError);
  EXPECT_THROW(LocalAddition(1, {}), FlowError);
  // Cancelling constant terms are accepted.
  EXPECT_NO_THROW(LocalAddition::with_identity(1, {{{0, 0}, c}, {{0, 0}, -c}}));
}

TEST(LocalAddition, Evaluation) {
  const LocalAddition a = quadratic();
  const CPoint v = a(pt(0.1), pt(0.3));
  EXPECT_NEAR(v[0].real(), 0.1 + 0.3 + 0.05 * std::sin(0.2 * M_PI) * 0.09, 1e-15);
  EXPECT_NEAR(a.dw(pt(0.1), pt(0.3))[0].real(), 1.0 + 0.1 * std::sin(0.2 * M_PI) * 0.3, 1e-15);
}

TEST(FindDelta0, FlatIsSentinel) {
  const InverseChartCert c = find_delta0(LocalAddition::flat(2), 0.05);
  EXPECT_TRUE(c.unbounded);
  EXPECT_EQ(c.delta0, 1.0);
}

TEST(FindDelta0, QuadraticClosedForm) {
  const InverseChartCert c = find_delta0(quadratic(), 0.05);
  // 0.1 exp(0.1 pi) delta <= 1/2
  const double exact = 5.0 * std::exp(-0.1 * M_PI);
  EXPECT_GE(c.delta0, 3.6);
  EXPECT_LE(c.delta0, exact);
  EXPECT_GT(c.delta0 * std::exp2(1.0 / 64.0), exact);
  EXPECT_LE(c.scanned_max, 0.5);
  EXPECT_GT(c.scanned_points, 0u);
}

TEST(FindDelta0, TwoDimensional) {
  FourierMap c = FourierMap::field(2, 1);
  c.set_coeff({1, 0}, 1, Complex(0.0, -0.1));
  const LocalAddition a = LocalAddition::with_identity(2, {{{1, 1}, c}});
  const InverseChartCert cert = find_delta0(a, 0.05);
  // row 2: 0.2 e^{0.1 pi} (delta + delta) <= 1/2
  EXPECT_LE(0.2 * std::exp(0.1 * M_PI) * 2 * cert.delta0, 0.5);
  EXPECT_LE(cert.scanned_max, 0.5);
}

TEST(InvertLocal, FlatAndTrivial) {
  const LocalAddition f = LocalAddition::flat(1);
  const InverseChartCert cf = find_delta0(f, 0.05);
  EXPECT_EQ(invert_local(f, cf, pt(0.2), pt(0.45), 1.0)[0], Complex(0.45 - 0.2));
  const LocalAddition q = quadratic();
  const InverseChartCert cq = find_delta0(q, 0.05);
  EXPECT_EQ(invert_local(q, cq, pt(0.7), pt(0.7), cq.delta0)[0], Complex(0.0));
}

TEST(InvertLocal, QuadraticRoot) {
  const LocalAddition q = quadratic();
  const InverseChartCert c = find_delta0(q, 0.05);
  std::vector<double> res;
  const CPoint w = invert_local(q, c, pt(0.1), pt(0.4), c.delta0, &res);
  const double a = 0.05 * std::sin(0.2 * M_PI);
  const double root = (-1.0 + std::sqrt(1.0 + 4.0 * a * 0.3)) / (2.0 * a);
  EXPECT_NEAR(w[0].real(), root, 1e-14);
  EXPECT_NEAR(w[0].real(), 0.297400604377967, 1e-14);
  EXPECT_EQ(w[0].imag(), 0.0);
  for (std::size_t k = 1; k < res.size(); ++k) {
    if (res[k - 1] > 1e-14) EXPECT_LE(res[k], 0.5 * res[k - 1] * (1 + 1e-9));
  }
}

TEST(InvertLocal, OutOfRange) {
  const LocalAddition q = quadratic();
  const InverseChartCert c = find_delta0(q, 0.05);
  try {
    invert_local(q, c, pt(0.1), pt(0.1 + 0.5 * c.delta0), c.delta0);
    FAIL();
  } catch (const FlowError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OutOfRange);
  }
}

TEST(InvertLocal, LipschitzTwoAndCoverage) {
  const LocalAddition q = quadratic();
  const InverseChartCert c = find_delta0(q, 0.05);
  const double delta = c.delta0;
  Rng rng(51);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double y : {0.0, 0.04}) {
    const CPoint z = pt(Complex(0.37, y));
    std::vector<std::pair<CPoint, CPoint>> solved;
    for (int s = 0; s < 1000; ++s) {
      const CPoint target = pt(z[0] + 0.49 * delta * Complex(u(rng), u(rng)) / std::sqrt(2.0));
      const CPoint w = invert_local(q, c, z, target, delta);
      EXPECT_LT(std::abs(w[0]), delta);
      EXPECT_LE(std::abs(q(z, w)[0] - target[0]), kTolLocalInverse);
      solved.emplace_back(target, w);
    }
    for (std::size_t i = 1; i < solved.size(); ++i) {
      const double dt = std::abs(solved[i].first[0] - solved[i - 1].first[0]);
      const double dw = std::abs(solved[i].second[0] - solved[i - 1].second[0]);
      EXPECT_LE(dw, 2.0 * dt * (1 + 1e-12));
    }
  }
}

TEST(FlowToChart, FlatAndIdentity) {
  const auto f = AdmissibleField::certify(TimeDependentField::constant(sine(0.02, 32), 0.1), 0.05);
  const FlowPath p = solve_flow(f);
  const LocalAddition flat = LocalAddition::flat(1);
  const ACPath w = flow_to_chart(p, flat, find_delta0(flat, 0.05));
  for (std::size_t j = 0; j < w.values.size(); ++j) EXPECT_EQ(coefficient_distance(w.values[j], p.breakpoints()[j]), 0.0);
  const auto zero = AdmissibleField::certify(TimeDependentField::zero(1, 1, 32, 0.1), 0.05);
  const LocalAddition q = quadratic();
  const ACPath w0 = flow_to_chart(solve_flow(zero), q, find_delta0(q, 0.05));
  for (const auto& v : w0.values) EXPECT_EQ(v.max_abs_coeff(), 0.0);
}

TEST(FlowToChart, QuadraticRoundTrip) {
  const auto f = AdmissibleField::certify(TimeDependentField::constant(sine(0.02, 32), 0.1), 0.05);
  const FlowPath p = solve_flow(f);
  const LocalAddition q = quadratic();
  const ACPath w = flow_to_chart(p, q, find_delta0(q, 0.05));
  EXPECT_LE(w.integral_defect(), 1e-9);
  double worst = 0.0;
  for (std::size_t j = 0; j < w.values.size(); j += 8) {
    EXPECT_LE(w.values[j].reality_defect(), 0.0);
    for (const CPoint& x : sample_points(1)) {
      const CPoint back = q(x, w.values[j].eval(x));
      worst = std::max(worst, std::abs(back[0] - p.eval(p.grid().points()[j], x)[0]));
    }
  }
  EXPECT_LE(worst, 1e-9);
}

TEST(FlowToChart, ChartRelatedness) {
  Rng rng(52);
  const auto f = AdmissibleField::certify(random_admissible_field(rng, {.pieces = 2}), 0.05);
  EXPECT_LE(chart_relatedness_defect(solve_flow(f), quadratic(), 0.05, {0.5, 0.0}), 1e-10);
}
