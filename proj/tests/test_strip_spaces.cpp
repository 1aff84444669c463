#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "torusflow/composition.hpp"
#include "torusflow/errors.hpp"
#include "torusflow/fourier_map.hpp"
#include "torusflow/random_fields.hpp"

using namespace torusflow;

namespace {

FourierMap cos1(int order = 8) {
  FourierMap f = FourierMap::scalar(1, order);
  f.set_coeff({1, 0}, 0, 0.5);
  return f;
}

FourierMap sin1(int order = 8) {
  FourierMap f = FourierMap::scalar(1, order);
  f.set_coeff({1, 0}, 0, Complex(0.0, -0.5));
  return f;
}

// Direct Fourier sum, independent of the library's power recurrence.
Complex direct_eval(const FourierMap& f, int comp, const CPoint& z) {
  Complex acc = 0.0;
  for (std::size_t m = 0; m < f.mode_count(); ++m) {
    const Index& k = f.lattice()[m];
    Complex phase = 0.0;
    for (int j = 0; j < f.dim(); ++j) phase += static_cast<double>(k[j]) * z[j];
    acc += f.raw(m, comp) * std::exp(Complex(0.0, kTwoPi) * phase);
  }
  return acc;
}

}  // namespace

TEST(EvalComplex, ConstantMap) {
  const double c[] = {0.7};
  const FourierMap f = FourierMap::constant(1, 4, c);
  EXPECT_NEAR(std::abs(f.eval({Complex(0.3, 0.04), 0.0})[0] - 0.7), 0.0, 1e-15);
}

TEST(EvalComplex, CosineAtImaginaryPoint) {
  const Complex v = cos1().eval({Complex(0.0, 0.1), 0.0})[0];
  EXPECT_NEAR(v.real(), std::cosh(0.2 * M_PI), 1e-14);
  EXPECT_NEAR(v.real(), 1.20397, 5e-6);
  EXPECT_NEAR(v.imag(), 0.0, 1e-15);
}

TEST(EvalComplex, SineAtQuarter) {
  EXPECT_NEAR(sin1().eval_real({0.25, 0.0})[0], 1.0, 1e-15);
}

TEST(EvalComplex, RealPointsGiveRealValues) {
  Rng rng(11);
  for (int dim : {1, 2}) {
    const FourierMap f = random_map(rng, dim, dim, 12);
    for (double x : {0.0, 0.13, 0.5, 0.91}) {
      const CPoint v = f.eval({Complex(x, 0.0), Complex(0.37 - x, 0.0)});
      for (int i = 0; i < dim; ++i) EXPECT_LE(std::abs(v[i].imag()), 1e-12);
    }
  }
}

TEST(StripNorms, Zero) {
  const NormReport r = FourierMap::scalar(1, 8).norms(0.1);
  EXPECT_EQ(r.nu, 0.0);
  EXPECT_EQ(r.beta, 0.0);
}

TEST(StripNorms, CosineFormulaValues) {
  const NormReport r = cos1().norms(0.1);
  EXPECT_NEAR(r.nu, std::exp(0.2 * M_PI), 1e-14);
  EXPECT_NEAR(r.nu, 1.87446, 5e-6);
  EXPECT_NEAR(r.mu, 2.0 * M_PI * std::exp(0.2 * M_PI), 1e-13);
  EXPECT_NEAR(r.mu, 11.7776, 5e-5);
  EXPECT_EQ(r.beta, r.mu);
}

TEST(StripNorms, MajorantDominatesDenseSamples) {
  Rng rng(7);
  const double eps = 0.05;
  for (int trial = 0; trial < 5; ++trial) {
    const FourierMap f = random_map(rng, 1, 1, 32);
    double sup = 0.0;
    for (int a = 0; a < 512; ++a) {
      for (int b = 0; b < 8; ++b) {
        const double y = -eps + 2.0 * eps * b / 7.0;
        sup = std::max(sup, std::abs(direct_eval(f, 0, {Complex(a / 512.0, y), 0.0})));
      }
    }
    EXPECT_GE(f.nu(eps), sup);
  }
}

TEST(StripNorms, MajorantsDominateOnTwoTorus) {
  Rng rng(8);
  const double eps = 0.04;
  for (int trial = 0; trial < 3; ++trial) {
    const FourierMap f = random_map(rng, 2, 2, 8);
    const auto jac = jacobian(f);
    double sup = 0.0;
    double op = 0.0;
    for (int a = 0; a < 16; ++a) {
      for (int b = 0; b < 16; ++b) {
        for (double y : {-eps, 0.0, eps}) {
          const CPoint z{Complex(a / 16.0, y), Complex(b / 16.0, -y)};
          for (int i = 0; i < 2; ++i) {
            sup = std::max(sup, std::abs(direct_eval(f, i, z)));
            op = std::max(op, std::abs(direct_eval(jac[2 * i], 0, z)) +
                                  std::abs(direct_eval(jac[2 * i + 1], 0, z)));
          }
        }
      }
    }
    EXPECT_GE(f.nu(eps), sup);
    EXPECT_GE(f.mu(eps), op);
  }
}

TEST(StripNorms, MonotoneInEps) {
  Rng rng(3);
  const FourierMap f = random_map(rng, 1, 1, 16);
  double prev_nu = 0.0;
  double prev_beta = 0.0;
  for (double eps : {0.0, 0.01, 0.02, 0.05, 0.1}) {
    const NormReport r = f.norms(eps);
    EXPECT_GE(r.nu, prev_nu);
    EXPECT_GE(r.beta, prev_beta);
    EXPECT_GE(r.beta, r.nu);
    prev_nu = r.nu;
    prev_beta = r.beta;
  }
}

TEST(StripNorms, ImaginaryPartAndLipschitzBounds) {
  Rng rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double eps = 0.05;
  const FourierMap f = random_map(rng, 1, 1, 24);
  const double beta = f.beta(eps);
  for (int s = 0; s < 200; ++s) {
    const double y = eps * (2.0 * u(rng) - 1.0);
    const CPoint z{Complex(u(rng), y), 0.0};
    EXPECT_LE(std::abs(f.eval(z)[0].imag()), beta * std::abs(y) + 1e-14);
    const CPoint w{Complex(u(rng), eps * (2.0 * u(rng) - 1.0)), 0.0};
    EXPECT_LE(std::abs(f.eval(z)[0] - f.eval(w)[0]), beta * std::abs(z[0] - w[0]) + 1e-13);
  }
}

TEST(Compose, ZeroPerturbationIsIdentity) {
  Rng rng(1);
  const FourierMap g = random_map(rng, 1, 1, 16);
  EXPECT_LE(coefficient_distance(compose(g, FourierMap::field(1, 16)), g), 1e-15);
}

TEST(Compose, ConstantAbsorbs) {
  Rng rng(2);
  const double c[] = {1.5};
  const FourierMap g = FourierMap::constant(1, 16, c);
  FourierMap p = 0.01 * random_map(rng, 1, 1, 16);
  EXPECT_LE(coefficient_distance(compose(g, p), g), 1e-15);
}

TEST(Compose, QuarterShiftTurnsSineIntoCosine) {
  const double shift[] = {0.25};
  const FourierMap out = compose(sin1(16), FourierMap::constant(1, 16, shift));
  EXPECT_LE(coefficient_distance(out, cos1(16)), 1e-12);
}

TEST(Compose, AgreesWithPointwiseEvaluation) {
  Rng rng(4);
  const FourierMap g = random_map(rng, 2, 2, 16, 0.35);
  const FourierMap p = 0.02 * random_map(rng, 2, 2, 16, 0.35);
  const FourierMap out = compose(g, p);
  for (double x : {0.1, 0.45, 0.8}) {
    const RPoint pt{x, 1.0 - x * x};
    const RPoint d = p.eval_real(pt);
    const RPoint want = g.eval_real({pt[0] + d[0], pt[1] + d[1]});
    const RPoint got = out.eval_real(pt);
    EXPECT_NEAR(got[0], want[0], 1e-10);
    EXPECT_NEAR(got[1], want[1], 1e-10);
  }
}

TEST(Compose, LinearInOuterMap) {
  Rng rng(6);
  const FourierMap g1 = random_map(rng, 1, 1, 32);
  const FourierMap g2 = random_map(rng, 1, 1, 32);
  const FourierMap p = 0.03 * random_map(rng, 1, 1, 32);
  const FourierMap lhs = compose(2.0 * g1 - 0.5 * g2, p);
  const FourierMap rhs = 2.0 * compose(g1, p) - 0.5 * compose(g2, p);
  EXPECT_LE(coefficient_distance(lhs, rhs), 1e-13);
  EXPECT_TRUE(lhs.is_real());
  EXPECT_LE(lhs.reality_defect(), 1e-15);
}

TEST(Compose, TruncationBudgetEnforced) {
  // A slowly decaying outer map displaced far produces spectral mass past the cut.
  FourierMap g = FourierMap::scalar(1, 8);
  g.set_coeff({8, 0}, 0, 1.0);
  FourierMap p = FourierMap::field(1, 8);
  p.set_coeff({1, 0}, 0, 0.2);
  try {
    compose(g, p);
    FAIL() << "expected TruncationBudgetExceeded";
  } catch (const FlowError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TruncationBudgetExceeded);
  }
}

TEST(Compose, StripReachEnforced) {
  FourierMap p = FourierMap::field(1, 8);
  p.set_coeff({1, 0}, 0, 0.1);
  try {
    compose(cos1(8), p, {}, StripReach{0.05, 0.06});
    FAIL() << "expected DomainEscape";
  } catch (const FlowError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DomainEscape);
  }
}

TEST(Restrict, NormShrinks) {
  Rng rng(9);
  const FourierMap f = random_map(rng, 2, 1, 8);
  const Restriction r = restrict_to(f, 0.1, 0.05);
  EXPECT_LE(r.at_target.nu, f.nu(0.1));
  EXPECT_EQ(coefficient_distance(r.map, f), 0.0);
}

TEST(Restrict, SingleModeFactor) {
  const FourierMap f = cos1();
  const Restriction r = restrict_to(f, 0.2, 0.1);
  EXPECT_NEAR(r.at_target.nu / f.nu(0.2), std::exp(-0.2 * M_PI), 1e-15);
}

TEST(Restrict, CauchyEstimateOnUnitBall) {
  Rng rng(10);
  const double from = 0.1;
  const double to = 0.05;
  // Independent maximisation of 2 pi n exp(-2 pi n gap) over n = 0..order.
  double factor = 0.0;
  for (int n = 0; n <= 32; ++n) factor = std::max(factor, kTwoPi * n * std::exp(-kTwoPi * n * (from - to)));
  for (int s = 0; s < 100; ++s) {
    FourierMap f = random_map(rng, 1, 1, 32, 0.05);
    f *= 1.0 / f.nu(from);
    const Restriction r = restrict_to(f, from, to);
    EXPECT_LE(r.at_target.mu, factor * 1.0 + 1e-12);
    EXPECT_LE(r.at_target.beta, std::max(1.0, factor) + 1e-12);
  }
  EXPECT_NEAR(restrict_to(cos1(32), from, to).max_derivative_gain, factor, 1e-12);
}

TEST(Jacobian, ConstantMapHasZeroJacobian) {
  const double c[] = {0.1, -0.2};
  for (const auto& e : jacobian(FourierMap::constant(2, 4, c))) EXPECT_EQ(e.max_abs_coeff(), 0.0);
}

TEST(Jacobian, SineDerivative) {
  const auto j = jacobian(sin1());
  EXPECT_LE(coefficient_distance(j[0], kTwoPi * cos1()), 1e-15);
}

TEST(Jacobian, MatchesCentredDifferences) {
  Rng rng(12);
  const FourierMap f = random_map(rng, 2, 2, 10);
  const auto jac = jacobian(f);
  const double h = 1e-5;
  for (int s = 0; s < 64; ++s) {
    const RPoint x{s / 64.0, std::fmod(s * 0.618, 1.0)};
    for (int j = 0; j < 2; ++j) {
      RPoint xp = x;
      RPoint xm = x;
      xp[j] += h;
      xm[j] -= h;
      const RPoint fp = f.eval_real(xp);
      const RPoint fm = f.eval_real(xm);
      for (int i = 0; i < 2; ++i) {
        const double fd = (fp[i] - fm[i]) / (2.0 * h);
        EXPECT_NEAR(jac[i * 2 + j].eval_real(x)[0], fd, 1e-7 * std::max(1.0, std::abs(fd)));
      }
    }
  }
}

TEST(Multiply, ExactConvolution) {
  const FourierMap c = cos1(4);
  const FourierMap sq = multiply(c, c);
  EXPECT_EQ(sq.order(), 8);
  for (double x : {0.0, 0.2, 0.7}) {
    EXPECT_NEAR(sq.eval_real({x, 0})[0], std::pow(std::cos(kTwoPi * x), 2), 1e-15);
  }
}
