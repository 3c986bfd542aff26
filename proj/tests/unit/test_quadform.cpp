#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "smdet/quadform.hpp"
#include "test_util.hpp"

using namespace smdet;
using testutil::code_of;

namespace {

QuadFormSpec spec_of(std::vector<double> lam, std::vector<cplx> mu, double t, double nv = 0.0) {
  QuadFormSpec s;
  s.eigenvalues = std::move(lam);
  s.shifts = std::move(mu);
  s.threshold = t;
  s.normal_var = nv;
  return s;
}

double empirical_cdf(const QuadFormSpec& s, int draws, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  int below = 0;
  for (int i = 0; i < draws; ++i)
    below += oracle::sample_quadratic_form(s.eigenvalues, s.shifts, s.normal_var, rng) <= s.threshold;
  return static_cast<double>(below) / draws;
}

}  // namespace

TEST(QuadForm, SingleExponential) {
  // lambda |w|^2 is exponential with mean lambda
  for (double t : {0.1, 0.5, 1.0, 3.0})
    EXPECT_NEAR(quadratic_form_cdf(spec_of({2.0}, {0.0}, t)), 1.0 - std::exp(-t / 2.0), 1e-7);
  // negative eigenvalue: P{-|w|^2 <= t} = exp(t) for t < 0
  EXPECT_NEAR(quadratic_form_cdf(spec_of({-1.0}, {0.0}, -0.7)), std::exp(-0.7), 1e-7);
}

TEST(QuadForm, DistinctEigenvaluesClosedForm) {
  // hypoexponential: P{Q > t} = sum_i prod_{j!=i} l_i/(l_i-l_j) exp(-t/l_i)
  const std::vector<double> lam = {0.5, 1.5, 3.0};
  for (double t : {0.2, 1.0, 4.0, 10.0}) {
    double tail = 0.0;
    for (std::size_t i = 0; i < lam.size(); ++i) {
      double w = 1.0;
      for (std::size_t j = 0; j < lam.size(); ++j)
        if (j != i) w *= lam[i] / (lam[i] - lam[j]);
      tail += w * std::exp(-t / lam[i]);
    }
    EXPECT_NEAR(quadratic_form_cdf(spec_of(lam, {0.0, 0.0, 0.0}, t)), 1.0 - tail, 1e-7) << t;
  }
}

TEST(QuadForm, IndefiniteClosedForm) {
  // Q = a|w1|^2 - b|w2|^2: P{Q <= 0} = b / (a + b)
  EXPECT_NEAR(quadratic_form_cdf(spec_of({2.0, -0.5}, {0.0, 0.0}, 0.0)), 0.5 / 2.5, 1e-7);
  EXPECT_NEAR(quadratic_form_cdf(spec_of({1.0, -1.0}, {0.0, 0.0}, 0.0)), 0.5, 1e-7);
}

TEST(QuadForm, PureGaussian) {
  // no quadratic part: Q ~ N(0, v)
  const double v = 2.0;
  for (double t : {-2.0, -0.3, 0.0, 1.1}) {
    const double want = 0.5 * std::erfc(-t / std::sqrt(2.0 * v));
    EXPECT_NEAR(quadratic_form_cdf(spec_of({}, {}, t, v)), want, 1e-7) << t;
  }
}

TEST(QuadForm, NoncentralMatchesSampling) {
  const std::vector<QuadFormSpec> cases = {
      spec_of({1.0, -0.4}, {cplx(0.8, -0.2), cplx(0.3, 1.0)}, 0.0),
      spec_of({0.3, 0.3, -2.0}, {cplx(1.0, 0.0), cplx(0.0, 0.5), cplx(-0.2, 0.1)}, -0.5),
      spec_of({1.5}, {cplx(2.0, 0.0)}, 4.0, 0.5),
      spec_of({-0.7, 0.2}, {cplx(0.0, 0.0), cplx(0.5, 0.5)}, 0.1, 0.05),
  };
  const int draws = 200000;
  std::uint64_t seed = 100;
  for (const QuadFormSpec& s : cases) {
    const double p = empirical_cdf(s, draws, seed++);
    const double se = std::sqrt(p * (1 - p) / draws);
    EXPECT_NEAR(quadratic_form_cdf(s), p, 4.0 * se + 1e-4);
  }
}

TEST(QuadForm, MonotoneInThresholdWithLimits) {
  const QuadFormSpec base = spec_of({1.0, -0.5, 0.25}, {cplx(0.5, 0.5), 0.0, cplx(-1.0, 0.0)}, 0.0, 0.1);
  double prev = 0.0;
  for (double t = -30.0; t <= 30.0; t += 1.5) {
    QuadFormSpec s = base;
    s.threshold = t;
    const double p = quadratic_form_cdf(s);
    EXPECT_GE(p, prev - 1e-8);
    EXPECT_GE(p, -1e-8);
    EXPECT_LE(p, 1.0 + 1e-8);
    prev = p;
  }
  QuadFormSpec lo = base, hi = base;
  lo.threshold = -60.0;
  hi.threshold = 120.0;
  EXPECT_LT(quadratic_form_cdf(lo), 1e-6);
  EXPECT_GT(quadratic_form_cdf(hi), 1.0 - 1e-6);
}

TEST(QuadForm, InvalidSpec) {
  EXPECT_EQ(code_of([] { quadratic_form_cdf(spec_of({}, {}, 0.0)); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { quadratic_form_cdf(spec_of({1.0}, {}, 0.0)); }), ErrorCode::ShapeMismatch);
}
