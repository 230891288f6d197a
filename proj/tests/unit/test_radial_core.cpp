#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numeric>

#include "polyrad/error.hpp"
#include "polyrad/radial_core.hpp"

namespace {

using namespace polyrad;

// Exact rational arithmetic for the Laplacian of (1+r²)^{1/2} in ℝ⁵.
struct Frac {
  long long num = 0, den = 1;

  Frac(long long n = 0, long long d = 1) : num(n), den(d) { normalize(); }
  void normalize() {
    if (den < 0) num = -num, den = -den;
    const long long g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) num /= g, den /= g;
  }
  Frac operator+(const Frac& o) const { return {num * o.den + o.num * den, den * o.den}; }
  Frac operator*(const Frac& o) const { return {num * o.num, den * o.den}; }
  bool operator==(const Frac&) const = default;
};

// Δ t^p = (4p(p-1) + 2np) t^{p-1} - 4p(p-1) t^{p-2} for t = 1 + r²; powers are stored doubled.
std::map<int, Frac> laplacian_in_t(const std::map<int, Frac>& f, int n) {
  std::map<int, Frac> out;
  for (const auto& [twice_p, c] : f) {
    const Frac p(twice_p, 2);
    const Frac pm1 = p + Frac(-1);
    const Frac a = Frac(4) * p * pm1 + Frac(2 * n) * p;
    const Frac b = Frac(-4) * p * pm1;
    out[twice_p - 2] = out[twice_p - 2] + c * a;
    out[twice_p - 4] = out[twice_p - 4] + c * b;
  }
  std::erase_if(out, [](const auto& kv) { return kv.second.num == 0; });
  return out;
}

TEST(RadialCore, TriharmonicLambdaIsExactly945) {
  std::map<int, Frac> f{{1, Frac(1)}};
  for (int k = 0; k < 3; ++k) f = laplacian_in_t(f, 5);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_EQ(f.begin()->first, -11);
  EXPECT_EQ(f.begin()->second, Frac(945));
  EXPECT_DOUBLE_EQ(kTriharmonicLambda, 945.0);
}

TEST(RadialCore, ClosedFormLambdaAndAmplitude) {
  const auto cf = ClosedForm::triharmonic_5d();
  const std::vector<double> radii{0.5, 1.0, 2.0, 7.0};
  const auto chk = verify_closed_form(cf, cf.spec(), radii);
  ASSERT_TRUE(chk.lambda);
  EXPECT_NEAR(*chk.lambda, 945.0, 945.0 * 1e-12);
  EXPECT_NEAR(*chk.amplitude, std::pow(945.0, -1.0 / 12.0), 1e-15);
  EXPECT_LT(chk.max_residual, 1e-12);
  const auto o = cf.origin();
  EXPECT_DOUBLE_EQ(o.b, 5.0 * o.a);
  EXPECT_DOUBLE_EQ(*o.c, -35.0 * o.a);
}

TEST(RadialCore, BiharmonicClosedFormResidualOnWideRange) {
  const auto cf = ClosedForm::biharmonic_3d();
  std::vector<double> radii;
  for (int i = 0; i <= 400; ++i) radii.push_back(0.25 * i);
  EXPECT_LT(verify_closed_form(cf, cf.spec(), radii).max_residual, 1e-12);
  EXPECT_NEAR(cf.shift, 1.0 / std::sqrt(15.0), 1e-16);
  EXPECT_NEAR(cf.origin().b, 3.0 / std::sqrt(cf.shift), 1e-14);
}

TEST(RadialCore, KqIdentity) {
  EXPECT_NEAR(k_q(2.0), 56.0 / 81.0, 1e-15);
  for (double q : {1.5, 2.0, 2.5}) {
    const auto cf = ClosedForm::power_law(q);
    EXPECT_NEAR(std::pow(cf.amplitude, q + 1.0) * k_q(q), 1.0, 1e-13) << q;
    EXPECT_DOUBLE_EQ(cf.exponent, 4.0 / (q + 1.0));
    EXPECT_NEAR(cf.spec().q, q, 1e-14);
  }
  EXPECT_THROW(ClosedForm::power_law(3.0), Error);
  EXPECT_THROW(ClosedForm::power_law(1.5).origin(), Error);
}

TEST(RadialCore, PowerLawSolvesEquation) {
  for (double q : {1.5, 2.0, 2.5}) {
    const auto cf = ClosedForm::power_law(q);
    for (double r : {0.3, 1.0, 10.0, 100.0}) {
      const double u = eval_closed_form(cf, r).u;
      EXPECT_NEAR(closed_form_top_laplacian(cf, r) * std::pow(u, q), -1.0, 1e-12);
    }
  }
}

TEST(RadialCore, SeriesMatchesClosedFormTaylor) {
  const auto cf = ClosedForm::triharmonic_5d();
  const auto c = series_coefficients(cf.spec(), cf.origin());
  ASSERT_GE(c.size(), 4u);
  const double a = cf.amplitude;
  EXPECT_NEAR(c[0], a, 1e-15);
  EXPECT_NEAR(c[1], a / 2.0, 1e-15);
  EXPECT_NEAR(c[2], -a / 8.0, 1e-15);
  EXPECT_NEAR(c[3], a / 16.0, 1e-13);

  const auto bh = ClosedForm::biharmonic_3d();
  const auto d = series_coefficients(bh.spec(), bh.origin());
  const double a0 = std::sqrt(bh.shift);
  EXPECT_NEAR(d[1], 0.5 / a0, 1e-14);
  EXPECT_NEAR(d[2], -0.125 / (a0 * a0 * a0), 1e-12);
}

TEST(RadialCore, SeriesStartStateAgreesWithClosedForm) {
  const auto cf = ClosedForm::triharmonic_5d();
  const double r0 = start_radius(cf.spec(), cf.origin());
  EXPECT_GT(r0, 0.0);
  EXPECT_LE(r0, 1e-3);
  const State s = series_origin(cf.spec(), cf.origin(), r0);
  const State e = eval_closed_form(cf, r0);
  EXPECT_NEAR(s.u, e.u, 1e-15);
  EXPECT_NEAR(s.du, e.du, 1e-15);
  EXPECT_NEAR(s.w, e.w, 1e-14);
  EXPECT_NEAR(s.v, e.v, 1e-12);
  EXPECT_THROW(series_origin(cf.spec(), cf.origin(), 2 * kSeriesMaxRadius), Error);
}

TEST(RadialCore, RhsAgreesWithClosedFormDerivatives) {
  const auto cf = ClosedForm::triharmonic_5d();
  const auto spec = cf.spec();
  const double h = 1e-5;
  for (double r : {0.5, 2.0, 9.0}) {
    const State y = eval_closed_form(cf, r);
    const State dy = rhs(spec, r, y);
    const State yp = eval_closed_form(cf, r + h), ym = eval_closed_form(cf, r - h);
    EXPECT_DOUBLE_EQ(dy.u, y.du);
    EXPECT_NEAR(dy.du, (yp.du - ym.du) / (2 * h), 1e-8);
    EXPECT_NEAR(dy.dw, (yp.dw - ym.dw) / (2 * h), 1e-8);
    EXPECT_NEAR(dy.dv, (yp.dv - ym.dv) / (2 * h), 1e-7);
  }
}

TEST(RadialCore, RhsPrimeMatchesFiniteDifference) {
  const auto spec = ProblemSpec::biharmonic(3, 7.0);
  const auto cf = ClosedForm::biharmonic_3d();
  const double r = 1.3, h = 1e-5;
  const State y = eval_closed_form(cf, r);
  const State dy = rhs(spec, r, y);
  const State d2 = rhs_prime(spec, r, y, dy);
  const State p = rhs(spec, r + h, eval_closed_form(cf, r + h));
  const State m = rhs(spec, r - h, eval_closed_form(cf, r - h));
  EXPECT_NEAR(d2.u, (p.u - m.u) / (2 * h), 1e-8);
  EXPECT_NEAR(d2.du, (p.du - m.du) / (2 * h), 1e-8);
  EXPECT_NEAR(d2.dw, (p.dw - m.dw) / (2 * h), 1e-7);
}

TEST(RadialCore, ForcingEntersTopLevel) {
  const auto spec = ProblemSpec::biharmonic(2, 2.0);
  Forcing f{[](double) { return 0.25; }, [](double) { return 0.0; }};
  const State y{1.0, 0.1, 0.5, -0.1, 0.0, 0.0};
  EXPECT_NEAR(rhs(spec, 1.0, y, f).dw - rhs(spec, 1.0, y).dw, 0.25, 1e-15);
}

TEST(RadialCore, Validation) {
  EXPECT_THROW(ProblemSpec::make(1, 2, Sign::Minus, 2.0), Error);
  EXPECT_THROW(ProblemSpec::make(3, 4, Sign::Minus, 2.0), Error);
  EXPECT_THROW(ProblemSpec::make(3, 2, Sign::Minus, 0.0), Error);
  const auto spec = ProblemSpec::triharmonic(5, 8.0);
  EXPECT_THROW(OriginData::make(spec, -1.0, 0.0, 0.0), Error);
  EXPECT_EQ(spec.order(), 6u);
  try {
    rhs(spec, 1.0, State{0.0, 0, 0, 0, 0, 0});
    FAIL() << "expected ExtinctState";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ExtinctState);
  }
}

TEST(RadialCore, RadialLaplacianOfPowers) {
  for (int n : {2, 3, 5}) {
    const double r = 1.7, p = 3.0;
    const double f = std::pow(r, p), df = p * std::pow(r, p - 1), d2f = p * (p - 1) * std::pow(r, p - 2);
    EXPECT_NEAR(radial_laplacian(f, df, d2f, r, n), p * (p + n - 2) * std::pow(r, p - 2), 1e-13);
  }
}

}  // namespace
