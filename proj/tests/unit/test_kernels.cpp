#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "polyrad/error.hpp"
#include "polyrad/kernels.hpp"

namespace {

using namespace polyrad;
namespace fs = std::filesystem;

constexpr std::uint64_t kSeed = 20240611;

std::vector<double> grid20() {
  std::vector<double> g;
  for (int i = 0; i < 20; ++i) g.push_back(0.1 + 0.37 * i);
  return g;
}

Trajectory closed_form_trajectory() {
  const auto cf = ClosedForm::triharmonic_5d();
  IntegrationConfig cfg;
  cfg.rel_tol = 1e-12;
  cfg.abs_tol = 1e-14;
  cfg.r_max = 100.0;
  cfg.dense_output_stride = 0.5;
  return integrate(cf.spec(), cf.origin(), cfg);
}

TEST(Kernels, MonteCarloDistMeanInFiveDimensions) {
  std::mt19937_64 rng(kSeed);
  std::normal_distribution<double> normal;
  const int samples = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int k = 0; k < samples; ++k) {
    double y[5], norm2 = 0.0;
    for (double& c : y) norm2 += (c = normal(rng)) * c;
    const double inv = 1.0 / std::sqrt(norm2);
    double d2 = 0.0;
    for (int j = 0; j < 5; ++j) {
      const double diff = (j == 0 ? 1.0 : 0.0) - y[j] * inv;
      d2 += diff * diff;
    }
    const double d = std::sqrt(d2);
    sum += d;
    sum2 += d * d;
  }
  const double mean = sum / samples;
  const double se = std::sqrt((sum2 / samples - mean * mean) / samples);
  const double quad = spherical_mean_quadrature(5, KernelKind::Dist, 1.0, 1.0).value;
  EXPECT_NEAR(quad, 1.0 + 0.4 - 1.0 / 35.0, 1e-13);
  EXPECT_NEAR(mean, quad, 5.0 * se);
}

TEST(Kernels, QuadratureMatchesClosedFormsOnGrid) {
  const auto g = grid20();
  for (int n : {3, 5}) {
    for (auto kind : {KernelKind::Dist, KernelKind::Newton1, KernelKind::Newton3}) {
      for (double r : g) {
        for (double s : g) {
          if (r == s && kernel_power(kind) + n - 1 <= 0) continue;
          const auto closed = spherical_mean_closed(n, kind, r, s);
          ASSERT_TRUE(closed);
          const double q = spherical_mean_quadrature(n, kind, r, s).value;
          EXPECT_NEAR(q, *closed, 1e-10 * std::abs(*closed)) << n << " " << to_string(kind) << " " << r << " " << s;
        }
      }
    }
  }
}

TEST(Kernels, NewtonMeanValueProperty) {
  for (double r : grid20())
    for (double s : grid20()) {
      const double big = std::max(r, s);
      EXPECT_NEAR(spherical_mean_quadrature(5, KernelKind::Newton3, r, s).value, 1.0 / (big * big * big),
                  1e-10 / (big * big * big));
      EXPECT_NEAR(spherical_mean_quadrature(3, KernelKind::Newton1, r, s).value, 1.0 / big, 1e-10 / big);
    }
}

TEST(Kernels, SymmetryAndJensenInSevenDimensions) {
  const auto g = grid20();
  for (std::size_t i = 0; i < g.size(); i += 3) {
    for (std::size_t j = 0; j < g.size(); j += 2) {
      const double rs = spherical_mean_quadrature(7, KernelKind::Dist, g[i], g[j]).value;
      const double sr = spherical_mean_quadrature(7, KernelKind::Dist, g[j], g[i]).value;
      EXPECT_NEAR(rs, sr, 1e-12 * rs);
      EXPECT_GE(rs, std::max(g[i], g[j]) * (1.0 - 1e-14));
    }
  }
}

TEST(Kernels, NearDiagonalIsResolvedQuickly) {
  for (double eps : {1e-3, 1e-6, 1e-9}) {
    const auto m = spherical_mean_quadrature(5, KernelKind::Newton3, 1.0, 1.0 + eps);
    EXPECT_NEAR(m.value, 1.0 / std::pow(1.0 + eps, 3), 1e-9);
  }
}

TEST(Kernels, SingularDiagonal) {
  try {
    spherical_mean_quadrature(3, KernelKind::Newton3, 1.0, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularDiagonal);
  }
  EXPECT_THROW(spherical_mean_quadrature(2, KernelKind::Newton1, 2.0, 2.0), Error);
  EXPECT_THROW(spherical_mean_quadrature(5, KernelKind::Newton1, 0.0, 0.0), Error);
  EXPECT_NO_THROW(spherical_mean_quadrature(5, KernelKind::Newton1, 1.0, 1.0));
  const auto t = KernelTable::build(3, KernelKind::Newton3, {1.0, 2.0}, {1.0, 2.0});
  EXPECT_TRUE(std::isinf(t.value(0, 0)));
  EXPECT_TRUE(std::isfinite(t.value(0, 1)));
}

TEST(Kernels, SurfaceAreas) {
  EXPECT_NEAR(surface_area(2), 2 * std::numbers::pi, 1e-14);
  EXPECT_NEAR(surface_area(3), 4 * std::numbers::pi, 1e-14);
  EXPECT_NEAR(surface_area(5), 8 * std::numbers::pi * std::numbers::pi / 3, 1e-13);
}

TEST(Kernels, NamesRoundTrip) {
  for (auto k : {KernelKind::Dist, KernelKind::Newton1, KernelKind::Newton3})
    EXPECT_EQ(kernel_kind_from_string(to_string(k)), k);
  EXPECT_FALSE(kernel_kind_from_string("log"));
}

class KernelCache : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("polyrad-kernel-" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "-" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

TEST_F(KernelCache, HitIsBitIdentical) {
  const auto g = grid20();
  const auto fresh = KernelTable::cached(dir_, 5, KernelKind::Newton1, g, g, 1, true);
  EXPECT_FALSE(fresh.from_cache());
  EXPECT_TRUE(fs::exists(dir_ / fresh.cache_file_name()));
  const auto hit = KernelTable::cached(dir_, 5, KernelKind::Newton1, g, g, 1, true);
  EXPECT_TRUE(hit.from_cache());
  EXPECT_TRUE(hit == fresh);
  EXPECT_TRUE(KernelTable::build(5, KernelKind::Newton1, g, g, 2, true) == fresh);
}

TEST_F(KernelCache, KeyTracksGridKindAndMethod) {
  const auto g = grid20();
  auto h = g;
  h.back() = std::nextafter(h.back(), 100.0);
  const auto a = KernelTable::build(5, KernelKind::Dist, g, g);
  EXPECT_NE(a.key(), KernelTable::build(5, KernelKind::Dist, g, h).key());
  EXPECT_NE(a.key(), KernelTable::build(5, KernelKind::Newton1, g, g).key());
  EXPECT_NE(a.key(), KernelTable::build(5, KernelKind::Dist, g, g, 1, true).key());
  EXPECT_NE(a.key(), KernelTable::build(3, KernelKind::Dist, g, g).key());
}

TEST_F(KernelCache, SaveLoadRoundTripAndCorruption) {
  const auto g = grid20();
  const auto t = KernelTable::build(5, KernelKind::Newton3, g, g, 1, true);
  fs::create_directories(dir_);
  const auto file = dir_ / "table.csv";
  t.save(file);
  EXPECT_TRUE(KernelTable::load(file) == t);
  {
    std::ofstream out(file, std::ios::app);
    out << "garbage\n";
  }
  EXPECT_THROW(KernelTable::load(file), Error);
}

TEST(Kernels, ConvolutionReproducesLaplacians) {
  const auto t = closed_form_trajectory();
  const auto g = classify(t);
  const std::vector<double> radii{0.5, 1.0, 3.0, 10.0};
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const auto w = radial_convolution(t, g, KernelKind::Newton1, 1.0 / (16.0 * pi2), radii);
  const auto v = radial_convolution(t, g, KernelKind::Newton3, -1.0 / (8.0 * pi2), radii);
  const auto cf = ClosedForm::triharmonic_5d();
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const State e = eval_closed_form(cf, radii[i]);
    EXPECT_NEAR(w.values[i], e.w, 1e-9 * std::abs(e.w)) << radii[i];
    EXPECT_NEAR(v.values[i], e.v, 1e-9 * std::abs(e.v)) << radii[i];
    EXPECT_LT(w.errors[i], 1e-8 * std::abs(e.w));
  }
}

TEST(Kernels, CompactDensityConvolution) {
  // Newton1 potential of the unit-ball indicator in ℝ³: outside, |B|/r.
  const double r = 2.5;
  const double value = convolve_density(3, KernelKind::Newton1, [](double) { return 1.0; }, 1.0, r);
  EXPECT_NEAR(value, 4.0 * std::numbers::pi / 3.0 / r, 1e-11);
  EXPECT_LT(laplacian_chain_defect(5, {0.3, 0.7, 1.5}), 1e-5);
}

TEST(Kernels, ClosedFormRepresentationHasZeroIntercept) {
  const auto t = closed_form_trajectory();
  const auto g = classify(t);
  ASSERT_EQ(g.cls, GrowthClass::Linear);
  const auto rep = extract_gamma(t, g);
  const double c = ClosedForm::triharmonic_5d().amplitude;
  EXPECT_NEAR(rep.zeta, c, 1e-8);
  EXPECT_LT(std::abs(rep.gamma), 3.0 * rep.gamma_error + 1e-12);
  EXPECT_LT(rep.gamma_error, 0.02 * rep.zeta);
  EXPECT_NEAR(rep.alpha, rep.zeta, 0.02 * rep.zeta);
  EXPECT_NEAR(rep.coefficient, 1.0 / (64.0 * std::numbers::pi * std::numbers::pi), 1e-18);

  const auto poh = pohozaev_check(t, g, rep);
  EXPECT_TRUE(poh.coefficient_zero);
  EXPECT_DOUBLE_EQ(poh.lhs, 0.0);
  EXPECT_LT(std::abs(poh.rhs), 1e-6);
}

TEST(Kernels, RepresentationPreconditions) {
  auto t = closed_form_trajectory();
  auto g = classify(t);
  t.spec.q = 6.0;
  try {
    extract_gamma(t, g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonIntegrableTail);
  }
  t.spec.q = 11.0;
  g.cls = GrowthClass::Quadratic;
  EXPECT_THROW(extract_gamma(t, g), Error);
  EXPECT_NEAR(representation_coefficient(ProblemSpec::biharmonic(3, 7.0)), 1.0 / (8.0 * std::numbers::pi), 1e-16);
  EXPECT_THROW(representation_coefficient(ProblemSpec::biharmonic(2, 7.0)), Error);
}

TEST(Kernels, TailModelFollowsGrowthClass) {
  const auto t = closed_form_trajectory();
  const auto g = classify(t);
  const TailModel m = TailModel::from(t, g);
  EXPECT_EQ(m.cls, GrowthClass::Linear);
  EXPECT_NEAR(m(200.0), eval_closed_form(ClosedForm::triharmonic_5d(), 200.0).u, 5e-3);
  GrowthReport dead = g;
  dead.cls = GrowthClass::Extinct;
  EXPECT_THROW(TailModel::from(t, dead), Error);
}

}  // namespace
