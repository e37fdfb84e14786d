#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "idewave/error.hpp"
#include "idewave/kernels.hpp"

using namespace idewave;

namespace {

std::vector<Kernel> families() {
  return {Kernel::gaussian(1.0), Kernel::gaussian(0.4), Kernel::uniform(1.0), Kernel::triangular(2.0),
          Kernel::table({0.0, 0.5, 1.0, 0.5, 0.0}, 0.5)};
}

// plain trapezoid on [a, b], independent of the library
template <class F>
double trapezoid(F f, double a, double b, std::size_t n) {
  const double h = (b - a) / static_cast<double>(n);
  double s = 0.5 * (f(a) + f(b));
  for (std::size_t k = 1; k < n; ++k) s += f(a + static_cast<double>(k) * h);
  return s * h;
}

}  // namespace

TEST(Kernels, GaussianAndUniformAreAccepted) {
  EXPECT_NO_THROW(Kernel::make("gaussian", {{"sigma", 1.0}}));
  EXPECT_NO_THROW(Kernel::make("uniform", {{"halfwidth", 1.0}}));
  EXPECT_NO_THROW(Kernel::make("triangular", {{"halfwidth", 1.0}}));
}

TEST(Kernels, HeavyTailedFamiliesRejected) {
  // Laplace MGF 1/(1 - b^2 lambda^2) diverges at lambda = 1/b
  try {
    Kernel::make("laplace", {{"b", 1.0}});
    FAIL() << "laplace accepted";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("MGF not finite"), std::string::npos);
  }
  EXPECT_THROW(Kernel::make("cauchy", {{"gamma", 1.0}}), InputError);
}

TEST(Kernels, BadParametersRejected) {
  EXPECT_THROW(Kernel::gaussian(0.0), InputError);
  EXPECT_THROW(Kernel::uniform(-1.0), InputError);
  EXPECT_THROW(Kernel::make("gaussian", {{"sigma", 1.0}, {"mu", 0.0}}), InputError);
  EXPECT_THROW(Kernel::make("wedge", {{"sigma", 1.0}}), InputError);
}

TEST(Kernels, AsymmetricTableRejected) {
  EXPECT_THROW(Kernel::table({0.1, 0.5, 1.0, 0.4, 0.1}, 0.5), InputError);
  EXPECT_THROW(Kernel::table({0.1, -0.5, 1.0, -0.5, 0.1}, 0.5), InputError);
}

TEST(Kernels, MgfGaussianValues) {
  const Kernel g = Kernel::gaussian(1.0);
  EXPECT_DOUBLE_EQ(g.mgf(0.0), 1.0);
  const double oracle = trapezoid([](double y) { return std::exp(y - 0.5 * y * y) / std::sqrt(2.0 * M_PI); },
                                  -12.0, 12.0, 200000);
  EXPECT_NEAR(oracle, 1.6487212707, 1e-10);
  EXPECT_NEAR(g.mgf(1.0), 1.6487212707, 1e-10);
}

TEST(Kernels, MgfUniformValue) {
  const Kernel u = Kernel::uniform(1.0);
  const double oracle = trapezoid([](double y) { return 0.5 * std::exp(2.0 * y); }, -1.0, 1.0, 200000);
  EXPECT_NEAR(oracle, 1.8134302039, 1e-9);
  EXPECT_NEAR(u.mgf(2.0), std::sinh(2.0) / 2.0, 1e-14);
}

TEST(Kernels, ClosedFormMatchesQuadrature) {
  for (const Kernel& k : families()) {
    for (double lambda : {0.0, 0.5, 1.0, 2.0, 4.0}) {
      const double q = mgf_by_quadrature(k, lambda);
      EXPECT_NEAR(k.mgf(lambda) / q, 1.0, 1e-10) << k.family_name() << " lambda=" << lambda;
      EXPECT_NEAR(k.log_mgf(lambda), std::log(q), 1e-10);
    }
  }
}

TEST(Kernels, LogMgfStaysFiniteForLargeLambda) {
  for (const Kernel& k : families()) {
    const double v = k.log_mgf(800.0);
    EXPECT_TRUE(std::isfinite(v)) << k.family_name();
  }
  EXPECT_NEAR(Kernel::gaussian(1.0).log_mgf(800.0), 0.5 * 800.0 * 800.0, 1e-6);
}

TEST(Kernels, SymmetricAndNormalized) {
  for (const Kernel& k : families()) {
    for (double x = 0.0; x < 5.0; x += 0.137) EXPECT_NEAR(k.density(x), k.density(-x), 1e-12);
    for (double x = -5.0; x < 5.0; x += 0.1) EXPECT_GE(k.density(x), 0.0);
    EXPECT_NEAR(mass_by_quadrature(k), 1.0, 1e-10) << k.family_name();
  }
}

TEST(Kernels, MgfAtLeastOneAndConvex) {
  for (const Kernel& k : families()) {
    const std::vector<double> lambdas{0.0, 0.5, 1.0, 2.0, 4.0};
    for (double l : lambdas) {
      if (l == 0.0) {
        EXPECT_DOUBLE_EQ(k.mgf(l), 1.0);
      } else {
        EXPECT_GT(k.mgf(l), 1.0);
      }
    }
    const double d = 1e-2;
    for (double l = d; l <= 4.0; l += 0.25) {
      const double second = k.mgf(l + d) - 2.0 * k.mgf(l) + k.mgf(l - d);
      EXPECT_GE(second, -1e-9) << k.family_name() << " lambda=" << l;
    }
  }
}

TEST(Kernels, GaussianTruncationRadius) {
  const DiscreteKernel dk = discretize(Kernel::gaussian(1.0), 0.1, 1e-12);
  // smallest r with erfc(r / sqrt 2) < 1e-12
  double lo = 0.0, hi = 20.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (std::erfc(mid / std::sqrt(2.0)) < 1e-12 ? hi : lo) = mid;
  }
  EXPECT_NEAR(hi, 7.1305, 1e-3);
  EXPECT_GE(dk.radius + 0.05, hi);
  EXPECT_LE(dk.radius, hi + 0.1);
  double s = 0.0;
  for (double w : dk.weights) s += w;
  EXPECT_NEAR(s, 1.0, 1e-10);
}

TEST(Kernels, UniformDiscretizationHasFiveWeights) {
  const DiscreteKernel dk = discretize(Kernel::uniform(1.0), 0.5, 1e-12);
  ASSERT_EQ(dk.weights.size(), 5u);
  double s = 0.0;
  for (double w : dk.weights) s += w;
  EXPECT_NEAR(s, 1.0, 1e-12);
  EXPECT_NEAR(dk.radius, 1.0, 1e-12);
  // cell masses: [0.25, 0.75] carries 1/4, the end cells [0.75, 1] carry 1/8
  EXPECT_NEAR(dk.weights[2], 0.25, 1e-12);
  EXPECT_NEAR(dk.weights[0], 0.125, 1e-12);
}

TEST(Kernels, TableWeightsFollowSamples) {
  const std::vector<double> samples{0.0, 1.0, 3.0, 4.0, 3.0, 1.0, 0.0};
  const Kernel t = Kernel::table(samples, 0.25);
  const DiscreteKernel dk = discretize(t, 0.25);
  double total = 0.0;
  for (double s : samples) total += s;
  ASSERT_EQ(dk.weights.size(), samples.size());
  for (std::size_t j = 0; j < samples.size(); ++j) EXPECT_NEAR(dk.weights[j], samples[j] / total, 1e-14);
}

TEST(Kernels, TableFromCsv) {
  const auto path = std::filesystem::temp_directory_path() / "idewave_kernel_table.csv";
  {
    std::ofstream f(path);
    f << "x,density\n-1,0\n-0.5,0.5\n0,1\n0.5,0.5\n1,0\n";
  }
  const Kernel t = Kernel::from_csv(path);
  EXPECT_EQ(t.family(), KernelFamily::table);
  EXPECT_NEAR(t.mgf(0.0), 1.0, 1e-14);
  // this table is the triangular kernel of half-width 1
  EXPECT_NEAR(t.mgf(1.5), Kernel::triangular(1.0).mgf(1.5), 1e-12);
  std::filesystem::remove(path);
}

TEST(Kernels, DiscreteMgfReproducesMgf) {
  for (double sigma : {0.5, 1.0, 2.0}) {
    const Kernel g = Kernel::gaussian(sigma);
    for (double h : {sigma / 10.0, sigma / 25.0}) {
      // the tilted density e^{lambda y} k(y) peaks at lambda sigma^2, so the
      // truncation has to reach well past it
      const DiscreteKernel dk = discretize(g, h, 1e-80);
      for (double lambda : {0.0, 0.5, 1.0, 2.0, 4.0}) {
        EXPECT_NEAR(dk.mgf(lambda) / g.mgf(lambda), 1.0, 1e-6) << "sigma=" << sigma << " lambda=" << lambda;
      }
    }
  }
}

TEST(Kernels, DiscreteWeightsExactlySymmetric) {
  for (const Kernel& k : families()) {
    for (double h : {0.013, 0.05, 0.1, 0.3}) {
      const DiscreteKernel dk = discretize(k, h);
      const std::size_t n = dk.weights.size();
      ASSERT_EQ(n % 2, 1u);
      for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(dk.weights[i], dk.weights[n - 1 - i]);
    }
  }
}

TEST(Kernels, HeavyTailCapSignalled) {
  EXPECT_THROW(discretize(Kernel::gaussian(1.0), 1e-3, 1e-12, 100), NumericalError);
  EXPECT_THROW(discretize(Kernel::gaussian(1.0), 0.1, 1e-2), InputError);
}

TEST(Kernels, QuadratureRuleIsFourthOrderOnCompactKernels) {
  const Kernel u = Kernel::triangular(1.0);
  const double exact = u.mgf(3.0);
  const auto err = [&](double h) { return std::abs(quadrature_rule(u, h).mgf(3.0) - exact); };
  const double e1 = err(0.02);
  const double e2 = err(0.01);
  EXPECT_LT(e1, 1e-6);
  EXPECT_GT(e1 / e2, 12.0);
  for (double w : quadrature_rule(u, 0.02).weights) EXPECT_GE(w, 0.0);
}
