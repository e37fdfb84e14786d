#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "idewave/convolution.hpp"

using namespace idewave;

TEST(Convolution, DirectMatchesDefinition) {
  const std::vector<double> w{0.25, 0.5, 0.25};
  Convolver conv(w, 4, ConvolutionMethod::direct);
  const std::vector<double> in{1, 2, 3, 4, 5, 6};
  std::vector<double> out(4);
  conv.valid(in.data(), out.data());
  for (std::size_t k = 0; k < 4; ++k) EXPECT_DOUBLE_EQ(out[k], in[k + 1]);
}

TEST(Convolution, AsymmetricWeightsOrientation) {
  // out[k] = sum_t w[t] in[k + W - 1 - t]
  Convolver conv({1.0, 0.0, 0.0}, 2, ConvolutionMethod::direct);
  const std::vector<double> in{1, 2, 3, 4};
  std::vector<double> out(2);
  conv.valid(in.data(), out.data());
  EXPECT_DOUBLE_EQ(out[0], 3.0);
  EXPECT_DOUBLE_EQ(out[1], 4.0);
}

TEST(Convolution, FftMatchesDirect) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t width : {5u, 101u, 1001u}) {
    std::vector<double> w(width);
    for (double& x : w) x = u(rng);
    const std::size_t n_out = 3000;
    std::vector<double> in(n_out + width - 1);
    for (double& x : in) x = u(rng);
    Convolver direct(w, n_out, ConvolutionMethod::direct);
    Convolver fft(w, n_out, ConvolutionMethod::fft);
    std::vector<double> a(n_out), b(n_out);
    direct.valid(in.data(), a.data());
    fft.valid(in.data(), b.data());
    for (std::size_t k = 0; k < n_out; ++k) EXPECT_NEAR(a[k], b[k], 1e-10 * static_cast<double>(width));
  }
}

TEST(Convolution, AutomaticPicksByWidth) {
  EXPECT_EQ(Convolver(std::vector<double>(3, 1.0), 1000).method(), ConvolutionMethod::direct);
  EXPECT_EQ(Convolver(std::vector<double>(501, 1.0), 4096).method(), ConvolutionMethod::fft);
}
