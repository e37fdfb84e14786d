#pragma once

#include <cstddef>
#include <memory>
#include <vector>

namespace idewave {

enum class ConvolutionMethod { automatic, direct, fft };

/// "Valid"-mode discrete convolution with a fixed weight vector:
///   out[k] = sum_t w[t] in[k + W - 1 - t],  k = 0 .. n_out - 1,
/// where W = weights.size() and the input has n_out + W - 1 entries.
/// The FFT path (FFTW) keeps internal buffers, so one Convolver must not be
/// used from two threads at once.
class Convolver {
 public:
  Convolver(std::vector<double> weights, std::size_t n_out,
            ConvolutionMethod method = ConvolutionMethod::automatic);
  ~Convolver();
  Convolver(Convolver&&) noexcept;
  Convolver& operator=(Convolver&&) noexcept;
  Convolver(const Convolver&) = delete;
  Convolver& operator=(const Convolver&) = delete;

  std::size_t input_size() const { return n_out_ + weights_.size() - 1; }
  std::size_t output_size() const { return n_out_; }
  ConvolutionMethod method() const { return method_; }

  void valid(const double* in, double* out) const;

 private:
  struct FftState;
  std::vector<double> weights_;
  std::size_t n_out_;
  ConvolutionMethod method_;
  std::unique_ptr<FftState> fft_;
};

}  // namespace idewave
