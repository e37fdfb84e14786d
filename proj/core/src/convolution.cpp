#include "idewave/convolution.hpp"

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <mutex>

#include "idewave/error.hpp"
#include "idewave/parallel.hpp"

namespace idewave {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Smallest 2^a 3^b 5^c 7^d >= n.
std::size_t fast_size(std::size_t n) {
  for (std::size_t s = std::max<std::size_t>(n, 1);; ++s) {
    std::size_t r = s;
    for (std::size_t p : {2u, 3u, 5u, 7u}) {
      while (r % p == 0) r /= p;
    }
    if (r == 1) return s;
  }
}

}  // namespace

struct Convolver::FftState {
  std::size_t size = 0;
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  std::vector<std::complex<double>> kernel_spec;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  ~FftState() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
    fftw_free(real);
    fftw_free(spec);
  }
};

Convolver::Convolver(std::vector<double> weights, std::size_t n_out, ConvolutionMethod method)
    : weights_(std::move(weights)), n_out_(n_out), method_(method) {
  if (weights_.empty() || n_out_ == 0) throw InputError("convolver needs weights and outputs");
  if (method_ == ConvolutionMethod::automatic) {
    method_ = weights_.size() > 48 && n_out_ > 256 ? ConvolutionMethod::fft : ConvolutionMethod::direct;
  }
  if (method_ != ConvolutionMethod::fft) return;

  fft_ = std::make_unique<FftState>();
  const std::size_t n = fast_size(input_size());
  const std::size_t nc = n / 2 + 1;
  fft_->size = n;
  {
    std::lock_guard lock(planner_mutex());
    fft_->real = fftw_alloc_real(n);
    fft_->spec = fftw_alloc_complex(nc);
    fft_->forward = fftw_plan_dft_r2c_1d(static_cast<int>(n), fft_->real, fft_->spec, FFTW_ESTIMATE);
    fft_->backward = fftw_plan_dft_c2r_1d(static_cast<int>(n), fft_->spec, fft_->real, FFTW_ESTIMATE);
  }
  std::fill(fft_->real, fft_->real + n, 0.0);
  std::copy(weights_.begin(), weights_.end(), fft_->real);
  fftw_execute(fft_->forward);
  fft_->kernel_spec.resize(nc);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < nc; ++k) {
    fft_->kernel_spec[k] = std::complex<double>(fft_->spec[k][0], fft_->spec[k][1]) * scale;
  }
}

Convolver::~Convolver() = default;
Convolver::Convolver(Convolver&&) noexcept = default;
Convolver& Convolver::operator=(Convolver&&) noexcept = default;

void Convolver::valid(const double* in, double* out) const {
  const std::size_t w = weights_.size();
  if (method_ == ConvolutionMethod::direct) {
    const double* wt = weights_.data();
    parallel_for(n_out_, [&](std::size_t begin, std::size_t end) {
      for (std::size_t k = begin; k < end; ++k) {
        const double* x = in + k + w - 1;
        double acc = 0.0;
        for (std::size_t t = 0; t < w; ++t) acc += wt[t] * x[-static_cast<std::ptrdiff_t>(t)];
        out[k] = acc;
      }
    }, 256);
    return;
  }
  const std::size_t n = fft_->size;
  std::copy(in, in + input_size(), fft_->real);
  std::fill(fft_->real + input_size(), fft_->real + n, 0.0);
  fftw_execute(fft_->forward);
  for (std::size_t k = 0; k < n / 2 + 1; ++k) {
    const std::complex<double> v = std::complex<double>(fft_->spec[k][0], fft_->spec[k][1]) * fft_->kernel_spec[k];
    fft_->spec[k][0] = v.real();
    fft_->spec[k][1] = v.imag();
  }
  fftw_execute(fft_->backward);
  std::copy(fft_->real + w - 1, fft_->real + w - 1 + n_out_, out);
}

}  // namespace idewave
