#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "levylab/errors.hpp"

namespace levylab {

/// Chirp-z (Bluestein) transform
///
///   out[k] = sum_{j < in_size} in[j] * exp(-i * theta * j * k),  k < out_size,
///
/// for an arbitrary real angle step theta, computed as one circular
/// convolution of power-of-two length >= in_size + out_size - 1. This maps a
/// trapezoidal Fourier sum between two equispaced grids whose spacings are not
/// reciprocal onto FFTs.
class ChirpTransform {
public:
  using complex = std::complex<double>;

  ChirpTransform(std::size_t in_size, std::size_t out_size, double theta)
      : in_size_(in_size), out_size_(out_size) {
    detail::require(in_size >= 1 && out_size >= 1, "chirp transform sizes must be positive");
    fft_len_ = 1;
    while (fft_len_ < in_size + out_size - 1)
      fft_len_ <<= 1;

    const auto chirp = [theta](std::size_t m) {
      const double mm = static_cast<double>(m) * static_cast<double>(m);
      return std::polar(1.0, -0.5 * theta * mm);
    };
    pre_.resize(in_size);
    for (std::size_t j = 0; j < in_size; ++j)
      pre_[j] = chirp(j);
    post_.resize(out_size);
    for (std::size_t k = 0; k < out_size; ++k)
      post_[k] = chirp(k);

    // Convolution kernel exp(+i theta m^2 / 2) for m in (-in_size, out_size),
    // negative lags wrapped to the end of the buffer.
    std::vector<complex> kernel(fft_len_, complex{0.0, 0.0});
    for (std::size_t m = 0; m < out_size; ++m)
      kernel[m] = std::conj(chirp(m));
    for (std::size_t m = 1; m < in_size; ++m)
      kernel[fft_len_ - m] = std::conj(chirp(m));
    fft_.fwd(kernel_hat_, kernel);
  }

  std::vector<complex> operator()(std::span<const complex> in) {
    detail::require(in.size() == in_size_, "chirp transform input has the wrong length");
    std::vector<complex> buf(fft_len_, complex{0.0, 0.0});
    for (std::size_t j = 0; j < in_size_; ++j)
      buf[j] = in[j] * pre_[j];
    std::vector<complex> spec;
    fft_.fwd(spec, buf);
    for (std::size_t i = 0; i < fft_len_; ++i)
      spec[i] *= kernel_hat_[i];
    fft_.inv(buf, spec);
    std::vector<complex> out(out_size_);
    for (std::size_t k = 0; k < out_size_; ++k)
      out[k] = buf[k] * post_[k];
    return out;
  }

  std::size_t fft_length() const { return fft_len_; }

private:
  std::size_t in_size_;
  std::size_t out_size_;
  std::size_t fft_len_;
  std::vector<complex> pre_;
  std::vector<complex> post_;
  std::vector<complex> kernel_hat_;
  Eigen::FFT<double> fft_;
};

} // namespace levylab
