#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace cavitydtc {

using cplx = std::complex<double>;

/// SIMD-aligned complex array (fftw_malloc).
class AlignedBuffer {
 public:
  explicit AlignedBuffer(std::size_t n);
  [[nodiscard]] std::span<cplx> span() { return {data_.get(), n_}; }
  [[nodiscard]] std::span<const cplx> span() const { return {data_.get(), n_}; }
  [[nodiscard]] std::size_t size() const { return n_; }
  cplx& operator[](std::size_t i) { return data_[i]; }
  const cplx& operator[](std::size_t i) const { return data_[i]; }

 private:
  struct Free {
    void operator()(cplx* p) const;
  };
  std::size_t n_;
  std::unique_ptr<cplx[], Free> data_;
};

/// In-place 1D complex DFT of fixed length backed by FFTW.
///
/// forward: X_m = sum_j x_j exp(-2 pi i j m / n); backward includes the 1/n
/// factor, so backward(forward(x)) == x. Plans are built with FFTW_ESTIMATE
/// (deterministic) and are safe to execute concurrently from several threads
/// on distinct buffers. Misaligned input is staged through a temporary
/// AlignedBuffer; hot loops should transform AlignedBuffer storage directly.
class SpectralTransform {
 public:
  explicit SpectralTransform(std::size_t n);
  ~SpectralTransform();
  SpectralTransform(const SpectralTransform&) = delete;
  SpectralTransform& operator=(const SpectralTransform&) = delete;
  SpectralTransform(SpectralTransform&&) noexcept;
  SpectralTransform& operator=(SpectralTransform&&) noexcept;

  [[nodiscard]] std::size_t size() const { return n_; }
  void forward(std::span<cplx> data) const;
  void backward(std::span<cplx> data) const;
  /// backward() without the 1/n factor, for callers that fold it elsewhere.
  void backward_unscaled(std::span<cplx> data) const;

 private:
  struct Plans;
  std::size_t n_;
  std::unique_ptr<Plans> plans_;
};

}  // namespace cavitydtc
