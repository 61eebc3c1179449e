#include "cavitydtc/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <new>
#include <stdexcept>
#include <vector>

namespace cavitydtc {

namespace {
// FFTW's planner is not thread safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

AlignedBuffer::AlignedBuffer(std::size_t n)
    : n_(n), data_(static_cast<cplx*>(fftw_malloc(sizeof(cplx) * (n == 0 ? 1 : n)))) {
  if (!data_) throw std::bad_alloc();
  std::fill_n(data_.get(), n_, cplx(0.0, 0.0));
}

void AlignedBuffer::Free::operator()(cplx* p) const { fftw_free(p); }

namespace {
bool aligned(cplx* p) { return fftw_alignment_of(reinterpret_cast<double*>(p)) == 0; }
}  // namespace

struct SpectralTransform::Plans {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  ~Plans() {
    std::lock_guard lock(planner_mutex());
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
  }
};

SpectralTransform::SpectralTransform(std::size_t n) : n_(n), plans_(std::make_unique<Plans>()) {
  if (n == 0) throw std::invalid_argument("SpectralTransform: size must be positive");
  AlignedBuffer scratch(n);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.span().data());
  const unsigned flags = FFTW_ESTIMATE;
  std::lock_guard lock(planner_mutex());
  plans_->fwd = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_FORWARD, flags);
  plans_->bwd = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_BACKWARD, flags);
  if (!plans_->fwd || !plans_->bwd) throw std::runtime_error("FFTW plan creation failed");
}

SpectralTransform::~SpectralTransform() = default;
SpectralTransform::SpectralTransform(SpectralTransform&&) noexcept = default;
SpectralTransform& SpectralTransform::operator=(SpectralTransform&&) noexcept = default;

namespace {
void execute(fftw_plan plan, std::span<cplx> data) {
  if (aligned(data.data())) {
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, buf, buf);
    return;
  }
  AlignedBuffer tmp(data.size());
  std::copy(data.begin(), data.end(), tmp.span().begin());
  auto* buf = reinterpret_cast<fftw_complex*>(tmp.span().data());
  fftw_execute_dft(plan, buf, buf);
  std::copy(tmp.span().begin(), tmp.span().end(), data.begin());
}
}  // namespace

void SpectralTransform::forward(std::span<cplx> data) const {
  if (data.size() != n_) throw std::invalid_argument("SpectralTransform: size mismatch");
  execute(plans_->fwd, data);
}

void SpectralTransform::backward_unscaled(std::span<cplx> data) const {
  if (data.size() != n_) throw std::invalid_argument("SpectralTransform: size mismatch");
  execute(plans_->bwd, data);
}

void SpectralTransform::backward(std::span<cplx> data) const {
  if (data.size() != n_) throw std::invalid_argument("SpectralTransform: size mismatch");
  execute(plans_->bwd, data);
  const double scale = 1.0 / static_cast<double>(n_);
  for (auto& v : data) v *= scale;
}

}  // namespace cavitydtc
