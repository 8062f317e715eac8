#include "sipx/spectral.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace sipx {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};
using Buffer = std::unique_ptr<fftw_complex[], FftwFree>;

Buffer allocate(std::size_t n) {
  Buffer b(fftw_alloc_complex(n));
  if (!b) throw std::bad_alloc();
  return b;
}

}  // namespace

struct Spectral::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

Spectral::Spectral(const Lattice& lattice) : lattice_(lattice), plans_(std::make_unique<Plans>()) {
  const std::size_t n = lattice.sites();
  auto in = allocate(n);
  auto out = allocate(n);
  // FFTW is row-major with the last index fastest; our first coordinate is fastest,
  // and the lattice is square, so the dims array is the same either way.
  int dims[2] = {lattice.side(), lattice.side()};
  std::lock_guard lock(planner_mutex());
  plans_->forward = fftw_plan_dft(lattice.dim(), dims, in.get(), out.get(), FFTW_FORWARD, FFTW_ESTIMATE);
  plans_->backward = fftw_plan_dft(lattice.dim(), dims, in.get(), out.get(), FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!plans_->forward || !plans_->backward) throw std::runtime_error("FFTW planning failed");
}

Spectral::~Spectral() {
  std::lock_guard lock(planner_mutex());
  if (plans_->forward) fftw_destroy_plan(plans_->forward);
  if (plans_->backward) fftw_destroy_plan(plans_->backward);
}

std::vector<std::complex<double>> Spectral::forward(std::span<const double> f) const {
  const std::size_t n = lattice_.sites();
  if (f.size() != n) throw std::invalid_argument("field size does not match lattice");
  auto in = allocate(n);
  auto out = allocate(n);
  for (std::size_t i = 0; i < n; ++i) {
    in[i][0] = f[i];
    in[i][1] = 0.0;
  }
  fftw_execute_dft(plans_->forward, in.get(), out.get());
  std::vector<std::complex<double>> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = {out[i][0], out[i][1]};
  return c;
}

std::vector<double> Spectral::inverse_real(std::span<const std::complex<double>> c) const {
  const std::size_t n = lattice_.sites();
  if (c.size() != n) throw std::invalid_argument("coefficient size does not match lattice");
  auto in = allocate(n);
  auto out = allocate(n);
  for (std::size_t i = 0; i < n; ++i) {
    in[i][0] = c[i].real();
    in[i][1] = c[i].imag();
  }
  fftw_execute_dft(plans_->backward, in.get(), out.get());
  std::vector<double> f(n);
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = out[i][0] * inv;
  return f;
}

std::vector<double> Spectral::apply_multiplier(std::span<const double> f, std::span<const double> multiplier) const {
  if (multiplier.size() != lattice_.sites()) throw std::invalid_argument("multiplier size does not match lattice");
  auto c = forward(f);
  for (std::size_t j = 0; j < c.size(); ++j) c[j] *= multiplier[j];
  return inverse_real(c);
}

const Spectral& Spectral::for_lattice(const Lattice& lattice) {
  static std::mutex m;
  static std::map<std::pair<int, int>, std::unique_ptr<Spectral>> cache;
  std::lock_guard lock(m);
  auto& slot = cache[{lattice.dim(), lattice.side()}];
  if (!slot) slot = std::make_unique<Spectral>(lattice);
  return *slot;
}

}  // namespace sipx
