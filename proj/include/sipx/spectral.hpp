// FFTW-backed discrete Fourier transforms on a Lattice.
#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "sipx/lattice.hpp"

namespace sipx {

/// Unnormalized forward DFT (kernel e^{-2 pi i j.x / M}) and normalized inverse.
/// Plans are created once per lattice shape; execution is thread-safe.
class Spectral {
 public:
  explicit Spectral(const Lattice& lattice);
  ~Spectral();
  Spectral(const Spectral&) = delete;
  Spectral& operator=(const Spectral&) = delete;

  const Lattice& lattice() const { return lattice_; }

  std::vector<std::complex<double>> forward(std::span<const double> f) const;
  /// Inverse DFT divided by the number of sites; imaginary part dropped.
  std::vector<double> inverse_real(std::span<const std::complex<double>> c) const;

  /// Real field f -> F^{-1}[ m(j) F[f](j) ] for a real, even multiplier m.
  std::vector<double> apply_multiplier(std::span<const double> f, std::span<const double> multiplier) const;

  /// Shared instance for a lattice shape.
  static const Spectral& for_lattice(const Lattice& lattice);

 private:
  Lattice lattice_;
  struct Plans;
  std::unique_ptr<Plans> plans_;
};

}  // namespace sipx
