// Symmetric heavy-tailed jump kernel: continuum family parameters, torus
// discretization with sampling tables, and its Fourier symbol.
#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "sipx/alias_table.hpp"
#include "sipx/lattice.hpp"
#include "sipx/random.hpp"

namespace sipx {

enum class KernelFamily { PowerLawLattice, CustomTabulated };

std::string to_string(KernelFamily f);
KernelFamily kernel_family_from_string(const std::string& s);

struct KernelSpec {
  int dimension = 1;
  double beta = 1.0;
  KernelFamily family = KernelFamily::PowerLawLattice;
  /// Largest retained displacement per component; 0 selects side/2 - 1.
  int window = 0;
  /// Periodic image shells folded onto the torus.
  int image_folds = 3;
  /// CustomTabulated only: unnormalized weights over all side^d displacement classes.
  std::vector<double> table;

  bool operator==(const KernelSpec&) const = default;
};

/// Throws std::invalid_argument on an invalid spec.
void validate(const KernelSpec& spec);

/// Unnormalized power-law weight |v|^{-(d+beta)} of a lattice displacement v != 0.
double power_law_weight(int dim, double beta, std::array<long, 2> v);

class DiscreteKernel {
 public:
  const KernelSpec& spec() const { return spec_; }
  const Lattice& lattice() const { return lattice_; }
  int side() const { return lattice_.side(); }
  int window() const { return window_; }
  double beta() const { return spec_.beta; }
  /// Mass before normalization.
  double total_mass() const { return total_mass_; }

  double probability(std::size_t disp) const { return prob_[disp]; }
  std::span<const double> probabilities() const { return prob_; }
  /// Displacement classes carrying positive probability.
  std::span<const std::size_t> support() const { return support_; }

  std::size_t sample(Rng& g) const { return support_[alias_(g)]; }

  const AliasTable& alias() const { return alias_; }

 private:
  friend DiscreteKernel build_discrete_kernel(const KernelSpec& spec, int side);

  KernelSpec spec_;
  Lattice lattice_;
  int window_ = 0;
  double total_mass_ = 0.0;
  std::vector<double> prob_;
  std::vector<std::size_t> support_;
  AliasTable alias_;
};

/// Normalized, symmetric, periodically folded kernel on a torus of `side` sites per dimension.
DiscreteKernel build_discrete_kernel(const KernelSpec& spec, int side);

inline std::size_t sample_jump(const DiscreteKernel& kernel, Rng& g) { return kernel.sample(g); }

/// Eigenvalues of the sped-up one-particle generator on the torus, indexed by
/// flat mode index (same layout as sites).
struct FourierSymbol {
  Lattice lattice;
  double beta = 1.0;
  double scale = 1.0;
  std::vector<double> values;

  double operator[](std::size_t mode) const { return values[mode]; }
};

/// psi_n(j) = n^beta sum_z q(z) (cos(2 pi j.z / M) - 1) for every torus mode; requires n == side.
FourierSymbol discrete_symbol(const DiscreteKernel& kernel, int n);

/// Single-mode evaluation of the same sum (mode given by signed components).
double symbol_value(const DiscreteKernel& kernel, int n, std::array<int, 2> mode);

struct SymbolConvergence {
  std::vector<int> scales;
  std::vector<double> values;
  double limit = 0.0;
  /// False when successive differences do not shrink monotonically.
  bool monotone_tail = true;
};

/// psi_n(j) along an increasing ladder of n and an Aitken/Richardson extrapolated limit.
SymbolConvergence symbol_limit_estimate(const KernelSpec& spec, std::array<int, 2> mode,
                                        std::span<const int> scales);

/// Extrapolates the limit symbol mode by mode, with a ladder that starts well above
/// the mode number. Results are cached per mode.
class LimitSymbol {
 public:
  /// ladder_steps/min_scale of 0 pick defaults by dimension.
  explicit LimitSymbol(KernelSpec spec, int ladder_steps = 0, int min_scale = 0);

  double operator()(std::array<int, 2> mode) const;

  /// Many modes at once; each ladder kernel is built a single time.
  std::vector<double> values(std::span<const std::array<int, 2>> modes) const;

  /// Limit symbol sampled on every mode of `lattice` (for spectral solves).
  FourierSymbol on_lattice(const Lattice& lattice) const;

  const KernelSpec& spec() const { return spec_; }

 private:
  KernelSpec spec_;
  int ladder_steps_;
  int min_scale_;
  mutable std::mutex mutex_;
  mutable std::map<std::array<int, 2>, double> cache_;
};

}  // namespace sipx
