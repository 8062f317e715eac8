// Spectral solver for the non-local hydrodynamic equation on the unit torus.
#pragma once

#include <span>
#include <vector>

#include "sipx/kernel.hpp"
#include "sipx/lattice.hpp"

namespace sipx {

/// Grid values of a density on the unit torus (site x sits at x/M) with a time stamp.
struct DensityField {
  Lattice lattice;
  std::vector<double> values;
  double time = 0.0;

  double mean() const;
  double min() const;
  double max() const;
};

DensityField make_field(const Lattice& lattice, std::vector<double> values, double time = 0.0);

/// rho_hat(t, j) = exp(alpha psi(j) t) rho_hat(0, j). The result is stamped rho0.time + t.
DensityField solve(const DensityField& rho0, double alpha, const FourierSymbol& symbol, double t);

/// Spectral route: multiplication by psi(j).
DensityField apply_L(const DensityField& f, const FourierSymbol& symbol);
/// Quadrature route: n^beta * 1/2 sum_z q(z) (f(x+z) + f(x-z) - 2 f(x)).
DensityField apply_L_quadrature(const DensityField& f, const DiscreteKernel& kernel);

/// Expected occupation profile E_n[eta_t] under a product start with means rho0: the
/// one-particle semigroup of the drift alpha L_n applied to rho0.
DensityField mean_profile(const DensityField& rho0, double alpha, const FourierSymbol& symbol_n, double t);

/// One application of exp(alpha psi 1e-6), used to tame jumps in tabulated profiles.
DensityField presmooth(const DensityField& rho0, double alpha, const FourierSymbol& symbol);

/// Grid inner product M^{-d} sum f g.
double grid_inner(std::span<const double> f, std::span<const double> g);
/// M^{-d} sum |f - g|.
double grid_l1_distance(std::span<const double> f, std::span<const double> g);

}  // namespace sipx
