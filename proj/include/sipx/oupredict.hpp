// Limiting Ornstein-Uhlenbeck characteristics computed from the hydrodynamic solution.
#pragma once

#include <span>
#include <vector>

#include "sipx/hydro.hpp"
#include "sipx/kernel.hpp"

namespace sipx {

/// rho(s, .) on a uniform time grid s_k = k h, k = 0..steps.
struct DensityPath {
  std::vector<double> times;
  std::vector<DensityField> fields;

  double horizon() const { return times.empty() ? 0.0 : times.back(); }
};

DensityPath density_path(const DensityField& rho0, double alpha, const FourierSymbol& symbol, double horizon, int steps);

/// Gamma phi(x) = sum_z n^beta q(z) (alpha + rho(x+z)) (phi(x+z) - phi(x))^2.
DensityField gamma_rho(std::span<const double> phi, const DensityField& rho, double alpha, const DiscreteKernel& kernel);

/// int_0^t M^{-d} sum_x rho(s,x) Gamma_s phi(x) ds, Simpson on the path grid.
double qv_integral(std::span<const double> phi, const DensityPath& path, double t, double alpha, const DiscreteKernel& kernel);

/// Var Y_t(phi) = int (S_t phi)^2 v0 + int_0^t <rho(u), Gamma_u S_{t-u} phi> du, S the semigroup of alpha L_n.
double predicted_variance(std::span<const double> phi, const DensityPath& path, double t, double alpha,
                          std::span<const double> v0, const FourierSymbol& symbol, const DiscreteKernel& kernel);

/// v0 = rho0 (alpha + rho0) / alpha.
std::vector<double> negbin_variance_density(std::span<const double> rho0, double alpha);

struct AdmissibleVariance {
  /// int phi^2 rho (alpha + rho).
  double m_form = 0.0;
  /// int phi^2 rho (alpha + rho) / alpha.
  double alpha_scaled = 0.0;
  double ratio() const { return m_form != 0.0 ? alpha_scaled / m_form : 1.0; }
};

AdmissibleVariance admissible_variance(std::span<const double> phi, const DensityField& rho, double alpha);

}  // namespace sipx
