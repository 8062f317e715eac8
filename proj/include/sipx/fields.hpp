// Empirical measures, fluctuation fields, Dynkin residuals and carre du champ.
#pragma once

#include <span>
#include <vector>

#include "sipx/dynamics.hpp"
#include "sipx/hydro.hpp"
#include "sipx/kernel.hpp"
#include "sipx/test_function.hpp"

namespace sipx {

/// n^{-d} sum_x eta(x) phi(x/n).
double empirical(const Configuration& config, std::span<const double> phi);
double empirical(const Configuration& config, const TestFunction& phi);

/// n^{d/2} (empirical - n^{-d} sum_x mean(x) phi(x/n)). Throws if the mean profile
/// is stamped with a different time than `t`.
double fluctuation(const Configuration& config, std::span<const double> phi, const DensityField& mean, double t);

/// (n^beta / n^d) sum_x eta(x) sum_z q(z) (alpha + eta(x+z)) (phi(x+z) - phi(x))^2,
/// summed over occupied sites and the kernel support only.
double carre_du_champ(const Configuration& config, std::span<const double> phi, const DiscreteKernel& kernel, double alpha);

/// Accumulates n^{-d} (phi(to) - phi(from))^2 over accepted jumps: the realized
/// quadratic variation of the fluctuation martingale.
class QuadraticVariationObserver {
 public:
  QuadraticVariationObserver(std::vector<double> phi, const Lattice& lattice);
  void operator()(std::size_t from, std::size_t to, double t);
  double value() const { return sum_; }

 private:
  std::vector<double> phi_;
  double inv_volume_;
  double sum_ = 0.0;
};

/// n^{d/2} [pi_t(phi) - pi_0(phi) - int_0^t alpha pi_s(L_n phi) ds] at every snapshot, with the time
/// integral by trapezoid on the snapshot grid. `l_phi` is L_n^{(1)} phi on the grid.
std::vector<double> dynkin_residual(std::span<const double> times, std::span<const double> pi_phi,
                                    std::span<const double> pi_l_phi, double alpha, int dim, int n);

/// Running trapezoid integral of a sampled integrand (first entry 0).
std::vector<double> trapezoid_cumulative(std::span<const double> times, std::span<const double> values);

}  // namespace sipx
