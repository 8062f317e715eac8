// Discrete and continuum Dirichlet forms, generator and carre-du-champ residuals.
#pragma once

#include <span>
#include <string>
#include <vector>

#include "sipx/kernel.hpp"
#include "sipx/test_function.hpp"

namespace sipx {

/// (n^beta / n^d) sum_x sum_z q(z) (phi(x+z) - phi(x))^2.
double discrete_form(std::span<const double> phi, const DiscreteKernel& kernel);

/// -2 sum_j psi_inf(j) |phi_hat(j)|^2.
double continuum_form(const TestFunction& phi, const LimitSymbol& symbol, int dim);

/// L phi and Gamma phi = L(phi^2) - 2 phi L phi of the limit operator, sampled on a lattice.
std::vector<double> continuum_generator(const TestFunction& phi, const LimitSymbol& symbol, const Lattice& lattice);
std::vector<double> continuum_gamma(const TestFunction& phi, const LimitSymbol& symbol, const Lattice& lattice);

/// n^beta sum_z q(z) (phi(x+z) - phi(x))^2.
std::vector<double> discrete_gamma(std::span<const double> phi, const DiscreteKernel& kernel);

struct GeneratorResiduals {
  /// n^{-d} sum |L_n Phi_n phi - Phi_n L phi|.
  double l1 = 0.0;
  double sup = 0.0;
  /// sqrt(n^{-d} sum (Gamma_n Phi_n phi - Phi_n Gamma phi)^2).
  double gamma_l2 = 0.0;
};

GeneratorResiduals generator_residuals(const TestFunction& phi, const DiscreteKernel& kernel, const LimitSymbol& symbol);

/// sqrt(n^{-d} sum phi(x/n)^2).
double hilbert_norm(std::span<const double> phi);
/// Continuum L2 norm from the Fourier coefficients.
double l2_norm(const TestFunction& phi, int dim);

struct FormRow {
  std::string phi;
  int n = 0;
  double discrete = 0.0;
  double continuum = 0.0;
  double relative_error = 0.0;
  GeneratorResiduals residuals;
  double hilbert = 0.0;
  double l2 = 0.0;
};

struct FormReport {
  std::vector<FormRow> rows;
  /// Per test function: form error, generator and gamma residuals all nonincreasing along the ladder.
  bool monotone = true;
};

FormReport form_report(const std::vector<TestFunction>& phis, const KernelSpec& spec, const std::vector<int>& ladder,
                       const LimitSymbol& symbol);

}  // namespace sipx
