// Macroscopic density profiles on the unit torus.
#pragma once

#include <array>
#include <string>
#include <vector>

#include "sipx/lattice.hpp"

namespace sipx {

enum class ProfileKind { Constant, GaussianBump, Tabulated };

std::string to_string(ProfileKind k);
ProfileKind profile_kind_from_string(const std::string& s);

/// Constant: level. GaussianBump: level + amplitude * periodized Gaussian(center, width).
/// Tabulated: piecewise-constant cells over [0,1)^d, `table` has cells^d entries.
struct InitialProfile {
  ProfileKind kind = ProfileKind::Constant;
  double level = 0.0;
  double amplitude = 0.0;
  std::vector<double> center;
  double width = 0.1;
  std::vector<double> table;

  bool operator==(const InitialProfile&) const = default;

  double value(std::array<double, 2> x, int dim) const;
  /// rho_0(x/n) at every site of the lattice.
  std::vector<double> on_lattice(const Lattice& lattice) const;
  double sup(int dim) const;
};

/// Throws std::invalid_argument for negative or unbounded profiles.
void validate(const InitialProfile& profile, int dim);

/// sum over images |m| <= 3 of exp(-|x - c + m|^2 / (2 w^2)).
double periodized_gaussian(std::array<double, 2> x, std::array<double, 2> c, double width, int dim);

}  // namespace sipx
