#include "sipx/hydro.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sipx/spectral.hpp"

namespace sipx {

double DensityField::mean() const {
  double s = 0.0;
  for (double v : values) s += v;
  return values.empty() ? 0.0 : s / static_cast<double>(values.size());
}

double DensityField::min() const { return *std::min_element(values.begin(), values.end()); }
double DensityField::max() const { return *std::max_element(values.begin(), values.end()); }

DensityField make_field(const Lattice& lattice, std::vector<double> values, double time) {
  if (values.size() != lattice.sites()) throw std::invalid_argument("field size does not match lattice");
  return DensityField{lattice, std::move(values), time};
}

namespace {

void require_match(const DensityField& f, const FourierSymbol& symbol) {
  if (!(f.lattice == symbol.lattice) || symbol.values.size() != f.values.size())
    throw std::invalid_argument("field and symbol grids differ");
}

}  // namespace

DensityField solve(const DensityField& rho0, double alpha, const FourierSymbol& symbol, double t) {
  require_match(rho0, symbol);
  if (t < 0.0) throw std::invalid_argument("solve needs t >= 0");
  if (t == 0.0) return rho0;
  std::vector<double> mult(symbol.values.size());
  for (std::size_t j = 0; j < mult.size(); ++j) mult[j] = std::exp(alpha * symbol.values[j] * t);
  auto values = Spectral::for_lattice(rho0.lattice).apply_multiplier(rho0.values, mult);
  return DensityField{rho0.lattice, std::move(values), rho0.time + t};
}

DensityField apply_L(const DensityField& f, const FourierSymbol& symbol) {
  require_match(f, symbol);
  auto values = Spectral::for_lattice(f.lattice).apply_multiplier(f.values, symbol.values);
  return DensityField{f.lattice, std::move(values), f.time};
}

DensityField apply_L_quadrature(const DensityField& f, const DiscreteKernel& kernel) {
  if (!(f.lattice == kernel.lattice())) throw std::invalid_argument("field and kernel grids differ");
  const Lattice& lat = f.lattice;
  const double speed = std::pow(static_cast<double>(lat.side()), kernel.beta());
  std::vector<double> out(f.values.size(), 0.0);
  for (std::size_t x = 0; x < out.size(); ++x) {
    double acc = 0.0;
    for (std::size_t disp : kernel.support()) {
      const double fp = f.values[lat.shift(x, disp)];
      const double fm = f.values[lat.shift(x, lat.negate(disp))];
      acc += kernel.probability(disp) * ((fp - f.values[x]) + (fm - f.values[x]));
    }
    out[x] = 0.5 * speed * acc;
  }
  return DensityField{lat, std::move(out), f.time};
}

DensityField mean_profile(const DensityField& rho0, double alpha, const FourierSymbol& symbol_n, double t) {
  return solve(rho0, alpha, symbol_n, t);
}

DensityField presmooth(const DensityField& rho0, double alpha, const FourierSymbol& symbol) {
  auto out = solve(rho0, alpha, symbol, 1e-6);
  out.time = rho0.time;
  return out;
}

double grid_inner(std::span<const double> f, std::span<const double> g) {
  if (f.size() != g.size()) throw std::invalid_argument("grid sizes differ");
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * g[i];
  return s / static_cast<double>(f.size());
}

double grid_l1_distance(std::span<const double> f, std::span<const double> g) {
  if (f.size() != g.size()) throw std::invalid_argument("grid sizes differ");
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += std::abs(f[i] - g[i]);
  return s / static_cast<double>(f.size());
}

}  // namespace sipx
