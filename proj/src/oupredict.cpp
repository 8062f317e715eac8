#include "sipx/oupredict.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sipx {

DensityPath density_path(const DensityField& rho0, double alpha, const FourierSymbol& symbol, double horizon, int steps) {
  if (steps < 1) throw std::invalid_argument("density path needs at least one step");
  if (!(horizon >= 0.0)) throw std::invalid_argument("horizon must be nonnegative");
  DensityPath path;
  const double h = horizon / steps;
  for (int k = 0; k <= steps; ++k) {
    const double s = k * h;
    path.times.push_back(s);
    auto f = solve(rho0, alpha, symbol, s);
    f.time = s;
    path.fields.push_back(std::move(f));
  }
  return path;
}

DensityField gamma_rho(std::span<const double> phi, const DensityField& rho, double alpha, const DiscreteKernel& kernel) {
  if (!(rho.lattice == kernel.lattice()) || phi.size() != rho.values.size())
    throw std::invalid_argument("gamma_rho grids differ");
  const Lattice& lat = rho.lattice;
  const double speed = std::pow(static_cast<double>(lat.side()), kernel.beta());
  std::vector<double> out(phi.size(), 0.0);
  for (std::size_t x = 0; x < out.size(); ++x) {
    double acc = 0.0;
    for (std::size_t disp : kernel.support()) {
      const std::size_t y = lat.shift(x, disp);
      const double d = phi[y] - phi[x];
      acc += kernel.probability(disp) * (alpha + rho.values[y]) * d * d;
    }
    out[x] = speed * acc;
  }
  return DensityField{lat, std::move(out), rho.time};
}

namespace {

// Number of path intervals covering [0, t]; t must sit on the grid.
std::size_t last_node(const DensityPath& path, double t) {
  if (path.times.empty()) throw std::invalid_argument("empty density path");
  if (t < 0.0) throw std::invalid_argument("time must be nonnegative");
  if (t == 0.0) return 0;
  const double h = path.times.size() > 1 ? path.times[1] - path.times[0] : 0.0;
  if (h <= 0.0 || t > path.horizon() * (1.0 + 1e-12)) throw std::invalid_argument("density path does not cover [0, t]");
  const double k = t / h;
  const auto kr = static_cast<std::size_t>(std::llround(k));
  if (std::abs(k - static_cast<double>(kr)) > 1e-6) throw std::invalid_argument("time is not on the density path grid");
  return kr;
}

// Composite Simpson on uniform nodes, closing with the 3/8 rule on an odd interval count.
double integrate_uniform(const std::vector<double>& f, double h) {
  const std::size_t m = f.size() - 1;
  if (m == 0) return 0.0;
  if (m == 1) return 0.5 * h * (f[0] + f[1]);
  const std::size_t simpson = m % 2 == 0 ? m : m - 3;
  double s = 0.0;
  for (std::size_t k = 0; k + 2 <= simpson; k += 2) s += h / 3.0 * (f[k] + 4.0 * f[k + 1] + f[k + 2]);
  if (simpson != m) {
    const std::size_t k = simpson;
    s += 3.0 * h / 8.0 * (f[k] + 3.0 * f[k + 1] + 3.0 * f[k + 2] + f[k + 3]);
  }
  return s;
}

}  // namespace

double qv_integral(std::span<const double> phi, const DensityPath& path, double t, double alpha, const DiscreteKernel& kernel) {
  const std::size_t last = last_node(path, t);
  if (last == 0) return 0.0;
  std::vector<double> integrand(last + 1);
  for (std::size_t k = 0; k <= last; ++k) {
    const auto g = gamma_rho(phi, path.fields[k], alpha, kernel);
    integrand[k] = grid_inner(path.fields[k].values, g.values);
  }
  return integrate_uniform(integrand, path.times[1] - path.times[0]);
}

double predicted_variance(std::span<const double> phi, const DensityPath& path, double t, double alpha,
                          std::span<const double> v0, const FourierSymbol& symbol, const DiscreteKernel& kernel) {
  for (double v : v0)
    if (v < 0.0) throw std::invalid_argument("initial variance density must be nonnegative");
  const std::size_t last = last_node(path, t);
  const Lattice& lat = symbol.lattice;
  const auto phi_field = make_field(lat, std::vector<double>(phi.begin(), phi.end()));

  const auto st = solve(phi_field, alpha, symbol, t);
  std::vector<double> sq(st.values.size());
  for (std::size_t x = 0; x < sq.size(); ++x) sq[x] = st.values[x] * st.values[x];
  const double initial = grid_inner(sq, v0);
  if (last == 0) return initial;

  std::vector<double> integrand(last + 1);
  for (std::size_t k = 0; k <= last; ++k) {
    const auto pushed = solve(phi_field, alpha, symbol, std::max(0.0, t - path.times[k]));
    const auto g = gamma_rho(pushed.values, path.fields[k], alpha, kernel);
    integrand[k] = grid_inner(path.fields[k].values, g.values);
  }
  return initial + integrate_uniform(integrand, path.times[1] - path.times[0]);
}

std::vector<double> negbin_variance_density(std::span<const double> rho0, double alpha) {
  std::vector<double> v(rho0.size());
  for (std::size_t x = 0; x < v.size(); ++x) v[x] = rho0[x] * (alpha + rho0[x]) / alpha;
  return v;
}

AdmissibleVariance admissible_variance(std::span<const double> phi, const DensityField& rho, double alpha) {
  if (phi.size() != rho.values.size()) throw std::invalid_argument("grid sizes differ");
  AdmissibleVariance a;
  double s = 0.0;
  for (std::size_t x = 0; x < phi.size(); ++x) s += phi[x] * phi[x] * rho.values[x] * (alpha + rho.values[x]);
  a.m_form = s / static_cast<double>(phi.size());
  a.alpha_scaled = a.m_form / alpha;
  return a;
}

}  // namespace sipx
