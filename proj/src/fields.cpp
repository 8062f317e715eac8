#include "sipx/fields.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sipx {

namespace {

double volume(const Lattice& lat) { return static_cast<double>(lat.sites()); }

}  // namespace

double empirical(const Configuration& config, std::span<const double> phi) {
  if (phi.size() != config.sites()) throw std::invalid_argument("test function grid does not match configuration");
  double s = 0.0;
  const auto& eta = config.occupations();
  for (std::size_t x = 0; x < eta.size(); ++x)
    if (eta[x]) s += eta[x] * phi[x];
  return s / volume(config.lattice());
}

double empirical(const Configuration& config, const TestFunction& phi) {
  return empirical(config, phi.on_grid(config.lattice()));
}

double fluctuation(const Configuration& config, std::span<const double> phi, const DensityField& mean, double t) {
  if (!(mean.lattice == config.lattice())) throw std::invalid_argument("mean profile grid does not match configuration");
  if (std::abs(mean.time - t) > 1e-12 * std::max(1.0, std::abs(t)))
    throw std::invalid_argument("mean profile time stamp does not match the configuration time");
  const double centered = empirical(config, phi) - grid_inner(mean.values, phi);
  return std::sqrt(volume(config.lattice())) * centered;
}

double carre_du_champ(const Configuration& config, std::span<const double> phi, const DiscreteKernel& kernel, double alpha) {
  if (!(config.lattice() == kernel.lattice())) throw std::invalid_argument("configuration and kernel grids differ");
  if (phi.size() != config.sites()) throw std::invalid_argument("test function grid does not match configuration");
  const Lattice& lat = config.lattice();
  const auto& eta = config.occupations();
  double s = 0.0;
  for (std::size_t x = 0; x < eta.size(); ++x) {
    if (!eta[x]) continue;
    double inner = 0.0;
    for (std::size_t disp : kernel.support()) {
      const std::size_t y = lat.shift(x, disp);
      const double d = phi[y] - phi[x];
      inner += kernel.probability(disp) * (alpha + eta[y]) * d * d;
    }
    s += eta[x] * inner;
  }
  return std::pow(static_cast<double>(lat.side()), kernel.beta()) * s / volume(lat);
}

QuadraticVariationObserver::QuadraticVariationObserver(std::vector<double> phi, const Lattice& lattice)
    : phi_(std::move(phi)), inv_volume_(1.0 / volume(lattice)) {
  if (phi_.size() != lattice.sites()) throw std::invalid_argument("test function grid does not match lattice");
}

void QuadraticVariationObserver::operator()(std::size_t from, std::size_t to, double) {
  const double d = phi_[to] - phi_[from];
  sum_ += d * d * inv_volume_;
}

std::vector<double> trapezoid_cumulative(std::span<const double> times, std::span<const double> values) {
  if (times.size() != values.size()) throw std::invalid_argument("times and values differ in length");
  std::vector<double> out(times.size(), 0.0);
  for (std::size_t i = 1; i < times.size(); ++i)
    out[i] = out[i - 1] + 0.5 * (times[i] - times[i - 1]) * (values[i] + values[i - 1]);
  return out;
}

std::vector<double> dynkin_residual(std::span<const double> times, std::span<const double> pi_phi,
                                    std::span<const double> pi_l_phi, double alpha, int dim, int n) {
  if (times.size() < 2) throw std::invalid_argument("Dynkin residual needs at least two snapshots");
  if (pi_phi.size() != times.size() || pi_l_phi.size() != times.size())
    throw std::invalid_argument("snapshot series differ in length");
  const auto drift = trapezoid_cumulative(times, pi_l_phi);
  const double scale = std::pow(static_cast<double>(n), 0.5 * dim);
  std::vector<double> m(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) m[i] = scale * (pi_phi[i] - pi_phi[0] - alpha * drift[i]);
  m[0] = 0.0;
  return m;
}

}  // namespace sipx
