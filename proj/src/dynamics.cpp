#include "sipx/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sipx {

Configuration::Configuration(int dim, int n) : lattice_(dim, n), eta_(lattice_.sites(), 0) {}

Configuration::Configuration(const Lattice& lattice, std::vector<std::uint32_t> eta)
    : lattice_(lattice), eta_(std::move(eta)) {
  if (eta_.size() != lattice_.sites()) throw std::invalid_argument("occupation vector does not match lattice");
  for (std::size_t x = 0; x < eta_.size(); ++x) {
    for (std::uint32_t k = 0; k < eta_[x]; ++k) where_.push_back(static_cast<std::uint32_t>(x));
    bound_ = std::max(bound_, eta_[x]);
  }
}

void Configuration::add(std::size_t site) {
  ++eta_[site];
  where_.push_back(static_cast<std::uint32_t>(site));
  bound_ = std::max(bound_, eta_[site]);
}

void Configuration::move(std::size_t p, std::size_t to) {
  const std::uint32_t from = where_[p];
  --eta_[from];
  ++eta_[to];
  where_[p] = static_cast<std::uint32_t>(to);
  bound_ = std::max(bound_, eta_[to]);
}

bool Configuration::consistent() const {
  std::vector<std::uint32_t> count(eta_.size(), 0);
  for (auto x : where_) {
    if (x >= eta_.size()) return false;
    ++count[x];
  }
  if (count != eta_) return false;
  return std::all_of(eta_.begin(), eta_.end(), [&](std::uint32_t v) { return v <= bound_; });
}

void validate(const SimParams& p) {
  if (!(p.alpha > 0.0) || !std::isfinite(p.alpha)) throw std::invalid_argument("alpha must be positive");
  if (!(p.beta > 0.0 && p.beta < 2.0)) throw std::invalid_argument("beta must lie in (0, 2)");
  if (!(p.horizon >= 0.0) || !std::isfinite(p.horizon)) throw std::invalid_argument("horizon must be finite and nonnegative");
  for (std::size_t i = 0; i < p.snapshot_times.size(); ++i) {
    const double s = p.snapshot_times[i];
    if (!(s >= 0.0 && s <= p.horizon)) throw std::invalid_argument("snapshot times must lie in [0, T]");
    if (i > 0 && s < p.snapshot_times[i - 1]) throw std::invalid_argument("snapshot times must be sorted");
  }
}

Configuration init_product_negbin(const std::vector<double>& means, const Lattice& lattice, double alpha, Rng& rng) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (means.size() != lattice.sites()) throw std::invalid_argument("profile does not match lattice");
  Configuration c(lattice, std::vector<std::uint32_t>(lattice.sites(), 0));
  for (std::size_t x = 0; x < means.size(); ++x) {
    const double rho = means[x];
    if (!(rho >= 0.0) || !std::isfinite(rho)) throw std::invalid_argument("profile values must be finite and nonnegative");
    if (rho == 0.0) continue;
    std::gamma_distribution<double> gamma(alpha, rho / alpha);
    const double lambda = gamma(rng);
    if (lambda <= 0.0) continue;
    std::poisson_distribution<long> poisson(lambda);
    const long k = poisson(rng);
    for (long i = 0; i < k; ++i) c.add(x);
  }
  return c;
}

Configuration init_product_negbin(const InitialProfile& profile, double alpha, int dim, int n, Rng& rng) {
  const Lattice lattice(dim, n);
  return init_product_negbin(profile.on_lattice(lattice), lattice, alpha, rng);
}

Simulator::Simulator(Configuration& config, const DiscreteKernel& kernel, double alpha, Rng& rng, double t0)
    : config_(config), kernel_(kernel), alpha_(alpha), rng_(rng), t_(t0), next_(t0) {
  if (!(config.lattice() == kernel.lattice())) throw std::invalid_argument("configuration and kernel live on different tori");
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  speed_ = std::pow(static_cast<double>(config.scale()), kernel.beta());
  draw_next();
}

double Simulator::proposal_rate() const {
  return speed_ * static_cast<double>(config_.particles()) * (alpha_ + config_.max_bound());
}

void Simulator::draw_next() {
  const double rate = proposal_rate();
  next_ = rate > 0.0 ? next_ + exponential(rng_, rate) : std::numeric_limits<double>::infinity();
}

bool Simulator::propose() {
  ++proposals_;
  const std::size_t p = uniform_index(rng_, config_.particles());
  const std::size_t from = config_.particle_sites()[p];
  const std::size_t to = config_.lattice().shift(from, kernel_.sample(rng_));
  const double accept = (alpha_ + config_[to]) / (alpha_ + config_.max_bound());
  const bool ok = uniform01(rng_) < accept;
  if (ok) {
    config_.move(p, to);
    ++accepted_;
    if (observer_) observer_(from, to, next_);
  }
  return ok;
}

void Simulator::advance_to(double t) {
  if (t < t_) throw std::invalid_argument("cannot advance backwards in time");
  while (next_ <= t) {
    t_ = next_;
    propose();
    draw_next();
  }
  t_ = t;
}

double Simulator::step() {
  if (config_.particles() == 0) throw std::logic_error("no particles: no events");
  const double start = t_;
  for (;;) {
    t_ = next_;
    const bool ok = propose();
    draw_next();
    if (ok) return t_ - start;
  }
}

std::vector<double> snapshot_grid(const SimParams& params) {
  std::vector<double> grid = params.snapshot_times;
  if (grid.empty()) {
    grid.push_back(0.0);
    if (params.horizon > 0.0) grid.push_back(params.horizon);
  }
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

std::vector<Snapshot> run_snapshots(Configuration config, const DiscreteKernel& kernel, const SimParams& params,
                                    Rng& rng, std::uint64_t* events) {
  validate(params);
  std::vector<Snapshot> out;
  const auto grid = snapshot_grid(params);
  if (config.particles() == 0) {
    for (double s : grid) out.push_back({s, config});
    if (events) *events = 0;
    return out;
  }
  Simulator sim(config, kernel, params.alpha, rng);
  for (double s : grid) {
    sim.advance_to(s);
    out.push_back({s, config});
  }
  if (events) *events = sim.accepted();
  return out;
}

}  // namespace sipx
