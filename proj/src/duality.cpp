#include "sipx/duality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sipx/parallel.hpp"

namespace sipx {

double log_single_site_duality(std::uint32_t m, std::uint32_t n, double alpha) {
  if (m > n) return -std::numeric_limits<double>::infinity();
  if (m == 0) return 0.0;
  if (m <= 64) {
    // Short products avoid the cancellation in lgamma differences at large n.
    double s = 0.0;
    for (std::uint32_t i = 0; i < m; ++i) s += std::log(static_cast<double>(n - i)) - std::log(alpha + i);
    return s;
  }
  return std::lgamma(n + 1.0) - std::lgamma(n - m + 1.0) + std::lgamma(alpha) - std::lgamma(alpha + m);
}

double single_site_duality(std::uint32_t m, std::uint32_t n, double alpha) {
  if (m > n) return 0.0;
  if (m == 0) return 1.0;
  return std::exp(log_single_site_duality(m, n, alpha));
}

std::vector<std::pair<std::size_t, std::uint32_t>> DualConfiguration::multiplicities() const {
  std::vector<std::pair<std::size_t, std::uint32_t>> out;
  for (std::size_t x : positions) {
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& p) { return p.first == x; });
    if (it == out.end())
      out.emplace_back(x, 1u);
    else
      ++it->second;
  }
  return out;
}

double duality_weight(const DualConfiguration& xi, std::span<const std::uint32_t> eta, double alpha) {
  double log_w = 0.0;
  for (const auto& [x, m] : xi.multiplicities()) {
    if (x >= eta.size()) throw std::out_of_range("dual position outside the torus");
    if (m > eta[x]) return 0.0;
    log_w += log_single_site_duality(m, eta[x], alpha);
  }
  return std::exp(log_w);
}

double duality_weight(const DualConfiguration& xi, const Configuration& eta, double alpha) {
  if (!(xi.lattice == eta.lattice())) throw std::invalid_argument("dual and forward configurations live on different tori");
  return duality_weight(xi, std::span<const std::uint32_t>(eta.occupations()), alpha);
}

double negbin_site_moment(std::uint32_t m, double rho, double alpha) { return std::pow(rho / alpha, m); }

double negbin_duality_moment(const DualConfiguration& xi, std::span<const double> rho, double alpha) {
  double v = 1.0;
  for (std::size_t x : xi.positions) v *= rho[x] / alpha;
  return v;
}

DualWalkers::DualWalkers(DualConfiguration& xi, const DiscreteKernel& kernel, double alpha, Rng& rng)
    : xi_(xi), kernel_(kernel), alpha_(alpha), rng_(rng) {
  if (xi.k() > 4) throw std::invalid_argument("at most four dual walkers are supported");
  if (!(xi.lattice == kernel.lattice())) throw std::invalid_argument("dual configuration and kernel live on different tori");
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  const double k = xi.k();
  bound_ = alpha + k - 1.0;
  rate_ = std::pow(static_cast<double>(kernel.side()), kernel.beta()) * k * bound_;
  next_ = rate_ > 0.0 ? exponential(rng_, rate_) : std::numeric_limits<double>::infinity();
}

bool DualWalkers::propose() {
  ++proposals_;
  const std::size_t i = uniform_index(rng_, xi_.positions.size());
  const std::size_t to = xi_.lattice.shift(xi_.positions[i], kernel_.sample(rng_));
  int others = 0;
  for (std::size_t j = 0; j < xi_.positions.size(); ++j)
    if (j != i && xi_.positions[j] == to) ++others;
  const bool ok = uniform01(rng_) * bound_ < alpha_ + others;
  if (ok) {
    xi_.positions[i] = to;
    ++accepted_;
  }
  return ok;
}

void DualWalkers::advance_to(double t) {
  if (t < t_) throw std::invalid_argument("cannot advance backwards in time");
  while (next_ <= t) {
    t_ = next_;
    propose();
    next_ += exponential(rng_, rate_);
  }
  t_ = t;
}

double DualWalkers::step() {
  if (xi_.positions.empty()) throw std::logic_error("no dual walkers: no events");
  const double start = t_;
  for (;;) {
    t_ = next_;
    const bool ok = propose();
    next_ += exponential(rng_, rate_);
    if (ok) return t_ - start;
  }
}

Configuration sample_initial(const InitialLaw& law, const Lattice& lattice, double alpha, Rng& rng) {
  if (const auto* nb = std::get_if<NegBinLaw>(&law)) return init_product_negbin(nb->means, lattice, alpha, rng);
  return Configuration(lattice, std::get<FixedLaw>(law).eta);
}

double initial_duality_moment(const InitialLaw& law, const DualConfiguration& xi, double alpha) {
  if (const auto* nb = std::get_if<NegBinLaw>(&law)) return negbin_duality_moment(xi, nb->means, alpha);
  return duality_weight(xi, std::span<const std::uint32_t>(std::get<FixedLaw>(law).eta), alpha);
}

double DualityReport::combined_se() const { return std::sqrt(se_lhs * se_lhs + se_rhs * se_rhs); }

bool DualityReport::agrees(double z) const {
  if (degenerate) return std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs));
  return std::abs(lhs - rhs) <= z * combined_se();
}

namespace {

void require_setup(const MonteCarloSetup& s) {
  if (!s.kernel) throw std::invalid_argument("Monte Carlo setup needs a kernel");
  if (s.replicas == 0) throw std::invalid_argument("replica count must be positive");
}

ReplicaStats reduce(const std::vector<double>& values) {
  ReplicaStats s;
  for (double v : values) s.add(v);
  return s;
}

}  // namespace

std::vector<ReplicaStats> forward_duality(const std::vector<DualConfiguration>& xis, const InitialLaw& law, double t,
                                          const MonteCarloSetup& setup) {
  require_setup(setup);
  const DiscreteKernel& kernel = *setup.kernel;
  auto per_replica = parallel_map(setup.replicas, setup.threads, [&](std::size_t r) {
    Rng rng(derive_seed(setup.seed, r, "forward"));
    Configuration eta = sample_initial(law, kernel.lattice(), setup.alpha, rng);
    if (eta.particles() > 0) {
      Simulator sim(eta, kernel, setup.alpha, rng);
      sim.advance_to(t);
    }
    std::vector<double> v;
    v.reserve(xis.size());
    for (const auto& xi : xis) v.push_back(duality_weight(xi, eta, setup.alpha));
    return v;
  });
  std::vector<ReplicaStats> out(xis.size());
  for (const auto& v : per_replica)
    for (std::size_t i = 0; i < v.size(); ++i) out[i].add(v[i]);
  return out;
}

ReplicaStats dual_duality(const DualConfiguration& xi, const InitialLaw& law, double t, const MonteCarloSetup& setup) {
  require_setup(setup);
  const DiscreteKernel& kernel = *setup.kernel;
  auto values = parallel_map(setup.replicas, setup.threads, [&](std::size_t r) {
    Rng rng(derive_seed(setup.seed, r, "dual"));
    DualConfiguration x = xi;
    if (!x.positions.empty()) {
      DualWalkers walkers(x, kernel, setup.alpha, rng);
      walkers.advance_to(t);
    }
    return initial_duality_moment(law, x, setup.alpha);
  });
  return reduce(values);
}

DualityReport duality_check(const DualConfiguration& xi0, const InitialLaw& law, double t, const MonteCarloSetup& setup) {
  const auto fwd = forward_duality({xi0}, law, t, setup)[0];
  const auto dual = dual_duality(xi0, law, t, setup);
  DualityReport rep;
  rep.lhs = fwd.mean();
  rep.se_lhs = fwd.se();
  rep.rhs = dual.mean();
  rep.se_rhs = dual.se();
  rep.replicas = setup.replicas;
  rep.degenerate = rep.se_lhs == 0.0 && rep.se_rhs == 0.0;
  return rep;
}

std::vector<std::vector<ReplicaStats>> correlation_estimates(const std::vector<std::vector<std::size_t>>& sets,
                                                            const InitialLaw& law, std::span<const double> times,
                                                            const MonteCarloSetup& setup) {
  require_setup(setup);
  for (const auto& s : sets)
    if (s.size() > 4) throw std::invalid_argument("at most four points");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (times[i] < times[i - 1]) throw std::invalid_argument("times must be sorted");
  const DiscreteKernel& kernel = *setup.kernel;
  for (const auto& s : sets)
    for (std::size_t x : s)
      if (x >= kernel.lattice().sites()) throw std::out_of_range("moment point outside the torus");
  auto per_replica = parallel_map(setup.replicas, setup.threads, [&](std::size_t r) {
    Rng rng(derive_seed(setup.seed, r, "forward"));
    Configuration eta = sample_initial(law, kernel.lattice(), setup.alpha, rng);
    std::vector<double> v;
    v.reserve(times.size() * sets.size());
    auto record = [&] {
      for (const auto& s : sets) {
        double p = 1.0;
        for (std::size_t x : s) p *= eta[x];
        v.push_back(p);
      }
    };
    if (eta.particles() == 0) {
      for (std::size_t i = 0; i < times.size(); ++i) record();
      return v;
    }
    Simulator sim(eta, kernel, setup.alpha, rng);
    for (double s : times) {
      sim.advance_to(s);
      record();
    }
    return v;
  });
  std::vector<std::vector<ReplicaStats>> out(sets.size(), std::vector<ReplicaStats>(times.size()));
  for (const auto& v : per_replica)
    for (std::size_t ti = 0; ti < times.size(); ++ti)
      for (std::size_t si = 0; si < sets.size(); ++si) out[si][ti].add(v[ti * sets.size() + si]);
  return out;
}

std::vector<ReplicaStats> correlation_estimate(std::span<const std::size_t> points, const InitialLaw& law,
                                               std::span<const double> times, const MonteCarloSetup& setup) {
  return correlation_estimates({std::vector<std::size_t>(points.begin(), points.end())}, law, times, setup)[0];
}

double c_star_12(double c1, double c2) { return 5.0 * std::max({c2, c1 * c1, c1, 1.0}); }

namespace {

double stirling2(unsigned m, unsigned j) {
  // Small table is enough: m <= 4.
  static const double s[5][5] = {{1, 0, 0, 0, 0}, {0, 1, 0, 0, 0}, {0, 1, 1, 0, 0}, {0, 1, 3, 1, 0}, {0, 1, 7, 6, 1}};
  return s[m][j];
}

double rising(double a, unsigned j) {
  double p = 1.0;
  for (unsigned i = 0; i < j; ++i) p *= a + i;
  return p;
}

}  // namespace

double moment_bound(std::span<const std::size_t> points, double rho_sup, double alpha) {
  const std::size_t k = points.size();
  if (k > 4) throw std::invalid_argument("at most four points");
  if (k == 0) return 1.0;
  if (k == 1) return rho_sup;
  if (k == 2) {
    const double cstar = c_star_12(0.0, 0.0);
    const double norm21 = std::max(rho_sup * rho_sup, rho_sup);
    const double diag = points[0] == points[1] ? cstar * norm21 / alpha + rho_sup : 0.0;
    return cstar * norm21 + diag;
  }
  DualConfiguration xi;
  xi.positions.assign(points.begin(), points.end());
  double bound = 1.0;
  for (const auto& [x, m] : xi.multiplicities()) {
    double site = 0.0;
    for (unsigned j = 1; j <= m; ++j) site += stirling2(m, j) * rising(alpha, j) * std::pow(rho_sup / alpha, j);
    bound *= site;
  }
  return bound;
}

}  // namespace sipx
