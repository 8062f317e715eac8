// Self-duality weights, dual coordinate walkers and duality-based moment estimators.
#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "sipx/dynamics.hpp"
#include "sipx/kernel.hpp"
#include "sipx/stats.hpp"

namespace sipx {

/// log d(m, n) = log[n!/(n-m)!] + log Gamma(alpha) - log Gamma(alpha+m); -inf when m > n.
double log_single_site_duality(std::uint32_t m, std::uint32_t n, double alpha);
double single_site_duality(std::uint32_t m, std::uint32_t n, double alpha);

/// Labeled positions of k <= 4 dual particles.
struct DualConfiguration {
  Lattice lattice;
  std::vector<std::size_t> positions;

  int k() const { return static_cast<int>(positions.size()); }
  /// Unlabeled occupation numbers (sites with multiplicity).
  std::vector<std::pair<std::size_t, std::uint32_t>> multiplicities() const;
};

/// D(xi, eta) = prod_x d(xi(x), eta(x)).
double duality_weight(const DualConfiguration& xi, std::span<const std::uint32_t> eta, double alpha);
double duality_weight(const DualConfiguration& xi, const Configuration& eta, double alpha);

/// E[d(m, eta)] for eta negative-binomial with shape alpha and mean rho: (rho/alpha)^m.
double negbin_site_moment(std::uint32_t m, double rho, double alpha);
/// E[D(xi, eta)] under a negative-binomial product with per-site means `rho`.
double negbin_duality_moment(const DualConfiguration& xi, std::span<const double> rho, double alpha);

/// k-particle coordinate process: walker i jumps by r at rate n^beta q(r)(alpha + #{j != i : x_j = x_i + r}),
/// simulated by thinning with bound alpha + k - 1.
class DualWalkers {
 public:
  DualWalkers(DualConfiguration& xi, const DiscreteKernel& kernel, double alpha, Rng& rng);

  double time() const { return t_; }
  std::uint64_t proposals() const { return proposals_; }
  std::uint64_t accepted() const { return accepted_; }

  void advance_to(double t);
  /// Runs proposals until one is accepted; returns the elapsed time.
  double step();

 private:
  bool propose();

  DualConfiguration& xi_;
  const DiscreteKernel& kernel_;
  double alpha_;
  Rng& rng_;
  double rate_;
  double bound_;
  double t_ = 0.0;
  double next_ = 0.0;
  std::uint64_t proposals_ = 0;
  std::uint64_t accepted_ = 0;
};

/// Initial law of the forward process: negative-binomial product or a fixed configuration.
struct NegBinLaw {
  std::vector<double> means;
};
struct FixedLaw {
  std::vector<std::uint32_t> eta;
};
using InitialLaw = std::variant<NegBinLaw, FixedLaw>;

Configuration sample_initial(const InitialLaw& law, const Lattice& lattice, double alpha, Rng& rng);
/// Exact E_law[D(xi, eta)].
double initial_duality_moment(const InitialLaw& law, const DualConfiguration& xi, double alpha);

struct DualityReport {
  double lhs = 0.0;
  double se_lhs = 0.0;
  double rhs = 0.0;
  double se_rhs = 0.0;
  std::uint64_t replicas = 0;
  /// Both sides have zero spread (e.g. empty xi); the check is exact rather than statistical.
  bool degenerate = false;

  double combined_se() const;
  bool agrees(double z = 3.0) const;
};

struct MonteCarloSetup {
  const DiscreteKernel* kernel = nullptr;
  double alpha = 1.0;
  std::uint64_t replicas = 1000;
  std::uint64_t seed = 0;
  int threads = 0;
};

/// Forward estimates of E[D(xi, eta_t)] for several xi from shared trajectories.
std::vector<ReplicaStats> forward_duality(const std::vector<DualConfiguration>& xis, const InitialLaw& law, double t,
                                          const MonteCarloSetup& setup);
/// Dual estimate of E[D(xi_t, eta_0)] averaged over the dual walkers.
ReplicaStats dual_duality(const DualConfiguration& xi, const InitialLaw& law, double t, const MonteCarloSetup& setup);

DualityReport duality_check(const DualConfiguration& xi0, const InitialLaw& law, double t, const MonteCarloSetup& setup);

/// Monte Carlo E[prod_j eta_t(x_j)] for up to four sites at each requested time.
std::vector<ReplicaStats> correlation_estimate(std::span<const std::size_t> points, const InitialLaw& law,
                                               std::span<const double> times, const MonteCarloSetup& setup);

/// Same for several point sets sharing one set of trajectories: result[set][time].
std::vector<std::vector<ReplicaStats>> correlation_estimates(const std::vector<std::vector<std::size_t>>& sets,
                                                            const InitialLaw& law, std::span<const double> times,
                                                            const MonteCarloSetup& setup);

/// C*_{1,2} = 5 max{C_2, C_1^2, C_1, 1}.
double c_star_12(double c1, double c2);

/// Upper bound on E[prod_j eta_t(x_j)] under a negative-binomial start with sup rho_0 = rho_sup
/// (initial factorization constants zero). k = 1, 2 use the one/two-point growth bounds;
/// k = 3, 4 use prod_x sum_j S(m_x, j) (alpha)_j (rho_sup/alpha)^j.
double moment_bound(std::span<const std::size_t> points, double rho_sup, double alpha);

}  // namespace sipx
