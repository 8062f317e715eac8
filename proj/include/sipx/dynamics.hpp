// Event-driven simulation of SIP(alpha) with long-range jumps on a periodic torus.
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "sipx/kernel.hpp"
#include "sipx/lattice.hpp"
#include "sipx/profile.hpp"
#include "sipx/random.hpp"

namespace sipx {

/// Occupation numbers plus a flat particle list for O(1) uniform particle picks.
class Configuration {
 public:
  Configuration() = default;
  /// Empty configuration on the torus with n sites per dimension.
  Configuration(int dim, int n);
  /// Configuration with the given occupations.
  Configuration(const Lattice& lattice, std::vector<std::uint32_t> eta);

  const Lattice& lattice() const { return lattice_; }
  int scale() const { return lattice_.side(); }
  std::size_t sites() const { return eta_.size(); }
  std::size_t particles() const { return where_.size(); }
  std::uint32_t max_bound() const { return bound_; }

  std::uint32_t operator[](std::size_t site) const { return eta_[site]; }
  const std::vector<std::uint32_t>& occupations() const { return eta_; }
  /// Site of every particle; the multiset matches the occupations.
  const std::vector<std::uint32_t>& particle_sites() const { return where_; }

  void add(std::size_t site);
  /// Moves particle p to `to`; raises the running bound if needed.
  void move(std::size_t p, std::size_t to);

  /// True when the particle list, counts and bound are mutually consistent.
  bool consistent() const;

 private:
  Lattice lattice_;
  std::vector<std::uint32_t> eta_;
  std::vector<std::uint32_t> where_;
  std::uint32_t bound_ = 0;
};

struct SimParams {
  double alpha = 1.0;
  double beta = 1.0;
  double horizon = 1.0;
  std::vector<double> snapshot_times;
  std::uint64_t seed = 0;

  bool operator==(const SimParams&) const = default;
};

void validate(const SimParams& params);

/// Independent negative-binomial sites with shape alpha and mean rho_0(x/n), via gamma-Poisson.
Configuration init_product_negbin(const InitialProfile& profile, double alpha, int dim, int n, Rng& rng);
/// Same, from per-site means.
Configuration init_product_negbin(const std::vector<double>& means, const Lattice& lattice, double alpha, Rng& rng);

/// Called after every accepted jump with (from, to, macroscopic time).
using JumpObserver = std::function<void(std::size_t, std::size_t, double)>;

/// Thinning simulator: proposals at rate n^beta N (alpha + B), source particle uniform,
/// displacement from q, acceptance (alpha + eta(y)) / (alpha + B). The next proposal
/// time is kept across calls, so the path does not depend on where it is observed.
class Simulator {
 public:
  Simulator(Configuration& config, const DiscreteKernel& kernel, double alpha, Rng& rng, double t0 = 0.0);

  double time() const { return t_; }
  std::uint64_t proposals() const { return proposals_; }
  std::uint64_t accepted() const { return accepted_; }
  double speed() const { return speed_; }
  double proposal_rate() const;

  void set_observer(JumpObserver obs) { observer_ = std::move(obs); }

  /// Runs every event with time <= t and leaves the clock at t.
  void advance_to(double t);

  /// Runs proposals until one is accepted; returns the elapsed macroscopic time.
  /// Throws std::logic_error on an empty configuration.
  double step();

 private:
  bool propose();
  void draw_next();

  Configuration& config_;
  const DiscreteKernel& kernel_;
  double alpha_;
  Rng& rng_;
  double speed_;
  double t_;
  double next_;
  std::uint64_t proposals_ = 0;
  std::uint64_t accepted_ = 0;
  JumpObserver observer_;
};

struct Snapshot {
  double time = 0.0;
  Configuration config;
};

/// Snapshot times with t = 0 and T included when the list is empty.
std::vector<double> snapshot_grid(const SimParams& params);

/// Simulates to the horizon and deep-copies the configuration at each snapshot time.
std::vector<Snapshot> run_snapshots(Configuration config, const DiscreteKernel& kernel, const SimParams& params,
                                    Rng& rng, std::uint64_t* events = nullptr);

}  // namespace sipx
