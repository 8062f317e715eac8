#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sipx/hydro.hpp"
#include "sipx/profile.hpp"
#include "sipx/random.hpp"

using namespace sipx;

namespace {

struct Setup {
  DiscreteKernel kernel;
  FourierSymbol psi;
};

Setup make(int n, double beta = 1.0, int dim = 1) {
  KernelSpec s;
  s.beta = beta;
  s.dimension = dim;
  auto k = build_discrete_kernel(s, n);
  auto psi = discrete_symbol(k, n);
  return {std::move(k), std::move(psi)};
}

DensityField bump(const Lattice& lat) {
  InitialProfile p;
  p.kind = ProfileKind::GaussianBump;
  p.level = 0.5;
  p.amplitude = 1.5;
  p.center = std::vector<double>(lat.dim(), 0.5);
  p.width = 0.1;
  return make_field(lat, p.on_lattice(lat));
}

DensityField rough(const Lattice& lat, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(lat.sites());
  for (auto& x : v) x = 3.0 * uniform01(rng);
  return make_field(lat, v);
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_SUITE("hydro") {
  TEST_CASE("zero time leaves the profile unchanged") {
    const auto s = make(64);
    const auto rho = bump(s.kernel.lattice());
    CHECK(solve(rho, 1.0, s.psi, 0.0).values == rho.values);
  }

  TEST_CASE("constant profiles are stationary") {
    const auto s = make(64);
    const auto rho = make_field(s.kernel.lattice(), std::vector<double>(64, 1.7));
    const auto out = solve(rho, 2.0, s.psi, 0.8);
    for (double v : out.values) CHECK(v == doctest::Approx(1.7).epsilon(1e-13));
  }

  TEST_CASE("mass is conserved") {
    for (int dim : {1, 2}) {
      const auto s = make(dim == 1 ? 128 : 32, 1.3, dim);
      for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto rho = rough(s.kernel.lattice(), seed);
        for (double t : {0.01, 0.1, 1.0}) {
          const auto out = solve(rho, 0.7, s.psi, t);
          CHECK(std::abs(out.mean() - rho.mean()) <= 1e-12 * rho.mean());
        }
      }
    }
  }

  TEST_CASE("maximum principle") {
    const auto s = make(128, 0.6);
    for (const auto& rho : {bump(s.kernel.lattice()), rough(s.kernel.lattice(), 4)}) {
      for (double t : {1e-4, 0.01, 0.2}) {
        const auto out = solve(rho, 1.0, s.psi, t);
        CHECK(out.min() >= rho.min() - 1e-10);
        CHECK(out.max() <= rho.max() + 1e-10);
      }
    }
  }

  TEST_CASE("semigroup property") {
    const auto s = make(128);
    const auto rho = rough(s.kernel.lattice(), 5);
    const auto a = solve(solve(rho, 1.0, s.psi, 0.03), 1.0, s.psi, 0.05);
    const auto b = solve(rho, 1.0, s.psi, 0.08);
    CHECK(max_abs_diff(a.values, b.values) <= 1e-10);
    CHECK(a.time == doctest::Approx(b.time));
  }

  TEST_CASE("generator is self-adjoint on the grid") {
    const auto s = make(64, 1.5);
    const auto f = rough(s.kernel.lattice(), 6);
    const auto g = rough(s.kernel.lattice(), 7);
    const double lhs = grid_inner(f.values, apply_L(g, s.psi).values);
    const double rhs = grid_inner(apply_L(f, s.psi).values, g.values);
    CHECK(std::abs(lhs - rhs) <= 1e-10);
  }

  TEST_CASE("spectral and quadrature routes agree") {
    for (int dim : {1, 2}) {
      const auto s = make(dim == 1 ? 128 : 24, 1.0, dim);
      for (const auto& f : {bump(s.kernel.lattice()), rough(s.kernel.lattice(), 8)}) {
        const auto a = apply_L(f, s.psi);
        const auto b = apply_L_quadrature(f, s.kernel);
        CHECK(max_abs_diff(a.values, b.values) <= 1e-10);
      }
    }
  }

  TEST_CASE("constants are annihilated and Fourier modes are eigenfunctions") {
    const auto s = make(64);
    const auto& lat = s.kernel.lattice();
    const auto c = apply_L(make_field(lat, std::vector<double>(64, 3.0)), s.psi);
    for (double v : c.values) CHECK(std::abs(v) <= 1e-12);
    for (int j : {1, 5, 32}) {
      std::vector<double> f(64);
      for (int x = 0; x < 64; ++x) f[x] = std::cos(2 * std::numbers::pi * j * x / 64.0);
      const auto lf = apply_L(make_field(lat, f), s.psi);
      for (int x = 0; x < 64; ++x) CHECK(std::abs(lf.values[x] - s.psi[j] * f[x]) <= 1e-10);
    }
  }

  TEST_CASE("mean profile basics") {
    const auto s = make(64);
    const auto rho = bump(s.kernel.lattice());
    CHECK(mean_profile(rho, 1.0, s.psi, 0.0).values == rho.values);
    const auto flat = make_field(s.kernel.lattice(), std::vector<double>(64, 0.4));
    for (double v : mean_profile(flat, 1.0, s.psi, 0.3).values) CHECK(v == doctest::Approx(0.4).epsilon(1e-13));
  }

  TEST_CASE("mean profiles at successive scales approach each other") {
    // Compare on the common coarse grid x = k / 32.
    std::vector<std::vector<double>> coarse;
    for (int n : {32, 64, 128, 256}) {
      const auto s = make(n);
      const auto out = mean_profile(bump(s.kernel.lattice()), 1.0, s.psi, 0.05);
      std::vector<double> c(32);
      for (int k = 0; k < 32; ++k) c[k] = out.values[k * (n / 32)];
      coarse.push_back(c);
    }
    double prev = 1e300;
    for (std::size_t i = 1; i < coarse.size(); ++i) {
      const double d = grid_l1_distance(coarse[i], coarse[i - 1]);
      CHECK(d < prev);
      prev = d;
    }
  }

  TEST_CASE("mismatched grids are rejected") {
    const auto a = make(32);
    const auto b = make(64);
    CHECK_THROWS_AS(solve(bump(b.kernel.lattice()), 1.0, a.psi, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(apply_L_quadrature(bump(b.kernel.lattice()), a.kernel), std::invalid_argument);
  }

  TEST_CASE("presmoothing barely moves smooth data") {
    const auto s = make(128);
    const auto rho = bump(s.kernel.lattice());
    const auto sm = presmooth(rho, 1.0, s.psi);
    CHECK(max_abs_diff(sm.values, rho.values) <= 1e-3);
    CHECK(sm.time == rho.time);
  }
}
