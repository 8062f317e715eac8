#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sipx/hydro.hpp"
#include "sipx/oupredict.hpp"
#include "sipx/profile.hpp"
#include "sipx/test_function.hpp"

using namespace sipx;

namespace {

struct Setup {
  DiscreteKernel kernel;
  FourierSymbol psi;
};

Setup make(int n, double beta = 1.0) {
  KernelSpec s;
  s.beta = beta;
  auto k = build_discrete_kernel(s, n);
  auto psi = discrete_symbol(k, n);
  return {std::move(k), std::move(psi)};
}

std::vector<double> cos_grid(const Lattice& lat, int j, double a = 1.0) {
  TestFunction f;
  f.mode = {j, 0};
  f.amplitude = a;
  return f.on_grid(lat);
}

DensityField flat(const Lattice& lat, double v) { return make_field(lat, std::vector<double>(lat.sites(), v)); }

DensityField bump(const Lattice& lat) {
  InitialProfile p;
  p.kind = ProfileKind::GaussianBump;
  p.level = 0.5;
  p.amplitude = 1.5;
  p.center = {0.5};
  p.width = 0.1;
  return make_field(lat, p.on_lattice(lat));
}

}  // namespace

TEST_SUITE("oupredict") {
  TEST_CASE("gamma vanishes on constants") {
    const auto s = make(32);
    const std::vector<double> c(32, 2.0);
    for (double v : gamma_rho(c, bump(s.kernel.lattice()), 1.0, s.kernel).values) CHECK(v == 0.0);
  }

  TEST_CASE("gamma with zero density is alpha times the bare form") {
    const auto s = make(32);
    const auto& lat = s.kernel.lattice();
    const auto phi = cos_grid(lat, 2);
    const auto g = gamma_rho(phi, flat(lat, 0.0), 2.5, s.kernel);
    for (std::size_t x = 0; x < 32; ++x) {
      double direct = 0.0;
      for (std::size_t d : s.kernel.support()) {
        const double diff = phi[lat.shift(x, d)] - phi[x];
        direct += s.kernel.probability(d) * diff * diff;
      }
      CHECK(g.values[x] == doctest::Approx(2.5 * 32.0 * direct).epsilon(1e-12));
    }
  }

  TEST_CASE("constant density identity for the pairing with gamma") {
    const double rho = 0.8, alpha = 1.3;
    const auto s = make(64, 1.4);
    const auto& lat = s.kernel.lattice();
    for (int j : {1, 3, 7}) {
      const auto phi = cos_grid(lat, j);
      const auto r = flat(lat, rho);
      const double lhs = grid_inner(r.values, gamma_rho(phi, r, alpha, s.kernel).values);
      const double rhs = 2.0 * rho * (alpha + rho) * -grid_inner(phi, apply_L(make_field(lat, phi), s.psi).values);
      CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(rhs));
    }
  }

  TEST_CASE("quadratic variation integral: zero at t = 0, linear for flat density, monotone") {
    const double rho = 1.0, alpha = 1.0;
    const auto s = make(64);
    const auto& lat = s.kernel.lattice();
    const auto phi = cos_grid(lat, 1);
    const auto path = density_path(flat(lat, rho), alpha, s.psi, 0.5, 50);
    CHECK(qv_integral(phi, path, 0.0, alpha, s.kernel) == 0.0);
    const double rate = 2.0 * rho * (alpha + rho) * -grid_inner(phi, apply_L(make_field(lat, phi), s.psi).values);
    for (int k : {1, 10, 50}) {
      const double t = 0.01 * k;
      CHECK(qv_integral(phi, path, t, alpha, s.kernel) == doctest::Approx(rate * t).epsilon(1e-10));
    }
    const auto bpath = density_path(bump(lat), alpha, s.psi, 0.5, 50);
    double prev = 0.0;
    for (int k = 1; k <= 50; ++k) {
      const double v = qv_integral(phi, bpath, 0.01 * k, alpha, s.kernel);
      CHECK(v >= prev);
      prev = v;
    }
  }

  TEST_CASE("time off the path grid is rejected") {
    const auto s = make(16);
    const auto path = density_path(flat(s.kernel.lattice(), 1.0), 1.0, s.psi, 0.1, 10);
    const auto phi = cos_grid(s.kernel.lattice(), 1);
    CHECK_THROWS_AS(qv_integral(phi, path, 0.015, 1.0, s.kernel), std::invalid_argument);
    CHECK_THROWS_AS(qv_integral(phi, path, 0.2, 1.0, s.kernel), std::invalid_argument);
  }

  TEST_CASE("predicted variance at t = 0 is the initial variance") {
    const auto s = make(32);
    const auto& lat = s.kernel.lattice();
    const auto phi = cos_grid(lat, 1);
    const auto rho = bump(lat);
    const auto v0 = negbin_variance_density(rho.values, 1.0);
    const auto path = density_path(rho, 1.0, s.psi, 0.1, 10);
    std::vector<double> sq(phi.size());
    for (std::size_t x = 0; x < sq.size(); ++x) sq[x] = phi[x] * phi[x];
    CHECK(predicted_variance(phi, path, 0.0, 1.0, v0, s.psi, s.kernel) == doctest::Approx(grid_inner(sq, v0)).epsilon(1e-14));
  }

  TEST_CASE("stationary prediction is constant in time") {
    for (double alpha : {0.5, 1.0, 3.0}) {
      const double rho = 1.0;
      const auto s = make(64);
      const auto& lat = s.kernel.lattice();
      const auto r = flat(lat, rho);
      const auto v0 = negbin_variance_density(r.values, alpha);
      const auto path = density_path(r, alpha, s.psi, 0.5, 1000);
      for (int j : {1, 2}) {
        const auto phi = cos_grid(lat, j);
        const double v_init = predicted_variance(phi, path, 0.0, alpha, v0, s.psi, s.kernel);
        for (double t : {0.1, 0.25, 0.5}) {
          const double v = predicted_variance(phi, path, t, alpha, v0, s.psi, s.kernel);
          CHECK(std::abs(v - v_init) <= 1e-6 * v_init);
        }
      }
    }
  }

  TEST_CASE("with zero density only the transported initial variance remains") {
    const auto s = make(32);
    const auto& lat = s.kernel.lattice();
    const auto phi = cos_grid(lat, 1);
    const auto path = density_path(flat(lat, 0.0), 1.0, s.psi, 0.2, 20);
    const auto v0 = bump(lat).values;
    const auto st = solve(make_field(lat, phi), 1.0, s.psi, 0.2).values;
    std::vector<double> sq(st.size());
    for (std::size_t x = 0; x < sq.size(); ++x) sq[x] = st[x] * st[x];
    CHECK(predicted_variance(phi, path, 0.2, 1.0, v0, s.psi, s.kernel) == doctest::Approx(grid_inner(sq, v0)).epsilon(1e-12));
  }

  TEST_CASE("admissible variance examples") {
    const Lattice lat(1, 64);
    const auto zero_phi = std::vector<double>(64, 0.0);
    CHECK(admissible_variance(zero_phi, flat(lat, 1.0), 1.0).m_form == 0.0);
    CHECK(admissible_variance(cos_grid(lat, 1), flat(lat, 0.0), 1.0).m_form == 0.0);
    // unit-norm phi with rho = alpha = 1: both forms equal 2.
    const auto phi = cos_grid(lat, 1, std::numbers::sqrt2);
    const auto a = admissible_variance(phi, flat(lat, 1.0), 1.0);
    CHECK(a.m_form == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(a.alpha_scaled == doctest::Approx(2.0).epsilon(1e-12));
    const auto b = admissible_variance(phi, flat(lat, 1.0), 4.0);
    CHECK(b.ratio() == doctest::Approx(0.25));
  }

  TEST_CASE("negative initial variance is rejected") {
    const auto s = make(16);
    const auto path = density_path(flat(s.kernel.lattice(), 1.0), 1.0, s.psi, 0.1, 10);
    std::vector<double> v0(16, 1.0);
    v0[3] = -0.1;
    CHECK_THROWS_AS(predicted_variance(cos_grid(s.kernel.lattice(), 1), path, 0.1, 1.0, v0, s.psi, s.kernel),
                    std::invalid_argument);
  }
}
