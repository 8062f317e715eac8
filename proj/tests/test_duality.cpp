#include <doctest.h>

#include <cmath>
#include <map>

#include "oracles.hpp"
#include "sipx/duality.hpp"
#include "sipx/exact_model.hpp"

using namespace sipx;

namespace {

DualConfiguration dual(const Lattice& lat, std::vector<std::size_t> pos) { return DualConfiguration{lat, std::move(pos)}; }

KernelSpec tiny_spec() {
  KernelSpec s;
  s.window = 2;
  s.image_folds = 3;
  return s;
}

}  // namespace

TEST_SUITE("duality") {
  TEST_CASE("single-site duality values") {
    for (unsigned n = 0; n < 10; ++n) CHECK(single_site_duality(0, n, 0.7) == 1.0);
    for (unsigned n = 0; n < 10; ++n) CHECK(single_site_duality(1, n, 0.7) == doctest::Approx(n / 0.7).epsilon(1e-13));
    CHECK(single_site_duality(2, 3, 1.0) == doctest::Approx(3.0).epsilon(1e-13));
    CHECK(single_site_duality(3, 2, 1.0) == 0.0);
    for (double alpha : {0.3, 1.0, 2.5})
      for (unsigned m = 0; m <= 4; ++m)
        for (unsigned n = 0; n < 30; ++n)
          CHECK(single_site_duality(m, n, alpha) == doctest::Approx(oracle::duality_direct(m, n, alpha)).epsilon(1e-12));
  }

  TEST_CASE("log-space evaluation stays finite at large occupancy") {
    const double v = log_single_site_duality(4, 1'000'000, 0.5);
    CHECK(std::isfinite(v));
    CHECK(v == doctest::Approx(std::log(oracle::duality_direct(4, 1'000'000, 0.5))).epsilon(1e-12));
  }

  TEST_CASE("duality weight of configurations") {
    const Lattice lat(1, 6);
    const std::vector<std::uint32_t> eta{3, 0, 1, 2, 0, 0};
    CHECK(duality_weight(dual(lat, {}), std::span<const std::uint32_t>(eta), 1.0) == 1.0);
    CHECK(duality_weight(dual(lat, {0}), std::span<const std::uint32_t>(eta), 2.0) == doctest::Approx(1.5));
    CHECK(duality_weight(dual(lat, {0, 0}), std::span<const std::uint32_t>(eta), 1.0) == doctest::Approx(3.0));
    CHECK(duality_weight(dual(lat, {0, 3}), std::span<const std::uint32_t>(eta), 1.0) == doctest::Approx(6.0));
    CHECK(duality_weight(dual(lat, {1}), std::span<const std::uint32_t>(eta), 1.0) == 0.0);
    CHECK(duality_weight(dual(lat, {2, 2}), std::span<const std::uint32_t>(eta), 1.0) == 0.0);
  }

  TEST_CASE("weight is nonnegative and vanishes exactly when xi exceeds eta") {
    const Lattice lat(1, 4);
    Rng rng(1);
    for (int trial = 0; trial < 2000; ++trial) {
      std::vector<std::uint32_t> eta(4);
      for (auto& v : eta) v = static_cast<std::uint32_t>(uniform_index(rng, 4));
      DualConfiguration xi{lat, {}};
      const auto k = uniform_index(rng, 5);
      for (std::size_t i = 0; i < k; ++i) xi.positions.push_back(uniform_index(rng, 4));
      const double w = duality_weight(xi, std::span<const std::uint32_t>(eta), 0.8);
      bool exceeds = false;
      for (const auto& [x, m] : xi.multiplicities()) exceeds |= m > eta[x];
      CHECK(w >= 0.0);
      CHECK((w == 0.0) == exceeds);
    }
  }

  TEST_CASE("negative-binomial site moments by pmf summation") {
    for (double alpha : {0.5, 1.0, 2.0})
      for (double rho : {0.3, 1.0, 2.5})
        for (unsigned m = 0; m <= 4; ++m) {
          double s = 0.0;
          for (int k = 0; k < 4000; ++k) s += oracle::negbin_pmf(k, alpha, rho) * oracle::duality_direct(m, k, alpha);
          CHECK(negbin_site_moment(m, rho, alpha) == doctest::Approx(s).epsilon(1e-10));
        }
  }

  TEST_CASE("exact model generator structure") {
    const auto k = build_discrete_kernel(tiny_spec(), 6);
    const ExactModel model(k, 1.0, 3);
    CHECK(model.size() == 56);
    CHECK(model.max_row_sum() <= 1e-12);
    double max_diag = 0.0;
    for (std::size_t i = 0; i < model.size(); ++i)
      for (std::size_t e = model.row_ptr()[i]; e < model.row_ptr()[i + 1]; ++e) {
        if (model.cols()[e] == i)
          max_diag = std::max(max_diag, -model.vals()[e]);
        else
          CHECK(model.vals()[e] >= 0.0);
      }
    CHECK(model.lambda() >= max_diag);
    CHECK_THROWS_AS(ExactModel(k, 1.0, 12, 1000), std::length_error);
  }

  TEST_CASE("uniformization basics and dense cross-check") {
    KernelSpec s;
    s.window = 1;
    s.image_folds = 3;
    const auto k = build_discrete_kernel(s, 4);
    const ExactModel model(k, 1.0, 2);
    const auto f = model.tabulate([](std::span<const std::uint32_t> eta) { return eta[0] * eta[0] + 0.5 * eta[1]; });
    const std::vector<double> ones(model.size(), 1.0);
    for (std::size_t start = 0; start < model.size(); ++start) {
      CHECK(model.expectation(f, start, 0.0) == f[start]);
      CHECK(model.expectation(ones, start, 0.7) == doctest::Approx(1.0).epsilon(1e-10));
      const double u = model.expectation(f, start, 0.3);
      CHECK(std::abs(u - model.expectation_dense(f, start, 0.3)) <= 1e-8);
    }
    const auto pushed = model.semigroup(f, 0.3);
    for (std::size_t start = 0; start < model.size(); ++start)
      CHECK(std::abs(pushed[start] - model.expectation(f, start, 0.3)) <= 1e-10);
  }

  TEST_CASE("a single dual walker moves like a single particle") {
    const auto k = build_discrete_kernel(tiny_spec(), 6);
    const ExactModel model(k, 1.0, 1);
    const double t = 0.2;
    std::vector<std::uint32_t> e0(6, 0);
    e0[0] = 1;
    const auto law = model.distribution(model.index_of(e0), t);
    std::vector<double> observed(6, 0.0), expected(6, 0.0);
    const int reps = 100'000;
    Rng rng(2);
    for (int r = 0; r < reps; ++r) {
      auto xi = dual(k.lattice(), {0});
      DualWalkers w(xi, k, 1.0, rng);
      w.advance_to(t);
      observed[xi.positions[0]] += 1.0;
    }
    for (std::size_t i = 0; i < model.size(); ++i) {
      const auto st = model.state(i);
      for (std::size_t x = 0; x < 6; ++x)
        if (st[x]) expected[x] = reps * law[i];
    }
    CHECK(oracle::chi_square_pvalue(observed, expected) > 1e-3);
  }

  TEST_CASE("dual walkers attract with the inclusion factor") {
    KernelSpec s;
    s.window = 1;
    s.image_folds = 0;
    const auto k = build_discrete_kernel(s, 8);
    Rng rng(3);
    double join = 0.0, leave = 0.0;
    for (int i = 0; i < 100'000; ++i) {
      auto xi = dual(k.lattice(), {0, 1});
      DualWalkers w(xi, k, 1.0, rng);
      w.step();
      if (xi.positions[0] == xi.positions[1])
        join += 1.0;
      else
        leave += 1.0;
    }
    const double ratio = join / leave;
    CHECK(std::abs(ratio - 2.0) <= 3.0 * ratio * std::sqrt(1.0 / join + 1.0 / leave));
  }

  TEST_CASE("dual walkers are exchangeable") {
    KernelSpec s;
    const auto k = build_discrete_kernel(s, 8);
    const int reps = 50'000;
    std::map<std::pair<std::size_t, std::size_t>, double> a, b;
    for (int r = 0; r < reps; ++r) {
      Rng ra(derive_seed(4, r, "a")), rb(derive_seed(4, r, "b"));
      auto x = dual(k.lattice(), {0, 2});
      auto y = dual(k.lattice(), {2, 0});
      DualWalkers wa(x, k, 1.0, ra), wb(y, k, 1.0, rb);
      wa.advance_to(0.5);
      wb.advance_to(0.5);
      a[std::minmax(x.positions[0], x.positions[1])] += 1.0;
      b[std::minmax(y.positions[0], y.positions[1])] += 1.0;
    }
    double stat = 0.0;
    int bins = 0;
    for (const auto& [key, va] : a) {
      const double vb = b.count(key) ? b[key] : 0.0;
      if (va + vb < 10) continue;
      stat += (va - vb) * (va - vb) / (va + vb);
      ++bins;
    }
    boost::math::chi_squared dist(bins - 1);
    CHECK(boost::math::cdf(boost::math::complement(dist, stat)) > 1e-3);
  }

  TEST_CASE("duality check with an empty dual configuration is exact") {
    const auto k = build_discrete_kernel(tiny_spec(), 6);
    MonteCarloSetup setup{&k, 1.0, 1000, 5, 2};
    const auto rep = duality_check(dual(k.lattice(), {}), NegBinLaw{std::vector<double>(6, 1.0)}, 0.3, setup);
    CHECK(rep.lhs == 1.0);
    CHECK(rep.rhs == 1.0);
    CHECK(rep.degenerate);
    CHECK(rep.agrees());
  }

  TEST_CASE("constant profile: both sides give rho / alpha") {
    KernelSpec s;
    const auto k = build_discrete_kernel(s, 32);
    const double rho = 1.3, alpha = 0.8;
    MonteCarloSetup setup{&k, alpha, 4000, 6, 0};
    const auto rep = duality_check(dual(k.lattice(), {7}), NegBinLaw{std::vector<double>(32, rho)}, 0.4, setup);
    CHECK(std::abs(rep.lhs - rho / alpha) <= 3.0 * rep.se_lhs);
    CHECK(std::abs(rep.rhs - rho / alpha) <= 1e-12);
    CHECK(rep.agrees());
  }

  TEST_CASE("two-particle duality on the tiny torus against the exact dual") {
    const auto k = build_discrete_kernel(tiny_spec(), 6);
    std::vector<double> rho{0.5, 1.5, 2.0, 1.0, 0.2, 0.8};
    const InitialLaw law = NegBinLaw{rho};
    MonteCarloSetup setup{&k, 1.0, 20000, 7, 0};
    const auto xi = dual(k.lattice(), {0, 1});
    const auto rep = duality_check(xi, law, 0.2, setup);
    CHECK(rep.agrees());
    const ExactModel model(k, 1.0, 2);
    const auto f = model.tabulate([&](std::span<const std::uint32_t> occ) {
      double v = 1.0;
      for (std::size_t x = 0; x < occ.size(); ++x) v *= std::pow(rho[x], occ[x]);
      return v;
    });
    std::vector<std::uint32_t> occ(6, 0);
    occ[0] = occ[1] = 1;
    const double exact = model.expectation(f, model.index_of(occ), 0.2);
    CHECK(std::abs(rep.lhs - exact) <= 3.0 * rep.se_lhs);
    CHECK(std::abs(rep.rhs - exact) <= 3.0 * rep.se_rhs);
  }

  TEST_CASE("one-point moment bound and two-point correlations") {
    const auto k = build_discrete_kernel(tiny_spec(), 6);
    const InitialLaw law = NegBinLaw{std::vector<double>(6, 1.2)};
    MonteCarloSetup setup{&k, 1.0, 5000, 8, 0};
    const std::vector<std::size_t> one{2};
    const std::vector<double> times{0.1, 0.3};
    for (const auto& s : correlation_estimate(one, law, times, setup))
      CHECK(s.mean() <= moment_bound(one, 1.2, 1.0) + 3.0 * s.se());
    CHECK(c_star_12(0.0, 0.0) == 5.0);
    CHECK(c_star_12(2.0, 1.0) == 20.0);
  }

  TEST_CASE("two-point moment from a fixed start matches the exact model") {
    const auto k = build_discrete_kernel(tiny_spec(), 6);
    const std::vector<std::uint32_t> eta0{2, 1, 0, 0, 0, 0};
    const ExactModel model(k, 1.0, 3);
    const auto f = model.tabulate([](std::span<const std::uint32_t> e) { return double(e[0]) * e[1]; });
    const double exact = model.expectation(f, model.index_of(eta0), 0.2);
    MonteCarloSetup setup{&k, 1.0, 50000, 9, 0};
    const std::vector<std::size_t> pts{0, 1};
    const std::vector<double> times{0.2};
    const auto est = correlation_estimate(pts, FixedLaw{eta0}, times, setup)[0];
    CHECK(std::abs(est.mean() - exact) <= 3.0 * est.se());
  }

  TEST_CASE("moment bounds") {
    const std::vector<std::size_t> p1{0}, p2{0, 1}, p2d{0, 0}, p3{0, 0, 1}, p4{0, 1, 2, 3};
    CHECK(moment_bound(p1, 1.5, 1.0) == 1.5);
    CHECK(moment_bound(p2, 1.5, 1.0) == doctest::Approx(5 * 2.25));
    CHECK(moment_bound(p2d, 1.5, 2.0) == doctest::Approx(5 * 2.25 + 5 * 2.25 / 2.0 + 1.5));
    // rho^3 + rho^3 / alpha + rho^2.
    CHECK(moment_bound(p3, 1.5, 2.0) == doctest::Approx(std::pow(1.5, 3) * 1.5 + 2.25));
    CHECK(moment_bound(p4, 1.5, 2.0) == doctest::Approx(std::pow(1.5, 4)));
  }
}
