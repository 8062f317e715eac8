#include "sipx/harness/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sipx/dirichlet.hpp"
#include "sipx/duality.hpp"
#include "sipx/exact_model.hpp"
#include "sipx/harness/experiments.hpp"
#include "sipx/hydro.hpp"

namespace sipx {

namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

InitialProfile bump_profile() {
  InitialProfile p;
  p.kind = ProfileKind::GaussianBump;
  p.level = 0.5;
  p.amplitude = 1.5;
  p.center = {0.5};
  p.width = 0.1;
  return p;
}

TestFunction cosine(int j) {
  TestFunction f;
  f.name = "cos" + std::to_string(j);
  f.kind = TestKind::FourierMode;
  f.mode = {j, 0};
  return f;
}

ExperimentConfig base_config(ExperimentKind kind, const AcceptanceOptions& o, const std::string& name) {
  ExperimentConfig c;
  c.kind = kind;
  c.seed = derive_seed(o.seed, 0, "acceptance/" + name);
  c.sim.seed = c.seed;
  c.output_dir = (o.scratch / name).string();
  return c;
}

std::vector<double> uniform_times(double step, double horizon) {
  std::vector<double> t;
  const int k = static_cast<int>(std::llround(horizon / step));
  for (int i = 0; i <= k; ++i) t.push_back(step * i);
  return t;
}

RunManifest run_in_scratch(const ExperimentConfig& c, const AcceptanceOptions& o, const std::string& command) {
  RunOptions ro;
  ro.command = command;
  ro.threads = o.threads;
  ro.force = true;
  return run(c, ro);
}

void report_failed_checks(const RunManifest& m, Outcome& out) {
  int failed = 0;
  for (const auto& v : m.checks)
    if (!v.pass) {
      if (failed++ < 5) out.detail << "[failed: " << v.name << " " << v.detail << "] ";
      out.pass = false;
    }
  if (failed > 5) out.detail << "(" << failed << " failed checks) ";
}

double metric(const RunManifest& m, int n, const std::string& name) {
  for (const auto& x : m.metrics)
    if (x.n == n && x.name == name) return x.value;
  throw std::runtime_error("metric " + name + " missing at n = " + std::to_string(n));
}

// 1: conservation over a million events and bitwise reproducibility of harness runs.
void conservation_and_determinism(const AcceptanceOptions& o, Outcome& out) {
  KernelSpec spec;
  const auto kernel = build_discrete_kernel(spec, 64);
  Rng rng(derive_seed(o.seed, 1, "acceptance/conservation"));
  InitialProfile flat;
  flat.level = 1.0;
  auto cfg = init_product_negbin(flat, 1.0, 1, 64, rng);
  const std::size_t n0 = cfg.particles();
  Simulator sim(cfg, kernel, 1.0, rng);
  bool conserved = n0 > 0;
  while (sim.accepted() < 1'000'000) {
    sim.step();
    if (sim.accepted() % 100'000 == 0) {
      std::uint64_t total = 0;
      for (auto v : cfg.occupations()) total += v;
      conserved = conserved && total == n0 && cfg.particles() == n0;
    }
  }
  conserved = conserved && cfg.consistent();
  out.require(conserved, "particle count changed");
  out.detail << "N=" << n0 << " conserved over " << sim.accepted() << " events; ";

  auto c = base_config(ExperimentKind::Hydro, o, "c1_determinism");
  c.kernel = spec;
  c.profile = bump_profile();
  c.test_functions = {cosine(1)};
  c.replicas = 16;
  c.n_ladder = {16, 32};
  c.sim.alpha = 1.0;
  c.sim.horizon = 0.05;
  c.sim.snapshot_times = uniform_times(0.01, 0.05);
  RunOptions a;
  a.force = true;
  a.threads = 1;
  a.out_dir = o.scratch / "c1_run_a";
  RunOptions b = a;
  b.threads = 4;
  b.out_dir = o.scratch / "c1_run_b";
  const auto ma = run(c, a);
  const auto mb = run(c, b);
  // Replay from the written manifest.
  RunOptions r = a;
  r.out_dir = o.scratch / "c1_run_replay";
  const auto mr = run(load_config(a.out_dir / "manifest.json"), r);
  bool same = ma.reproducibility_hash() == mb.reproducibility_hash() && ma.reproducibility_hash() == mr.reproducibility_hash();
  for (const auto& f : ma.outputs) {
    std::ifstream x(a.out_dir / f.name, std::ios::binary), y(b.out_dir / f.name, std::ios::binary);
    std::stringstream sx, sy;
    sx << x.rdbuf();
    sy << y.rdbuf();
    same = same && sx.str() == sy.str();
  }
  out.require(same, "reruns differ");
  out.detail << "reruns (1 and 4 threads, manifest replay) byte-identical, hash " << ma.reproducibility_hash();
}

// 2: forward Monte Carlo against the exact generator on a six-site torus.
void exact_oracle(const AcceptanceOptions& o, Outcome& out) {
  KernelSpec spec;
  const auto kernel = build_discrete_kernel(spec, 6);
  const Lattice& lat = kernel.lattice();
  const double alpha = 1.0, t = 0.2;
  const std::vector<std::uint32_t> eta0{2, 1, 0, 0, 0, 0};
  const ExactModel model(kernel, alpha, 3);
  const std::size_t start = model.index_of(eta0);
  const std::vector<DualConfiguration> xis{{lat, {0}}, {lat, {0, 0}}, {lat, {0, 1}}};
  MonteCarloSetup setup{&kernel, alpha, 100000, derive_seed(o.seed, 2, "acceptance/exact"), o.threads};
  const auto fwd = forward_duality(xis, FixedLaw{eta0}, t, setup);
  for (std::size_t i = 0; i < xis.size(); ++i) {
    const auto f = model.tabulate([&](std::span<const std::uint32_t> e) { return duality_weight(xis[i], e, alpha); });
    const double exact = model.expectation(f, start, t, 1e-14);
    const double dense = model.expectation_dense(f, start, t);
    const double z = (fwd[i].mean() - exact) / fwd[i].se();
    out.require(std::abs(z) <= 3.0, "Monte Carlo vs uniformization for observable " + std::to_string(i));
    out.require(std::abs(exact - dense) <= 1e-8, "uniformization vs dense exponential");
    out.detail << "D" << i << ": mc " << fmt(fwd[i].mean()) << " exact " << fmt(exact) << " z " << fmt(std::round(z * 100) / 100)
               << " |unif-dense| " << fmt(std::abs(exact - dense)) << "; ";
  }
}

// 3: forward versus dual duality expectations under a negative-binomial start.
void self_duality(const AcceptanceOptions& o, Outcome& out) {
  KernelSpec spec;
  const auto kernel = build_discrete_kernel(spec, 64);
  const Lattice& lat = kernel.lattice();
  const double alpha = 1.0;
  const InitialLaw law = NegBinLaw{bump_profile().on_lattice(lat)};
  const std::vector<DualConfiguration> xis{{lat, {32}}, {lat, {32, 32}}, {lat, {30, 34}}};
  int ti = 0;
  for (double t : {0.1, 0.5}) {
    MonteCarloSetup setup{&kernel, alpha, 10000, derive_seed(o.seed, ti++, "acceptance/self-duality"), o.threads};
    const auto fwd = forward_duality(xis, law, t, setup);
    for (std::size_t i = 0; i < xis.size(); ++i) {
      const auto dual = dual_duality(xis[i], law, t, setup);
      const double se = std::hypot(fwd[i].se(), dual.se());
      const double z = (fwd[i].mean() - dual.mean()) / se;
      out.require(std::abs(z) <= 3.0, "xi " + std::to_string(i) + " at t=" + fmt(t));
      out.detail << "t=" << fmt(t) << " k=" << xis[i].k() << ": z " << fmt(std::round(z * 100) / 100) << "; ";
    }
  }
}

// 4: replica-averaged density against the semi-discrete solution along n = 32, 64, 128.
void hydro_convergence(const AcceptanceOptions& o, Outcome& out) {
  auto c = base_config(ExperimentKind::Hydro, o, "c4_hydro");
  c.profile = bump_profile();
  c.test_functions = {cosine(1)};
  c.replicas = 1000;
  c.n_ladder = {32, 64, 128};
  c.sim.alpha = 1.0;
  c.sim.horizon = 0.1;
  c.sim.snapshot_times = uniform_times(0.01, 0.1);
  const auto m = run_in_scratch(c, o, "hydro");
  report_failed_checks(m, out);
  out.require(m.checks.size() >= 3, "expected l1 gate and two sweep verdicts");
  for (int n : c.n_ladder) out.detail << "L1(n=" << n << ") " << fmt(metric(m, n, "l1_error")) << "; ";
  for (std::size_t i = 0; i + 1 < c.n_ladder.size(); ++i)
    out.detail << "var ratio " << c.n_ladder[i] << "/" << c.n_ladder[i + 1] << " "
               << fmt(metric(m, c.n_ladder[i], "pi_var:cos1") / metric(m, c.n_ladder[i + 1], "pi_var:cos1")) << "; ";
}

// 5: exactness properties of the spectral solver.
void hydro_exactness(const AcceptanceOptions& o, Outcome& out) {
  double mass = 0.0, maxp = 0.0, semi = 0.0, quad = 0.0;
  struct Case {
    int dim, n;
    double beta;
  };
  for (const Case cs : {Case{1, 128, 0.5}, Case{1, 128, 1.0}, Case{1, 128, 1.5}, Case{2, 32, 1.0}}) {
    KernelSpec spec;
    spec.dimension = cs.dim;
    spec.beta = cs.beta;
    const auto kernel = build_discrete_kernel(spec, cs.n);
    const auto psi = discrete_symbol(kernel, cs.n);
    const Lattice& lat = kernel.lattice();
    auto bump = bump_profile();
    bump.center.assign(cs.dim, 0.5);
    Rng rng(derive_seed(o.seed, static_cast<std::uint64_t>(cs.n * 10 + cs.dim), "acceptance/hydro-exactness"));
    std::vector<double> rough(lat.sites());
    for (auto& v : rough) v = 2.0 * uniform01(rng);
    for (const auto& rho : {make_field(lat, bump.on_lattice(lat)), make_field(lat, rough)}) {
      for (double t : {0.001, 0.05, 0.5}) {
        const auto s = solve(rho, 1.0, psi, t);
        mass = std::max(mass, std::abs(s.mean() - rho.mean()) / rho.mean());
        maxp = std::max({maxp, rho.min() - s.min(), s.max() - rho.max()});
        const auto two = solve(solve(rho, 1.0, psi, t / 3.0), 1.0, psi, 2.0 * t / 3.0);
        for (std::size_t x = 0; x < s.values.size(); ++x) semi = std::max(semi, std::abs(two.values[x] - s.values[x]));
      }
      const auto a = apply_L(rho, psi);
      const auto b = apply_L_quadrature(rho, kernel);
      for (std::size_t x = 0; x < a.values.size(); ++x) quad = std::max(quad, std::abs(a.values[x] - b.values[x]));
    }
  }
  out.require(mass <= 1e-12, "mass conservation");
  out.require(maxp <= 1e-10, "maximum principle");
  out.require(semi <= 1e-10, "semigroup composition");
  out.require(quad <= 1e-10, "spectral vs quadrature");
  out.detail << "mass " << fmt(mass) << " max-principle overshoot " << fmt(std::max(0.0, maxp)) << " semigroup " << fmt(semi)
             << " spectral-vs-quadrature " << fmt(quad);
}

// 6: stationary fluctuation variance at rho = alpha = 1.
void stationary_fluctuations(const AcceptanceOptions& o, Outcome& out) {
  auto c = base_config(ExperimentKind::StationaryFluct, o, "c6_stationary");
  c.profile.kind = ProfileKind::Constant;
  c.profile.level = 1.0;
  c.test_functions = {cosine(1)};
  c.replicas = 2000;
  c.n_ladder = {128};
  c.sim.alpha = 1.0;
  c.sim.horizon = 0.5;
  c.sim.snapshot_times = {0.0, 0.25, 0.5};
  c.fluctuations.path_steps = 1000;
  const auto m = run_in_scratch(c, o, "fluctuations");
  report_failed_checks(m, out);
  out.require(m.checks.size() == 5, "expected three predictor and two invariance verdicts");
  for (const auto& v : m.checks) out.detail << v.name << ": " << v.detail << "; ";
  out.detail << "ratio to m-form " << fmt(metric(m, 128, "m_form_ratio:cos1")) << " (expected 1/alpha = 1)";
}

// 7: realized quadratic variation and Dynkin martingale out of equilibrium.
void quadratic_variation(const AcceptanceOptions& o, Outcome& out) {
  auto c = base_config(ExperimentKind::NonEqFluct, o, "c7_nonequilibrium");
  c.profile = bump_profile();
  c.test_functions = {cosine(1)};
  c.replicas = 1000;
  c.n_ladder = {128};
  c.sim.alpha = 1.0;
  c.sim.horizon = 0.1;
  c.sim.snapshot_times = uniform_times(0.005, 0.1);
  c.fluctuations.path_steps = 1000;
  const auto m = run_in_scratch(c, o, "fluctuations");
  report_failed_checks(m, out);
  out.require(m.checks.size() == 22, "expected twenty QV verdicts and two martingale verdicts");
  for (const auto& v : m.checks)
    if (v.name.find("dynkin") != std::string::npos || v.name.find("t=0.1") != std::string::npos)
      out.detail << v.name << ": " << v.detail << "; ";
}

// 8: Dirichlet forms, generator and carre du champ residuals, form-symbol identity.
void mosco(const AcceptanceOptions& o, Outcome& out) {
  auto c = base_config(ExperimentKind::MoscoCheck, o, "c8_mosco");
  TestFunction g;
  g.name = "gauss";
  g.kind = TestKind::GaussianBump;
  g.center = {0.3};
  g.width = 0.1;
  c.test_functions = {cosine(1), g};
  c.n_ladder = {64, 128, 256};
  const auto m = run_in_scratch(c, o, "mosco-check");
  report_failed_checks(m, out);
  for (const auto& f : c.test_functions)
    out.detail << f.name << " form error " << fmt(metric(m, 64, "form_error:" + f.name)) << " > "
               << fmt(metric(m, 128, "form_error:" + f.name)) << " > " << fmt(metric(m, 256, "form_error:" + f.name)) << "; ";
  double worst = 0.0;
  for (int n : c.n_ladder) {
    const auto kernel = build_discrete_kernel(c.kernel, n);
    const auto psi = discrete_symbol(kernel, n);
    for (int j = 1; j <= n / 2; j *= 2)
      for (bool sine : {false, true}) {
        auto f = cosine(j);
        f.sine = sine;
        const auto grid = f.on_grid(kernel.lattice());
        const double lhs = discrete_form(grid, kernel);
        const double rhs = -2.0 * psi.values[kernel.lattice().index(f.mode)] * grid_inner(grid, grid);
        worst = std::max(worst, std::abs(lhs - rhs));
      }
  }
  out.require(worst <= 1e-10, "per-mode form-symbol identity");
  out.detail << "form-symbol identity worst " << fmt(worst);
}

// 9: one- to four-point moments against their growth bounds.
void moment_bounds(const AcceptanceOptions& o, Outcome& out) {
  auto c = base_config(ExperimentKind::MomentBounds, o, "c9_moments");
  c.profile = bump_profile();
  c.replicas = 10000;
  c.n_ladder = {32};
  c.sim.alpha = 1.0;
  c.sim.horizon = 0.5;
  c.moments.times = {0.0, 0.05, 0.1, 0.25, 0.5};
  for (std::size_t x : {16u, 8u}) {
    const std::vector<std::vector<std::size_t>> sets{
        {x},       {x, x},          {x, x + 1},       {x, x, x},
        {x, x + 1, x + 2}, {x, x, x, x}, {x, x, x + 1, x + 1}, {x, x + 1, x + 2, x + 3}};
    c.moments.point_sets.insert(c.moments.point_sets.end(), sets.begin(), sets.end());
  }
  const auto m = run_in_scratch(c, o, "moment-bounds");
  report_failed_checks(m, out);
  out.require(m.checks.size() == 80, "expected 16 point sets at 5 times");
  std::ifstream in(fs::path(c.output_dir) / "moments.csv");
  std::string line;
  std::getline(in, line);
  double worst = -INFINITY;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cellv;
    for (int i = 0; i < 8 && std::getline(ss, cellv, ','); ++i)
      if (i == 7) worst = std::max(worst, std::stod(cellv));
  }
  out.detail << "80 (points, t) cells, largest (estimate - bound)/se " << fmt(std::round(worst * 100) / 100);
}

struct Entry {
  int id;
  const char* title;
  double budget;
  void (*fn)(const AcceptanceOptions&, Outcome&);
};

const std::vector<Entry>& registry() {
  static const std::vector<Entry> r{
      {1, "conservation and determinism", 60.0, conservation_and_determinism},
      {2, "exact-oracle agreement", 300.0, exact_oracle},
      {3, "self-duality identity", 600.0, self_duality},
      {4, "hydrodynamic convergence", 900.0, hydro_convergence},
      {5, "hydro solver exactness", 0.0, hydro_exactness},
      {6, "stationary fluctuation variance", 900.0, stationary_fluctuations},
      {7, "quadratic-variation limit", 0.0, quadratic_variation},
      {8, "Dirichlet and Mosco checks", 120.0, mosco},
      {9, "moment bounds", 0.0, moment_bounds},
  };
  return r;
}

}  // namespace

std::vector<int> all_criteria() {
  std::vector<int> ids;
  for (const auto& e : registry()) ids.push_back(e.id);
  return ids;
}

std::string criterion_title(int id) {
  for (const auto& e : registry())
    if (e.id == id) return e.title;
  throw std::out_of_range("no acceptance criterion " + std::to_string(id));
}

CriterionResult run_criterion(int id, const AcceptanceOptions& options) {
  const Entry* entry = nullptr;
  for (const auto& e : registry())
    if (e.id == id) entry = &e;
  if (!entry) throw std::out_of_range("no acceptance criterion " + std::to_string(id));
  CriterionResult r;
  r.id = id;
  r.title = entry->title;
  r.budget_seconds = entry->budget;
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    fs::create_directories(options.scratch);
    entry->fn(options, out);
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail << "[error: " << e.what() << "]";
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (r.budget_seconds > 0.0 && r.seconds >= r.budget_seconds) {
    out.pass = false;
    out.detail << " [failed: runtime budget " << r.budget_seconds << " s]";
  }
  r.pass = out.pass;
  r.detail = out.detail.str();
  return r;
}

std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids, const AcceptanceOptions& options,
                                            const std::function<void(const CriterionResult&)>& on_result) {
  std::vector<CriterionResult> out;
  for (int id : ids) {
    out.push_back(run_criterion(id, options));
    if (on_result) on_result(out.back());
  }
  return out;
}

std::string format_result(const CriterionResult& r) {
  std::ostringstream s;
  s << "criterion " << r.id << " " << r.title << ": " << (r.pass ? "PASS" : "FAIL") << " (" << std::fixed;
  s.precision(1);
  s << r.seconds << " s) " << r.detail;
  return s.str();
}

}  // namespace sipx
