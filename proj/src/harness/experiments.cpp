#include "sipx/harness/experiments.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "sipx/dirichlet.hpp"
#include "sipx/duality.hpp"
#include "sipx/exact_model.hpp"
#include "sipx/fields.hpp"
#include "sipx/harness/errors.hpp"
#include "sipx/hydro.hpp"
#include "sipx/oupredict.hpp"
#include "sipx/parallel.hpp"
#include "sipx/stats.hpp"

namespace sipx {

namespace fs = std::filesystem;

namespace {

template <class T>
std::string cell(const T& v) {
  if constexpr (std::is_same_v<T, bool>)
    return v ? "1" : "0";
  else if constexpr (std::is_floating_point_v<T>)
    return fmt(v);
  else if constexpr (std::is_integral_v<T>)
    return std::to_string(v);
  else
    return std::string(v);
}

class Csv {
 public:
  Csv(const fs::path& file, const std::vector<std::string>& header) : path_(file), out_(file) {
    if (!out_) throw std::runtime_error("cannot write " + file.string());
    line(header);
  }
  template <class... T>
  void row(const T&... cells) {
    line({cell(cells)...});
  }
  void line(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }
  fs::path close() {
    out_.close();
    if (!out_) throw std::runtime_error("failed writing " + path_.string());
    return path_;
  }

 private:
  fs::path path_;
  std::ofstream out_;
};

std::string join_sites(const std::vector<std::size_t>& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? " " : "") + std::to_string(s[i]);
  return out;
}

std::string at_time(const std::string& what, double t) { return what + "@t=" + fmt(t); }

void prepare_dir(const fs::path& dir, bool force) {
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) throw ConfigError(dir.string() + " exists and is not a directory");
    if (!fs::is_empty(dir) && !force)
      throw ConfigError("output directory " + dir.string() + " is not empty; pass --force to overwrite");
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
}

// Replicas are produced in parallel blocks and folded strictly in replica order.
template <class Make, class Fold>
void for_replicas(std::uint64_t count, int threads, std::size_t block, Make&& make, Fold&& fold) {
  block = std::max<std::size_t>(1, block);
  for (std::uint64_t start = 0; start < count; start += block) {
    const auto m = static_cast<std::size_t>(std::min<std::uint64_t>(block, count - start));
    auto results = parallel_map(m, threads, [&](std::size_t i) { return make(start + i); });
    for (auto& r : results) fold(r);
  }
}

struct Session {
  const ExperimentConfig& config;
  fs::path dir;
  int threads;
  RunManifest manifest;
  std::vector<fs::path> files;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  Session(const ExperimentConfig& c, const RunOptions& o) : config(c), threads(resolve_threads(o.threads)) {
    validate(c);
    dir = o.out_dir.empty() ? fs::path(c.output_dir) : o.out_dir;
    prepare_dir(dir, o.force);
    manifest.command = o.command;
    manifest.config = c;
    manifest.config_hash = config_hash(c);
    manifest.threads = threads;
  }

  fs::path file(const std::string& name) const { return dir / name; }
  void keep(fs::path p) { files.push_back(std::move(p)); }
  void seeds(std::uint64_t master, const std::string& stream, std::uint64_t count) {
    manifest.seeds.push_back(seed_record(master, stream, count));
  }
  void metric(int n, const std::string& name, double v) { manifest.metrics.push_back({n, name, v}); }
  void verdict(const std::string& name, bool pass, const std::string& detail) {
    manifest.checks.push_back({name, pass, detail});
  }

  RunManifest finish() {
    for (const auto& f : files) manifest.outputs.push_back(describe_file(f));
    std::sort(manifest.outputs.begin(), manifest.outputs.end(),
              [](const OutputFile& a, const OutputFile& b) { return a.name < b.name; });
    manifest.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(manifest, dir);
    return manifest;
  }
};

std::size_t block_for(std::size_t per_replica_values) {
  return std::clamp<std::size_t>((std::size_t{1} << 24) / std::max<std::size_t>(1, per_replica_values), 1, 512);
}

std::vector<std::vector<double>> grids(const std::vector<TestFunction>& tfs, const Lattice& lat) {
  std::vector<std::vector<double>> out;
  for (const auto& f : tfs) out.push_back(f.on_grid(lat));
  return out;
}

void sweep_checks(Session& s, int dim) {
  if (s.config.n_ladder.size() < 2) return;
  const auto table = sweep_report(s.manifest.metrics, dim);
  Csv csv(s.file("sweep.csv"), {"metric", "rule", "n", "value", "ratio_to_next", "column_pass"});
  for (const auto& col : table.columns) {
    for (std::size_t i = 0; i < table.ns.size(); ++i)
      csv.row(col.name, col.rule, table.ns[i], col.values[i], i < col.ratios.size() ? fmt(col.ratios[i]) : "", col.pass);
    if (col.rule == "report") continue;
    std::ostringstream d;
    d << col.rule << ":";
    for (double v : col.values) d << ' ' << fmt(v);
    s.verdict("sweep:" + col.name, col.pass, d.str());
  }
  s.keep(csv.close());
}

// ---------------------------------------------------------------- Hydro

void run_hydro(Session& s) {
  const auto& c = s.config;
  const auto grid = snapshot_grid(c.sim);
  const int dim = c.kernel.dimension;
  const int coarse = c.n_ladder.front();
  Csv fields(s.file("hydro_fields.csv"), {"n", "t", "phi", "pi_mean", "pi_se", "pi_var", "pi_var_se", "pi_predicted"});
  Csv errors(s.file("hydro_error.csv"), {"n", "t", "l1_error"});
  double last_error = 0.0;
  for (int n : c.n_ladder) {
    const auto kernel = build_discrete_kernel(c.kernel, n);
    const auto psi = discrete_symbol(kernel, n);
    const Lattice& lat = kernel.lattice();
    const auto rho0 = make_field(lat, c.profile.on_lattice(lat));
    const auto phis = grids(c.test_functions, lat);
    const std::size_t sites = lat.sites(), S = grid.size(), F = phis.size();
    const std::string stream = "hydro/n=" + std::to_string(n);
    s.seeds(c.seed, stream, c.replicas);

    struct Rep {
      std::vector<std::uint32_t> occ;
      std::vector<double> pi;
      std::uint64_t events = 0;
    };
    std::vector<double> sum(S * sites, 0.0);
    std::vector<ReplicaStats> pi(S * F);
    std::uint64_t events = 0;
    for_replicas(
        c.replicas, s.threads, block_for(S * sites),
        [&](std::uint64_t r) {
          Rng rng(derive_seed(c.seed, r, stream));
          auto cfg = init_product_negbin(rho0.values, lat, c.sim.alpha, rng);
          Rep rep;
          rep.occ.reserve(S * sites);
          Simulator sim(cfg, kernel, c.sim.alpha, rng);
          for (double t : grid) {
            sim.advance_to(t);
            rep.occ.insert(rep.occ.end(), cfg.occupations().begin(), cfg.occupations().end());
            for (const auto& phi : phis) rep.pi.push_back(empirical(cfg, phi));
          }
          rep.events = sim.accepted();
          return rep;
        },
        [&](const Rep& rep) {
          for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += rep.occ[i];
          for (std::size_t i = 0; i < pi.size(); ++i) pi[i].add(rep.pi[i]);
          events += rep.events;
        });
    s.manifest.events[n] = events;

    Csv density(s.file("hydro_density_n" + std::to_string(n) + ".csv"),
                dim == 1 ? std::vector<std::string>{"t", "site", "x", "empirical", "predicted"}
                         : std::vector<std::string>{"t", "site", "x0", "x1", "empirical", "predicted"});
    const int factor = n / coarse;
    const std::size_t bins = dim == 1 ? coarse : static_cast<std::size_t>(coarse) * coarse;
    double error_sum = 0.0;
    for (std::size_t k = 0; k < S; ++k) {
      const double t = grid[k];
      const auto pred = mean_profile(rho0, c.sim.alpha, psi, t);
      std::vector<double> eb(bins, 0.0), pb(bins, 0.0);
      for (std::size_t x = 0; x < sites; ++x) {
        const double e = sum[k * sites + x] / static_cast<double>(c.replicas);
        const auto co = lat.coords(x);
        if (dim == 1)
          density.row(t, x, co[0] / static_cast<double>(n), e, pred.values[x]);
        else
          density.row(t, x, co[0] / static_cast<double>(n), co[1] / static_cast<double>(n), e, pred.values[x]);
        const std::size_t b = dim == 1 ? static_cast<std::size_t>(co[0] / factor)
                                       : static_cast<std::size_t>(co[0] / factor) + coarse * static_cast<std::size_t>(co[1] / factor);
        eb[b] += e;
        pb[b] += pred.values[x];
      }
      double num = 0.0, den = 0.0;
      for (std::size_t b = 0; b < bins; ++b) {
        num += std::abs(eb[b] - pb[b]);
        den += std::abs(pb[b]);
      }
      const double err = den > 0.0 ? num / den : num / static_cast<double>(sites);
      errors.row(n, t, err);
      error_sum += err;
      for (std::size_t f = 0; f < F; ++f) {
        const auto& st = pi[k * F + f];
        fields.row(n, t, c.test_functions[f].name, st.mean(), st.se(), st.variance(), st.variance_se(),
                   grid_inner(pred.values, phis[f]));
      }
    }
    s.keep(density.close());
    last_error = error_sum / static_cast<double>(S);
    s.metric(n, "l1_error", last_error);
    if (c.replicas >= 2)
      for (std::size_t f = 0; f < F; ++f) s.metric(n, "pi_var:" + c.test_functions[f].name, pi[(S - 1) * F + f].variance());
  }
  s.keep(fields.close());
  s.keep(errors.close());
  s.verdict("l1_error_at_largest_n", last_error <= 0.05,
            "time-averaged relative L1 error " + fmt(last_error) + " (gate 0.05)");
  if (c.replicas >= 2 && c.sim.horizon > 0.0) sweep_checks(s, dim);
}

// ---------------------------------------------------------------- Fluctuations

void run_fluctuations(Session& s) {
  const auto& c = s.config;
  const auto grid = snapshot_grid(c.sim);
  const int dim = c.kernel.dimension;
  const bool stationary = c.kind == ExperimentKind::StationaryFluct;
  Csv out(s.file("fluct.csv"),
          {"n", "t", "phi", "y_mean", "y_se", "y_var", "y_var_se", "y_var_pred", "y_var_drift", "y_var_drift_se",
           "ratio_m_form", "m_mean", "m_se", "m_var", "m_var_se", "qv_mean", "qv_se", "cdc_int_mean", "cdc_int_se",
           "qv_pred"});
  for (int n : c.n_ladder) {
    const auto kernel = build_discrete_kernel(c.kernel, n);
    const auto psi = discrete_symbol(kernel, n);
    const Lattice& lat = kernel.lattice();
    const auto rho0 = make_field(lat, c.profile.on_lattice(lat));
    const auto phis = grids(c.test_functions, lat);
    std::vector<std::vector<double>> lphis;
    for (const auto& phi : phis) lphis.push_back(apply_L_quadrature(make_field(lat, phi), kernel).values);
    std::vector<DensityField> means;
    for (double t : grid) means.push_back(mean_profile(rho0, c.sim.alpha, psi, t));
    const std::size_t S = grid.size(), F = phis.size();
    const std::string stream = "fluct/n=" + std::to_string(n);
    s.seeds(c.seed, stream, c.replicas);

    struct Rep {
      std::vector<double> y, m, qv, cdc_int;
      std::uint64_t events = 0;
    };
    std::vector<ReplicaStats> y(S * F), drift(S * F), m(S * F), qv(S * F), cdc(S * F);
    std::uint64_t events = 0;
    for_replicas(
        c.replicas, s.threads, 256,
        [&](std::uint64_t r) {
          Rng rng(derive_seed(c.seed, r, stream));
          auto cfg = init_product_negbin(rho0.values, lat, c.sim.alpha, rng);
          std::vector<QuadraticVariationObserver> obs;
          for (const auto& phi : phis) obs.emplace_back(phi, lat);
          Simulator sim(cfg, kernel, c.sim.alpha, rng);
          sim.set_observer([&](std::size_t a, std::size_t b, double t) {
            for (auto& o : obs) o(a, b, t);
          });
          Rep rep;
          rep.y.resize(S * F);
          rep.m.resize(S * F);
          rep.qv.resize(S * F);
          rep.cdc_int.resize(S * F);
          std::vector<std::vector<double>> pis(F), pils(F), gammas(F);
          for (std::size_t k = 0; k < S; ++k) {
            sim.advance_to(grid[k]);
            for (std::size_t f = 0; f < F; ++f) {
              rep.y[k * F + f] = fluctuation(cfg, phis[f], means[k], grid[k]);
              rep.qv[k * F + f] = obs[f].value();
              pis[f].push_back(empirical(cfg, phis[f]));
              pils[f].push_back(empirical(cfg, lphis[f]));
              gammas[f].push_back(carre_du_champ(cfg, phis[f], kernel, c.sim.alpha));
            }
          }
          for (std::size_t f = 0; f < F; ++f) {
            const auto mart = S >= 2 ? dynkin_residual(grid, pis[f], pils[f], c.sim.alpha, dim, n) : std::vector<double>(S, 0.0);
            const auto integ = trapezoid_cumulative(grid, gammas[f]);
            for (std::size_t k = 0; k < S; ++k) {
              rep.m[k * F + f] = mart[k];
              rep.cdc_int[k * F + f] = integ[k];
            }
          }
          rep.events = sim.accepted();
          return rep;
        },
        [&](const Rep& rep) {
          for (std::size_t i = 0; i < S * F; ++i) {
            y[i].add(rep.y[i]);
            const double y0 = rep.y[i % F];
            drift[i].add(rep.y[i] * rep.y[i] - y0 * y0);
            m[i].add(rep.m[i]);
            qv[i].add(rep.qv[i]);
            cdc[i].add(rep.cdc_int[i]);
          }
          events += rep.events;
        });
    s.manifest.events[n] = events;

    const auto path = c.sim.horizon > 0.0 ? density_path(rho0, c.sim.alpha, psi, c.sim.horizon, c.fluctuations.path_steps)
                                          : density_path(rho0, c.sim.alpha, psi, 0.0, 1);
    const auto v0 = negbin_variance_density(rho0.values, c.sim.alpha);
    for (std::size_t f = 0; f < F; ++f) {
      const auto& name = c.test_functions[f].name;
      for (std::size_t k = 0; k < S; ++k) {
        const double t = grid[k];
        const std::size_t i = k * F + f;
        const double pred = predicted_variance(phis[f], path, t, c.sim.alpha, v0, psi, kernel);
        const double qv_pred = qv_integral(phis[f], path, t, c.sim.alpha, kernel);
        const auto adm = admissible_variance(phis[f], means[k], c.sim.alpha);
        const double ratio = adm.m_form > 0.0 ? y[i].variance() / adm.m_form : 0.0;
        out.row(n, t, name, y[i].mean(), y[i].se(), y[i].variance(), y[i].variance_se(), pred, drift[i].mean(),
                drift[i].se(), ratio, m[i].mean(), m[i].se(), m[i].variance(), m[i].variance_se(), qv[i].mean(),
                qv[i].se(), cdc[i].mean(), cdc[i].se(), qv_pred);
        const std::string tag = name + "/n=" + std::to_string(n);
        if (c.replicas < 2) continue;
        const double dv = std::abs(y[i].variance() - pred);
        if (stationary) {
          s.verdict(at_time("variance_vs_predictor:" + tag, t), dv <= 3.0 * y[i].variance_se(),
                    "var " + fmt(y[i].variance()) + " pred " + fmt(pred) + " se " + fmt(y[i].variance_se()));
          if (k > 0)
            s.verdict(at_time("variance_time_invariance:" + tag, t), std::abs(drift[i].mean()) <= 3.0 * drift[i].se(),
                      "E[Y_t^2 - Y_0^2] " + fmt(drift[i].mean()) + " se " + fmt(drift[i].se()));
        } else if (k > 0) {
          s.verdict(at_time("qv_vs_prediction:" + tag, t), std::abs(cdc[i].mean() - qv_pred) <= 0.1 * qv_pred,
                    "int Gamma_n " + fmt(cdc[i].mean()) + " pred " + fmt(qv_pred));
          // Martingale checks at the horizon only: one statistical test per test function.
          if (k + 1 < S) continue;
          s.verdict(at_time("dynkin_mean_zero:" + tag, t), std::abs(m[i].mean()) <= 3.0 * m[i].se(),
                    "mean " + fmt(m[i].mean()) + " se " + fmt(m[i].se()));
          const double se = std::hypot(m[i].variance_se(), qv[i].se());
          s.verdict(at_time("dynkin_variance_vs_qv:" + tag, t), std::abs(m[i].variance() - qv[i].mean()) <= 3.0 * se,
                    "var M " + fmt(m[i].variance()) + " E QV " + fmt(qv[i].mean()) + " se " + fmt(se));
        }
      }
      if (c.replicas >= 2) {
        const std::size_t i = (S - 1) * F + f;
        const double pred = predicted_variance(phis[f], path, grid.back(), c.sim.alpha, v0, psi, kernel);
        s.metric(n, "var_rel_error:" + name, pred > 0.0 ? std::abs(y[i].variance() - pred) / pred : 0.0);
        const double m_form = admissible_variance(phis[f], means.back(), c.sim.alpha).m_form;
        s.metric(n, "m_form_ratio:" + name, m_form > 0.0 ? y[i].variance() / m_form : 0.0);
      }
    }
  }
  s.keep(out.close());
  if (c.replicas >= 2 && c.sim.horizon > 0.0) sweep_checks(s, dim);
}

// ---------------------------------------------------------------- Duality

InitialLaw law_for(const ExperimentConfig& c, const Lattice& lat) {
  if (c.duality.initial == "fixed") return FixedLaw{c.duality.fixed_eta};
  return NegBinLaw{c.profile.on_lattice(lat)};
}

void run_duality(Session& s) {
  const auto& c = s.config;
  Csv out(s.file("duality.csv"), {"n", "t", "xi", "k", "forward", "forward_se", "dual", "dual_se", "z", "exact", "pass"});
  for (int n : c.n_ladder) {
    const auto kernel = build_discrete_kernel(c.kernel, n);
    const Lattice& lat = kernel.lattice();
    const auto law = law_for(c, lat);
    std::vector<DualConfiguration> xis;
    for (const auto& pts : c.duality.dual_points) xis.push_back({lat, pts});

    // Exact forward expectations for a fixed start on a small enough state space.
    std::unique_ptr<ExactModel> exact;
    std::size_t start = 0;
    if (const auto* fixed = std::get_if<FixedLaw>(&law)) {
      std::uint32_t particles = 0;
      for (auto v : fixed->eta) particles += v;
      try {
        exact = std::make_unique<ExactModel>(kernel, c.sim.alpha, static_cast<int>(particles), 200000);
        start = exact->index_of(fixed->eta);
      } catch (const std::length_error&) {
        exact.reset();
      }
    }
    for (std::size_t ti = 0; ti < c.duality.times.size(); ++ti) {
      const double t = c.duality.times[ti];
      MonteCarloSetup setup{&kernel, c.sim.alpha, c.replicas, derive_seed(c.seed, ti, "duality/n=" + std::to_string(n)),
                            s.threads};
      s.seeds(setup.seed, "forward", c.replicas);
      s.seeds(setup.seed, "dual", c.replicas);
      const auto fwd = forward_duality(xis, law, t, setup);
      for (std::size_t i = 0; i < xis.size(); ++i) {
        const auto dual = dual_duality(xis[i], law, t, setup);
        DualityReport rep{fwd[i].mean(), fwd[i].se(), dual.mean(), dual.se(), c.replicas, false};
        rep.degenerate = rep.se_lhs == 0.0 && rep.se_rhs == 0.0;
        const double z = rep.combined_se() > 0.0 ? (rep.lhs - rep.rhs) / rep.combined_se() : 0.0;
        std::string exact_cell;
        bool pass = rep.agrees(3.0);
        std::string detail = "forward " + fmt(rep.lhs) + " dual " + fmt(rep.rhs) + " z " + fmt(z);
        if (exact) {
          const auto table = exact->tabulate([&](std::span<const std::uint32_t> e) { return duality_weight(xis[i], e, c.sim.alpha); });
          const double ev = exact->expectation(table, start, t);
          exact_cell = fmt(ev);
          const bool exact_ok = std::abs(rep.lhs - ev) <= 3.0 * rep.se_lhs + 1e-12 * std::max(1.0, std::abs(ev));
          pass = pass && exact_ok;
          detail += " exact " + fmt(ev);
        }
        out.row(n, t, join_sites(xis[i].positions), xis[i].k(), rep.lhs, rep.se_lhs, rep.rhs, rep.se_rhs, z, exact_cell, pass);
        s.verdict(at_time("duality:xi=" + join_sites(xis[i].positions) + "/n=" + std::to_string(n), t), pass, detail);
      }
    }
  }
  s.keep(out.close());
}

// ---------------------------------------------------------------- Mosco

void run_mosco(Session& s) {
  const auto& c = s.config;
  const LimitSymbol symbol(c.kernel);
  const auto rep = form_report(c.test_functions, c.kernel, c.n_ladder, symbol);
  Csv out(s.file("mosco.csv"), {"phi", "n", "discrete_form", "continuum_form", "relative_error", "generator_l1",
                                "generator_sup", "gamma_l2", "hilbert_norm", "l2_norm"});
  for (const auto& r : rep.rows) {
    out.row(r.phi, r.n, r.discrete, r.continuum, r.relative_error, r.residuals.l1, r.residuals.sup, r.residuals.gamma_l2,
            r.hilbert, r.l2);
    s.metric(r.n, "form_error:" + r.phi, r.relative_error);
    s.metric(r.n, "generator_l1:" + r.phi, r.residuals.l1);
    s.metric(r.n, "generator_sup:" + r.phi, r.residuals.sup);
    s.metric(r.n, "gamma_l2:" + r.phi, r.residuals.gamma_l2);
  }
  s.keep(out.close());
  const int n_max = c.n_ladder.back();
  for (const auto& r : rep.rows)
    if (r.n == n_max)
      s.verdict("form_error_at_largest_n:" + r.phi, r.relative_error <= 0.01, "relative error " + fmt(r.relative_error));

  // Form-symbol identity per Fourier mode on each lattice.
  Csv parseval(s.file("parseval.csv"), {"phi", "n", "discrete_form", "symbol_form", "abs_error"});
  for (int n : c.n_ladder) {
    const auto kernel = build_discrete_kernel(c.kernel, n);
    const auto psi = discrete_symbol(kernel, n);
    for (const auto& f : c.test_functions) {
      if (f.kind != TestKind::FourierMode) continue;
      const auto g = f.on_grid(kernel.lattice());
      const double lhs = discrete_form(g, kernel);
      const double rhs = -2.0 * psi.values[kernel.lattice().index(f.mode)] * grid_inner(g, g);
      parseval.row(f.name, n, lhs, rhs, std::abs(lhs - rhs));
      s.verdict("parseval:" + f.name + "/n=" + std::to_string(n), std::abs(lhs - rhs) <= 1e-10, "abs error " + fmt(std::abs(lhs - rhs)));
    }
  }
  s.keep(parseval.close());
  sweep_checks(s, c.kernel.dimension);
}

// ---------------------------------------------------------------- Moments

void run_moments(Session& s) {
  const auto& c = s.config;
  Csv out(s.file("moments.csv"), {"n", "t", "points", "k", "estimate", "se", "bound", "excess_in_se", "pass"});
  for (int n : c.n_ladder) {
    const auto kernel = build_discrete_kernel(c.kernel, n);
    const Lattice& lat = kernel.lattice();
    const InitialLaw law = NegBinLaw{c.profile.on_lattice(lat)};
    const double rho_sup = c.profile.sup(c.kernel.dimension);
    MonteCarloSetup setup{&kernel, c.sim.alpha, c.replicas, derive_seed(c.seed, 0, "moments/n=" + std::to_string(n)), s.threads};
    s.seeds(setup.seed, "forward", c.replicas);
    const auto est = correlation_estimates(c.moments.point_sets, law, c.moments.times, setup);
    for (std::size_t p = 0; p < c.moments.point_sets.size(); ++p) {
      const auto& pts = c.moments.point_sets[p];
      const double bound = moment_bound(pts, rho_sup, c.sim.alpha);
      for (std::size_t ti = 0; ti < c.moments.times.size(); ++ti) {
        const auto& st = est[p][ti];
        const double excess = st.se() > 0.0 ? (st.mean() - bound) / st.se() : (st.mean() > bound ? INFINITY : -INFINITY);
        const bool pass = st.mean() <= bound + 3.0 * st.se();
        out.row(n, c.moments.times[ti], join_sites(pts), pts.size(), st.mean(), st.se(), bound, excess, pass);
        s.verdict(at_time("moment_bound:points=" + join_sites(pts) + "/n=" + std::to_string(n), c.moments.times[ti]), pass,
                  "estimate " + fmt(st.mean()) + " se " + fmt(st.se()) + " bound " + fmt(bound));
      }
    }
  }
  s.keep(out.close());
}

}  // namespace

RunManifest run(const ExperimentConfig& config, const RunOptions& options) {
  Session s(config, options);
  switch (config.kind) {
    case ExperimentKind::Hydro: run_hydro(s); break;
    case ExperimentKind::StationaryFluct:
    case ExperimentKind::NonEqFluct: run_fluctuations(s); break;
    case ExperimentKind::DualityCheck: run_duality(s); break;
    case ExperimentKind::MoscoCheck: run_mosco(s); break;
    case ExperimentKind::MomentBounds: run_moments(s); break;
  }
  return s.finish();
}

RunManifest dump_snapshots(const ExperimentConfig& config, const RunOptions& options) {
  Session s(config, options);
  const auto& c = config;
  const auto grid = snapshot_grid(c.sim);
  for (int n : c.n_ladder) {
    const auto kernel = build_discrete_kernel(c.kernel, n);
    const Lattice& lat = kernel.lattice();
    const auto rho0 = c.profile.on_lattice(lat);
    const std::string stream = "simulate/n=" + std::to_string(n);
    s.seeds(c.seed, stream, c.replicas);
    std::vector<std::string> header{"replica", "d", "n", "M", "t"};
    for (std::size_t x = 0; x < lat.sites(); ++x) header.push_back("eta_" + std::to_string(x));
    Csv out(s.file("snapshots_n" + std::to_string(n) + ".csv"), header);
    struct Rep {
      std::vector<Snapshot> snaps;
      std::uint64_t events = 0;
    };
    std::uint64_t events = 0;
    std::uint64_t r_index = 0;
    for_replicas(
        c.replicas, s.threads, block_for(grid.size() * lat.sites()),
        [&](std::uint64_t r) {
          Rng rng(derive_seed(c.seed, r, stream));
          Rep rep;
          rep.snaps = run_snapshots(init_product_negbin(rho0, lat, c.sim.alpha, rng), kernel, c.sim, rng, &rep.events);
          return rep;
        },
        [&](const Rep& rep) {
          for (const auto& sn : rep.snaps) {
            std::vector<std::string> row{std::to_string(r_index), std::to_string(lat.dim()), std::to_string(n),
                                         std::to_string(lat.side()), fmt(sn.time)};
            for (auto v : sn.config.occupations()) row.push_back(std::to_string(v));
            out.line(row);
          }
          events += rep.events;
          ++r_index;
        });
    s.manifest.events[n] = events;
    s.keep(out.close());
  }
  return s.finish();
}

// ---------------------------------------------------------------- Sweeps

std::string sweep_rule(const std::string& metric) {
  const auto prefix = metric.substr(0, metric.find(':'));
  if (prefix == "l1_error" || prefix == "form_error" || prefix == "generator_l1" || prefix == "generator_sup" ||
      prefix == "gamma_l2")
    return "decreasing";
  if (prefix == "pi_var") return "scaling";
  return "report";
}

bool ConvergenceTable::pass() const {
  for (const auto& c : columns)
    if (!c.pass) return false;
  return true;
}

std::string ConvergenceTable::to_csv() const {
  std::ostringstream s;
  s << "n";
  for (const auto& c : columns) s << ',' << c.name;
  s << '\n';
  for (std::size_t i = 0; i < ns.size(); ++i) {
    s << ns[i];
    for (const auto& c : columns) s << ',' << fmt(c.values[i]);
    s << '\n';
  }
  return s.str();
}

ConvergenceTable sweep_report(const std::vector<Metric>& metrics, int dim) {
  std::set<int> ns;
  std::map<std::string, std::map<int, double>> cols;
  for (const auto& m : metrics) {
    ns.insert(m.n);
    cols[m.name][m.n] = m.value;
  }
  if (ns.size() < 2) throw ConfigError("sweep needs at least two ladder points");
  ConvergenceTable t;
  t.ns.assign(ns.begin(), ns.end());
  for (const auto& [name, byn] : cols) {
    SweepColumn col;
    col.name = name;
    col.rule = sweep_rule(name);
    for (int n : t.ns) {
      auto it = byn.find(n);
      if (it == byn.end()) throw ConfigError("metric " + name + " is missing ladder point n = " + std::to_string(n));
      col.values.push_back(it->second);
    }
    for (std::size_t i = 0; i + 1 < col.values.size(); ++i) {
      const double a = col.values[i], b = col.values[i + 1];
      col.ratios.push_back(b != 0.0 ? a / b : (a == 0.0 ? 1.0 : INFINITY));
      if (col.rule == "decreasing") {
        const bool converged = std::abs(a) <= 1e-15 && std::abs(b) <= 1e-15;
        if (!(b < a || converged)) col.pass = false;
      } else if (col.rule == "scaling") {
        const double target = std::pow(static_cast<double>(t.ns[i + 1]) / t.ns[i], dim);
        const double r = col.ratios.back();
        if (!(r >= 0.7 * target && r <= 1.4 * target)) col.pass = false;
      }
    }
    t.columns.push_back(std::move(col));
  }
  return t;
}

ConvergenceTable sweep_report(const std::vector<RunManifest>& manifests) {
  if (manifests.empty()) throw ConfigError("sweep needs at least one manifest");
  std::vector<Metric> all;
  for (const auto& m : manifests) all.insert(all.end(), m.metrics.begin(), m.metrics.end());
  return sweep_report(all, manifests.front().config.kernel.dimension);
}

}  // namespace sipx
