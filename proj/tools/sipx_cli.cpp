// sipx: command-line driver for the simulation lab.
#include <CLI11.hpp>

#include <iostream>
#include <sstream>

#include "sipx/harness/acceptance.hpp"
#include "sipx/harness/errors.hpp"
#include "sipx/harness/experiments.hpp"
#include "sipx/parallel.hpp"

using namespace sipx;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::uint64_t replicas = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  bool check = false;
  bool force = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "experiment config (JSON) or a run manifest to replay");
  app->add_option("--out", c.out, "output directory (overrides output_dir)");
  app->add_option("--replicas", c.replicas, "replica count override")->check(CLI::PositiveNumber);
  app->add_option_function<std::uint64_t>("--seed", [&c](std::uint64_t s) {
    c.seed = s;
    c.seed_set = true;
  }, "master seed override");
  app->add_option("--threads", c.threads, "worker threads (0: SIPX_THREADS or hardware)")->check(CLI::NonNegativeNumber);
  app->add_flag("--check", c.check, "exit with code 4 when any verdict fails");
  app->add_flag("--force", c.force, "overwrite a non-empty output directory");
}

ExperimentConfig load(const Common& c, const std::vector<ExperimentKind>& allowed, const std::string& command) {
  if (c.config.empty()) throw ConfigError(command + " needs --config PATH (see configs/)");
  auto cfg = load_config(c.config);
  if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), cfg.kind) == allowed.end())
    throw ConfigError("config kind " + to_string(cfg.kind) + " does not match subcommand " + command);
  if (c.replicas > 0) cfg.replicas = c.replicas;
  if (c.seed_set) {
    cfg.seed = c.seed;
    cfg.sim.seed = c.seed;
  }
  if (!c.out.empty()) cfg.output_dir = c.out;
  validate(cfg);
  return cfg;
}

RunOptions options(const Common& c, const std::string& command) {
  RunOptions o;
  o.command = command;
  o.threads = c.threads;
  o.force = c.force;
  return o;
}

int summarize(const RunManifest& m, const Common& c) {
  int failed = 0;
  for (const auto& v : m.checks)
    if (!v.pass) {
      ++failed;
      std::cout << "FAIL " << v.name << ": " << v.detail << "\n";
    }
  std::cout << "wrote " << m.outputs.size() << " files and manifest.json to " << m.config.output_dir << "\n"
            << "reproducibility hash " << m.reproducibility_hash() << "\n"
            << "verdicts: " << m.checks.size() - failed << " passed, " << failed << " failed\n";
  return c.check && failed > 0 ? kExitAcceptance : kExitOk;
}

std::vector<int> parse_ids(const std::string& list) {
  if (list.empty()) return all_criteria();
  std::vector<int> ids;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      ids.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw ConfigError("bad criterion id '" + item + "'");
    }
    try {
      criterion_title(ids.back());
    } catch (const std::out_of_range& e) {
      throw ConfigError(e.what());
    }
  }
  return ids;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sipx: inclusion-process simulation lab with long-range jumps"};
  app.require_subcommand(1);
  Common common;

  struct Runner {
    const char* name;
    const char* help;
    std::vector<ExperimentKind> kinds;
  };
  const std::vector<Runner> runners{
      {"simulate", "simulate replicas and dump occupancy snapshots", {}},
      {"hydro", "hydrodynamic comparison over the n-ladder", {ExperimentKind::Hydro}},
      {"duality-check", "forward vs dual duality expectations", {ExperimentKind::DualityCheck}},
      {"fluctuations", "fluctuation variances, quadratic variation, Dynkin residuals",
       {ExperimentKind::StationaryFluct, ExperimentKind::NonEqFluct}},
      {"mosco-check", "Dirichlet forms and generator residuals", {ExperimentKind::MoscoCheck}},
      {"moment-bounds", "one- to four-point moments against their bounds", {ExperimentKind::MomentBounds}},
  };
  std::vector<std::pair<CLI::App*, const Runner*>> subs;
  for (const auto& r : runners) {
    auto* sub = app.add_subcommand(r.name, r.help);
    add_common(sub, common);
    subs.emplace_back(sub, &r);
  }

  auto* sweep = app.add_subcommand("sweep", "convergence table over the n-ladder (runs the config or reads manifests)");
  add_common(sweep, common);
  std::vector<std::string> manifests;
  sweep->add_option("--manifest", manifests, "existing manifest(s) to tabulate instead of running");

  auto* check = app.add_subcommand("check", "run the acceptance suite");
  add_common(check, common);
  std::string only;
  check->add_option("--only", only, "comma-separated criterion ids");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    for (const auto& [sub, r] : subs) {
      if (!sub->parsed()) continue;
      const auto cfg = load(common, r->kinds, r->name);
      const auto m = std::string(r->name) == "simulate" ? dump_snapshots(cfg, options(common, r->name))
                                                        : run(cfg, options(common, r->name));
      return summarize(m, common);
    }
    if (sweep->parsed()) {
      std::vector<RunManifest> ms;
      if (!manifests.empty()) {
        for (const auto& p : manifests) ms.push_back(read_manifest(p));
      } else {
        const auto cfg = load(common, {}, "sweep");
        if (cfg.n_ladder.size() < 2) throw ConfigError("sweep needs at least two ladder points");
        ms.push_back(run(cfg, options(common, "sweep")));
      }
      const auto table = sweep_report(ms);
      std::cout << table.to_csv();
      for (const auto& col : table.columns)
        if (col.rule != "report") std::cout << col.name << " (" << col.rule << "): " << (col.pass ? "PASS" : "FAIL") << "\n";
      return common.check && !table.pass() ? kExitAcceptance : kExitOk;
    }
    if (check->parsed()) {
      AcceptanceOptions o;
      o.threads = common.threads;
      if (common.seed_set) o.seed = common.seed;
      if (!common.out.empty()) o.scratch = common.out;
      const auto ids = parse_ids(only);
      std::cout << "acceptance suite: " << ids.size() << " criteria, " << resolve_threads(o.threads) << " threads\n";
      const auto results = run_acceptance(ids, o, [](const CriterionResult& r) { std::cout << format_result(r) << std::endl; });
      int failed = 0;
      for (const auto& r : results) failed += r.pass ? 0 : 1;
      std::cout << results.size() - failed << "/" << results.size() << " criteria passed\n";
      return failed ? kExitAcceptance : kExitOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
