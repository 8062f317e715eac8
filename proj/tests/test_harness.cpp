#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "sipx/harness/config.hpp"
#include "sipx/harness/errors.hpp"
#include "sipx/harness/experiments.hpp"
#include "sipx/parallel.hpp"
#include "sipx/random.hpp"
#include "sipx/stats.hpp"

using namespace sipx;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("sipx_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  return p;
}

ExperimentConfig rich_config() {
  ExperimentConfig c;
  c.kind = ExperimentKind::NonEqFluct;
  c.seed = 123456789012345ULL;
  c.sim.seed = c.seed;
  c.replicas = 12;
  c.n_ladder = {16, 32};
  c.output_dir = "runs/x";
  c.kernel.beta = 0.7;
  c.kernel.image_folds = 2;
  c.kernel.window = 5;
  c.sim.beta = 0.7;
  c.sim.alpha = 2.5;
  c.sim.horizon = 0.1;
  c.sim.snapshot_times = {0.0, 0.05, 0.1};
  c.profile.kind = ProfileKind::GaussianBump;
  c.profile.level = 0.25;
  c.profile.amplitude = 1.0 / 3.0;
  c.profile.center = {0.4};
  c.profile.width = 0.07;
  TestFunction a;
  a.name = "s2";
  a.mode = {2, 0};
  a.sine = true;
  a.amplitude = 0.1;
  TestFunction b;
  b.name = "t";
  b.kind = TestKind::Tabulated;
  b.table = {0.0, 1.0, 0.5, 2.0};
  c.test_functions = {a, b};
  c.fluctuations.path_steps = 20;
  c.duality.dual_points = {{1, 2}};
  c.duality.times = {0.1};
  c.moments.point_sets = {{0}, {3, 3, 4}};
  c.moments.times = {0.0, 0.2};
  return c;
}

ExperimentConfig small_hydro(const fs::path& out) {
  ExperimentConfig c;
  c.kind = ExperimentKind::Hydro;
  c.seed = 99;
  c.sim.seed = 99;
  c.replicas = 6;
  c.n_ladder = {16, 32};
  c.output_dir = out.string();
  c.sim.horizon = 0.05;
  c.sim.snapshot_times = {0.0, 0.025, 0.05};
  c.profile.kind = ProfileKind::GaussianBump;
  c.profile.level = 0.5;
  c.profile.amplitude = 1.5;
  c.profile.center = {0.5};
  TestFunction f;
  f.name = "cos1";
  c.test_functions = {f};
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("config round-trips through its serialization") {
    const auto c = rich_config();
    const auto text = serialize(c);
    const auto back = parse_config(text);
    CHECK(back == c);
    CHECK(serialize(back) == text);
  }

  TEST_CASE("defaults fill omitted sections") {
    const auto c = parse_config(R"({"schema_version": 1, "kind": "MoscoCheck", "n_ladder": [16, 32],
      "test_functions": [{"name": "c", "kind": "FourierMode", "mode": [1, 0]}]})");
    CHECK(c.kernel == KernelSpec{});
    CHECK(c.replicas == 1);
  }

  TEST_CASE("schema violations are config errors") {
    const std::string ok = R"("schema_version": 1, "kind": "Hydro", "n_ladder": [16])";
    CHECK_NOTHROW(parse_config("{" + ok + "}"));
    CHECK_THROWS_AS(parse_config("{" + ok + R"(, "replica": 4})"), ConfigError);
    CHECK_THROWS_AS(parse_config("{" + ok + R"(, "kernel": {"beta": 1.0, "bta": 2}})"), ConfigError);
    CHECK_THROWS_AS(parse_config("{" + ok + R"(, "replicas": "10"})"), ConfigError);
    CHECK_THROWS_AS(parse_config("{" + ok + R"(, "replicas": 0})"), ConfigError);
    CHECK_THROWS_AS(parse_config("{" + ok + R"(, "replicas": 2.5})"), ConfigError);
    CHECK_THROWS_AS(parse_config("{" + ok + R"(, "kernel": {"beta": 2.0}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"schema_version": 2, "kind": "Hydro"})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"kind": "Hydro"})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"schema_version": 1, "kind": "Hydro", "n_ladder": [32, 16]})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"schema_version": 1, "kind": "Hydro", "n_ladder": [15]})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"schema_version": 1, "kind": "Bogus"})"), ConfigError);
    CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"schema_version": 1, "kind": "DualityCheck", "n_ladder": [8],
      "duality": {"dual_points": [[9]], "times": [0.1]}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"schema_version": 1, "kind": "StationaryFluct", "n_ladder": [8],
      "profile": {"kind": "GaussianBump", "level": 1, "amplitude": 1, "center": [0.5]},
      "test_functions": [{"name": "c"}]})"), ConfigError);
  }

  TEST_CASE("bundled example configs load") {
    int count = 0;
    for (const auto& e : fs::directory_iterator(fs::path(SIPX_SOURCE_DIR) / "configs")) {
      if (e.path().extension() != ".json") continue;
      CAPTURE(e.path().string());
      CHECK_NOTHROW(load_config(e.path()));
      ++count;
    }
    CHECK(count >= 7);
  }

  TEST_CASE("derived seeds are deterministic and collision free") {
    CHECK(derive_seed(5, 17, "dyn") == derive_seed(5, 17, "dyn"));
    CHECK(derive_seed(5, 17, "dyn") != derive_seed(5, 17, "dual"));
    CHECK(derive_seed(5, 17, "dyn") != derive_seed(6, 17, "dyn"));
    std::vector<std::uint64_t> seeds;
    seeds.reserve(2'000'000);
    for (std::uint64_t i = 0; i < 1'000'000; ++i) {
      seeds.push_back(derive_seed(42, i, "dyn"));
      seeds.push_back(derive_seed(42, i, "dual"));
    }
    std::sort(seeds.begin(), seeds.end());
    CHECK(std::adjacent_find(seeds.begin(), seeds.end()) == seeds.end());
  }

  TEST_CASE("neighbouring master seeds give decorrelated replica means") {
    ReplicaStats diff;
    std::vector<double> a, b;
    for (std::uint64_t i = 0; i < 100; ++i) {
      double ma = 0.0, mb = 0.0;
      Rng ra(derive_seed(1000, i, "dyn")), rb(derive_seed(1001, i, "dyn"));
      for (int k = 0; k < 100; ++k) {
        ma += uniform01(ra) / 100.0;
        mb += uniform01(rb) / 100.0;
      }
      a.push_back(ma);
      b.push_back(mb);
      diff.add(ma - mb);
    }
    CHECK(std::abs(diff.mean()) <= 3.0 * diff.se());
    ReplicaStats sa, sb, sab;
    for (std::size_t i = 0; i < a.size(); ++i) {
      sa.add(a[i]);
      sb.add(b[i]);
    }
    double cov = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) cov += (a[i] - sa.mean()) * (b[i] - sb.mean()) / 99.0;
    CHECK(std::abs(cov / std::sqrt(sa.variance() * sb.variance())) <= 0.3);
  }

  TEST_CASE("thread count resolution honours the environment") {
    CHECK(resolve_threads(3) == 3);
    ::setenv("SIPX_THREADS", "5", 1);
    CHECK(resolve_threads(0) == 5);
    ::setenv("SIPX_THREADS", "junk", 1);
    CHECK(resolve_threads(0) >= 1);
    ::unsetenv("SIPX_THREADS");
    const auto squares = parallel_map(100, 4, [](std::size_t i) { return i * i; });
    for (std::size_t i = 0; i < 100; ++i) CHECK(squares[i] == i * i);
  }

  TEST_CASE("replica statistics merge like a single pass") {
    ReplicaStats all, left, right;
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
      const double x = std::pow(uniform01(rng), 3.0);
      all.add(x);
      (i < 300 ? left : right).add(x);
    }
    left.merge(right);
    CHECK(left.count() == all.count());
    CHECK(left.mean() == doctest::Approx(all.mean()).epsilon(1e-12));
    CHECK(left.variance() == doctest::Approx(all.variance()).epsilon(1e-10));
    CHECK(left.variance_se() == doctest::Approx(all.variance_se()).epsilon(1e-9));
    ReplicaStats fixed;
    for (double x : {1.0, 2.0, 3.0, 4.0}) fixed.add(x);
    CHECK(fixed.variance() == doctest::Approx(5.0 / 3.0));
    CHECK(fixed.se() == doctest::Approx(std::sqrt(5.0 / 12.0)));
  }

  TEST_CASE("zero-horizon single-replica hydro run writes only the initial comparison") {
    const auto dir = scratch("t0");
    auto c = small_hydro(dir);
    c.replicas = 1;
    c.n_ladder = {16};
    c.sim.horizon = 0.0;
    c.sim.snapshot_times = {};
    RunOptions o;
    const auto m = run(c, o);
    CHECK(fs::exists(dir / "manifest.json"));
    std::ifstream err(dir / "hydro_error.csv");
    std::string line;
    int rows = 0;
    std::getline(err, line);
    while (std::getline(err, line)) {
      ++rows;
      CHECK(line.rfind("16,0,", 0) == 0);
    }
    CHECK(rows == 1);
    CHECK(m.events.at(16) == 0);
  }

  TEST_CASE("identical configs give byte-identical outputs regardless of threads") {
    const auto a = scratch("det_a"), b = scratch("det_b");
    RunOptions oa;
    oa.threads = 1;
    RunOptions ob;
    ob.threads = 3;
    const auto ma = run(small_hydro(a), oa);
    const auto mb = run(small_hydro(b), ob);
    CHECK(ma.reproducibility_hash() == mb.reproducibility_hash());
    CHECK(ma.outputs.size() >= 5);
    for (const auto& f : ma.outputs) CHECK(slurp(a / f.name) == slurp(b / f.name));
    // A manifest replays its own run.
    const auto replay = load_config(a / "manifest.json");
    CHECK(replay == small_hydro(a));
    const auto read = read_manifest(a / "manifest.json");
    CHECK(read.reproducibility_hash() == ma.reproducibility_hash());
    CHECK(read.seeds.size() == 2);
    CHECK(read.seeds[0].head[0] == derive_seed(99, 0, "hydro/n=16"));
  }

  TEST_CASE("output collisions need force") {
    const auto dir = scratch("collide");
    auto c = small_hydro(dir);
    c.n_ladder = {16};
    run(c, RunOptions{});
    CHECK_THROWS_AS(run(c, RunOptions{}), ConfigError);
    RunOptions f;
    f.force = true;
    CHECK_NOTHROW(run(c, f));
  }

  TEST_CASE("duality check on the tiny exact configuration passes") {
    const auto dir = scratch("dual");
    auto c = load_config(fs::path(SIPX_SOURCE_DIR) / "configs" / "duality_tiny.json");
    c.replicas = 20000;
    c.output_dir = dir.string();
    const auto m = run(c, RunOptions{});
    CHECK(m.checks.size() == 3);
    for (const auto& v : m.checks) {
      CAPTURE(v.detail);
      CHECK(v.pass);
    }
  }

  TEST_CASE("snapshot dump has the documented header") {
    const auto dir = scratch("snap");
    auto c = small_hydro(dir);
    c.n_ladder = {8};
    c.replicas = 2;
    dump_snapshots(c, RunOptions{});
    std::ifstream in(dir / "snapshots_n8.csv");
    std::string header, row;
    std::getline(in, header);
    CHECK(header == "replica,d,n,M,t,eta_0,eta_1,eta_2,eta_3,eta_4,eta_5,eta_6,eta_7");
    int rows = 0;
    while (std::getline(in, row)) ++rows;
    CHECK(rows == 2 * 3);
  }

  TEST_CASE("sweep report verdicts") {
    std::vector<Metric> zero{{32, "l1_error", 0.0}, {64, "l1_error", 0.0}, {128, "l1_error", 0.0}};
    auto t = sweep_report(zero, 1);
    CHECK(t.pass());
    CHECK(t.ns == std::vector<int>{32, 64, 128});

    std::vector<Metric> good{{32, "l1_error", 0.04}, {64, "l1_error", 0.03}, {128, "l1_error", 0.02},
                             {32, "pi_var:c", 0.04}, {64, "pi_var:c", 0.02}, {128, "pi_var:c", 0.0105},
                             {32, "var_rel_error:c", 0.1}, {64, "var_rel_error:c", 0.3}, {128, "var_rel_error:c", 0.2}};
    t = sweep_report(good, 1);
    CHECK(t.pass());
    CHECK(t.columns.size() == 3);

    auto bad = good;
    bad[2].value = 0.035;
    CHECK_FALSE(sweep_report(bad, 1).pass());
    bad = good;
    bad[5].value = 0.017;  // ratio 1.18 per doubling
    CHECK_FALSE(sweep_report(bad, 1).pass());
    CHECK(sweep_report(good, 2).pass() == false);

    CHECK_THROWS_AS(sweep_report(std::vector<Metric>{{32, "l1_error", 0.1}}, 1), ConfigError);
    std::vector<Metric> missing{{32, "l1_error", 0.1}, {64, "l1_error", 0.05}, {32, "pi_var:c", 1.0}};
    CHECK_THROWS_AS(sweep_report(missing, 1), ConfigError);
    CHECK(sweep_rule("form_error:g") == "decreasing");
    CHECK(sweep_rule("pi_var:g") == "scaling");
    CHECK(sweep_rule("m_form_ratio:g") == "report");
  }
}
