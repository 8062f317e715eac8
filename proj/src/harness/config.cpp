#include "sipx/harness/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "sipx/harness/errors.hpp"

namespace sipx {

using nlohmann::json;

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Hydro: return "Hydro";
    case ExperimentKind::StationaryFluct: return "StationaryFluct";
    case ExperimentKind::NonEqFluct: return "NonEqFluct";
    case ExperimentKind::DualityCheck: return "DualityCheck";
    case ExperimentKind::MoscoCheck: return "MoscoCheck";
    case ExperimentKind::MomentBounds: return "MomentBounds";
  }
  return "?";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
  for (auto k : {ExperimentKind::Hydro, ExperimentKind::StationaryFluct, ExperimentKind::NonEqFluct,
                 ExperimentKind::DualityCheck, ExperimentKind::MoscoCheck, ExperimentKind::MomentBounds})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown experiment kind '" + s + "'");
}

namespace {

// Strict object reader: every key must be consumed, every value must have the exact JSON type.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  double number(const std::string& key, double fallback) { return has(key) ? to_double(raw(key), name(key)) : fallback; }
  int integer(const std::string& key, int fallback) {
    return has(key) ? static_cast<int>(to_int(raw(key), name(key))) : fallback;
  }
  std::uint64_t unsigned_int(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number_unsigned()) throw ConfigError(name(key) + ": expected a nonnegative integer");
    return v.get<std::uint64_t>();
  }
  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) throw ConfigError(name(key) + ": expected true or false");
    return v.get<bool>();
  }
  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError(name(key) + ": expected a string");
    return v.get<std::string>();
  }
  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    if (!has(key)) return fallback;
    const json& v = array(key);
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(to_double(v[i], name(key) + "[" + std::to_string(i) + "]"));
    return out;
  }
  template <class T>
  std::vector<T> integers(const std::string& key, std::vector<T> fallback) {
    if (!has(key)) return fallback;
    const json& v = array(key);
    std::vector<T> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto x = to_int(v[i], name(key) + "[" + std::to_string(i) + "]");
      if (std::is_unsigned_v<T> && x < 0) throw ConfigError(name(key) + ": entries must be nonnegative");
      out.push_back(static_cast<T>(x));
    }
    return out;
  }
  std::vector<std::vector<std::size_t>> nested_sites(const std::string& key) {
    std::vector<std::vector<std::size_t>> out;
    if (!has(key)) return out;
    const json& v = array(key);
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string n = name(key) + "[" + std::to_string(i) + "]";
      if (!v[i].is_array()) throw ConfigError(n + ": expected an array of site indices");
      std::vector<std::size_t> row;
      for (const auto& e : v[i]) {
        if (!e.is_number_unsigned()) throw ConfigError(n + ": site indices must be nonnegative integers");
        row.push_back(e.get<std::size_t>());
      }
      out.push_back(row);
    }
    return out;
  }
  const json& array(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array()) throw ConfigError(name(key) + ": expected an array");
    return v;
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ConfigError("unknown key '" + name(k) + "'");
  }

 private:
  std::string where() const { return path_.empty() ? "config" : path_; }
  static double to_double(const json& v, const std::string& n) {
    if (!v.is_number()) throw ConfigError(n + ": expected a number");
    return v.get<double>();
  }
  static long long to_int(const json& v, const std::string& n) {
    if (!v.is_number_integer()) throw ConfigError(n + ": expected an integer");
    return v.get<long long>();
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class F>
auto translate(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

json kernel_json(const KernelSpec& k) {
  return {{"family", to_string(k.family)}, {"dimension", k.dimension}, {"beta", k.beta},
          {"window", k.window},            {"image_folds", k.image_folds}, {"table", k.table}};
}

KernelSpec kernel_from(const json& j) {
  Reader r(j, "kernel");
  KernelSpec k;
  k.family = translate("kernel.family", [&] { return kernel_family_from_string(r.string("family", to_string(k.family))); });
  k.dimension = r.integer("dimension", k.dimension);
  k.beta = r.number("beta", k.beta);
  k.window = r.integer("window", k.window);
  k.image_folds = r.integer("image_folds", k.image_folds);
  k.table = r.numbers("table", {});
  r.finish();
  return k;
}

json profile_json(const InitialProfile& p) {
  return {{"kind", to_string(p.kind)}, {"level", p.level}, {"amplitude", p.amplitude},
          {"center", p.center},        {"width", p.width}, {"table", p.table}};
}

InitialProfile profile_from(const json& j) {
  Reader r(j, "profile");
  InitialProfile p;
  p.kind = translate("profile.kind", [&] { return profile_kind_from_string(r.string("kind", to_string(p.kind))); });
  p.level = r.number("level", p.level);
  p.amplitude = r.number("amplitude", p.amplitude);
  p.center = r.numbers("center", {});
  p.width = r.number("width", p.width);
  p.table = r.numbers("table", {});
  r.finish();
  return p;
}

json test_function_json(const TestFunction& f) {
  return {{"name", f.name},     {"kind", to_string(f.kind)}, {"amplitude", f.amplitude},
          {"mode", f.mode},     {"sine", f.sine},            {"center", f.center},
          {"width", f.width},   {"table", f.table}};
}

TestFunction test_function_from(const json& j, const std::string& path) {
  Reader r(j, path);
  TestFunction f;
  f.name = r.string("name", "");
  f.kind = translate(path + ".kind", [&] { return test_kind_from_string(r.string("kind", to_string(f.kind))); });
  f.amplitude = r.number("amplitude", f.amplitude);
  const auto mode = r.integers<int>("mode", {f.mode[0], f.mode[1]});
  if (mode.size() != 2) throw ConfigError(path + ".mode: expected two integers");
  f.mode = {mode[0], mode[1]};
  f.sine = r.boolean("sine", f.sine);
  f.center = r.numbers("center", {});
  f.width = r.number("width", f.width);
  f.table = r.numbers("table", {});
  r.finish();
  return f;
}

void check(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

bool on_grid(double t, double h) {
  const double k = t / h;
  return std::abs(k - std::round(k)) <= 1e-6;
}

}  // namespace

void validate(const ExperimentConfig& c) {
  check(c.schema_version == kSchemaVersion, "schema_version must be " + std::to_string(kSchemaVersion));
  translate("kernel", [&] {
    validate(c.kernel);
    return 0;
  });
  check(c.replicas >= 1, "replicas must be at least 1");
  check(!c.n_ladder.empty(), "n_ladder must not be empty");
  for (std::size_t i = 0; i < c.n_ladder.size(); ++i) {
    check(c.n_ladder[i] >= 4 && c.n_ladder[i] % 2 == 0, "n_ladder entries must be even and at least 4");
    if (i > 0) check(c.n_ladder[i] > c.n_ladder[i - 1], "n_ladder must be strictly increasing");
    translate("kernel at n = " + std::to_string(c.n_ladder[i]), [&] { return build_discrete_kernel(c.kernel, c.n_ladder[i]).side(); });
  }
  check(c.sim.beta == c.kernel.beta, "dynamics beta must equal kernel.beta");
  check(c.sim.seed == c.seed, "dynamics seed must equal the master seed");
  translate("dynamics", [&] {
    validate(c.sim);
    return 0;
  });
  translate("profile", [&] {
    validate(c.profile, c.kernel.dimension);
    return 0;
  });
  std::set<std::string> names;
  for (const auto& f : c.test_functions) {
    check(!f.name.empty(), "test functions need a name");
    check(names.insert(f.name).second, "duplicate test function name '" + f.name + "'");
    translate("test function '" + f.name + "'", [&] {
      validate(f, c.kernel.dimension);
      return 0;
    });
  }
  check(!c.output_dir.empty(), "output_dir must not be empty");

  std::size_t min_sites = 1;
  for (int d = 0; d < c.kernel.dimension; ++d) min_sites *= static_cast<std::size_t>(c.n_ladder.front());
  auto check_sites = [&](const std::vector<std::vector<std::size_t>>& sets, const std::string& what) {
    check(!sets.empty(), what + " must not be empty");
    for (const auto& s : sets) {
      check(!s.empty() && s.size() <= 4, what + ": each entry needs 1 to 4 sites");
      for (auto x : s) check(x < min_sites, what + ": site index outside the smallest torus");
    }
  };
  auto check_times = [&](const std::vector<double>& ts, const std::string& what) {
    check(!ts.empty(), what + " must not be empty");
    for (std::size_t i = 0; i < ts.size(); ++i) {
      check(ts[i] >= 0.0 && std::isfinite(ts[i]), what + " must be finite and nonnegative");
      if (i > 0) check(ts[i] >= ts[i - 1], what + " must be sorted");
    }
  };

  switch (c.kind) {
    case ExperimentKind::Hydro: break;
    case ExperimentKind::StationaryFluct:
    case ExperimentKind::NonEqFluct: {
      check(!c.test_functions.empty(), "fluctuation experiments need at least one test function");
      check(c.fluctuations.path_steps >= 1, "fluctuations.path_steps must be positive");
      if (c.sim.horizon > 0.0) {
        const double h = c.sim.horizon / c.fluctuations.path_steps;
        for (double t : snapshot_grid(c.sim))
          check(on_grid(t, h), "snapshot times must lie on the density path grid (horizon / path_steps)");
      }
      if (c.kind == ExperimentKind::StationaryFluct)
        check(c.profile.kind == ProfileKind::Constant, "StationaryFluct needs a constant profile");
      break;
    }
    case ExperimentKind::DualityCheck: {
      check(c.duality.initial == "negbin" || c.duality.initial == "fixed", "duality.initial must be negbin or fixed");
      check_sites(c.duality.dual_points, "duality.dual_points");
      check_times(c.duality.times, "duality.times");
      if (c.duality.initial == "fixed") {
        check(c.n_ladder.size() == 1, "a fixed initial configuration needs a single-entry n_ladder");
        check(c.duality.fixed_eta.size() == min_sites, "duality.fixed_eta must have n^d entries");
      }
      break;
    }
    case ExperimentKind::MoscoCheck:
      check(!c.test_functions.empty(), "MoscoCheck needs at least one test function");
      for (const auto& f : c.test_functions) check(f.analytic(), "MoscoCheck test functions need closed-form Fourier data");
      break;
    case ExperimentKind::MomentBounds:
      check_sites(c.moments.point_sets, "moments.point_sets");
      check_times(c.moments.times, "moments.times");
      break;
  }
}

json to_json(const ExperimentConfig& c) {
  json tfs = json::array();
  for (const auto& f : c.test_functions) tfs.push_back(test_function_json(f));
  return {{"schema_version", c.schema_version},
          {"kind", to_string(c.kind)},
          {"seed", c.seed},
          {"replicas", c.replicas},
          {"n_ladder", c.n_ladder},
          {"output_dir", c.output_dir},
          {"kernel", kernel_json(c.kernel)},
          {"dynamics", {{"alpha", c.sim.alpha}, {"horizon", c.sim.horizon}, {"snapshot_times", c.sim.snapshot_times}}},
          {"profile", profile_json(c.profile)},
          {"test_functions", tfs},
          {"duality",
           {{"initial", c.duality.initial},
            {"fixed_eta", c.duality.fixed_eta},
            {"dual_points", c.duality.dual_points},
            {"times", c.duality.times}}},
          {"moments", {{"point_sets", c.moments.point_sets}, {"times", c.moments.times}}},
          {"fluctuations", {{"path_steps", c.fluctuations.path_steps}}}};
}

ExperimentConfig config_from_json(const json& j) {
  Reader r(j, "");
  ExperimentConfig c;
  c.schema_version = r.integer("schema_version", -1);
  if (c.schema_version != kSchemaVersion)
    throw ConfigError("schema_version must be present and equal to " + std::to_string(kSchemaVersion));
  c.kind = experiment_kind_from_string(r.string("kind", to_string(c.kind)));
  c.seed = r.unsigned_int("seed", c.seed);
  c.replicas = r.unsigned_int("replicas", c.replicas);
  c.n_ladder = r.integers<int>("n_ladder", c.n_ladder);
  c.output_dir = r.string("output_dir", c.output_dir);
  if (r.has("kernel")) c.kernel = kernel_from(r.raw("kernel"));
  if (r.has("dynamics")) {
    Reader d(r.raw("dynamics"), "dynamics");
    c.sim.alpha = d.number("alpha", c.sim.alpha);
    c.sim.horizon = d.number("horizon", c.sim.horizon);
    c.sim.snapshot_times = d.numbers("snapshot_times", {});
    d.finish();
  }
  if (r.has("profile")) c.profile = profile_from(r.raw("profile"));
  if (r.has("test_functions")) {
    const json& a = r.array("test_functions");
    for (std::size_t i = 0; i < a.size(); ++i)
      c.test_functions.push_back(test_function_from(a[i], "test_functions[" + std::to_string(i) + "]"));
  }
  if (r.has("duality")) {
    Reader d(r.raw("duality"), "duality");
    c.duality.initial = d.string("initial", c.duality.initial);
    c.duality.fixed_eta = d.integers<std::uint32_t>("fixed_eta", {});
    c.duality.dual_points = d.nested_sites("dual_points");
    c.duality.times = d.numbers("times", {});
    d.finish();
  }
  if (r.has("moments")) {
    Reader m(r.raw("moments"), "moments");
    c.moments.point_sets = m.nested_sites("point_sets");
    c.moments.times = m.numbers("times", {});
    m.finish();
  }
  if (r.has("fluctuations")) {
    Reader f(r.raw("fluctuations"), "fluctuations");
    c.fluctuations.path_steps = f.integer("path_steps", c.fluctuations.path_steps);
    f.finish();
  }
  r.finish();
  c.sim.beta = c.kernel.beta;
  c.sim.seed = c.seed;
  validate(c);
  return c;
}

std::string serialize(const ExperimentConfig& c) { return to_json(c).dump(2) + "\n"; }

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  return config_from_json(j);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": malformed JSON: " + e.what());
  }
  if (j.is_object() && j.contains("manifest_version")) {
    if (!j.contains("config")) throw ConfigError(path.string() + ": manifest without an embedded config");
    return config_from_json(j.at("config"));
  }
  return config_from_json(j);
}

}  // namespace sipx
