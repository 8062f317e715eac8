#include "sipx/harness/manifest.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "sipx/harness/errors.hpp"
#include "sipx/random.hpp"

namespace sipx {

using nlohmann::json;

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

bool RunManifest::passed() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

std::string RunManifest::reproducibility_hash() const {
  std::ostringstream s;
  // Where the outputs land does not change what they contain.
  ExperimentConfig placed = config;
  placed.output_dir.clear();
  s << artifact_version << '|' << command << '|' << hex64(fnv1a64(serialize(placed)));
  for (const auto& r : seeds) s << '|' << r.stream << ':' << r.count << ':' << r.digest;
  for (const auto& [n, e] : events) s << '|' << n << ':' << e;
  for (const auto& o : outputs) s << '|' << o.name << ':' << o.bytes << ':' << o.digest;
  for (const auto& m : metrics) s << '|' << m.n << ':' << m.name << ':' << fmt(m.value);
  return hex64(fnv1a64(s.str()));
}

std::string config_hash(const ExperimentConfig& c) { return hex64(fnv1a64(serialize(c))); }

SeedRecord seed_record(std::uint64_t master, const std::string& stream, std::uint64_t count) {
  SeedRecord r;
  r.stream = stream;
  r.count = count;
  std::string bytes;
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t s = derive_seed(master, i, stream);
    if (i < 8) r.head.push_back(s);
    bytes += hex64(s);
  }
  r.digest = hex64(fnv1a64(bytes));
  return r;
}

json to_json(const RunManifest& m) {
  json seeds = json::array();
  for (const auto& r : m.seeds)
    seeds.push_back({{"stream", r.stream}, {"count", r.count}, {"head", r.head}, {"digest", r.digest}});
  json events = json::object();
  for (const auto& [n, e] : m.events) events[std::to_string(n)] = e;
  json outputs = json::array();
  for (const auto& o : m.outputs) outputs.push_back({{"name", o.name}, {"bytes", o.bytes}, {"digest", o.digest}});
  json metrics = json::array();
  for (const auto& x : m.metrics) metrics.push_back({{"n", x.n}, {"name", x.name}, {"value", x.value}});
  json checks = json::array();
  for (const auto& c : m.checks) checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  return {{"manifest_version", 1},
          {"artifact_version", m.artifact_version},
          {"command", m.command},
          {"config", to_json(m.config)},
          {"config_hash", m.config_hash},
          {"seed_rule", "derive_seed(master, replica, stream) = splitmix64(splitmix64(splitmix64(master) ^ fnv1a64(stream)) ^ replica)"},
          {"seeds", seeds},
          {"events", events},
          {"threads", m.threads},
          {"wall_seconds", m.wall_seconds},
          {"outputs", outputs},
          {"metrics", metrics},
          {"checks", checks},
          {"reproducibility_hash", m.reproducibility_hash()}};
}

RunManifest manifest_from_json(const json& j) {
  try {
    RunManifest m;
    m.artifact_version = j.at("artifact_version").get<std::string>();
    m.command = j.at("command").get<std::string>();
    m.config = config_from_json(j.at("config"));
    m.config_hash = j.at("config_hash").get<std::string>();
    for (const auto& r : j.at("seeds"))
      m.seeds.push_back({r.at("stream").get<std::string>(), r.at("count").get<std::uint64_t>(),
                         r.at("head").get<std::vector<std::uint64_t>>(), r.at("digest").get<std::string>()});
    for (const auto& [n, e] : j.at("events").items()) m.events[std::stoi(n)] = e.get<std::uint64_t>();
    m.threads = j.at("threads").get<int>();
    m.wall_seconds = j.at("wall_seconds").get<double>();
    for (const auto& o : j.at("outputs"))
      m.outputs.push_back({o.at("name").get<std::string>(), o.at("bytes").get<std::uint64_t>(), o.at("digest").get<std::string>()});
    for (const auto& x : j.at("metrics"))
      m.metrics.push_back({x.at("n").get<int>(), x.at("name").get<std::string>(), x.at("value").get<double>()});
    for (const auto& c : j.at("checks"))
      m.checks.push_back({c.at("name").get<std::string>(), c.at("pass").get<bool>(), c.at("detail").get<std::string>()});
    return m;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed manifest: ") + e.what());
  }
}

void write_manifest(const RunManifest& m, const std::filesystem::path& dir) {
  std::ofstream out(dir / "manifest.json");
  out << to_json(m).dump(2) << "\n";
  if (!out) throw std::runtime_error("failed to write manifest in " + dir.string());
}

RunManifest read_manifest(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read manifest " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return manifest_from_json(json::parse(ss.str()));
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed manifest: ") + e.what());
  }
}

OutputFile describe_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read output " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string bytes = ss.str();
  return {file.filename().string(), bytes.size(), hex64(fnv1a64(bytes))};
}

}  // namespace sipx
