// Run manifests: config hash, seed derivation record, telemetry and output inventory.
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "sipx/harness/config.hpp"

namespace sipx {

inline constexpr const char* kArtifactVersion = "0.1.0";

std::string hex64(std::uint64_t v);

struct OutputFile {
  std::string name;
  std::uint64_t bytes = 0;
  /// FNV-1a 64 of the file contents.
  std::string digest;
};

/// Seeds used for one replica stream; the full list is summarized by its digest.
struct SeedRecord {
  std::string stream;
  std::uint64_t count = 0;
  std::vector<std::uint64_t> head;
  std::string digest;
};

/// One per-n scalar reported by a run (errors, variances, residuals).
struct Metric {
  int n = 0;
  std::string name;
  double value = 0.0;
};

struct Verdict {
  std::string name;
  bool pass = true;
  std::string detail;
};

struct RunManifest {
  std::string artifact_version = kArtifactVersion;
  std::string command;
  ExperimentConfig config;
  std::string config_hash;
  std::vector<SeedRecord> seeds;
  std::map<int, std::uint64_t> events;
  int threads = 1;
  /// Telemetry only; excluded from the reproducibility hash.
  double wall_seconds = 0.0;
  std::vector<OutputFile> outputs;
  std::vector<Metric> metrics;
  std::vector<Verdict> checks;

  bool passed() const;
  /// Hash over config (minus output_dir), seeds, event counts, outputs and metrics; identical for bit-identical reruns.
  std::string reproducibility_hash() const;
};

std::string config_hash(const ExperimentConfig& c);
/// Records derive_seed(master, r, stream) for r < count.
SeedRecord seed_record(std::uint64_t master, const std::string& stream, std::uint64_t count);

nlohmann::json to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);
void write_manifest(const RunManifest& m, const std::filesystem::path& dir);
RunManifest read_manifest(const std::filesystem::path& file);

OutputFile describe_file(const std::filesystem::path& file);

/// Shortest round-trip decimal form of a double.
std::string fmt(double v);

}  // namespace sipx
