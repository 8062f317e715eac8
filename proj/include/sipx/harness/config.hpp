// Versioned JSON experiment configuration.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "sipx/dynamics.hpp"
#include "sipx/kernel.hpp"
#include "sipx/profile.hpp"
#include "sipx/test_function.hpp"

namespace sipx {

inline constexpr int kSchemaVersion = 1;

enum class ExperimentKind { Hydro, StationaryFluct, NonEqFluct, DualityCheck, MoscoCheck, MomentBounds };

std::string to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& s);

/// Duality experiments: dual particle positions (site indices) and comparison times.
struct DualityOptions {
  /// "negbin" draws eta_0 from the profile; "fixed" starts every replica from fixed_eta.
  std::string initial = "negbin";
  std::vector<std::uint32_t> fixed_eta;
  std::vector<std::vector<std::size_t>> dual_points;
  std::vector<double> times;

  bool operator==(const DualityOptions&) const = default;
};

struct MomentOptions {
  std::vector<std::vector<std::size_t>> point_sets;
  std::vector<double> times;

  bool operator==(const MomentOptions&) const = default;
};

struct FluctuationOptions {
  /// Time steps of the deterministic density path used by the variance predictor.
  int path_steps = 1000;

  bool operator==(const FluctuationOptions&) const = default;
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  ExperimentKind kind = ExperimentKind::Hydro;
  KernelSpec kernel;
  /// beta and seed mirror kernel.beta and seed.
  SimParams sim;
  InitialProfile profile;
  std::vector<TestFunction> test_functions;
  std::uint64_t replicas = 1;
  std::vector<int> n_ladder{32};
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  DualityOptions duality;
  MomentOptions moments;
  FluctuationOptions fluctuations;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Throws ConfigError naming the offending field.
void validate(const ExperimentConfig& c);

nlohmann::json to_json(const ExperimentConfig& c);
/// Strict parse: unknown keys, wrong types and a foreign schema version are errors.
ExperimentConfig config_from_json(const nlohmann::json& j);

/// Canonical serialization (sorted keys, two-space indent).
std::string serialize(const ExperimentConfig& c);
ExperimentConfig parse_config(const std::string& text);
/// Reads a config file, or the config embedded in a run manifest.
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace sipx
