#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hdlmutant/synth.hpp"
#include "hdlmutant/testbench.hpp"

namespace hdlmutant {

struct CampaignConfig {
  std::filesystem::path seeds_dir;
  std::vector<ToolSpec> tools;
  /// Empty disables fragment insertion.
  std::filesystem::path fragment_model_path;
  std::uint64_t rng_seed = 0;
  int variants_per_seed = 5;
  /// Exactly one of the two stop conditions is set.
  std::optional<std::uint64_t> max_iterations;
  std::optional<double> wall_clock_budget_secs;
  int workers = 1;
  std::filesystem::path output_dir = "hdlmutant-out";
  /// Scratch space for tool runs; defaults to <output_dir>/work.
  std::filesystem::path workdir;
  bool keep_workdir = false;
  /// rng_seed inside is ignored; stimulus seeds derive from rng_seed above.
  StimulusConfig stimulus;
  std::size_t seed_pool_capacity = 256;
  /// Variants above this statement count are not fed back into the pool;
  /// 0 admits everything.
  std::size_t max_seed_statements = 400;
  int max_retries = 20;
  bool reduce = true;
  double reduce_budget_secs = 60.0;
  std::size_t reduce_max_checks = 2000;
};

/// Throws ConfigError.
void validate_config(const CampaignConfig& cfg);

/// Unknown keys are rejected. Relative paths resolve against `base_dir`.
CampaignConfig config_from_json(const nlohmann::json& j,
                                const std::filesystem::path& base_dir = {});
nlohmann::json config_to_json(const CampaignConfig& cfg);
CampaignConfig load_config(const std::filesystem::path& path);

/// Scratch directory: HDLMUTANT_WORKDIR if set, else cfg.workdir, else
/// <output_dir>/work.
std::filesystem::path resolve_workdir(const CampaignConfig& cfg);

}  // namespace hdlmutant
