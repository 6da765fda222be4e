#include "hdlmutant/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "hdlmutant/errors.hpp"

namespace hdlmutant {

void validate_config(const CampaignConfig& cfg) {
  if (cfg.max_iterations.has_value() == cfg.wall_clock_budget_secs.has_value())
    throw ConfigError("set exactly one of max_iterations and wall_clock_budget");
  if (cfg.wall_clock_budget_secs && !(*cfg.wall_clock_budget_secs > 0))
    throw ConfigError("wall_clock_budget must be positive");
  if (cfg.workers < 1) throw ConfigError("workers must be >= 1");
  if (cfg.variants_per_seed < 1) throw ConfigError("variants_per_seed must be >= 1");
  if (cfg.tools.empty()) throw ConfigError("no tools configured");
  if (cfg.seed_pool_capacity < 1) throw ConfigError("seed_pool_capacity must be >= 1");
  if (cfg.max_retries < 1) throw ConfigError("max_retries must be >= 1");
  if (cfg.stimulus.vector_count < 1 || cfg.stimulus.step_delay < 2 ||
      cfg.stimulus.clock_half_period < 1 || cfg.stimulus.margin < 0 ||
      cfg.stimulus.reset_steps < 0)
    throw ConfigError("invalid stimulus settings");
  std::set<std::string> names;
  for (const auto& t : cfg.tools) {
    validate_tool(t);
    if (!names.insert(t.name).second) throw ConfigError("duplicate tool name '" + t.name + "'");
  }
}

namespace {

std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& base) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known,
                    const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

}  // namespace

CampaignConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(j,
                 {"seeds_dir", "tools", "fragment_model_path", "rng_seed", "variants_per_seed",
                  "max_iterations", "wall_clock_budget", "workers", "output_dir", "workdir",
                  "keep_workdir", "stimulus", "seed_pool_capacity", "max_seed_statements", "max_retries", "reduce",
                  "reduce_budget_secs", "reduce_max_checks"},
                 "config");
  CampaignConfig c;
  try {
    c.seeds_dir = resolve(j.value("seeds_dir", std::string()), base_dir);
    if (j.contains("tools"))
      for (const auto& t : j.at("tools")) c.tools.push_back(tool_from_json(t));
    c.fragment_model_path = resolve(j.value("fragment_model_path", std::string()), base_dir);
    c.rng_seed = j.value("rng_seed", std::uint64_t{0});
    c.variants_per_seed = j.value("variants_per_seed", 5);
    if (j.contains("max_iterations")) c.max_iterations = j.at("max_iterations").get<std::uint64_t>();
    if (j.contains("wall_clock_budget"))
      c.wall_clock_budget_secs = j.at("wall_clock_budget").get<double>();
    c.workers = j.value("workers", 1);
    c.output_dir = resolve(j.value("output_dir", std::string("hdlmutant-out")), base_dir);
    c.workdir = resolve(j.value("workdir", std::string()), base_dir);
    c.keep_workdir = j.value("keep_workdir", false);
    if (j.contains("stimulus")) {
      const auto& s = j.at("stimulus");
      reject_unknown(s, {"vector_count", "step_delay", "clock_half_period", "margin", "reset_steps"},
                     "stimulus");
      c.stimulus.vector_count = s.value("vector_count", c.stimulus.vector_count);
      c.stimulus.step_delay = s.value("step_delay", c.stimulus.step_delay);
      c.stimulus.clock_half_period = s.value("clock_half_period", c.stimulus.clock_half_period);
      c.stimulus.margin = s.value("margin", c.stimulus.margin);
      c.stimulus.reset_steps = s.value("reset_steps", c.stimulus.reset_steps);
    }
    c.seed_pool_capacity = j.value("seed_pool_capacity", c.seed_pool_capacity);
    c.max_seed_statements = j.value("max_seed_statements", c.max_seed_statements);
    c.max_retries = j.value("max_retries", c.max_retries);
    c.reduce = j.value("reduce", c.reduce);
    c.reduce_budget_secs = j.value("reduce_budget_secs", c.reduce_budget_secs);
    c.reduce_max_checks = j.value("reduce_max_checks", c.reduce_max_checks);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  return c;
}

nlohmann::json config_to_json(const CampaignConfig& c) {
  nlohmann::json tools = nlohmann::json::array();
  for (const auto& t : c.tools) tools.push_back(tool_to_json(t));
  nlohmann::json j{
      {"seeds_dir", c.seeds_dir.string()},
      {"tools", tools},
      {"rng_seed", c.rng_seed},
      {"variants_per_seed", c.variants_per_seed},
      {"workers", c.workers},
      {"output_dir", c.output_dir.string()},
      {"stimulus",
       {{"vector_count", c.stimulus.vector_count},
        {"step_delay", c.stimulus.step_delay},
        {"clock_half_period", c.stimulus.clock_half_period},
        {"margin", c.stimulus.margin},
        {"reset_steps", c.stimulus.reset_steps}}},
      {"seed_pool_capacity", c.seed_pool_capacity},
      {"max_seed_statements", c.max_seed_statements},
      {"max_retries", c.max_retries},
      {"reduce", c.reduce},
      {"reduce_budget_secs", c.reduce_budget_secs},
      {"reduce_max_checks", c.reduce_max_checks},
      {"keep_workdir", c.keep_workdir},
  };
  if (!c.fragment_model_path.empty()) j["fragment_model_path"] = c.fragment_model_path.string();
  if (!c.workdir.empty()) j["workdir"] = c.workdir.string();
  if (c.max_iterations) j["max_iterations"] = *c.max_iterations;
  if (c.wall_clock_budget_secs) j["wall_clock_budget"] = *c.wall_clock_budget_secs;
  return j;
}

CampaignConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

std::filesystem::path resolve_workdir(const CampaignConfig& cfg) {
  if (const char* env = std::getenv("HDLMUTANT_WORKDIR"); env && *env) return env;
  if (!cfg.workdir.empty()) return cfg.workdir;
  return cfg.output_dir / "work";
}

}  // namespace hdlmutant
