#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include "json.hpp"

#include "hdlmutant/ast.hpp"

namespace hdlmutant {

enum class ToolKind { kExternal, kIdentity, kFaulty, kHang, kCrash };

std::string to_string(ToolKind k);
ToolKind tool_kind_from_string(const std::string& s);

struct ToolSpec {
  std::string name;
  ToolKind kind = ToolKind::kIdentity;
  /// External only. Placeholders: {input} {output} {top}.
  std::string command_template;
  double timeout_secs = 60.0;
  /// Faulty only: and_to_or, drop_signed, off_by_one_shift.
  std::string fault_profile;
  std::uint64_t fault_seed = 0;
  /// Optional external re-simulation hook. Placeholders: {netlist}
  /// {testbench} {trace}. The command writes one `<time> <port> <hex>` line
  /// per sample to {trace}.
  std::string resim_template;
};

/// Throws ConfigError on an invalid spec (e.g. external without {input} and
/// {output}, unknown fault profile).
void validate_tool(const ToolSpec& tool);

ToolSpec tool_from_json(const nlohmann::json& j);
nlohmann::json tool_to_json(const ToolSpec& tool);

enum class SynthStatus { kOk, kCrash, kHang };

std::string to_string(SynthStatus s);

struct SynthResult {
  SynthStatus status = SynthStatus::kOk;
  /// Parsed netlist when the output lies inside the supported subset.
  std::optional<ModuleAst> netlist;
  std::filesystem::path netlist_path;
  int exit_code = 0;
  int term_signal = 0;
  std::string log_excerpt;
  double elapsed_secs = 0.0;
};

/// Runs one tool on one design inside `workdir` (created if needed). Output
/// of external tools and of the forked builtins goes to `workdir/tool.log`.
/// Throws ToolNotFound, WorkdirError.
SynthResult synthesize(const ToolSpec& tool, const std::filesystem::path& design_path,
                       const std::filesystem::path& workdir);

using SynthesizeFn = std::function<SynthResult(const ToolSpec&, const std::filesystem::path&,
                                               const std::filesystem::path&)>;

/// Number of places `profile` can apply to.
std::size_t fault_sites(const ModuleAst& ast, const std::string& profile);

/// Applies `profile` at pre-order occurrence splitmix64(seed) % count; the
/// design is returned unchanged when there is no occurrence.
ModuleAst apply_fault(const ModuleAst& ast, const std::string& profile, std::uint64_t seed);

/// argv after placeholder substitution; double quotes group words.
std::vector<std::string> split_command(const std::string& templ,
                                       const std::vector<std::pair<std::string, std::string>>& subst);

struct ProcessResult {
  bool timed_out = false;
  int exit_code = 0;
  int term_signal = 0;
  double elapsed_secs = 0.0;
};

/// posix_spawn without a shell; stdout and stderr appended to `log_path`.
/// SIGKILL at the timeout. Throws ToolNotFound when the program cannot be
/// started.
ProcessResult run_process(const std::vector<std::string>& argv,
                          const std::filesystem::path& log_path, double timeout_secs);

}  // namespace hdlmutant
