#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hdlmutant/ast.hpp"
#include "hdlmutant/config.hpp"
#include "hdlmutant/mutation.hpp"
#include "hdlmutant/sim.hpp"
#include "hdlmutant/synth.hpp"
#include "hdlmutant/testbench.hpp"

namespace hdlmutant {

enum class BugClass { kHang, kCrash, kMismatch };

/// "H", "C", "M".
std::string to_string(BugClass c);
BugClass bug_class_from_string(const std::string& s);

struct Divergence {
  long time = 0;
  std::string port;
  /// Sorted set of every diverging port.
  std::vector<std::string> ports;
};

/// One side of a differential check: the tool result and, when the netlist
/// could be simulated, its trace.
struct SideOutcome {
  SynthResult synth;
  std::optional<Trace> trace;
  /// Why there is no trace (opaque netlist, simulation failure).
  std::string note;
};

struct Finding {
  BugClass cls = BugClass::kMismatch;
  std::optional<Divergence> divergence;
  std::string log_excerpt;
};

/// Hang beats Crash beats Mismatch; the variant side is inspected first.
/// Mismatch only when both traces exist and differ.
std::optional<Finding> identify_bug(const SideOutcome& seed, const SideOutcome& variant);

/// Last non-empty log line with digits, hex runs and paths masked.
std::string normalize_log_signature(const std::string& log);

/// H: tool. C: tool + log signature. M: tool + diverging port set.
std::string fingerprint(const Finding& f, const std::string& tool);

struct PipelineOptions {
  SynthesizeFn synth;  // defaults to synthesize()
  SimLimits limits;
};

/// Writes `design` to `workdir/design.v`, runs the tool and simulates the
/// netlist (or runs the tool's resimulation hook). Adapter errors become a
/// Crash outcome with the message as log excerpt.
SideOutcome run_side(const ToolSpec& tool, const ModuleAst& design, const TestbenchAst& tb,
                     const std::filesystem::path& workdir, const PipelineOptions& opts = {});

struct BugRecord {
  std::string id;
  BugClass cls = BugClass::kMismatch;
  ToolSpec tool;
  std::string fingerprint;
  std::optional<Divergence> first_divergence;
  bool reproduced = false;
  std::optional<std::filesystem::path> reduced_ref;
  /// bugs/<id>
  std::filesystem::path dir;
  std::string seed_name;
  std::uint64_t iteration = 0;
  /// -1 for a finding on the unmutated seed.
  int variant_index = -1;
  std::uint64_t campaign_seed = 0;
  std::uint64_t stimulus_seed = 0;
  std::uint64_t mutation_seed = 0;
  StimulusConfig stimulus;
  std::vector<MutationLogEntry> log;
  std::size_t variant_statements = 0;
  std::size_t reduced_statements = 0;
};

/// Deterministic part of metadata.json plus a separate `timestamps` object.
nlohmann::json record_to_json(const BugRecord& r);
/// Reads `dir/metadata.json`. Throws ArtifactsMissing.
BugRecord load_bug_record(const std::filesystem::path& dir);

/// Testbench rebuilt from the stored seed ports and stimulus seed.
TestbenchAst record_testbench(const BugRecord& r, const ModuleAst& seed);

/// Reruns the stored seed/variant pair through `tool`; true iff the same
/// class recurs. Throws ArtifactsMissing.
bool reproduce(const BugRecord& r, const ToolSpec& tool, const std::filesystem::path& workdir,
               const PipelineOptions& opts = {});

struct ReductionResult {
  ModuleAst design;
  bool timed_out = false;
  std::size_t checks = 0;
  std::size_t original_statements = 0;
  std::size_t reduced_statements = 0;
};

/// Every design obtained from `ast` by deleting one module item or one
/// statement (structural no-ops skipped). Candidates are not re-validated.
std::vector<ModuleAst> deletion_candidates(const ModuleAst& ast);

/// True when the candidate still shows the bug.
using ReductionOracle = std::function<bool(const ModuleAst&)>;

struct ReductionBudget {
  double secs = 60.0;
  std::size_t max_checks = 2000;
};

/// Greedy deletion to a fixpoint. Candidates that fail to re-parse are
/// skipped. On budget exhaustion the best design so far is returned with
/// timed_out set.
ReductionResult reduce_design(const ModuleAst& original, const ReductionOracle& oracle,
                              const ReductionBudget& budget = {});

/// Reduces the stored variant. For M the candidate must stay equivalent to
/// the seed before synthesis and diverge on the same port set afterwards;
/// for H and C the same class must recur.
ReductionResult reduce_case(const BugRecord& r, const ToolSpec& tool,
                            const std::filesystem::path& workdir,
                            const ReductionBudget& budget = {}, const PipelineOptions& opts = {});

/// Content hash (FNV-1a over the emitted text), 16 hex digits.
std::string content_hash(const ModuleAst& ast);

struct SeedEntry {
  std::string hash;
  std::string name;
  ModuleAst ast;
  std::uint64_t variants = 0;
  std::uint64_t bugs = 0;
  /// Insertion order; smaller is older.
  std::uint64_t order = 0;

  double yield() const { return static_cast<double>(bugs) / static_cast<double>(variants ? variants : 1); }
};

struct SeedPool {
  std::size_t capacity = 256;
  std::vector<SeedEntry> entries;
  std::uint64_t next_order = 0;

  bool contains(const std::string& hash) const;
  SeedEntry* find(const std::string& hash);
  /// Fewest variants generated, oldest first.
  std::size_t pick() const;
};

/// Adds `design` unless its content is already present; at capacity the
/// entry with the lowest bugs-per-variant yield (oldest on ties) is evicted
/// first.
SeedPool update_seed_pool(SeedPool pool, const ModuleAst& design, const std::string& name);
SeedPool update_seed_pool(SeedPool pool, const Variant& variant, const std::string& name);

struct CampaignStats {
  std::uint64_t iterations = 0;
  std::uint64_t variants = 0;
  std::uint64_t synth_calls = 0;
  std::uint64_t findings = 0;
  std::uint64_t duplicates = 0;
  std::uint64_t flaky = 0;
  std::uint64_t seed_side = 0;
  std::uint64_t adapter_errors = 0;
  std::uint64_t unverified_variants = 0;
  MutationStats mutation;
  std::uint64_t seeds_dropped = 0;
  std::uint64_t feedback_success = 0;
  std::uint64_t feedback_failure = 0;
  /// Seed coverage averaged over iterations.
  double line_pct = 0.0;
  double condition_pct = 0.0;
  double branch_pct = 0.0;
  double elapsed_secs = 0.0;
};

nlohmann::json stats_to_json(const CampaignStats& s);

struct CampaignResult {
  std::vector<BugRecord> bugs;
  CampaignStats stats;
  std::size_t pool_size = 0;
};

struct NamedDesign {
  std::string name;
  ModuleAst ast;
};

struct CampaignHooks {
  SynthesizeFn synth;  // defaults to synthesize()
  std::function<void(const std::string&)> log;
};

/// Seeds from cfg.seeds_dir.
CampaignResult run_campaign(const CampaignConfig& cfg, const CampaignHooks& hooks = {});
/// Seeds supplied directly (cfg.seeds_dir ignored).
CampaignResult run_campaign(const CampaignConfig& cfg, const std::vector<NamedDesign>& seeds,
                            const CampaignHooks& hooks = {});

}  // namespace hdlmutant
