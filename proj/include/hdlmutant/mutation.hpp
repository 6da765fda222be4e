#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hdlmutant/ast.hpp"
#include "hdlmutant/fragment.hpp"
#include "hdlmutant/rng.hpp"
#include "hdlmutant/sim.hpp"
#include "hdlmutant/testbench.hpp"
#include "hdlmutant/zombie.hpp"

namespace hdlmutant {

enum class MutationAction { kPruneLeaf, kPruneSubtree, kInsertBefore, kInsertAfter };

std::string to_string(MutationAction a);

struct MutationLogEntry {
  NodeId site = kNoNode;  // id in the seed
  MutationAction action = MutationAction::kPruneLeaf;
  std::string summary;
};

enum class Equivalence { kVerified, kFailed, kUnchecked };

struct MutationConfig {
  double p_parent_prune = 0.5;
  double p_leaf_prune = 0.5;
  double p_parent_insert = 0.5;
  double p_leaf_insert = 0.5;
  /// Redraw the four probabilities uniformly before every pass.
  bool resample = true;
  /// Probability that a top-level item gets a prune pass rather than an
  /// insert pass.
  double prune_coin = 0.5;
  int variants_per_seed = 5;
  int max_retries = 20;
  /// Simulation limits for the equivalence check.
  SimLimits limits;
};

struct Variant {
  ModuleAst ast;
  std::vector<MutationLogEntry> log;
  Equivalence equivalence = Equivalence::kUnchecked;
  /// Element sequences of the inserted fragments, for feedback.
  std::vector<std::vector<std::string>> fragments;
};

struct MutationStats {
  /// Candidates with a non-empty mutation log.
  std::uint64_t attempts = 0;
  std::uint64_t invalid = 0;
  std::uint64_t not_equivalent = 0;
  std::uint64_t verified = 0;
  std::uint64_t degenerate = 0;

  MutationStats& operator+=(const MutationStats& o);
};

bool flip_coin(double p, SplitMix64& rng);

/// Breadth-first over the subtree at `stmt`. Zombie-region statements that
/// win their coin are deleted (assignments) or removed with their subtree
/// (control statements); an arm or body that is pruned becomes an empty
/// begin-end, a pruned else arm disappears. Statements holding every write
/// of an observed signal are skipped and their children visited.
ModuleAst prune_visit(const ModuleAst& ast, NodeId stmt, const std::set<NodeId>& region,
                      const MutationConfig& cfg, SplitMix64& rng,
                      std::vector<MutationLogEntry>* log = nullptr);

/// Breadth-first over the subtree at `stmt`. Zombie-region statements that
/// win their coin get a sampled fragment before or after them (equal odds),
/// wrapped into a begin-end first when the parent is not one. Fresh
/// temporaries are declared as module regs.
ModuleAst insert_visit(const ModuleAst& ast, NodeId stmt, const std::set<NodeId>& region,
                       const FragmentModel& model, const MutationConfig& cfg, SplitMix64& rng,
                       std::vector<MutationLogEntry>* log = nullptr,
                       std::vector<std::vector<std::string>>* fragments = nullptr);

/// Second, independently seeded testbench used by check_equivalence.
TestbenchAst second_testbench(const TestbenchAst& tb);

/// Trace equality of seed and variant under `tb` and second_testbench(tb).
/// Throws SimulationFailed if either side fails to simulate.
bool check_equivalence(const ModuleAst& seed, const ModuleAst& variant, const TestbenchAst& tb,
                       const SimLimits& limits = {});

/// Retries candidates until one re-parses and passes check_equivalence; the
/// seed itself (empty log) when the zombie set is empty or retries run out.
/// `model` may be null, which disables insertion.
Variant gen_variant(const ModuleAst& seed, const CoverageReport& cov, const FragmentModel* model,
                    const MutationConfig& cfg, const TestbenchAst& tb, SplitMix64& rng,
                    MutationStats* stats = nullptr);

}  // namespace hdlmutant
