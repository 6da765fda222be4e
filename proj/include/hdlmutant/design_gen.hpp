#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hdlmutant/ast.hpp"
#include "hdlmutant/rng.hpp"

namespace hdlmutant {

struct DesignGenOptions {
  /// Upper bound on statement_count() of the result.
  int max_statements = 40;
  int min_inputs = 2;
  int max_inputs = 4;
  int max_outputs = 3;
  int max_width = 16;
  /// Probability of a clock, a reset and an edge-triggered block.
  double sequential = 0.6;
  /// Probability that a block gets a guard that is never or rarely true.
  double zombie_rate = 0.6;
  int max_expr_depth = 3;
  bool loops = true;
  /// Adds one live output built from `&`, `$signed` and shifts.
  bool fault_hooks = true;
};

/// Random single-module design inside the subset: combinational logic is
/// acyclic and latch-free, every output is driven. The result has gone
/// through emit and parse, so ids are assigned.
ModuleAst generate_design(const std::string& name, SplitMix64& rng,
                          const DesignGenOptions& opts = {});

/// Same design in a looser textual form: non-ANSI header, minimal
/// parentheses, optional begin/end, mixed literal bases, replication,
/// parameters and comments.
std::string emit_styled(const ModuleAst& ast, SplitMix64& rng);

}  // namespace hdlmutant
