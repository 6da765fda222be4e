#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "hdlmutant/ast.hpp"
#include "hdlmutant/testbench.hpp"

namespace hdlmutant {

struct SimLimits {
  /// Settle rounds per time step before declaring a combinational loop.
  int max_deltas = 1000;
  /// Total process activations over the whole run.
  std::uint64_t max_steps = 50'000'000;
};

struct Trace {
  std::vector<long> sample_times;
  std::vector<std::string> ports;
  /// values[p][k]: output port p at sample k.
  std::vector<std::vector<std::uint64_t>> values;
  long final_time = 0;

  bool operator==(const Trace&) const = default;
};

struct ConditionOutcome {
  bool saw_true = false;
  bool saw_false = false;
};

/// Branch arm: owning If/Case and arm index. For If, 0 = then, 1 = else
/// (present or implicit). For Case, arm i is body[i]; a case without a
/// default has an implicit default arm at index body.size().
struct ArmKey {
  NodeId owner = kNoNode;
  int arm = 0;
  auto operator<=>(const ArmKey&) const = default;
};

struct CoverageReport {
  /// Every procedural statement and continuous assign.
  std::map<NodeId, std::uint64_t> line_hits;
  /// If conditions, ternary conditions and case labels (subject == label).
  std::map<NodeId, ConditionOutcome> condition_outcomes;
  std::map<ArmKey, std::uint64_t> branch_taken;
  /// BeginEnd ids among line_hits; excluded from the line percentage.
  std::set<NodeId> blocks;
};

struct SimResult {
  Trace trace;
  CoverageReport coverage;
};

/// Two-state event-driven simulation. Throws CombinationalLoop or
/// StepLimitExceeded.
SimResult simulate(const ModuleAst& design, const TestbenchAst& tb,
                   const SimLimits& limits = {});

/// Coverage skeleton for `design`: every key present, all counts zero.
CoverageReport empty_coverage(const ModuleAst& design);

struct CoverageSummary {
  double line_pct = 100.0;
  double condition_pct = 100.0;
  double branch_pct = 100.0;
};

CoverageSummary coverage_summary(const CoverageReport& report);

nlohmann::json coverage_to_json(const CoverageReport& report);

struct Verdict {
  bool equivalent = true;
  long first_time = 0;
  std::string port;
  std::uint64_t value_a = 0;
  std::uint64_t value_b = 0;
  /// Every port that differs at any sample.
  std::vector<std::string> diverging_ports;
};

/// Throws ShapeMismatch when ports or sample times differ.
Verdict compare_traces(const Trace& a, const Trace& b);

}  // namespace hdlmutant
