#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hdlmutant/ast.hpp"

namespace hdlmutant {

struct PortSpec {
  std::string name;
  Direction dir = Direction::kInput;
  int width = 1;
  bool is_signed = false;
  bool is_clock = false;
  bool is_reset = false;
  bool reset_active_low = false;
};

/// One PortSpec per declared port, in declaration order. The first 1-bit
/// input named clk/clock (any case) is the clock; 1-bit inputs whose name
/// contains rst/reset are resets, active-low when the name ends in `n`.
/// Throws NoOutputs for designs without an output port.
std::vector<PortSpec> extract_ports(const ModuleAst& ast);

struct StimulusConfig {
  std::uint64_t rng_seed = 0;
  int vector_count = 100;
  long step_delay = 10;
  long clock_half_period = 5;
  long margin = 10;
  /// Schedule entries (counting time 0) during which resets are held active.
  int reset_steps = 2;

  long total_horizon() const { return vector_count * step_delay + margin; }
};

struct StimulusStep {
  long time = 0;
  /// Values for TestbenchAst::driven, same order.
  std::vector<std::uint64_t> values;
};

struct TestbenchAst {
  std::string dut_name;
  std::vector<PortSpec> ports;
  /// Indices into `ports` of the inputs driven by the schedule (every input
  /// except the clock).
  std::vector<std::size_t> driven;
  /// Index into `ports` of the clock, or -1.
  int clock = -1;
  long clock_half_period = 5;
  std::vector<StimulusStep> schedule;
  long finish_time = 0;
  std::uint64_t rng_seed = 0;
  StimulusConfig config;
};

/// Pure function of (ports, cfg). Entry 0 at time 0 drives every input to 0
/// with resets active; entry k (k >= 1) at k*step_delay draws one splitmix64
/// value per non-reset driven input, masked to the port width.
TestbenchAst generate_testbench(const std::vector<PortSpec>& ports,
                                const StimulusConfig& cfg,
                                const std::string& dut_name = "dut");

/// Behavioral Verilog testbench for external simulators. Prints the outputs
/// at every sample time.
std::string emit_testbench(const TestbenchAst& tb);

}  // namespace hdlmutant
