#include "hdlmutant/testbench.hpp"

#include <algorithm>
#include <cctype>

#include <fmt/format.h>

#include "hdlmutant/errors.hpp"
#include "hdlmutant/rng.hpp"
#include "hdlmutant/semantics.hpp"

namespace hdlmutant {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

std::vector<PortSpec> extract_ports(const ModuleAst& ast) {
  std::vector<PortSpec> out;
  bool have_clock = false;
  bool have_output = false;
  for (const auto& p : ast.ports) {
    PortSpec spec;
    spec.name = p.name;
    spec.dir = p.dir;
    spec.width = p.width();
    spec.is_signed = p.is_signed;
    if (p.dir == Direction::kOutput) have_output = true;
    const std::string n = lower(p.name);
    if (p.dir == Direction::kInput && spec.width == 1) {
      if (!have_clock && (n == "clk" || n == "clock")) {
        spec.is_clock = true;
        have_clock = true;
      } else if (n.find("rst") != std::string::npos ||
                 n.find("reset") != std::string::npos) {
        spec.is_reset = true;
        spec.reset_active_low = n.back() == 'n';
      }
    }
    out.push_back(spec);
  }
  if (!have_output) throw NoOutputs();
  return out;
}

TestbenchAst generate_testbench(const std::vector<PortSpec>& ports,
                                const StimulusConfig& cfg,
                                const std::string& dut_name) {
  TestbenchAst tb;
  tb.dut_name = dut_name;
  tb.ports = ports;
  tb.clock_half_period = cfg.clock_half_period;
  tb.rng_seed = cfg.rng_seed;
  tb.config = cfg;
  for (std::size_t i = 0; i < ports.size(); ++i) {
    if (ports[i].dir != Direction::kInput) continue;
    if (ports[i].is_clock) {
      tb.clock = static_cast<int>(i);
    } else {
      tb.driven.push_back(i);
    }
  }
  SplitMix64 rng(cfg.rng_seed);
  const int count = std::max(0, cfg.vector_count);
  for (int k = 0; k <= count; ++k) {
    StimulusStep step;
    step.time = k * cfg.step_delay;
    for (std::size_t idx : tb.driven) {
      const PortSpec& p = ports[idx];
      if (p.is_reset) {
        const bool active = k < cfg.reset_steps;
        step.values.push_back(active != p.reset_active_low ? 1 : 0);
      } else if (k == 0) {
        step.values.push_back(0);
      } else {
        step.values.push_back(rng.next() & width_mask(p.width));
      }
    }
    tb.schedule.push_back(std::move(step));
  }
  tb.finish_time = count * cfg.step_delay + cfg.margin;
  return tb;
}

std::string emit_testbench(const TestbenchAst& tb) {
  std::string out = "`timescale 1ns/1ps\nmodule tb;\n";
  for (const auto& p : tb.ports) {
    const std::string range =
        p.width > 1 ? fmt::format("[{}:0] ", p.width - 1) : std::string();
    out += fmt::format("  {} {}{}{};\n", p.dir == Direction::kInput ? "reg" : "wire",
                       p.is_signed ? "signed " : "", range, p.name);
  }
  out += fmt::format("  {} dut (", tb.dut_name);
  for (std::size_t i = 0; i < tb.ports.size(); ++i) {
    if (i) out += ", ";
    out += fmt::format(".{}({})", tb.ports[i].name, tb.ports[i].name);
  }
  out += ");\n";
  if (tb.clock >= 0) {
    const auto& clk = tb.ports[static_cast<std::size_t>(tb.clock)].name;
    out += fmt::format("  initial {} = 1'b0;\n", clk);
    out += fmt::format("  always #{} {} = ~{};\n", tb.clock_half_period, clk, clk);
  }
  std::string fmt_str;
  std::string args;
  for (const auto& p : tb.ports) {
    if (p.dir != Direction::kOutput) continue;
    fmt_str += fmt::format(" {}=%h", p.name);
    args += ", " + p.name;
  }
  out += "  initial begin\n";
  long now = 0;
  for (const auto& step : tb.schedule) {
    if (step.time > now) {
      out += fmt::format("    #{};\n", step.time - now);
      now = step.time;
    }
    for (std::size_t j = 0; j < tb.driven.size(); ++j) {
      const auto& p = tb.ports[tb.driven[j]];
      out += fmt::format("    {} = {}'h{:x};\n", p.name, p.width, step.values[j]);
    }
    out += fmt::format("    #0 $strobe(\"%0t{}\", $time{});\n", fmt_str, args);
  }
  out += fmt::format("    #{};\n    $finish;\n  end\nendmodule\n",
                     tb.finish_time - now);
  return out;
}

}  // namespace hdlmutant
