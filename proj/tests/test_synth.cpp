#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "hdlmutant/emitter.hpp"
#include "hdlmutant/errors.hpp"
#include "hdlmutant/parser.hpp"
#include "hdlmutant/rng.hpp"
#include "hdlmutant/synth.hpp"

using namespace hdlmutant;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  auto d = fs::temp_directory_path() / ("hdlmutant-synth-" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

const char* kHooks = R"(
module h(input signed [7:0] p, input signed [7:0] q, output [7:0] y0, output [7:0] y1,
         output [8:0] y2, output y3);
  assign y0 = $signed(p) >>> 1;
  assign y1 = p & q;
  assign y2 = q << 1;
  assign y3 = $signed(p) < $signed(q);
endmodule
)";

fs::path write_design(const fs::path& dir, const std::string& text) {
  auto p = dir / "design.v";
  std::ofstream(p) << text;
  return p;
}

ToolSpec tool(ToolKind k, const std::string& profile = "") {
  ToolSpec t;
  t.name = "t";
  t.kind = k;
  t.fault_profile = profile;
  t.timeout_secs = 1.0;
  return t;
}

}  // namespace

TEST_CASE("identity returns the design") {
  auto d = temp_dir("identity");
  auto src = write_design(d, kHooks);
  auto r = synthesize(tool(ToolKind::kIdentity), src, d / "w");
  CHECK(r.status == SynthStatus::kOk);
  REQUIRE(r.netlist);
  CHECK(structurally_equal(*r.netlist, parse(kHooks)));
  CHECK(fs::exists(d / "w" / "netlist.v"));
  CHECK(fs::exists(d / "w" / "tool.log"));
  fs::remove_all(d);
}

TEST_CASE("fault profiles rewrite one site") {
  auto ast = parse(kHooks);
  CHECK(fault_sites(ast, "and_to_or") == 1);
  CHECK(fault_sites(ast, "drop_signed") == 3);
  CHECK(fault_sites(ast, "off_by_one_shift") == 2);

  auto a = apply_fault(ast, "and_to_or", 0);
  CHECK(emit_expr(a.items[1].rhs) == "(p | q)");

  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    auto b = apply_fault(ast, "drop_signed", seed);
    int casts = 0;
    for_each_expr(b, [&](const Expr& e) { casts += e.kind == ExprKind::kSignCast; });
    CHECK(casts == 2);
    auto c = apply_fault(ast, "off_by_one_shift", seed);
    CHECK_FALSE(structurally_equal(c, ast));
    CHECK(fault_sites(c, "off_by_one_shift") == 2);
  }
  // The chosen occurrence follows splitmix64(seed) % count.
  const std::uint64_t seed = 9;
  const auto idx = SplitMix64(seed).next() % 2;
  auto c = apply_fault(ast, "off_by_one_shift", seed);
  const std::size_t item = idx == 0 ? 0 : 2;
  CHECK(emit_expr(c.items[item].rhs).find("+ 1") != std::string::npos);

  auto plain = parse("module n(input a, output y); assign y = a; endmodule");
  CHECK(structurally_equal(apply_fault(plain, "and_to_or", 3), plain));
}

TEST_CASE("hang is killed at the timeout") {
  auto d = temp_dir("hang");
  auto src = write_design(d, kHooks);
  for (double t : {1.0, 2.0}) {
    auto spec = tool(ToolKind::kHang);
    spec.timeout_secs = t;
    auto r = synthesize(spec, src, d / "w");
    CHECK(r.status == SynthStatus::kHang);
    CHECK(r.elapsed_secs >= t);
    CHECK(r.elapsed_secs <= t + 2.0);
    CHECK(!r.netlist);
  }
  fs::remove_all(d);
}

TEST_CASE("crash terminates with a log line") {
  auto d = temp_dir("crash");
  auto src = write_design(d, kHooks);
  auto r = synthesize(tool(ToolKind::kCrash), src, d / "w");
  CHECK(r.status == SynthStatus::kCrash);
  CHECK(r.term_signal != 0);
  CHECK(r.log_excerpt.find("builtin_crash") != std::string::npos);
  fs::remove_all(d);
}

TEST_CASE("external tool through a command template") {
  auto d = temp_dir("external");
  auto src = write_design(d, kHooks);
  ToolSpec cp;
  cp.name = "cp";
  cp.kind = ToolKind::kExternal;
  cp.command_template = "/bin/cp {input} {output}";
  cp.timeout_secs = 10;
  CHECK_NOTHROW(validate_tool(cp));
  auto r = synthesize(cp, src, d / "w");
  CHECK(r.status == SynthStatus::kOk);
  REQUIRE(r.netlist);
  CHECK(structurally_equal(*r.netlist, parse(kHooks)));

  ToolSpec fail = cp;
  fail.command_template = "/bin/sh -c \"echo boom at 0x1f; exit 3\" {input} {output}";
  auto f = synthesize(fail, src, d / "w2");
  CHECK(f.status == SynthStatus::kCrash);
  CHECK(f.exit_code == 3);
  CHECK(f.log_excerpt.find("boom") != std::string::npos);

  ToolSpec slow = cp;
  slow.command_template = "/bin/sh -c \"exec sleep 30\" {input} {output}";
  slow.timeout_secs = 1;
  auto s = synthesize(slow, src, d / "w3");
  CHECK(s.status == SynthStatus::kHang);
  CHECK(s.elapsed_secs < 3.0);

  ToolSpec missing = cp;
  missing.command_template = "/nonexistent/yosys {input} {output}";
  CHECK_THROWS_AS(synthesize(missing, src, d / "w4"), ToolNotFound);
  fs::remove_all(d);
}

TEST_CASE("split_command") {
  auto argv = split_command("yosys -p \"read_verilog {input}; write {output}\" -q",
                            {{"{input}", "a.v"}, {"{output}", "b.v"}});
  CHECK(argv == std::vector<std::string>{"yosys", "-p", "read_verilog a.v; write b.v", "-q"});
  CHECK(split_command("  x   y ", {}) == std::vector<std::string>{"x", "y"});
}

TEST_CASE("tool spec validation and JSON") {
  ToolSpec ext;
  ext.name = "e";
  ext.kind = ToolKind::kExternal;
  ext.command_template = "tool {input}";
  CHECK_THROWS_AS(validate_tool(ext), ConfigError);
  ToolSpec bad = tool(ToolKind::kFaulty, "flip_everything");
  CHECK_THROWS_AS(validate_tool(bad), ConfigError);

  ToolSpec f = tool(ToolKind::kFaulty, "drop_signed");
  f.fault_seed = 17;
  auto back = tool_from_json(tool_to_json(f));
  CHECK(back.kind == ToolKind::kFaulty);
  CHECK(back.fault_profile == "drop_signed");
  CHECK(back.fault_seed == 17);
  for (auto k : {ToolKind::kExternal, ToolKind::kIdentity, ToolKind::kFaulty, ToolKind::kHang, ToolKind::kCrash})
    CHECK(tool_kind_from_string(to_string(k)) == k);
}

TEST_CASE("unwritable workdir") {
  auto d = temp_dir("wd");
  auto src = write_design(d, kHooks);
  std::ofstream(d / "file") << "x";
  CHECK_THROWS_AS(synthesize(tool(ToolKind::kIdentity), src, d / "file" / "sub"), WorkdirError);
  fs::remove_all(d);
}
