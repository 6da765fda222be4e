#include "cases.hpp"

#include <fstream>

#include "hdlmutant/emitter.hpp"
#include "hdlmutant/errors.hpp"
#include "hdlmutant/mutation.hpp"
#include "hdlmutant/parser.hpp"

namespace cases {

using namespace hdlmutant;
namespace fs = std::filesystem;

namespace {

bool has_for(const ModuleAst& ast) {
  bool found = false;
  for_each_stmt(ast, [&](const Stmt& s, const StmtPath&) { found = found || s.kind == StmtKind::kFor; });
  return found;
}

void and_to_or_all(Expr& e) {
  if (e.kind == ExprKind::kBinary && e.binary == BinaryOp::kBitAnd) e.binary = BinaryOp::kBitOr;
  for (auto& o : e.operands) and_to_or_all(o);
}

void and_to_or_all(Stmt& s) {
  and_to_or_all(s.rhs);
  and_to_or_all(s.cond);
  and_to_or_all(s.step);
  for (auto& k : s.body) and_to_or_all(k);
}

}  // namespace

SynthResult trigger_synth(const ToolSpec& tool, const fs::path& design, const fs::path& workdir) {
  fs::create_directories(workdir);
  SynthResult r;
  ModuleAst ast = parse_file(design);
  const bool fire = has_for(ast);
  if (fire && tool.name == "trig_h") {
    r.status = SynthStatus::kHang;
    r.log_excerpt = "killed after timeout\n";
    return r;
  }
  if (fire && tool.name == "trig_c") {
    r.status = SynthStatus::kCrash;
    r.exit_code = 134;
    r.log_excerpt = "assertion failed in opt_loop at 0x4f2a\n";
    return r;
  }
  if (fire && tool.name == "trig_m") {
    for (auto& item : ast.items) {
      and_to_or_all(item.rhs);
      and_to_or_all(item.body);
    }
  }
  r.netlist = ast;
  r.netlist_path = workdir / "netlist.v";
  std::ofstream(r.netlist_path) << emit(ast);
  r.log_excerpt = "ok\n";
  return r;
}

ToolSpec trigger_tool(const std::string& name) {
  ToolSpec t;
  t.name = name;
  t.kind = ToolKind::kIdentity;
  t.timeout_secs = 5;
  return t;
}

ModuleAst with_dead_loop(const ModuleAst& seed) {
  std::string text = emit(seed);
  const auto pos = text.rfind("endmodule");
  text.insert(pos,
              "  reg [7:0] hm_t900;\n"
              "  integer hm_i900;\n"
              "  always @* begin\n"
              "    hm_t900 = 8'd0;\n"
              "    if (1'b0) begin\n"
              "      for (hm_i900 = 0; hm_i900 < 3; hm_i900 = hm_i900 + 1) begin\n"
              "        hm_t900 = hm_t900 + 8'd1;\n"
              "      end\n"
              "    end\n"
              "  end\n");
  return parse(text);
}

bool build_case(const ModuleAst& seed, const std::string& tool_name, std::uint64_t stimulus_seed,
                const fs::path& dir, Case& out) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  const ModuleAst variant = with_dead_loop(seed);
  std::ofstream(dir / "seed.v") << emit(seed);
  std::ofstream(dir / "variant.v") << emit(variant);

  BugRecord& r = out.record;
  r = BugRecord{};
  r.id = dir.filename().string();
  r.dir = dir;
  r.variant_index = 0;
  r.stimulus.vector_count = 40;
  r.stimulus_seed = stimulus_seed;
  r.tool = trigger_tool(tool_name);
  out.tool = r.tool;

  PipelineOptions opts;
  opts.synth = trigger_synth;
  const TestbenchAst tb = record_testbench(r, seed);
  const SideOutcome s = run_side(out.tool, seed, tb, dir / "work" / "seed", opts);
  const SideOutcome v = run_side(out.tool, variant, tb, dir / "work" / "variant", opts);
  const auto f = identify_bug(s, v);
  if (!f) return false;
  r.cls = f->cls;
  r.first_divergence = f->divergence;
  r.fingerprint = fingerprint(*f, tool_name);
  r.variant_statements = statement_count(variant);
  return true;
}

bool still_buggy(const Case& c, const ModuleAst& candidate, const fs::path& workdir) {
  const BugRecord& r = c.record;
  const ModuleAst seed = parse_file(r.dir / "seed.v");
  const TestbenchAst tb = record_testbench(r, seed);
  if (r.cls == BugClass::kMismatch) {
    try {
      if (!check_equivalence(seed, candidate, tb)) return false;
    } catch (const Error&) {
      return false;
    }
  }
  PipelineOptions opts;
  opts.synth = trigger_synth;
  const SideOutcome s = run_side(c.tool, seed, tb, workdir / "seed", opts);
  const SideOutcome v = run_side(c.tool, candidate, tb, workdir / "cand", opts);
  const auto f = identify_bug(s, v);
  if (!f || f->cls != r.cls) return false;
  if (r.cls == BugClass::kMismatch) return f->divergence && r.first_divergence && f->divergence->ports == r.first_divergence->ports;
  return true;
}

}  // namespace cases
