#include "doctest.h"

#include "hdlmutant/design_gen.hpp"
#include "hdlmutant/emitter.hpp"
#include "hdlmutant/errors.hpp"
#include "hdlmutant/mutation.hpp"
#include "hdlmutant/parser.hpp"
#include "hdlmutant/zombie.hpp"

using namespace hdlmutant;

namespace {

TestbenchAst bench(const ModuleAst& ast, std::uint64_t seed = 11, int n = 30) {
  StimulusConfig cfg;
  cfg.rng_seed = seed;
  cfg.vector_count = n;
  return generate_testbench(extract_ports(ast), cfg);
}

const char* kGuarded = R"(
module g(input [7:0] a, input [7:0] b, output reg [7:0] y, output reg [7:0] z);
  always @* begin
    y = a;
    z = b;
    if (1'b0) begin
      y = a + b;
    end
    if ({a, b} == 16'hbeef) begin
      z = a ^ b;
    end
  end
endmodule
)";

NodeId id_of_assign(const ModuleAst& ast, const std::string& rhs_text) {
  NodeId out = kNoNode;
  for_each_stmt(ast, [&](const Stmt& s, const StmtPath&) {
    if (s.is_assign() && emit_expr(s.rhs) == rhs_text) out = s.id;
  });
  return out;
}

FragmentModel small_model() {
  CorpusStats st;
  st.files_ingested = 1;
  st.sequences = {{"+", "if-else", "^", "<", "?:", "&", "case", "-"}};
  return build_model(st);
}

}  // namespace

TEST_CASE("static and dynamic zombies") {
  auto ast = parse(kGuarded);
  auto cov = simulate(ast, bench(ast)).coverage;
  auto ann = mark_zombie(ast, cov);
  CHECK(ann.zombie_nodes.size() == 2);
  const NodeId dead = id_of_assign(ast, "(a + b)");
  const NodeId rare = id_of_assign(ast, "(a ^ b)");
  REQUIRE(dead != kNoNode);
  REQUIRE(rare != kNoNode);
  CHECK(classify_zombie(dead, ast, cov) == ZombieKind::kStatic);
  CHECK(classify_zombie(rare, ast, cov) == ZombieKind::kDynamic);
  auto region = zombie_region(ast, ann);
  CHECK(region.count(dead));
  CHECK(region.count(rare));
  for (const auto& [id, kind] : ann.zombie_nodes) CHECK(region.count(id));

  // Live statements are not zombies.
  const NodeId live = id_of_assign(ast, "a");
  CHECK_THROWS_AS(classify_zombie(live, ast, cov), NotZombie);
  CHECK_THROWS_AS(classify_zombie(9999, ast, cov), NotZombie);
}

TEST_CASE("sole writer of an observed signal is protected") {
  auto ast = parse(R"(
module p(input [3:0] a, output reg [3:0] y, output reg [3:0] q);
  always @* begin
    q = a;
    if (1'b0) begin
      y = a;
    end
    if (1'b0) begin
      q = ~a;
    end
  end
endmodule
)");
  auto cov = simulate(ast, bench(ast)).coverage;
  auto ann = mark_zombie(ast, cov);
  // The arm holding the only write of output y is protected; the arm that
  // writes q (also written above) is a zombie.
  CHECK(ann.protected_nodes.size() >= 1);
  bool y_protected = false;
  for_each_stmt(ast, [&](const Stmt& s, const StmtPath& path) {
    if (s.is_assign() && emit_expr(s.lhs) == "y") {
      y_protected = ann.protected_nodes.count(s.id) && is_sole_writer(ast, path);
      CHECK_FALSE(ann.zombie_nodes.count(s.id));
    }
    if (s.is_assign() && emit_expr(s.rhs) == "(~a)") CHECK_FALSE(is_sole_writer(ast, path));
  });
  CHECK(y_protected);
}

TEST_CASE("coverage from another design is rejected") {
  auto ast = parse(kGuarded);
  auto other = parse("module o(input a, output y); assign y = a; endmodule");
  auto cov = simulate(other, bench(other)).coverage;
  CHECK_THROWS_AS(mark_zombie(ast, cov), CoverageMismatch);
}

TEST_CASE("pruning any zombie root leaves the trace unchanged") {
  SplitMix64 rng(2024);
  DesignGenOptions opts;
  opts.max_statements = 30;
  int roots = 0;
  for (int i = 0; i < 30; ++i) {
    auto ast = generate_design("z" + std::to_string(i), rng, opts);
    auto tb = bench(ast, rng.next(), 40);
    auto base = simulate(ast, tb);
    auto ann = mark_zombie(ast, base.coverage);
    for (const auto& [id, kind] : ann.zombie_nodes) {
      auto pruned = ast;
      remove_stmt(pruned, *find_stmt(pruned, id));
      INFO(emit(ast));
      CHECK(simulate(pruned, tb).trace == base.trace);
      ++roots;
    }
  }
  CHECK(roots > 0);
}

TEST_CASE("leaf prune keeps the enclosing if") {
  auto ast = parse(kGuarded);
  auto cov = simulate(ast, bench(ast)).coverage;
  auto region = zombie_region(ast, mark_zombie(ast, cov));
  MutationConfig cfg;
  cfg.resample = false;
  cfg.p_leaf_prune = 1.0;
  cfg.p_parent_prune = 0.0;
  SplitMix64 rng(1);
  std::vector<MutationLogEntry> log;
  auto out = prune_visit(ast, ast.items[0].body.id, region, cfg, rng, &log);
  CHECK(log.size() == 2);
  for (const auto& e : log) CHECK(e.action == MutationAction::kPruneLeaf);
  int ifs = 0, assigns = 0;
  for_each_stmt(out, [&](const Stmt& s, const StmtPath&) {
    ifs += s.kind == StmtKind::kIf;
    assigns += s.is_assign();
  });
  CHECK(ifs == 2);
  CHECK(assigns == 2);
  auto again = parse(emit(out));
  CHECK(check_equivalence(ast, again, bench(ast)));
}

TEST_CASE("insertion declares fresh temporaries") {
  auto ast = parse(kGuarded);
  auto cov = simulate(ast, bench(ast)).coverage;
  auto region = zombie_region(ast, mark_zombie(ast, cov));
  auto model = small_model();
  MutationConfig cfg;
  cfg.resample = false;
  cfg.p_leaf_insert = 1.0;
  cfg.p_parent_insert = 0.0;
  SplitMix64 rng(3);
  std::vector<MutationLogEntry> log;
  std::vector<std::vector<std::string>> frags;
  auto out = insert_visit(ast, ast.items[0].body.id, region, model, cfg, rng, &log, &frags);
  CHECK(!log.empty());
  CHECK(frags.size() == log.size());
  CHECK(out.nets.size() > ast.nets.size());
  for (std::size_t i = ast.nets.size(); i < out.nets.size(); ++i) CHECK(out.nets[i].name.rfind("hm_t", 0) == 0);
  auto again = parse(emit(out));
  CHECK(check_equivalence(ast, again, bench(ast)));
}

TEST_CASE("gen_variant is deterministic and verified") {
  auto ast = parse(kGuarded);
  auto tb = bench(ast);
  auto cov = simulate(ast, tb).coverage;
  auto model = small_model();
  MutationConfig cfg;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SplitMix64 r1(seed), r2(seed);
    MutationStats st;
    auto v1 = gen_variant(ast, cov, &model, cfg, tb, r1, &st);
    auto v2 = gen_variant(ast, cov, &model, cfg, tb, r2);
    CHECK(emit(v1.ast) == emit(v2.ast));
    REQUIRE(v1.log.size() == v2.log.size());
    for (std::size_t i = 0; i < v1.log.size(); ++i) CHECK(v1.log[i].summary == v2.log[i].summary);
    if (!v1.log.empty()) {
      CHECK(v1.equivalence == Equivalence::kVerified);
      CHECK(check_equivalence(ast, v1.ast, tb));
    }
    CHECK(st.verified + st.invalid + st.not_equivalent <= st.attempts);
  }
}

TEST_CASE("a design without zombies yields the seed") {
  auto ast = parse("module l(input [3:0] a, output [3:0] y); assign y = a + 1; endmodule");
  auto tb = bench(ast);
  auto cov = simulate(ast, tb).coverage;
  SplitMix64 rng(0);
  MutationConfig cfg;
  auto v = gen_variant(ast, cov, nullptr, cfg, tb, rng);
  CHECK(v.log.empty());
  CHECK(structurally_equal(v.ast, ast));
}
