#include "doctest.h"

#include "hdlmutant/design_gen.hpp"
#include "hdlmutant/errors.hpp"
#include "hdlmutant/parser.hpp"
#include "hdlmutant/sim.hpp"
#include "hdlmutant/testbench.hpp"
#include "reference_sim.hpp"

using namespace hdlmutant;

namespace {

TestbenchAst bench(const ModuleAst& ast, std::uint64_t seed = 7, int n = 20) {
  StimulusConfig cfg;
  cfg.rng_seed = seed;
  cfg.vector_count = n;
  return generate_testbench(extract_ports(ast), cfg);
}

const char* kCounter = R"(
module counter(input clk, input rst_n, input en, output reg [3:0] q);
  always @(posedge clk or negedge rst_n)
    if (!rst_n) q <= 4'd0;
    else if (en) q <= q + 1;
endmodule
)";

}  // namespace

TEST_CASE("counter trace by hand") {
  auto ast = parse(kCounter);
  StimulusConfig cfg;
  cfg.vector_count = 6;
  auto tb = generate_testbench(extract_ports(ast), cfg);
  // Hold enable high after reset.
  for (std::size_t k = 0; k < tb.schedule.size(); ++k)
    for (std::size_t j = 0; j < tb.driven.size(); ++j) {
      const auto& p = tb.ports[tb.driven[j]];
      if (p.name == "en") tb.schedule[k].values[j] = 1;
      if (p.name == "rst_n") tb.schedule[k].values[j] = k < 2 ? 0 : 1;
    }
  auto r = simulate(ast, tb);
  REQUIRE(r.trace.ports == std::vector<std::string>{"q"});
  // Samples at 0,10,...,60. The clock rises at 5,15,25,...; reset is
  // released at 20, so the first count lands at 25.
  CHECK(r.trace.sample_times == std::vector<long>{0, 10, 20, 30, 40, 50, 60});
  CHECK(r.trace.values[0] == std::vector<std::uint64_t>{0, 0, 0, 1, 2, 3, 4});
  CHECK(refsim::run(ast, tb) == r.trace);
}

TEST_CASE("combinational loop is detected") {
  auto ast = parse(R"(
module loop(input a, output y);
  wire p;
  wire q;
  assign p = ~q ^ a;
  assign q = p;
  assign y = q;
endmodule
)");
  CHECK_THROWS_AS(simulate(ast, bench(ast)), CombinationalLoop);
}

TEST_CASE("coverage counts zero for a dead branch") {
  auto ast = parse(R"(
module g(input [3:0] a, output reg [3:0] y);
  always @* begin
    y = a;
    if (1'b0) y = 4'd9;
  end
endmodule
)");
  auto r = simulate(ast, bench(ast));
  std::uint64_t zero_assigns = 0;
  for_each_stmt(ast, [&](const Stmt& s, const StmtPath&) {
    if (s.is_assign() && r.coverage.line_hits.at(s.id) == 0) ++zero_assigns;
  });
  CHECK(zero_assigns == 1);
  auto sum = coverage_summary(r.coverage);
  CHECK(sum.line_pct < 100.0);
  CHECK(sum.branch_pct == doctest::Approx(50.0));
  auto empty = empty_coverage(ast);
  CHECK(empty.line_hits.size() == r.coverage.line_hits.size());
}

TEST_CASE("compare_traces reports first divergence and port set") {
  Trace a;
  a.ports = {"x", "y"};
  a.sample_times = {0, 10, 20};
  a.values = {{1, 2, 3}, {0, 0, 0}};
  Trace b = a;
  CHECK(compare_traces(a, b).equivalent);
  b.values[1][2] = 5;
  b.values[0][1] = 7;
  auto v = compare_traces(a, b);
  CHECK_FALSE(v.equivalent);
  CHECK(v.first_time == 10);
  CHECK(v.port == "x");
  CHECK(v.diverging_ports == std::vector<std::string>{"x", "y"});
  Trace c = a;
  c.sample_times.pop_back();
  c.values[0].pop_back();
  c.values[1].pop_back();
  CHECK_THROWS_AS(compare_traces(a, c), ShapeMismatch);
}

TEST_CASE("signed arithmetic edge cases agree with the reference") {
  auto ast = parse(R"(
module s(input signed [7:0] a, input signed [7:0] b, input [2:0] n,
         output [7:0] q, output [7:0] r, output [7:0] sh, output lt, output [15:0] wide);
  assign q = a / b;
  assign r = a % b;
  assign sh = a >>> n;
  assign lt = a < b;
  assign wide = a * b;
endmodule
)");
  auto tb = bench(ast, 3, 60);
  CHECK(refsim::run(ast, tb) == simulate(ast, tb).trace);
}

TEST_CASE("simulator agrees with the reference on generated designs") {
  SplitMix64 rng(99);
  DesignGenOptions opts;
  opts.max_statements = 20;
  for (int i = 0; i < 40; ++i) {
    auto ast = generate_design("d" + std::to_string(i), rng, opts);
    auto tb = bench(ast, rng.next(), 25);
    INFO(i);
    CHECK(refsim::run(ast, tb) == simulate(ast, tb).trace);
  }
}
