#include "doctest.h"

#include "hdlmutant/errors.hpp"
#include "hdlmutant/parser.hpp"
#include "hdlmutant/rng.hpp"
#include "hdlmutant/semantics.hpp"
#include "hdlmutant/testbench.hpp"

using namespace hdlmutant;

TEST_CASE("splitmix64 stream is frozen") {
  // Reference values from an independent implementation of the generator.
  SplitMix64 g(42);
  CHECK(g.next() == 0xbdd732262feb6e95ULL);
  CHECK(g.next() == 0x28efe333b266f103ULL);
  CHECK(g.next() == 0x47526757130f9f52ULL);
  CHECK(g.next() == 0x581ce1ff0e4ae394ULL);
  CHECK(g.next() == 0x09bc585a244823f2ULL);
}

TEST_CASE("port extraction finds clock and resets") {
  auto ast = parse(R"(
module m(input CLK, input rst_n, input reset, input [3:0] d, output [3:0] q);
  assign q = d;
endmodule
)");
  auto ports = extract_ports(ast);
  REQUIRE(ports.size() == 5);
  CHECK(ports[0].is_clock);
  CHECK(ports[1].is_reset);
  CHECK(ports[1].reset_active_low);
  CHECK(ports[2].is_reset);
  CHECK_FALSE(ports[2].reset_active_low);
  CHECK_FALSE(ports[3].is_reset);
  CHECK(ports[3].width == 4);

  CHECK_THROWS_AS(extract_ports(parse("module n(input a); endmodule")), NoOutputs);
}

TEST_CASE("schedule layout") {
  auto ast = parse(R"(
module m(input clk, input rst_n, input [5:0] d, output [5:0] q);
  assign q = d;
endmodule
)");
  StimulusConfig cfg;
  cfg.rng_seed = 42;
  cfg.vector_count = 4;
  auto tb = generate_testbench(extract_ports(ast), cfg);
  CHECK(tb.clock == 0);
  REQUIRE(tb.driven.size() == 2);  // rst_n, d
  REQUIRE(tb.schedule.size() == 5);
  CHECK(tb.finish_time == 4 * 10 + 10);
  CHECK(tb.finish_time == cfg.total_horizon());

  // Time 0: everything zero, active-low reset asserted.
  CHECK(tb.schedule[0].time == 0);
  CHECK(tb.schedule[0].values == std::vector<std::uint64_t>{0, 0});
  // Held for reset_steps entries, then released.
  CHECK(tb.schedule[1].values[0] == 0);
  CHECK(tb.schedule[2].values[0] == 1);

  // Data draws follow the generator, masked to the port width.
  SplitMix64 g(42);
  for (int k = 1; k <= 4; ++k) {
    CHECK(tb.schedule[static_cast<std::size_t>(k)].time == k * 10);
    CHECK(tb.schedule[static_cast<std::size_t>(k)].values[1] == (g.next() & 0x3f));
  }

  auto again = generate_testbench(extract_ports(ast), cfg);
  CHECK(again.schedule.size() == tb.schedule.size());
  for (std::size_t k = 0; k < tb.schedule.size(); ++k) CHECK(again.schedule[k].values == tb.schedule[k].values);

  auto text = emit_testbench(tb);
  CHECK(text.find("module tb") != std::string::npos);
  CHECK(text.find("$finish") != std::string::npos);
}

TEST_CASE("value semantics by hand") {
  CHECK(width_mask(1) == 1);
  CHECK(width_mask(64) == ~std::uint64_t{0});
  CHECK(sign_extend(0x80, 8) == -128);
  CHECK(sign_extend(0x7f, 8) == 127);
  CHECK(extend(0xf, 4, true) == ~std::uint64_t{0});
  CHECK(extend(0xf, 4, false) == 0xf);

  CHECK(apply_arith(BinaryOp::kAdd, 0xff, 1, 8, false) == 0);
  CHECK(apply_arith(BinaryOp::kDiv, 7, 0, 8, false) == 0);
  CHECK(apply_arith(BinaryOp::kMod, 7, 0, 8, false) == 0);
  // -7 / 2 = -3, -7 % 2 = -1 (truncating toward zero).
  CHECK(apply_arith(BinaryOp::kDiv, extend(0xf9, 8, true), 2, 8, true) == 0xfd);
  CHECK(apply_arith(BinaryOp::kMod, extend(0xf9, 8, true), 2, 8, true) == 0xff);
  CHECK(apply_compare(BinaryOp::kLt, extend(0x80, 8, true), 1, 8, true));
  CHECK_FALSE(apply_compare(BinaryOp::kLt, 0x80, 1, 8, false));
  CHECK(apply_shift(BinaryOp::kAshr, extend(0x80, 8, true), 3, 8, true) == 0xf0);
  CHECK(apply_shift(BinaryOp::kShr, 0x80, 3, 8, true) == 0x10);
  CHECK(apply_shift(BinaryOp::kShl, 0x81, 1, 8, false) == 0x02);
  CHECK(apply_unary(UnaryOp::kRedXor, 0b1011, 4) == 1);
  CHECK(apply_unary(UnaryOp::kRedAnd, 0b1111, 4) == 1);
  CHECK(apply_unary(UnaryOp::kRedNor, 0, 4) == 1);
  CHECK(apply_unary(UnaryOp::kMinus, 1, 4) == 0xf);
}

TEST_CASE("constant folding") {
  auto ast = parse(R"(
module m(input [3:0] a, output [3:0] y);
  assign y = a;
endmodule
)");
  auto sigs = signal_table(ast);
  auto a = Expr::ref("a");
  CHECK(fold_constant(Expr::binary_op(BinaryOp::kLogAnd, Expr::literal(0, 1), a), sigs) == 0u);
  CHECK(fold_constant(Expr::binary_op(BinaryOp::kBitAnd, a, Expr::literal(0, 4)), sigs) == 0u);
  CHECK_FALSE(fold_constant(Expr::binary_op(BinaryOp::kAdd, a, Expr::literal(1, 4)), sigs).has_value());
  ConstEnv env{{"a", 3}};
  CHECK(fold_constant(Expr::binary_op(BinaryOp::kAdd, a, Expr::literal(1, 4)), sigs, &env) == 4u);
  // 4'hf + 4'h1 in a 5-bit context keeps the carry.
  auto sum = Expr::binary_op(BinaryOp::kAdd, Expr::literal(0xf, 4), Expr::literal(1, 4));
  CHECK(fold_assignment(sum, 5, sigs) == 0x10u);
  CHECK(fold_assignment(sum, 4, sigs) == 0u);
  CHECK(self_width(sum, sigs) == 4);
  CHECK(self_width(Expr::concat({a, a}), sigs) == 8);
  CHECK(self_signed(Expr::sign_cast(true, a), sigs));
}
