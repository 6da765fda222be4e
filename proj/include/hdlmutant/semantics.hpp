#pragma once

// Two-state value semantics shared by the simulator, the constant folder and
// the builtin synthesis adapters. Values are at most 64 bits wide and stored
// zero-extended in a uint64_t.

#include <cstdint>
#include <optional>

#include "hdlmutant/ast.hpp"

namespace hdlmutant {

inline std::uint64_t width_mask(int width) {
  return width >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width) - 1;
}

/// Sign-extends the low `width` bits of `v` to 64 bits.
inline std::int64_t sign_extend(std::uint64_t v, int width) {
  if (width >= 64) return static_cast<std::int64_t>(v);
  const std::uint64_t sign = std::uint64_t{1} << (width - 1);
  v &= width_mask(width);
  return static_cast<std::int64_t>((v ^ sign) - sign);
}

/// Extends a `from`-bit value to 64 bits following the operand's signedness.
inline std::uint64_t extend(std::uint64_t v, int from, bool is_signed) {
  return is_signed ? static_cast<std::uint64_t>(sign_extend(v, from))
                   : v & width_mask(from);
}

bool is_comparison(BinaryOp op);
bool is_logical(BinaryOp op);
bool is_shift(BinaryOp op);
bool is_reduction(UnaryOp op);

/// Arithmetic/bitwise/shift binary op evaluated at `width` bits.
/// Division and modulo by zero yield 0.
std::uint64_t apply_arith(BinaryOp op, std::uint64_t a, std::uint64_t b,
                          int width, bool is_signed);
/// Comparison at `width` bits, both operands already extended.
bool apply_compare(BinaryOp op, std::uint64_t a, std::uint64_t b, int width,
                   bool is_signed);
/// Shift of an already-extended `width`-bit value by an unsigned amount.
std::uint64_t apply_shift(BinaryOp op, std::uint64_t a, std::uint64_t amount,
                          int width, bool is_signed);
/// Unary op. Reductions and ! return 0/1; others are masked to `width`.
std::uint64_t apply_unary(UnaryOp op, std::uint64_t a, int width);

/// Self-determined width/signedness per the Verilog sizing rules.
int self_width(const Expr& e, const SignalTable& sigs);
bool self_signed(const Expr& e, const SignalTable& sigs);

/// Known values for a subset of signals during constant folding.
using ConstEnv = std::map<std::string, std::uint64_t>;

/// Evaluates `e` (self-determined) if it is a compile-time constant. Refs
/// not bound in `env` make an expression non-constant, except where
/// short-circuiting (`0 && x`, `1 || x`, `x & 0`, `x * 0`) or a constant
/// ternary condition decides the result.
std::optional<std::uint64_t> fold_constant(const Expr& e,
                                           const SignalTable& sigs,
                                           const ConstEnv* env = nullptr);

/// Folds `rhs` as the right-hand side of an assignment to a `lhs_width`-bit
/// target; the result is truncated to the target width.
std::optional<std::uint64_t> fold_assignment(const Expr& rhs, int lhs_width,
                                             const SignalTable& sigs,
                                             const ConstEnv* env = nullptr);

/// Folds `e` evaluated in a context of `width` bits and `is_signed`.
std::optional<std::uint64_t> fold_in_context(const Expr& e, int width,
                                             bool is_signed,
                                             const SignalTable& sigs,
                                             const ConstEnv* env = nullptr);

}  // namespace hdlmutant
