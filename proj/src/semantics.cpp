#include "hdlmutant/semantics.hpp"

#include <algorithm>
#include <cstdlib>

namespace hdlmutant {

bool is_comparison(BinaryOp op) {
  switch (op) {
    case BinaryOp::kEq:
    case BinaryOp::kNeq:
    case BinaryOp::kCaseEq:
    case BinaryOp::kCaseNeq:
    case BinaryOp::kLt:
    case BinaryOp::kLe:
    case BinaryOp::kGt:
    case BinaryOp::kGe:
      return true;
    default:
      return false;
  }
}

bool is_logical(BinaryOp op) {
  return op == BinaryOp::kLogAnd || op == BinaryOp::kLogOr;
}

bool is_shift(BinaryOp op) {
  return op == BinaryOp::kShl || op == BinaryOp::kShr ||
         op == BinaryOp::kAshl || op == BinaryOp::kAshr;
}

bool is_reduction(UnaryOp op) {
  switch (op) {
    case UnaryOp::kRedAnd:
    case UnaryOp::kRedOr:
    case UnaryOp::kRedXor:
    case UnaryOp::kRedNand:
    case UnaryOp::kRedNor:
    case UnaryOp::kRedXnor:
      return true;
    default:
      return false;
  }
}

std::uint64_t apply_arith(BinaryOp op, std::uint64_t a, std::uint64_t b,
                          int width, bool is_signed) {
  const std::uint64_t m = width_mask(width);
  switch (op) {
    case BinaryOp::kAdd: return (a + b) & m;
    case BinaryOp::kSub: return (a - b) & m;
    case BinaryOp::kMul: return (a * b) & m;
    case BinaryOp::kDiv:
    case BinaryOp::kMod: {
      if ((b & m) == 0) return 0;
      if (is_signed) {
        const std::int64_t x = sign_extend(a, width);
        const std::int64_t y = sign_extend(b, width);
        if (x == INT64_MIN && y == -1)
          return op == BinaryOp::kDiv ? static_cast<std::uint64_t>(x) & m : 0;
        const std::int64_t r = op == BinaryOp::kDiv ? x / y : x % y;
        return static_cast<std::uint64_t>(r) & m;
      }
      const std::uint64_t r = op == BinaryOp::kDiv ? (a & m) / (b & m)
                                                   : (a & m) % (b & m);
      return r & m;
    }
    case BinaryOp::kBitAnd: return a & b & m;
    case BinaryOp::kBitOr: return (a | b) & m;
    case BinaryOp::kBitXor: return (a ^ b) & m;
    case BinaryOp::kBitXnor: return ~(a ^ b) & m;
    default:
      break;
  }
  return 0;
}

bool apply_compare(BinaryOp op, std::uint64_t a, std::uint64_t b, int width,
                   bool is_signed) {
  const std::uint64_t m = width_mask(width);
  a &= m;
  b &= m;
  switch (op) {
    case BinaryOp::kEq:
    case BinaryOp::kCaseEq:
      return a == b;
    case BinaryOp::kNeq:
    case BinaryOp::kCaseNeq:
      return a != b;
    default:
      break;
  }
  if (is_signed) {
    const std::int64_t x = sign_extend(a, width);
    const std::int64_t y = sign_extend(b, width);
    switch (op) {
      case BinaryOp::kLt: return x < y;
      case BinaryOp::kLe: return x <= y;
      case BinaryOp::kGt: return x > y;
      case BinaryOp::kGe: return x >= y;
      default: return false;
    }
  }
  switch (op) {
    case BinaryOp::kLt: return a < b;
    case BinaryOp::kLe: return a <= b;
    case BinaryOp::kGt: return a > b;
    case BinaryOp::kGe: return a >= b;
    default: return false;
  }
}

std::uint64_t apply_shift(BinaryOp op, std::uint64_t a, std::uint64_t amount,
                          int width, bool is_signed) {
  const std::uint64_t m = width_mask(width);
  a &= m;
  if (op == BinaryOp::kShl || op == BinaryOp::kAshl) {
    if (amount >= static_cast<std::uint64_t>(width)) return 0;
    return (a << amount) & m;
  }
  if (op == BinaryOp::kAshr && is_signed) {
    const std::int64_t x = sign_extend(a, width);
    if (amount >= static_cast<std::uint64_t>(width)) return x < 0 ? m : 0;
    return static_cast<std::uint64_t>(x >> amount) & m;
  }
  if (amount >= static_cast<std::uint64_t>(width)) return 0;
  return (a >> amount) & m;
}

std::uint64_t apply_unary(UnaryOp op, std::uint64_t a, int width) {
  const std::uint64_t m = width_mask(width);
  a &= m;
  auto parity = [](std::uint64_t v) {
    return static_cast<std::uint64_t>(__builtin_popcountll(v) & 1);
  };
  switch (op) {
    case UnaryOp::kPlus: return a;
    case UnaryOp::kMinus: return (~a + 1) & m;
    case UnaryOp::kBitNot: return ~a & m;
    case UnaryOp::kLogNot: return a == 0 ? 1 : 0;
    case UnaryOp::kRedAnd: return a == m ? 1 : 0;
    case UnaryOp::kRedNand: return a == m ? 0 : 1;
    case UnaryOp::kRedOr: return a != 0 ? 1 : 0;
    case UnaryOp::kRedNor: return a != 0 ? 0 : 1;
    case UnaryOp::kRedXor: return parity(a);
    case UnaryOp::kRedXnor: return parity(a) ^ 1;
  }
  return 0;
}

int self_width(const Expr& e, const SignalTable& sigs) {
  switch (e.kind) {
    case ExprKind::kLiteral:
      return e.width;
    case ExprKind::kRef: {
      auto it = sigs.find(e.name);
      return it == sigs.end() ? 1 : it->second.width;
    }
    case ExprKind::kBitSelect:
      return 1;
    case ExprKind::kPartSelect:
      return std::abs(e.msb - e.lsb) + 1;
    case ExprKind::kConcat: {
      int w = 0;
      for (const auto& op : e.operands) w += self_width(op, sigs);
      return w;
    }
    case ExprKind::kUnary:
      if (is_reduction(e.unary) || e.unary == UnaryOp::kLogNot) return 1;
      return self_width(e.operands[0], sigs);
    case ExprKind::kBinary:
      if (is_comparison(e.binary) || is_logical(e.binary)) return 1;
      if (is_shift(e.binary)) return self_width(e.operands[0], sigs);
      return std::max(self_width(e.operands[0], sigs),
                      self_width(e.operands[1], sigs));
    case ExprKind::kTernary:
      return std::max(self_width(e.operands[1], sigs),
                      self_width(e.operands[2], sigs));
    case ExprKind::kSignCast:
      return self_width(e.operands[0], sigs);
  }
  return 1;
}

bool self_signed(const Expr& e, const SignalTable& sigs) {
  switch (e.kind) {
    case ExprKind::kLiteral:
      return e.is_signed;
    case ExprKind::kRef: {
      auto it = sigs.find(e.name);
      return it != sigs.end() && it->second.is_signed;
    }
    case ExprKind::kBitSelect:
    case ExprKind::kPartSelect:
    case ExprKind::kConcat:
      return false;
    case ExprKind::kUnary:
      if (is_reduction(e.unary) || e.unary == UnaryOp::kLogNot) return false;
      return self_signed(e.operands[0], sigs);
    case ExprKind::kBinary:
      if (is_comparison(e.binary) || is_logical(e.binary)) return false;
      if (is_shift(e.binary)) return self_signed(e.operands[0], sigs);
      return self_signed(e.operands[0], sigs) &&
             self_signed(e.operands[1], sigs);
    case ExprKind::kTernary:
      return self_signed(e.operands[1], sigs) &&
             self_signed(e.operands[2], sigs);
    case ExprKind::kSignCast:
      return e.to_signed;
  }
  return false;
}

namespace {

using Value = std::optional<std::uint64_t>;

struct Folder {
  const SignalTable& sigs;
  const ConstEnv* env;

  Value fold_self(const Expr& e) const {
    return fold(e, self_width(e, sigs), self_signed(e, sigs));
  }

  Value lookup(const Expr& e) const {
    if (!env) return std::nullopt;
    auto it = env->find(e.name);
    if (it == env->end()) return std::nullopt;
    return it->second;
  }

  Value fold(const Expr& e, int width, bool is_signed) const;
};

Value Folder::fold(const Expr& e, int width, bool is_signed) const {
  const std::uint64_t m = width_mask(width);
  switch (e.kind) {
    case ExprKind::kLiteral:
      return extend(e.value, e.width, is_signed) & m;
    case ExprKind::kRef: {
      auto v = lookup(e);
      if (!v) return std::nullopt;
      const int w = self_width(e, sigs);
      return extend(*v, w, is_signed) & m;
    }
    case ExprKind::kBitSelect: {
      auto v = lookup(e);
      auto idx = fold_self(e.operands[0]);
      if (!v || !idx) return std::nullopt;
      auto it = sigs.find(e.name);
      const int lsb = it == sigs.end() ? 0 : it->second.lsb;
      const int w = it == sigs.end() ? 64 : it->second.width;
      const std::int64_t off = static_cast<std::int64_t>(*idx) - lsb;
      if (off < 0 || off >= w) return 0;
      return (*v >> off) & 1;
    }
    case ExprKind::kPartSelect: {
      auto v = lookup(e);
      if (!v) return std::nullopt;
      auto it = sigs.find(e.name);
      const int lsb = it == sigs.end() ? 0 : it->second.lsb;
      const int w = std::abs(e.msb - e.lsb) + 1;
      return extend((*v >> (std::min(e.msb, e.lsb) - lsb)) & width_mask(w), w,
                    false) & m;
    }
    case ExprKind::kConcat: {
      std::uint64_t acc = 0;
      for (const auto& part : e.operands) {
        const int w = self_width(part, sigs);
        auto v = fold_self(part);
        if (!v) return std::nullopt;
        acc = (w >= 64 ? 0 : acc << w) | (*v & width_mask(w));
      }
      return acc & m;
    }
    case ExprKind::kUnary: {
      if (is_reduction(e.unary) || e.unary == UnaryOp::kLogNot) {
        const auto& op = e.operands[0];
        auto v = fold_self(op);
        if (!v) return std::nullopt;
        return apply_unary(e.unary, *v, self_width(op, sigs));
      }
      auto v = fold(e.operands[0], width, is_signed);
      if (!v) return std::nullopt;
      return apply_unary(e.unary, *v, width);
    }
    case ExprKind::kBinary: {
      const auto& l = e.operands[0];
      const auto& r = e.operands[1];
      if (is_logical(e.binary)) {
        auto a = fold_self(l);
        auto b = fold_self(r);
        const bool is_and = e.binary == BinaryOp::kLogAnd;
        if ((a && (*a != 0) != is_and) || (b && (*b != 0) != is_and))
          return is_and ? 0 : 1;
        if (!a || !b) return std::nullopt;
        return is_and ? ((*a && *b) ? 1 : 0) : ((*a || *b) ? 1 : 0);
      }
      if (is_comparison(e.binary)) {
        const int w = std::max(self_width(l, sigs), self_width(r, sigs));
        const bool s = self_signed(l, sigs) && self_signed(r, sigs);
        auto a = fold(l, w, s);
        auto b = fold(r, w, s);
        if (!a || !b) return std::nullopt;
        return apply_compare(e.binary, *a, *b, w, s) ? 1 : 0;
      }
      if (is_shift(e.binary)) {
        auto a = fold(l, width, is_signed);
        auto b = fold_self(r);
        if (a && *a == 0) return 0;
        if (!a || !b) return std::nullopt;
        return apply_shift(e.binary, *a, *b, width, is_signed);
      }
      auto a = fold(l, width, is_signed);
      auto b = fold(r, width, is_signed);
      if (e.binary == BinaryOp::kBitAnd || e.binary == BinaryOp::kMul) {
        if ((a && *a == 0) || (b && *b == 0)) return 0;
      }
      if (!a || !b) return std::nullopt;
      return apply_arith(e.binary, *a, *b, width, is_signed);
    }
    case ExprKind::kTernary: {
      auto c = fold_self(e.operands[0]);
      if (!c) return std::nullopt;
      return fold(e.operands[*c != 0 ? 1 : 2], width, is_signed);
    }
    case ExprKind::kSignCast: {
      const auto& op = e.operands[0];
      const int w = self_width(op, sigs);
      auto v = fold_self(op);
      if (!v) return std::nullopt;
      return extend(*v, w, is_signed) & m;
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::uint64_t> fold_constant(const Expr& e,
                                           const SignalTable& sigs,
                                           const ConstEnv* env) {
  return Folder{sigs, env}.fold_self(e);
}

std::optional<std::uint64_t> fold_assignment(const Expr& rhs, int lhs_width,
                                             const SignalTable& sigs,
                                             const ConstEnv* env) {
  const int w = std::max(lhs_width, self_width(rhs, sigs));
  auto v = Folder{sigs, env}.fold(rhs, w, self_signed(rhs, sigs));
  if (!v) return std::nullopt;
  return *v & width_mask(lhs_width);
}

std::optional<std::uint64_t> fold_in_context(const Expr& e, int width,
                                             bool is_signed,
                                             const SignalTable& sigs,
                                             const ConstEnv* env) {
  return Folder{sigs, env}.fold(e, width, is_signed);
}

}  // namespace hdlmutant
