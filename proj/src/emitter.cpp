#include "hdlmutant/emitter.hpp"

#include <fmt/format.h>

namespace hdlmutant {

namespace {

std::string range(int msb, int lsb, int width) {
  if (width == 1 && msb == 0 && lsb == 0) return "";
  return fmt::format("[{}:{}] ", msb, lsb);
}

std::string literal(const Expr& e) {
  if (!e.sized) {
    if (e.is_signed) return fmt::format("{}", e.value);
    return fmt::format("'h{:x}", e.value);
  }
  return fmt::format("{}'{}h{:x}", e.width, e.is_signed ? "s" : "", e.value);
}

void put_stmt(std::string& out, const Stmt& s, int indent);

void put_block(std::string& out, const Stmt& s, int indent) {
  // `s` is always a BeginEnd after parsing; tolerate bare statements from
  // hand-built trees by wrapping on the fly.
  const std::string pad(indent * 2, ' ');
  out += "begin\n";
  if (s.kind == StmtKind::kBeginEnd) {
    for (const auto& child : s.body) put_stmt(out, child, indent + 1);
  } else {
    put_stmt(out, s, indent + 1);
  }
  out += pad + "end";
}

void put_stmt(std::string& out, const Stmt& s, int indent) {
  const std::string pad(indent * 2, ' ');
  switch (s.kind) {
    case StmtKind::kBlockingAssign:
    case StmtKind::kNonBlockingAssign:
      out += fmt::format("{}{} {} {};\n", pad, emit_expr(s.lhs),
                         s.kind == StmtKind::kBlockingAssign ? "=" : "<=",
                         emit_expr(s.rhs));
      return;
    case StmtKind::kIf:
      out += fmt::format("{}if ({}) ", pad, emit_expr(s.cond));
      put_block(out, s.body[0], indent);
      if (s.has_else()) {
        out += " else ";
        put_block(out, s.body[1], indent);
      }
      out += "\n";
      return;
    case StmtKind::kCase:
      out += fmt::format("{}case ({})\n", pad, emit_expr(s.cond));
      for (std::size_t i = 0; i < s.body.size(); ++i) {
        out += pad + "  ";
        const auto& labels = s.case_labels[i];
        if (labels.empty()) {
          out += "default";
        } else {
          for (std::size_t j = 0; j < labels.size(); ++j) {
            if (j) out += ", ";
            out += emit_expr(labels[j]);
          }
        }
        out += ": ";
        put_block(out, s.body[i], indent + 1);
        out += "\n";
      }
      out += pad + "endcase\n";
      return;
    case StmtKind::kFor:
      out += fmt::format("{}for ({} = {}; {}; {} = {}) ", pad, s.lhs.name,
                         emit_expr(s.rhs), emit_expr(s.cond), s.lhs.name,
                         emit_expr(s.step));
      put_block(out, s.body[0], indent);
      out += "\n";
      return;
    case StmtKind::kBeginEnd:
      out += pad;
      put_block(out, s, indent);
      out += "\n";
      return;
  }
}

}  // namespace

std::string emit_expr(const Expr& e) {
  switch (e.kind) {
    case ExprKind::kLiteral:
      return literal(e);
    case ExprKind::kRef:
      return e.name;
    case ExprKind::kBitSelect:
      return fmt::format("{}[{}]", e.name, emit_expr(e.operands[0]));
    case ExprKind::kPartSelect:
      return fmt::format("{}[{}:{}]", e.name, e.msb, e.lsb);
    case ExprKind::kConcat: {
      std::string s = "{";
      for (std::size_t i = 0; i < e.operands.size(); ++i) {
        if (i) s += ", ";
        s += emit_expr(e.operands[i]);
      }
      return s + "}";
    }
    case ExprKind::kUnary:
      return fmt::format("({}{})", to_string(e.unary), emit_expr(e.operands[0]));
    case ExprKind::kBinary:
      return fmt::format("({} {} {})", emit_expr(e.operands[0]),
                         to_string(e.binary), emit_expr(e.operands[1]));
    case ExprKind::kTernary:
      return fmt::format("({} ? {} : {})", emit_expr(e.operands[0]),
                         emit_expr(e.operands[1]), emit_expr(e.operands[2]));
    case ExprKind::kSignCast:
      return fmt::format("{}({})", e.to_signed ? "$signed" : "$unsigned",
                         emit_expr(e.operands[0]));
  }
  return {};
}

std::string emit_stmt(const Stmt& s, int indent) {
  std::string out;
  put_stmt(out, s, indent);
  return out;
}

std::string emit(const ModuleAst& ast) {
  std::string out = fmt::format("module {}(", ast.name);
  for (std::size_t i = 0; i < ast.ports.size(); ++i) {
    const auto& p = ast.ports[i];
    out += i ? ",\n  " : "\n  ";
    out += p.dir == Direction::kInput ? "input " : "output ";
    if (p.is_reg) out += "reg ";
    if (p.is_signed) out += "signed ";
    out += range(p.msb, p.lsb, p.width()) + p.name;
  }
  out += ast.ports.empty() ? ");\n" : "\n);\n";
  for (const auto& n : ast.nets) {
    if (n.kind == NetKind::kInteger) {
      out += fmt::format("  integer {};\n", n.name);
      continue;
    }
    out += fmt::format("  {} {}{}{};\n", n.kind == NetKind::kReg ? "reg" : "wire",
                       n.is_signed ? "signed " : "",
                       range(n.msb, n.lsb, n.width()), n.name);
  }
  for (const auto& item : ast.items) {
    switch (item.kind) {
      case ItemKind::kContinuousAssign:
        out += fmt::format("  assign {} = {};\n", emit_expr(item.lhs),
                           emit_expr(item.rhs));
        break;
      case ItemKind::kAlways: {
        out += "  always ";
        if (item.star) {
          out += "@(*) ";
        } else {
          out += "@(";
          for (std::size_t i = 0; i < item.events.size(); ++i) {
            if (i) out += " or ";
            out += item.events[i].edge == Edge::kPos ? "posedge " : "negedge ";
            out += item.events[i].signal;
          }
          out += ") ";
        }
        put_block(out, item.body, 1);
        out += "\n";
        break;
      }
      case ItemKind::kInitial:
        out += "  initial ";
        put_block(out, item.body, 1);
        out += "\n";
        break;
    }
  }
  out += "endmodule\n";
  return out;
}

}  // namespace hdlmutant
