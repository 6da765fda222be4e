#include "hdlmutant/ast.hpp"

#include "hdlmutant/errors.hpp"

namespace hdlmutant {

Expr Expr::literal(std::uint64_t value, int width, bool is_signed) {
  Expr e;
  e.kind = ExprKind::kLiteral;
  e.width = width;
  e.value = width >= 64 ? value : value & ((std::uint64_t{1} << width) - 1);
  e.is_signed = is_signed;
  e.sized = true;
  return e;
}

Expr Expr::unsized(std::uint64_t value) {
  Expr e;
  e.kind = ExprKind::kLiteral;
  e.width = 32;
  e.value = value & 0xffffffffULL;
  e.is_signed = true;
  e.sized = false;
  return e;
}

Expr Expr::ref(std::string name) {
  Expr e;
  e.kind = ExprKind::kRef;
  e.name = std::move(name);
  return e;
}

Expr Expr::unary_op(UnaryOp op, Expr operand) {
  Expr e;
  e.kind = ExprKind::kUnary;
  e.unary = op;
  e.operands.push_back(std::move(operand));
  return e;
}

Expr Expr::binary_op(BinaryOp op, Expr lhs, Expr rhs) {
  Expr e;
  e.kind = ExprKind::kBinary;
  e.binary = op;
  e.operands.push_back(std::move(lhs));
  e.operands.push_back(std::move(rhs));
  return e;
}

Expr Expr::ternary(Expr cond, Expr then_e, Expr else_e) {
  Expr e;
  e.kind = ExprKind::kTernary;
  e.operands.push_back(std::move(cond));
  e.operands.push_back(std::move(then_e));
  e.operands.push_back(std::move(else_e));
  return e;
}

Expr Expr::bit_select(std::string name, Expr index) {
  Expr e;
  e.kind = ExprKind::kBitSelect;
  e.name = std::move(name);
  e.operands.push_back(std::move(index));
  return e;
}

Expr Expr::part_select(std::string name, int msb, int lsb) {
  Expr e;
  e.kind = ExprKind::kPartSelect;
  e.name = std::move(name);
  e.msb = msb;
  e.lsb = lsb;
  return e;
}

Expr Expr::concat(std::vector<Expr> parts) {
  Expr e;
  e.kind = ExprKind::kConcat;
  e.operands = std::move(parts);
  return e;
}

Expr Expr::sign_cast(bool to_signed, Expr operand) {
  Expr e;
  e.kind = ExprKind::kSignCast;
  e.to_signed = to_signed;
  e.operands.push_back(std::move(operand));
  return e;
}

Stmt Stmt::assign(bool blocking, Expr lhs, Expr rhs) {
  Stmt s;
  s.kind = blocking ? StmtKind::kBlockingAssign : StmtKind::kNonBlockingAssign;
  s.lhs = std::move(lhs);
  s.rhs = std::move(rhs);
  return s;
}

Stmt Stmt::if_else(Expr cond, Stmt then_s, std::optional<Stmt> else_s) {
  Stmt s;
  s.kind = StmtKind::kIf;
  s.cond = std::move(cond);
  s.body.push_back(std::move(then_s));
  if (else_s) s.body.push_back(std::move(*else_s));
  return s;
}

Stmt Stmt::block(std::vector<Stmt> stmts) {
  Stmt s;
  s.kind = StmtKind::kBeginEnd;
  s.body = std::move(stmts);
  return s;
}

SignalTable signal_table(const ModuleAst& ast) {
  SignalTable table;
  for (const auto& p : ast.ports) {
    SignalInfo info;
    info.width = p.width();
    info.msb = p.msb;
    info.lsb = p.lsb;
    info.is_signed = p.is_signed;
    info.is_port = true;
    info.dir = p.dir;
    info.is_reg = p.is_reg;
    table[p.name] = info;
  }
  for (const auto& n : ast.nets) {
    SignalInfo info;
    info.width = n.width();
    info.msb = n.msb;
    info.lsb = n.lsb;
    info.is_signed = n.is_signed;
    info.is_reg = n.kind != NetKind::kWire;
    table[n.name] = info;
  }
  return table;
}

namespace {

void walk_stmt(const Stmt& s, StmtPath& path,
               const std::function<void(const Stmt&, const StmtPath&)>& fn) {
  fn(s, path);
  for (std::size_t i = 0; i < s.body.size(); ++i) {
    path.indices.push_back(i);
    walk_stmt(s.body[i], path, fn);
    path.indices.pop_back();
  }
}

}  // namespace

void for_each_stmt(
    const ModuleAst& ast,
    const std::function<void(const Stmt&, const StmtPath&)>& fn) {
  for (std::size_t i = 0; i < ast.items.size(); ++i) {
    const auto& item = ast.items[i];
    if (item.kind == ItemKind::kContinuousAssign) continue;
    StmtPath path;
    path.item = i;
    walk_stmt(item.body, path, fn);
  }
}

void for_each_expr(const Expr& expr,
                   const std::function<void(const Expr&)>& fn) {
  fn(expr);
  for (const auto& op : expr.operands) for_each_expr(op, fn);
}

void for_each_expr(const Stmt& s, const std::function<void(const Expr&)>& fn) {
  switch (s.kind) {
    case StmtKind::kBlockingAssign:
    case StmtKind::kNonBlockingAssign:
      for_each_expr(s.lhs, fn);
      for_each_expr(s.rhs, fn);
      break;
    case StmtKind::kIf:
      for_each_expr(s.cond, fn);
      break;
    case StmtKind::kCase:
      for_each_expr(s.cond, fn);
      for (const auto& labels : s.case_labels)
        for (const auto& l : labels) for_each_expr(l, fn);
      break;
    case StmtKind::kFor:
      for_each_expr(s.lhs, fn);
      for_each_expr(s.rhs, fn);
      for_each_expr(s.cond, fn);
      for_each_expr(s.step, fn);
      break;
    case StmtKind::kBeginEnd:
      break;
  }
  for (const auto& child : s.body) for_each_expr(child, fn);
}

void for_each_expr(const ModuleAst& ast,
                   const std::function<void(const Expr&)>& fn) {
  for (const auto& item : ast.items) {
    if (item.kind == ItemKind::kContinuousAssign) {
      for_each_expr(item.lhs, fn);
      for_each_expr(item.rhs, fn);
    } else {
      for_each_expr(item.body, fn);
    }
  }
}

std::optional<StmtPath> find_stmt(const ModuleAst& ast, NodeId id) {
  std::optional<StmtPath> found;
  for_each_stmt(ast, [&](const Stmt& s, const StmtPath& path) {
    if (!found && s.id == id) found = path;
  });
  return found;
}

Stmt& stmt_at(ModuleAst& ast, const StmtPath& path) {
  Stmt* s = &ast.items.at(path.item).body;
  for (auto i : path.indices) s = &s->body.at(i);
  return *s;
}

const Stmt& stmt_at(const ModuleAst& ast, const StmtPath& path) {
  const Stmt* s = &ast.items.at(path.item).body;
  for (auto i : path.indices) s = &s->body.at(i);
  return *s;
}

void remove_stmt(ModuleAst& ast, const StmtPath& path) {
  if (path.indices.empty()) {
    Stmt& body = ast.items[path.item].body;
    const NodeId id = body.id;
    body = Stmt::block({});
    body.id = id;
    return;
  }
  StmtPath parent_path = path;
  const std::size_t idx = parent_path.indices.back();
  parent_path.indices.pop_back();
  Stmt& parent = stmt_at(ast, parent_path);
  const auto pos = parent.body.begin() + static_cast<std::ptrdiff_t>(idx);
  if (parent.kind == StmtKind::kBeginEnd || (parent.kind == StmtKind::kIf && idx == 1)) {
    parent.body.erase(pos);
  } else {
    const NodeId id = pos->id;
    *pos = Stmt::block({});
    pos->id = id;
  }
}

namespace {

void number_expr(Expr& e, NodeId& next) {
  e.id = next++;
  for (auto& op : e.operands) number_expr(op, next);
}

void number_stmt(Stmt& s, NodeId& next) {
  s.id = next++;
  switch (s.kind) {
    case StmtKind::kBlockingAssign:
    case StmtKind::kNonBlockingAssign:
      number_expr(s.lhs, next);
      number_expr(s.rhs, next);
      break;
    case StmtKind::kIf:
      number_expr(s.cond, next);
      break;
    case StmtKind::kCase:
      number_expr(s.cond, next);
      for (auto& labels : s.case_labels)
        for (auto& l : labels) number_expr(l, next);
      break;
    case StmtKind::kFor:
      number_expr(s.lhs, next);
      number_expr(s.rhs, next);
      number_expr(s.cond, next);
      number_expr(s.step, next);
      break;
    case StmtKind::kBeginEnd:
      break;
  }
  for (auto& child : s.body) number_stmt(child, next);
}

}  // namespace

void renumber(ModuleAst& ast) {
  NodeId next = 1;
  for (auto& item : ast.items) {
    item.id = next++;
    if (item.kind == ItemKind::kContinuousAssign) {
      number_expr(item.lhs, next);
      number_expr(item.rhs, next);
    } else {
      number_stmt(item.body, next);
    }
  }
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.operands.size() != b.operands.size()) return false;
  switch (a.kind) {
    case ExprKind::kLiteral:
      if (a.value != b.value || a.width != b.width ||
          a.is_signed != b.is_signed || a.sized != b.sized)
        return false;
      break;
    case ExprKind::kRef:
    case ExprKind::kBitSelect:
      if (a.name != b.name) return false;
      break;
    case ExprKind::kPartSelect:
      if (a.name != b.name || a.msb != b.msb || a.lsb != b.lsb) return false;
      break;
    case ExprKind::kUnary:
      if (a.unary != b.unary) return false;
      break;
    case ExprKind::kBinary:
      if (a.binary != b.binary) return false;
      break;
    case ExprKind::kSignCast:
      if (a.to_signed != b.to_signed) return false;
      break;
    case ExprKind::kConcat:
    case ExprKind::kTernary:
      break;
  }
  for (std::size_t i = 0; i < a.operands.size(); ++i)
    if (!structurally_equal(a.operands[i], b.operands[i])) return false;
  return true;
}

bool structurally_equal(const Stmt& a, const Stmt& b) {
  if (a.kind != b.kind || a.body.size() != b.body.size()) return false;
  switch (a.kind) {
    case StmtKind::kBlockingAssign:
    case StmtKind::kNonBlockingAssign:
      if (!structurally_equal(a.lhs, b.lhs) || !structurally_equal(a.rhs, b.rhs))
        return false;
      break;
    case StmtKind::kIf:
      if (!structurally_equal(a.cond, b.cond)) return false;
      break;
    case StmtKind::kCase:
      if (!structurally_equal(a.cond, b.cond) ||
          a.case_labels.size() != b.case_labels.size())
        return false;
      for (std::size_t i = 0; i < a.case_labels.size(); ++i) {
        if (a.case_labels[i].size() != b.case_labels[i].size()) return false;
        for (std::size_t j = 0; j < a.case_labels[i].size(); ++j)
          if (!structurally_equal(a.case_labels[i][j], b.case_labels[i][j]))
            return false;
      }
      break;
    case StmtKind::kFor:
      if (!structurally_equal(a.lhs, b.lhs) ||
          !structurally_equal(a.rhs, b.rhs) ||
          !structurally_equal(a.cond, b.cond) ||
          !structurally_equal(a.step, b.step))
        return false;
      break;
    case StmtKind::kBeginEnd:
      break;
  }
  for (std::size_t i = 0; i < a.body.size(); ++i)
    if (!structurally_equal(a.body[i], b.body[i])) return false;
  return true;
}

bool structurally_equal(const ModuleAst& a, const ModuleAst& b) {
  if (a.name != b.name || a.ports.size() != b.ports.size() ||
      a.nets.size() != b.nets.size() || a.items.size() != b.items.size())
    return false;
  for (std::size_t i = 0; i < a.ports.size(); ++i) {
    const auto& p = a.ports[i];
    const auto& q = b.ports[i];
    if (p.name != q.name || p.dir != q.dir || p.msb != q.msb ||
        p.lsb != q.lsb || p.is_signed != q.is_signed || p.is_reg != q.is_reg)
      return false;
  }
  for (std::size_t i = 0; i < a.nets.size(); ++i) {
    const auto& n = a.nets[i];
    const auto& m = b.nets[i];
    if (n.name != m.name || n.kind != m.kind || n.msb != m.msb ||
        n.lsb != m.lsb || n.is_signed != m.is_signed)
      return false;
  }
  for (std::size_t i = 0; i < a.items.size(); ++i) {
    const auto& x = a.items[i];
    const auto& y = b.items[i];
    if (x.kind != y.kind) return false;
    if (x.kind == ItemKind::kContinuousAssign) {
      if (!structurally_equal(x.lhs, y.lhs) || !structurally_equal(x.rhs, y.rhs))
        return false;
      continue;
    }
    if (x.star != y.star || x.events.size() != y.events.size()) return false;
    for (std::size_t j = 0; j < x.events.size(); ++j)
      if (x.events[j].edge != y.events[j].edge ||
          x.events[j].signal != y.events[j].signal)
        return false;
    if (!structurally_equal(x.body, y.body)) return false;
  }
  return true;
}

NodeClass classify_stmt(const Stmt& stmt) {
  return stmt.is_assign() ? NodeClass::kLeaf : NodeClass::kParent;
}

NodeClass classify_node(NodeId id, const ModuleAst& ast) {
  auto path = find_stmt(ast, id);
  if (!path) throw UnknownNode("no statement with id " + std::to_string(id));
  return classify_stmt(stmt_at(ast, *path));
}

std::size_t statement_count(const ModuleAst& ast) {
  std::size_t n = 0;
  for (const auto& item : ast.items)
    if (item.kind == ItemKind::kContinuousAssign) ++n;
  for_each_stmt(ast, [&](const Stmt&, const StmtPath&) { ++n; });
  return n;
}

void collect_reads(const Expr& expr, std::vector<std::string>& out) {
  for_each_expr(expr, [&](const Expr& e) {
    if (e.kind == ExprKind::kRef || e.kind == ExprKind::kBitSelect ||
        e.kind == ExprKind::kPartSelect)
      out.push_back(e.name);
  });
}

namespace {

// Index expressions of an lvalue are reads; the target itself is not.
void collect_lvalue_reads(const Expr& lhs, std::vector<std::string>& out) {
  if (lhs.kind == ExprKind::kBitSelect) {
    collect_reads(lhs.operands[0], out);
  } else if (lhs.kind == ExprKind::kConcat) {
    for (const auto& part : lhs.operands) collect_lvalue_reads(part, out);
  }
}

void collect_lvalue_targets(const Expr& lhs, std::vector<std::string>& out) {
  if (lhs.kind == ExprKind::kConcat) {
    for (const auto& part : lhs.operands) collect_lvalue_targets(part, out);
  } else {
    out.push_back(lhs.name);
  }
}

}  // namespace

void collect_reads(const Stmt& s, std::vector<std::string>& out) {
  switch (s.kind) {
    case StmtKind::kBlockingAssign:
    case StmtKind::kNonBlockingAssign:
      collect_lvalue_reads(s.lhs, out);
      collect_reads(s.rhs, out);
      break;
    case StmtKind::kIf:
      collect_reads(s.cond, out);
      break;
    case StmtKind::kCase:
      collect_reads(s.cond, out);
      for (const auto& labels : s.case_labels)
        for (const auto& l : labels) collect_reads(l, out);
      break;
    case StmtKind::kFor:
      collect_reads(s.rhs, out);
      collect_reads(s.cond, out);
      collect_reads(s.step, out);
      break;
    case StmtKind::kBeginEnd:
      break;
  }
  for (const auto& child : s.body) collect_reads(child, out);
}

void collect_writes(const Stmt& s, std::vector<std::string>& out) {
  if (s.is_assign()) collect_lvalue_targets(s.lhs, out);
  if (s.kind == StmtKind::kFor) out.push_back(s.lhs.name);
  for (const auto& child : s.body) collect_writes(child, out);
}

std::string to_string(UnaryOp op) {
  switch (op) {
    case UnaryOp::kPlus: return "+";
    case UnaryOp::kMinus: return "-";
    case UnaryOp::kLogNot: return "!";
    case UnaryOp::kBitNot: return "~";
    case UnaryOp::kRedAnd: return "&";
    case UnaryOp::kRedOr: return "|";
    case UnaryOp::kRedXor: return "^";
    case UnaryOp::kRedNand: return "~&";
    case UnaryOp::kRedNor: return "~|";
    case UnaryOp::kRedXnor: return "~^";
  }
  return "?";
}

std::string to_string(BinaryOp op) {
  switch (op) {
    case BinaryOp::kAdd: return "+";
    case BinaryOp::kSub: return "-";
    case BinaryOp::kMul: return "*";
    case BinaryOp::kDiv: return "/";
    case BinaryOp::kMod: return "%";
    case BinaryOp::kLogAnd: return "&&";
    case BinaryOp::kLogOr: return "||";
    case BinaryOp::kBitAnd: return "&";
    case BinaryOp::kBitOr: return "|";
    case BinaryOp::kBitXor: return "^";
    case BinaryOp::kBitXnor: return "~^";
    case BinaryOp::kEq: return "==";
    case BinaryOp::kNeq: return "!=";
    case BinaryOp::kCaseEq: return "===";
    case BinaryOp::kCaseNeq: return "!==";
    case BinaryOp::kLt: return "<";
    case BinaryOp::kLe: return "<=";
    case BinaryOp::kGt: return ">";
    case BinaryOp::kGe: return ">=";
    case BinaryOp::kShl: return "<<";
    case BinaryOp::kShr: return ">>";
    case BinaryOp::kAshl: return "<<<";
    case BinaryOp::kAshr: return ">>>";
  }
  return "?";
}

}  // namespace hdlmutant
