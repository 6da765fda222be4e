#include "hdlmutant/zombie.hpp"

#include <set>
#include <string>

#include "hdlmutant/errors.hpp"
#include "hdlmutant/parser.hpp"
#include "hdlmutant/semantics.hpp"

namespace hdlmutant {

namespace {

void lvalue_targets(const Expr& lhs, std::set<std::string>& out) {
  if (lhs.kind == ExprKind::kConcat) {
    for (const auto& p : lhs.operands) lvalue_targets(p, out);
  } else {
    out.insert(lhs.name);
  }
}

void lvalue_reads(const Expr& lhs, std::set<std::string>& out) {
  std::vector<std::string> tmp;
  if (lhs.kind == ExprKind::kConcat) {
    for (const auto& p : lhs.operands) lvalue_reads(p, out);
    return;
  }
  if (lhs.kind == ExprKind::kBitSelect) collect_reads(lhs.operands[0], tmp);
  out.insert(tmp.begin(), tmp.end());
}

void expr_reads(const Expr& e, std::set<std::string>& out) {
  std::vector<std::string> tmp;
  collect_reads(e, tmp);
  out.insert(tmp.begin(), tmp.end());
}

struct Access {
  std::set<std::string> reads;
  std::set<std::string> writes;
};

// Reads and writes of `s`, skipping the subtree rooted at `skip`.
void gather(const Stmt& s, NodeId skip, Access& acc) {
  if (s.id == skip && skip != kNoNode) return;
  switch (s.kind) {
    case StmtKind::kBlockingAssign:
    case StmtKind::kNonBlockingAssign:
      lvalue_targets(s.lhs, acc.writes);
      lvalue_reads(s.lhs, acc.reads);
      expr_reads(s.rhs, acc.reads);
      break;
    case StmtKind::kIf:
      expr_reads(s.cond, acc.reads);
      break;
    case StmtKind::kCase:
      expr_reads(s.cond, acc.reads);
      for (const auto& labels : s.case_labels)
        for (const auto& l : labels) expr_reads(l, acc.reads);
      break;
    case StmtKind::kFor:
      acc.writes.insert(s.lhs.name);
      expr_reads(s.rhs, acc.reads);
      expr_reads(s.cond, acc.reads);
      expr_reads(s.step, acc.reads);
      break;
    case StmtKind::kBeginEnd:
      break;
  }
  for (const auto& k : s.body) gather(k, skip, acc);
}

Access gather_design(const ModuleAst& ast, NodeId skip) {
  Access acc;
  for (const auto& item : ast.items) {
    if (item.kind == ItemKind::kContinuousAssign) {
      lvalue_targets(item.lhs, acc.writes);
      lvalue_reads(item.lhs, acc.reads);
      expr_reads(item.rhs, acc.reads);
    } else {
      for (const auto& ev : item.events) acc.reads.insert(ev.signal);
      gather(item.body, skip, acc);
    }
  }
  return acc;
}

bool sole_writer(const ModuleAst& ast, const Stmt& s) {
  Access inside;
  gather(s, kNoNode, inside);
  if (inside.writes.empty()) return false;
  const Access outside = gather_design(ast, s.id);
  for (const auto& x : inside.writes) {
    if (outside.writes.count(x)) continue;
    if (outside.reads.count(x)) return true;
    for (const auto& p : ast.ports)
      if (p.name == x && p.dir == Direction::kOutput) return true;
  }
  return false;
}

bool case_arm_excluded(const Stmt& c, std::size_t arm, const SignalTable& sigs) {
  int cw = self_width(c.cond, sigs);
  bool cs = self_signed(c.cond, sigs);
  for (const auto& labels : c.case_labels) {
    for (const auto& l : labels) {
      cw = std::max(cw, self_width(l, sigs));
      cs = cs && self_signed(l, sigs);
    }
  }
  auto label_value = [&](const Expr& l) { return fold_in_context(l, cw, cs, sigs); };
  const auto subject = fold_in_context(c.cond, cw, cs, sigs);
  if (subject) {
    // The first arm holding an equal label wins; otherwise the default.
    int winner = -1;
    for (std::size_t i = 0; i < c.case_labels.size() && winner < 0; ++i) {
      for (const auto& l : c.case_labels[i]) {
        auto v = label_value(l);
        if (!v) return false;
        if (*v == *subject) {
          winner = static_cast<int>(i);
          break;
        }
      }
    }
    if (winner < 0) {
      for (std::size_t i = 0; i < c.case_labels.size(); ++i)
        if (c.case_labels[i].empty()) {
          winner = static_cast<int>(i);
          break;
        }
    }
    return winner != static_cast<int>(arm);
  }
  const auto& mine = c.case_labels[arm];
  if (mine.empty()) {
    // A default arm after an earlier default is shadowed.
    for (std::size_t i = 0; i < arm; ++i)
      if (c.case_labels[i].empty()) return true;
    return false;
  }
  // Every label already claimed by an earlier arm.
  std::set<std::uint64_t> earlier;
  for (std::size_t i = 0; i < arm; ++i) {
    for (const auto& l : c.case_labels[i]) {
      auto v = label_value(l);
      if (!v) return false;
      earlier.insert(*v);
    }
  }
  for (const auto& l : mine) {
    auto v = label_value(l);
    if (!v || !earlier.count(*v)) return false;
  }
  return true;
}

// True if entering child `idx` of `parent` is impossible by constant folding.
bool edge_excluded(const Stmt& parent, std::size_t idx, const SignalTable& sigs) {
  switch (parent.kind) {
    case StmtKind::kIf: {
      auto c = fold_constant(parent.cond, sigs);
      if (!c) return false;
      return idx == 0 ? *c == 0 : *c != 0;
    }
    case StmtKind::kCase:
      return case_arm_excluded(parent, idx, sigs);
    case StmtKind::kFor:
      try {
        return static_trip_count(parent, sigs) == 0;
      } catch (const Error&) {
        return false;
      }
    default:
      return false;
  }
}

bool path_excluded(const ModuleAst& ast, const StmtPath& path, const SignalTable& sigs) {
  const Stmt* cur = &ast.items[path.item].body;
  for (std::size_t idx : path.indices) {
    if (edge_excluded(*cur, idx, sigs)) return true;
    cur = &cur->body[idx];
  }
  return false;
}

}  // namespace

bool is_sole_writer(const ModuleAst& ast, const StmtPath& path) {
  return sole_writer(ast, stmt_at(ast, path));
}

ZombieAnnotation mark_zombie(const ModuleAst& ast, const CoverageReport& cov) {
  std::set<NodeId> ids;
  for (const auto& item : ast.items)
    if (item.kind == ItemKind::kContinuousAssign) ids.insert(item.id);
  for_each_stmt(ast, [&](const Stmt& s, const StmtPath&) { ids.insert(s.id); });
  if (ids.size() != cov.line_hits.size())
    throw CoverageMismatch("coverage has " + std::to_string(cov.line_hits.size()) +
                           " statements, design has " + std::to_string(ids.size()));
  for (const auto& [id, hits] : cov.line_hits)
    if (!ids.count(id)) throw CoverageMismatch("coverage names unknown node " + std::to_string(id));

  const SignalTable sigs = signal_table(ast);
  ZombieAnnotation ann;
  auto hits = [&](NodeId id) { return cov.line_hits.at(id); };
  std::function<bool(const Stmt&)> all_zero = [&](const Stmt& s) {
    if (hits(s.id) != 0) return false;
    for (const auto& k : s.body)
      if (!all_zero(k)) return false;
    return true;
  };
  std::function<void(const Stmt&, StmtPath&)> visit = [&](const Stmt& s, StmtPath& path) {
    if (all_zero(s)) {
      if (sole_writer(ast, s)) {
        ann.protected_nodes.insert(s.id);
      } else {
        ann.zombie_nodes[s.id] =
            path_excluded(ast, path, sigs) ? ZombieKind::kStatic : ZombieKind::kDynamic;
        return;
      }
    }
    for (std::size_t i = 0; i < s.body.size(); ++i) {
      path.indices.push_back(i);
      visit(s.body[i], path);
      path.indices.pop_back();
    }
  };
  for (std::size_t i = 0; i < ast.items.size(); ++i) {
    if (ast.items[i].kind == ItemKind::kContinuousAssign) continue;
    StmtPath path{i, {}};
    visit(ast.items[i].body, path);
  }
  return ann;
}

ZombieKind classify_zombie(NodeId node, const ModuleAst& ast, const CoverageReport& cov) {
  auto path = find_stmt(ast, node);
  auto it = cov.line_hits.find(node);
  if (!path || it == cov.line_hits.end() || it->second != 0)
    throw NotZombie("node " + std::to_string(node) + " is not a zero-hit statement");
  return path_excluded(ast, *path, signal_table(ast)) ? ZombieKind::kStatic
                                                      : ZombieKind::kDynamic;
}

std::set<NodeId> zombie_region(const ModuleAst& ast, const ZombieAnnotation& ann) {
  std::set<NodeId> out;
  std::function<void(const Stmt&, bool)> walk = [&](const Stmt& s, bool inside) {
    inside = inside || ann.zombie_nodes.count(s.id);
    if (inside) out.insert(s.id);
    for (const auto& k : s.body) walk(k, inside);
  };
  for (const auto& item : ast.items)
    if (item.kind != ItemKind::kContinuousAssign) walk(item.body, false);
  return out;
}

}  // namespace hdlmutant
