#include "hdlmutant/design_gen.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <set>

#include "hdlmutant/emitter.hpp"
#include "hdlmutant/errors.hpp"
#include "hdlmutant/parser.hpp"
#include "hdlmutant/semantics.hpp"

namespace hdlmutant {

namespace {

struct Sig {
  std::string name;
  int width = 1;
  bool is_signed = false;
};

using Scope = std::vector<Sig>;

constexpr BinaryOp kAllBinary[] = {
    BinaryOp::kAdd,    BinaryOp::kSub,    BinaryOp::kMul,    BinaryOp::kDiv,
    BinaryOp::kMod,    BinaryOp::kLogAnd, BinaryOp::kLogOr,  BinaryOp::kBitAnd,
    BinaryOp::kBitOr,  BinaryOp::kBitXor, BinaryOp::kBitXnor, BinaryOp::kEq,
    BinaryOp::kNeq,    BinaryOp::kCaseEq, BinaryOp::kCaseNeq, BinaryOp::kLt,
    BinaryOp::kLe,     BinaryOp::kGt,     BinaryOp::kGe,     BinaryOp::kShl,
    BinaryOp::kShr,    BinaryOp::kAshl,   BinaryOp::kAshr,
};

constexpr UnaryOp kAllUnary[] = {
    UnaryOp::kPlus,   UnaryOp::kMinus,  UnaryOp::kLogNot,  UnaryOp::kBitNot, UnaryOp::kRedAnd,
    UnaryOp::kRedOr,  UnaryOp::kRedXor, UnaryOp::kRedNand, UnaryOp::kRedNor, UnaryOp::kRedXnor,
};

constexpr BinaryOp kCompare[] = {BinaryOp::kEq, BinaryOp::kNeq, BinaryOp::kLt,
                                 BinaryOp::kLe, BinaryOp::kGt,  BinaryOp::kGe};

std::size_t count_stmt(const Stmt& s) {
  std::size_t n = 1;
  for (const auto& k : s.body) n += count_stmt(k);
  return n;
}

class Gen {
 public:
  Gen(SplitMix64& rng, const DesignGenOptions& o) : rng_(rng), o_(o) {}

  ModuleAst build(const std::string& name);

 private:
  int pick(int lo, int hi) { return lo + static_cast<int>(rng_.below(static_cast<std::uint64_t>(hi - lo + 1))); }
  bool coin(double p) { return rng_.coin(p); }
  template <class T, std::size_t N>
  T choose(const T (&arr)[N]) {
    return arr[rng_.below(N)];
  }
  const Sig& choose(const Scope& s) { return s[rng_.below(s.size())]; }

  std::uint64_t random_value(int w) { return rng_.next() & width_mask(w); }

  Expr literal(int max_w) {
    if (coin(0.3)) return Expr::unsized(static_cast<std::uint64_t>(pick(0, 20)));
    const int w = pick(1, max_w);
    return Expr::literal(random_value(w), w, coin(0.25));
  }

  Expr leaf(const Scope& scope, bool allow_unsized = true) {
    const double r = rng_.uniform();
    const Sig& s = choose(scope);
    if (r < 0.6 || (s.width == 1 && r < 0.85)) return Expr::ref(s.name);
    if (r < 0.72 && s.width > 1) {
      if (coin(0.8)) return Expr::bit_select(s.name, Expr::unsized(rng_.below(s.width)));
      return Expr::bit_select(s.name, Expr::ref(choose(scope).name));
    }
    if (r < 0.85 && s.width > 1) {
      const int msb = pick(0, s.width - 1);
      return Expr::part_select(s.name, msb, pick(0, msb));
    }
    if (!allow_unsized) {
      const int w = pick(1, 8);
      return Expr::literal(random_value(w), w, coin(0.25));
    }
    return literal(o_.max_width);
  }

  Expr expr(const Scope& scope, int depth) {
    if (depth <= 0 || coin(0.25)) return leaf(scope);
    const double r = rng_.uniform();
    if (r < 0.12) return Expr::unary_op(choose(kAllUnary), expr(scope, depth - 1));
    if (r < 0.72) {
      const BinaryOp op = choose(kAllBinary);
      Expr lhs = expr(scope, depth - 1);
      Expr rhs = is_shift(op) && coin(0.7) ? Expr::unsized(rng_.below(5)) : expr(scope, depth - 1);
      return Expr::binary_op(op, std::move(lhs), std::move(rhs));
    }
    if (r < 0.82) return Expr::ternary(cond(scope, depth - 1), expr(scope, depth - 1), expr(scope, depth - 1));
    if (r < 0.92) return Expr::sign_cast(coin(0.7), expr(scope, depth - 1));
    std::vector<Expr> parts;
    const int n = pick(2, 3);
    for (int i = 0; i < n; ++i) parts.push_back(leaf(scope, false));
    if (coin(0.2)) parts.assign(static_cast<std::size_t>(n), parts[0]);
    return Expr::concat(std::move(parts));
  }

  Expr cond(const Scope& scope, int depth) {
    const double r = rng_.uniform();
    if (r < 0.6)
      return Expr::binary_op(choose(kCompare), expr(scope, std::max(0, depth - 1)), expr(scope, std::max(0, depth - 1)));
    if (r < 0.75) return Expr::unary_op(coin(0.5) ? UnaryOp::kRedOr : UnaryOp::kRedXor, leaf(scope));
    if (r < 0.85) return Expr::binary_op(coin(0.5) ? BinaryOp::kLogAnd : BinaryOp::kLogOr, leaf(scope), leaf(scope));
    return Expr::ref(choose(scope).name);
  }

  /// Rarely or never true.
  Expr zombie_guard(const Scope& inputs) {
    if (coin(0.35)) {
      switch (pick(0, 2)) {
        case 0: return Expr::literal(0, 1);
        case 1: {
          const int a = pick(0, 6);
          return Expr::binary_op(BinaryOp::kGt, Expr::literal(static_cast<std::uint64_t>(a), 4),
                                 Expr::literal(static_cast<std::uint64_t>(a + pick(1, 8)), 4));
        }
        default:
          return Expr::binary_op(BinaryOp::kLogAnd, Expr::unsized(0), Expr::ref(inputs[0].name));
      }
    }
    // Equality against a constant over at least 16 input bits.
    std::vector<const Sig*> wide;
    for (const auto& s : inputs) wide.push_back(&s);
    std::sort(wide.begin(), wide.end(), [](const Sig* a, const Sig* b) { return a->width > b->width; });
    Expr g;
    int bits = 0;
    for (const Sig* s : wide) {
      Expr eq = Expr::binary_op(BinaryOp::kEq, Expr::ref(s->name),
                                Expr::literal(random_value(s->width), s->width));
      g = bits == 0 ? std::move(eq) : Expr::binary_op(BinaryOp::kLogAnd, std::move(g), std::move(eq));
      bits += s->width;
      if (bits >= 16) break;
    }
    if (bits < 16) g = Expr::binary_op(BinaryOp::kLogAnd, std::move(g), Expr::literal(0, 1));
    return g;
  }

  /// Expression that feeds the shipped fault profiles.
  Expr hook_expr(const Scope& scope) {
    const Sig& a = choose(scope);
    const Sig& b = choose(scope);
    switch (pick(0, 2)) {
      case 0:
        return Expr::binary_op(BinaryOp::kBitAnd, Expr::ref(a.name), Expr::ref(b.name));
      case 1:
        return Expr::binary_op(BinaryOp::kAshr, Expr::sign_cast(true, Expr::ref(a.name)),
                               Expr::unsized(rng_.below(3)));
      default:
        return Expr::binary_op(BinaryOp::kShl, Expr::ref(a.name), Expr::unsized(1 + rng_.below(2)));
    }
  }

  Stmt assign(const Sig& target, const Scope& scope, bool blocking, bool hooky = false) {
    Expr rhs = hooky ? Expr::binary_op(coin(0.5) ? BinaryOp::kBitXor : BinaryOp::kAdd, hook_expr(scope),
                                       expr(scope, 1))
                     : expr(scope, o_.max_expr_depth);
    return Stmt::assign(blocking, Expr::ref(target.name), std::move(rhs));
  }

  struct Block {
    std::size_t item = 0;
    bool comb = true;
    Scope scope;
    Scope targets;
    Scope inputs;
  };

  Stmt structure(Block& b, int nesting);
  Stmt& insertion_point(ModuleAst& ast, const Block& b);

  SplitMix64& rng_;
  const DesignGenOptions& o_;
  int loop_vars_ = 0;
  std::vector<NetDecl> extra_nets_;
};

Stmt& Gen::insertion_point(ModuleAst& ast, const Block& b) {
  Stmt& body = ast.items[b.item].body;
  if (b.comb) return body;
  // Edge blocks: body = { if (rst) {...} else {...} }; grow the else arm.
  return body.body[0].body[1];
}

Stmt Gen::structure(Block& b, int nesting) {
  const bool blocking = b.comb;
  auto arm = [&](int n, bool hooky) {
    std::vector<Stmt> v;
    for (int i = 0; i < n; ++i) v.push_back(assign(choose(b.targets), b.scope, blocking, hooky));
    return Stmt::block(std::move(v));
  };
  const double r = rng_.uniform();
  if (r < 0.4) {
    Stmt then_s = arm(pick(1, 2), false);
    if (nesting > 0 && coin(0.3)) then_s.body.push_back(structure(b, nesting - 1));
    std::optional<Stmt> else_s;
    if (coin(0.6)) else_s = arm(1, false);
    return Stmt::if_else(cond(b.scope, 1), std::move(then_s), std::move(else_s));
  }
  if (r < 0.7) {
    Stmt c;
    c.kind = StmtKind::kCase;
    const Sig& subj = choose(b.scope);
    const int w = std::min(subj.width, 3);
    if (w == subj.width) {
      c.cond = Expr::ref(subj.name);
    } else {
      c.cond = Expr::part_select(subj.name, w - 1, 0);
    }
    std::set<std::uint64_t> used;
    const int arms = pick(1, 3);
    for (int i = 0; i < arms; ++i) {
      std::vector<Expr> labels;
      const int nl = pick(1, 2);
      for (int l = 0; l < nl; ++l) {
        const std::uint64_t v = random_value(w);
        if (!used.insert(v).second) continue;
        labels.push_back(Expr::literal(v, w));
      }
      if (labels.empty()) continue;
      c.case_labels.push_back(std::move(labels));
      c.body.push_back(arm(1, coin(0.3)));
    }
    if (c.body.empty() || coin(0.6)) {
      c.case_labels.push_back({});
      c.body.push_back(arm(1, false));
    }
    return c;
  }
  if (r < 0.85 && o_.loops && b.comb) {
    const std::string var = fmt::format("i{}", loop_vars_++);
    NetDecl n;
    n.name = var;
    n.kind = NetKind::kInteger;
    n.msb = 31;
    n.lsb = 0;
    n.is_signed = true;
    extra_nets_.push_back(n);
    Stmt f;
    f.kind = StmtKind::kFor;
    f.lhs = Expr::ref(var);
    f.rhs = Expr::unsized(0);
    f.cond = Expr::binary_op(BinaryOp::kLt, Expr::ref(var), Expr::unsized(static_cast<std::uint64_t>(pick(1, 4))));
    f.step = Expr::binary_op(BinaryOp::kAdd, Expr::ref(var), Expr::unsized(1));
    const Sig& t = choose(b.targets);
    Expr body_rhs = Expr::binary_op(coin(0.5) ? BinaryOp::kBitXor : BinaryOp::kAdd, Expr::ref(t.name),
                                    Expr::binary_op(BinaryOp::kShr, expr(b.scope, 1), Expr::ref(var)));
    f.body.push_back(Stmt::block({Stmt::assign(true, Expr::ref(t.name), std::move(body_rhs))}));
    return f;
  }
  // Zombie guard around code that the fault profiles can hit.
  Stmt inner = arm(pick(1, 2), true);
  return Stmt::if_else(zombie_guard(b.inputs), std::move(inner), std::nullopt);
}

ModuleAst Gen::build(const std::string& name) {
  ModuleAst ast;
  ast.name = name;
  const bool seq = coin(o_.sequential);
  const bool rst_low = coin(0.3);
  const std::string rst_name = rst_low ? "rst_n" : "rst";
  auto add_port = [&](const std::string& n, Direction d, int w, bool s) {
    PortDecl p;
    p.name = n;
    p.dir = d;
    p.msb = w - 1;
    p.lsb = 0;
    p.is_signed = s;
    ast.ports.push_back(p);
  };
  auto add_net = [&](const std::string& n, NetKind k, int w, bool s) {
    NetDecl d;
    d.name = n;
    d.kind = k;
    d.msb = w - 1;
    d.lsb = 0;
    d.is_signed = s;
    ast.nets.push_back(d);
  };
  if (seq) {
    add_port("clk", Direction::kInput, 1, false);
    add_port(rst_name, Direction::kInput, 1, false);
  }
  Scope inputs;
  const int n_in = pick(o_.min_inputs, o_.max_inputs);
  for (int i = 0; i < n_in; ++i) {
    Sig s{fmt::format("a{}", i), pick(1, o_.max_width), coin(0.3)};
    if (i == 0) s.width = std::max(s.width, std::min(8, o_.max_width));
    add_port(s.name, Direction::kInput, s.width, s.is_signed);
    inputs.push_back(s);
  }
  Scope scope = inputs;
  Scope state;
  if (seq) {
    const int n = pick(1, 2);
    for (int i = 0; i < n; ++i) {
      Sig s{fmt::format("s{}", i), pick(1, o_.max_width), coin(0.3)};
      add_net(s.name, NetKind::kReg, s.width, s.is_signed);
      state.push_back(s);
    }
    scope.insert(scope.end(), state.begin(), state.end());
  }
  const int n_wires = pick(0, 2);
  for (int i = 0; i < n_wires; ++i) {
    Sig s{fmt::format("w{}", i), pick(1, o_.max_width), coin(0.3)};
    add_net(s.name, NetKind::kWire, s.width, s.is_signed);
    ModuleItem it;
    it.kind = ItemKind::kContinuousAssign;
    it.lhs = Expr::ref(s.name);
    it.rhs = expr(scope, o_.max_expr_depth);
    ast.items.push_back(std::move(it));
    scope.push_back(s);
  }
  std::vector<Block> blocks;
  const int n_comb = pick(1, 2);
  for (int i = 0; i < n_comb; ++i) {
    Block b;
    b.item = ast.items.size();
    b.comb = true;
    b.scope = scope;
    b.inputs = inputs;
    const int nt = pick(1, 2);
    std::vector<Stmt> defaults;
    for (int t = 0; t < nt; ++t) {
      Sig s{fmt::format("r{}_{}", i, t), pick(1, o_.max_width), coin(0.3)};
      add_net(s.name, NetKind::kReg, s.width, s.is_signed);
      b.targets.push_back(s);
      defaults.push_back(assign(s, scope, true));
    }
    b.scope.insert(b.scope.end(), b.targets.begin(), b.targets.end());
    ModuleItem it;
    it.kind = ItemKind::kAlways;
    it.star = true;
    it.body = Stmt::block(std::move(defaults));
    ast.items.push_back(std::move(it));
    scope.insert(scope.end(), b.targets.begin(), b.targets.end());
    blocks.push_back(std::move(b));
  }
  if (seq) {
    Block b;
    b.item = ast.items.size();
    b.comb = false;
    b.scope = scope;
    b.inputs = inputs;
    b.targets = state;
    std::vector<Stmt> resets, updates;
    for (const auto& s : state) {
      resets.push_back(Stmt::assign(false, Expr::ref(s.name), Expr::unsized(0)));
      updates.push_back(assign(s, scope, false));
    }
    Expr rst = Expr::ref(rst_name);
    if (rst_low) rst = Expr::unary_op(UnaryOp::kLogNot, std::move(rst));
    ModuleItem it;
    it.kind = ItemKind::kAlways;
    it.events.push_back({Edge::kPos, "clk"});
    if (coin(0.3)) it.events.push_back({rst_low ? Edge::kNeg : Edge::kPos, rst_name});
    it.body = Stmt::block({Stmt::if_else(std::move(rst), Stmt::block(std::move(resets)),
                                         Stmt::block(std::move(updates)))});
    ast.items.push_back(std::move(it));
    blocks.push_back(std::move(b));
  }
  const int n_out = pick(1, o_.max_outputs);
  for (int i = 0; i < n_out; ++i) {
    Sig s{fmt::format("y{}", i), pick(1, o_.max_width), coin(0.3)};
    add_port(s.name, Direction::kOutput, s.width, s.is_signed);
    ModuleItem it;
    it.kind = ItemKind::kContinuousAssign;
    it.lhs = Expr::ref(s.name);
    it.rhs = expr(scope, o_.max_expr_depth);
    ast.items.push_back(std::move(it));
  }
  if (o_.fault_hooks) {
    // {$signed(p) >>> 1, p & q, q << 1, $signed(p) < $signed(q)}
    const Sig& p = inputs[0];
    const Sig& q = inputs[1 % inputs.size()];
    std::vector<Expr> parts;
    parts.push_back(Expr::binary_op(BinaryOp::kAshr, Expr::sign_cast(true, Expr::ref(p.name)), Expr::unsized(1)));
    parts.push_back(Expr::binary_op(BinaryOp::kBitAnd, Expr::ref(p.name), Expr::ref(q.name)));
    parts.push_back(Expr::binary_op(BinaryOp::kShl, Expr::ref(q.name), Expr::unsized(1)));
    parts.push_back(Expr::binary_op(BinaryOp::kLt, Expr::sign_cast(true, Expr::ref(p.name)),
                                    Expr::sign_cast(true, Expr::ref(q.name))));
    const int w = p.width + std::max(p.width, q.width) + q.width + 1;
    add_port("yh", Direction::kOutput, w, false);
    ModuleItem it;
    it.kind = ItemKind::kContinuousAssign;
    it.lhs = Expr::ref("yh");
    it.rhs = Expr::concat(std::move(parts));
    ast.items.push_back(std::move(it));
  }

  // Optional structure while the statement budget allows.
  const auto budget = static_cast<std::size_t>(std::max(o_.max_statements, 1));
  bool need_zombie = coin(o_.zombie_rate);
  for (int tries = 0; tries < 12; ++tries) {
    Block& b = blocks[rng_.below(blocks.size())];
    Stmt s;
    if (need_zombie) {
      std::vector<Stmt> v{assign(choose(b.targets), b.scope, b.comb, true)};
      s = Stmt::if_else(zombie_guard(b.inputs), Stmt::block(std::move(v)), std::nullopt);
    } else {
      s = structure(b, 1);
    }
    if (statement_count(ast) + count_stmt(s) > budget) {
      if (need_zombie) need_zombie = false;
      continue;
    }
    need_zombie = false;
    insertion_point(ast, b).body.push_back(std::move(s));
    if (!coin(0.8)) break;
  }
  for (auto& n : extra_nets_) ast.nets.push_back(n);
  return ast;
}

}  // namespace

ModuleAst generate_design(const std::string& name, SplitMix64& rng, const DesignGenOptions& opts) {
  DesignGenOptions o = opts;
  o.max_width = std::clamp(o.max_width, 2, 32);
  o.min_inputs = std::max(o.min_inputs, 1);
  o.max_inputs = std::max(o.max_inputs, o.min_inputs);
  o.max_outputs = std::max(o.max_outputs, 1);
  for (int attempt = 0; attempt < 200; ++attempt) {
    Gen g(rng, o);
    ModuleAst ast = g.build(name);
    if (statement_count(ast) > static_cast<std::size_t>(o.max_statements)) {
      if (o.max_expr_depth > 1 && attempt % 20 == 19) --o.max_expr_depth;
      continue;
    }
    try {
      return parse(emit(ast));
    } catch (const Error&) {
      // Width limits (e.g. a concat over 64 bits) rarely reject a draw.
    }
  }
  throw SemanticError("design generator could not satisfy the statement budget");
}

// --- styled printer -----------------------------------------------------------

namespace {

int precedence(const Expr& e) {
  switch (e.kind) {
    case ExprKind::kUnary: return 90;
    case ExprKind::kTernary: return 5;
    case ExprKind::kBinary:
      switch (e.binary) {
        case BinaryOp::kMul:
        case BinaryOp::kDiv:
        case BinaryOp::kMod: return 80;
        case BinaryOp::kAdd:
        case BinaryOp::kSub: return 70;
        case BinaryOp::kShl:
        case BinaryOp::kShr:
        case BinaryOp::kAshl:
        case BinaryOp::kAshr: return 60;
        case BinaryOp::kLt:
        case BinaryOp::kLe:
        case BinaryOp::kGt:
        case BinaryOp::kGe: return 50;
        case BinaryOp::kEq:
        case BinaryOp::kNeq:
        case BinaryOp::kCaseEq:
        case BinaryOp::kCaseNeq: return 45;
        case BinaryOp::kBitAnd: return 40;
        case BinaryOp::kBitXor:
        case BinaryOp::kBitXnor: return 35;
        case BinaryOp::kBitOr: return 30;
        case BinaryOp::kLogAnd: return 20;
        case BinaryOp::kLogOr: return 10;
      }
      return 0;
    default: return 100;
  }
}

class Styler {
 public:
  Styler(const ModuleAst& ast, SplitMix64& rng) : ast_(ast), rng_(rng) {
    for (const auto& p : ast.ports) names_.insert(p.name);
    for (const auto& n : ast.nets) names_.insert(n.name);
    indent_unit_ = rng_.coin(0.5) ? "  " : (rng_.coin(0.5) ? "    " : "\t");
  }

  std::string run();

 private:
  std::string lit(const Expr& e) {
    if (rng_.coin(0.08)) {
      std::string name;
      do {
        name = fmt::format("HM_P{}", params_.size() + salt_++);
      } while (names_.count(name));
      names_.insert(name);
      params_.push_back(fmt::format("localparam {} = {};", name, raw_lit(e)));
      return name;
    }
    return raw_lit(e);
  }

  std::string raw_lit(const Expr& e) {
    if (!e.sized) {
      if (e.is_signed) return std::to_string(e.value);
      return rng_.coin(0.5) ? fmt::format("'h{:x}", e.value) : fmt::format("'d{}", e.value);
    }
    const std::string s = e.is_signed ? "s" : "";
    switch (rng_.below(4)) {
      case 0: return fmt::format("{}'{}h{:X}", e.width, s, e.value);
      case 1: return fmt::format("{}'{}d{}", e.width, s, e.value);
      case 2: return fmt::format("{}'{}b{:b}", e.width, s, e.value);
      default: return fmt::format("{}'{}o{:o}", e.width, s, e.value);
    }
  }

  std::string wrap(const Expr& e, int parent, bool right) {
    const int p = precedence(e);
    const bool need = p < parent || (p == parent && right) || (p < 100 && rng_.coin(0.1));
    const std::string s = expr(e);
    return need ? "(" + s + ")" : s;
  }

  std::string expr(const Expr& e) {
    switch (e.kind) {
      case ExprKind::kLiteral: return lit(e);
      case ExprKind::kRef: return e.name;
      case ExprKind::kBitSelect: return e.name + "[" + expr(e.operands[0]) + "]";
      case ExprKind::kPartSelect: return fmt::format("{}[{}:{}]", e.name, e.msb, e.lsb);
      case ExprKind::kConcat: {
        bool same = e.operands.size() > 1;
        for (const auto& o : e.operands) same = same && structurally_equal(o, e.operands[0]);
        if (same && rng_.coin(0.7)) return fmt::format("{{{}{{{}}}}}", e.operands.size(), expr(e.operands[0]));
        std::string s = "{";
        for (std::size_t i = 0; i < e.operands.size(); ++i) {
          if (i) s += rng_.coin(0.5) ? ", " : ",";
          s += expr(e.operands[i]);
        }
        return s + "}";
      }
      case ExprKind::kUnary: {
        const Expr& x = e.operands[0];
        std::string inner = expr(x);
        if (precedence(x) < 100)
          inner = "(" + inner + ")";
        return to_string(e.unary) + inner;
      }
      case ExprKind::kBinary: {
        const int p = precedence(e);
        return wrap(e.operands[0], p, false) + " " + to_string(e.binary) + " " +
               wrap(e.operands[1], p, true);
      }
      case ExprKind::kTernary:
        return wrap(e.operands[0], 6, false) + " ? " + wrap(e.operands[1], 6, false) + " : " +
               wrap(e.operands[2], 6, false);
      case ExprKind::kSignCast:
        return std::string(e.to_signed ? "$signed(" : "$unsigned(") + expr(e.operands[0]) + ")";
    }
    return "?";
  }

  std::string pad(int depth) const {
    std::string s;
    for (int i = 0; i < depth; ++i) s += indent_unit_;
    return s;
  }

  // A begin-end arm printed bare when it holds exactly one assignment.
  void arm(std::string& out, const Stmt& s, int depth) {
    if (s.kind == StmtKind::kBeginEnd && s.body.size() == 1 && s.body[0].is_assign() && rng_.coin(0.5)) {
      out += "\n";
      stmt(out, s.body[0], depth + 1);
      return;
    }
    out += " ";
    block(out, s, depth);
    out += "\n";
  }

  void block(std::string& out, const Stmt& s, int depth) {
    out += "begin\n";
    for (const auto& k : s.body) stmt(out, k, depth + 1);
    out += pad(depth) + "end";
  }

  void stmt(std::string& out, const Stmt& s, int depth) {
    const std::string p = pad(depth);
    switch (s.kind) {
      case StmtKind::kBlockingAssign:
      case StmtKind::kNonBlockingAssign:
        out += p + expr(s.lhs) + (s.kind == StmtKind::kBlockingAssign ? " = " : " <= ") + expr(s.rhs) + ";\n";
        return;
      case StmtKind::kIf: {
        out += p + "if (" + expr(s.cond) + ")";
        arm(out, s.body[0], depth);
        if (s.has_else()) {
          const Stmt& e = s.body[1];
          if (e.kind == StmtKind::kBeginEnd && e.body.size() == 1 && e.body[0].kind == StmtKind::kIf &&
              rng_.coin(0.6)) {
            out += p + "else ";
            std::string nested;
            stmt(nested, e.body[0], depth);
            out += nested.substr(p.size());
            return;
          }
          out += p + "else";
          arm(out, e, depth);
        }
        return;
      }
      case StmtKind::kCase:
        out += p + "case (" + expr(s.cond) + ")\n";
        for (std::size_t i = 0; i < s.body.size(); ++i) {
          out += pad(depth + 1);
          if (s.case_labels[i].empty()) {
            out += "default:";
          } else {
            for (std::size_t l = 0; l < s.case_labels[i].size(); ++l) {
              if (l) out += ", ";
              out += expr(s.case_labels[i][l]);
            }
            out += ":";
          }
          arm(out, s.body[i], depth + 1);
        }
        out += p + "endcase\n";
        return;
      case StmtKind::kFor:
        out += p + fmt::format("for ({} = {}; {}; {} = {})", s.lhs.name, expr(s.rhs), expr(s.cond),
                               s.lhs.name, expr(s.step));
        arm(out, s.body[0], depth);
        return;
      case StmtKind::kBeginEnd:
        out += p;
        block(out, s, depth);
        out += "\n";
        return;
    }
  }

  std::string range(int msb, int lsb, bool is_signed) const {
    std::string s = is_signed ? "signed " : "";
    if (msb != 0 || lsb != 0) s += fmt::format("[{}:{}] ", msb, lsb);
    return s;
  }

  const ModuleAst& ast_;
  SplitMix64& rng_;
  std::set<std::string> names_;
  std::vector<std::string> params_;
  std::size_t salt_ = 0;
  std::string indent_unit_;
};

std::string Styler::run() {
  std::string body;
  const std::string in1 = indent_unit_;
  for (const auto& it : ast_.items) {
    if (rng_.coin(0.15)) body += rng_.coin(0.5) ? in1 + "// next item\n" : in1 + "/* item */\n";
    switch (it.kind) {
      case ItemKind::kContinuousAssign:
        body += in1 + "assign " + expr(it.lhs) + " = " + expr(it.rhs) + ";\n";
        break;
      case ItemKind::kInitial:
        body += in1 + "initial";
        arm(body, it.body, 1);
        break;
      case ItemKind::kAlways: {
        body += in1 + "always ";
        if (it.star) {
          body += rng_.coin(0.5) ? "@*" : "@(*)";
        } else {
          body += "@(";
          for (std::size_t i = 0; i < it.events.size(); ++i) {
            if (i) body += " or ";
            body += (it.events[i].edge == Edge::kPos ? "posedge " : "negedge ") + it.events[i].signal;
          }
          body += ")";
        }
        arm(body, it.body, 1);
        break;
      }
    }
  }
  std::string out = "module " + ast_.name + "(";
  for (std::size_t i = 0; i < ast_.ports.size(); ++i) {
    if (i) out += ", ";
    out += ast_.ports[i].name;
  }
  out += ");\n";
  for (const auto& p : ast_.ports) {
    out += in1 + (p.dir == Direction::kInput ? "input " : (p.is_reg ? "output reg " : "output ")) +
           range(p.msb, p.lsb, p.is_signed) + p.name + ";\n";
  }
  for (const auto& pr : params_) out += in1 + pr + "\n";
  for (const auto& n : ast_.nets) {
    if (n.kind == NetKind::kInteger) {
      out += in1 + "integer " + n.name + ";\n";
      continue;
    }
    out += in1 + (n.kind == NetKind::kWire ? "wire " : "reg ") + range(n.msb, n.lsb, n.is_signed) + n.name + ";\n";
  }
  return out + body + "endmodule\n";
}

}  // namespace

std::string emit_styled(const ModuleAst& ast, SplitMix64& rng) { return Styler(ast, rng).run(); }

}  // namespace hdlmutant
