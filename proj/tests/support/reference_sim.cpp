#include "reference_sim.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace refsim {

using namespace hdlmutant;
using u64 = std::uint64_t;

namespace {

u64 mask(int w) { return w >= 64 ? ~u64{0} : ((u64{1} << w) - 1); }

// Widen a w-bit value to 64 bits, replicating the top bit when signed.
u64 widen(u64 v, int w, bool sgn) {
  v &= mask(w);
  if (sgn && w < 64 && ((v >> (w - 1)) & 1)) v |= ~mask(w);
  return v;
}

struct Var {
  int width = 1;
  int lsb = 0;
  bool sgn = false;
  u64 value = 0;
};

struct Nba {
  std::string name;
  int off;
  int width;
  u64 value;
};

class Interp {
 public:
  explicit Interp(const ModuleAst& m) : m_(m) {
    for (const auto& p : m.ports) vars_[p.name] = Var{p.width(), std::min(p.msb, p.lsb), p.is_signed, 0};
    for (const auto& n : m.nets) {
      if (n.kind == NetKind::kInteger) {
        vars_[n.name] = Var{32, 0, true, 0};
      } else {
        vars_[n.name] = Var{n.width(), std::min(n.msb, n.lsb), n.is_signed, 0};
      }
    }
  }

  Trace run(const TestbenchAst& tb) {
    Trace tr;
    for (const auto& p : tb.ports)
      if (p.dir == Direction::kOutput) tr.ports.push_back(p.name);
    tr.values.resize(tr.ports.size());
    std::vector<long> times;
    for (const auto& s : tb.schedule) times.push_back(s.time);
    if (tb.clock >= 0 && tb.clock_half_period > 0)
      for (long t = tb.clock_half_period; t <= tb.finish_time; t += tb.clock_half_period) times.push_back(t);
    times.push_back(0);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());

    std::size_t next = 0;
    for (long t : times) {
      if (t > tb.finish_time) break;
      std::vector<std::pair<std::string, u64>> changes;
      const bool sample = next < tb.schedule.size() && tb.schedule[next].time == t;
      if (sample)
        for (std::size_t j = 0; j < tb.driven.size(); ++j)
          changes.emplace_back(tb.ports[tb.driven[j]].name, tb.schedule[next].values[j]);
      if (tb.clock >= 0 && tb.clock_half_period > 0 && t > 0 && t % tb.clock_half_period == 0) {
        const std::string& clk = tb.ports[static_cast<std::size_t>(tb.clock)].name;
        changes.emplace_back(clk, ((t / tb.clock_half_period) & 1));
      }
      std::vector<bool> fired(m_.items.size(), false);
      for (const auto& [name, v0] : changes) {
        Var& var = vars_.at(name);
        const u64 v = v0 & mask(var.width);
        const u64 old = var.value;
        var.value = v;
        const bool rose = !(old & 1) && (v & 1);
        const bool fell = (old & 1) && !(v & 1);
        for (std::size_t i = 0; i < m_.items.size(); ++i)
          for (const auto& ev : m_.items[i].events)
            if (ev.signal == name && ((ev.edge == Edge::kPos && rose) || (ev.edge == Edge::kNeg && fell)))
              fired[i] = true;
      }
      if (t == 0)
        for (const auto& it : m_.items)
          if (it.kind == ItemKind::kInitial) exec(it.body);
      settle();
      for (std::size_t i = 0; i < m_.items.size(); ++i)
        if (fired[i] && m_.items[i].is_edge_triggered()) exec(m_.items[i].body);
      settle();
      while (!nba_.empty()) {
        auto batch = std::move(nba_);
        nba_.clear();
        for (const auto& w : batch) write(w.name, w.off, w.width, w.value);
        settle();
      }
      if (sample) {
        tr.sample_times.push_back(t);
        for (std::size_t p = 0; p < tr.ports.size(); ++p) tr.values[p].push_back(vars_.at(tr.ports[p]).value);
        ++next;
      }
    }
    tr.final_time = tb.finish_time;
    return tr;
  }

 private:
  std::map<std::string, u64> snapshot() const {
    std::map<std::string, u64> s;
    for (const auto& [k, v] : vars_) s[k] = v.value;
    return s;
  }

  void settle() {
    for (int round = 0; round < 2000; ++round) {
      const auto before = snapshot();
      for (const auto& it : m_.items) {
        if (it.kind == ItemKind::kContinuousAssign) {
          assign(it.lhs, it.rhs, false);
        } else if (it.is_combinational()) {
          exec(it.body);
        }
      }
      if (snapshot() == before) return;
    }
    throw std::runtime_error("reference: no fixpoint");
  }

  // --- sizing -----------------------------------------------------------------

  int width_of(const Expr& e) const {
    switch (e.kind) {
      case ExprKind::kLiteral: return e.width;
      case ExprKind::kRef: return vars_.at(e.name).width;
      case ExprKind::kBitSelect: return 1;
      case ExprKind::kPartSelect: return std::abs(e.msb - e.lsb) + 1;
      case ExprKind::kConcat: {
        int w = 0;
        for (const auto& o : e.operands) w += width_of(o);
        return w;
      }
      case ExprKind::kUnary:
        switch (e.unary) {
          case UnaryOp::kPlus:
          case UnaryOp::kMinus:
          case UnaryOp::kBitNot: return width_of(e.operands[0]);
          default: return 1;
        }
      case ExprKind::kBinary:
        switch (e.binary) {
          case BinaryOp::kAdd:
          case BinaryOp::kSub:
          case BinaryOp::kMul:
          case BinaryOp::kDiv:
          case BinaryOp::kMod:
          case BinaryOp::kBitAnd:
          case BinaryOp::kBitOr:
          case BinaryOp::kBitXor:
          case BinaryOp::kBitXnor: return std::max(width_of(e.operands[0]), width_of(e.operands[1]));
          case BinaryOp::kShl:
          case BinaryOp::kShr:
          case BinaryOp::kAshl:
          case BinaryOp::kAshr: return width_of(e.operands[0]);
          default: return 1;
        }
      case ExprKind::kTernary: return std::max(width_of(e.operands[1]), width_of(e.operands[2]));
      case ExprKind::kSignCast: return width_of(e.operands[0]);
    }
    return 1;
  }

  bool signed_of(const Expr& e) const {
    switch (e.kind) {
      case ExprKind::kLiteral: return e.is_signed;
      case ExprKind::kRef: return vars_.at(e.name).sgn;
      case ExprKind::kBitSelect:
      case ExprKind::kPartSelect:
      case ExprKind::kConcat: return false;
      case ExprKind::kUnary:
        switch (e.unary) {
          case UnaryOp::kPlus:
          case UnaryOp::kMinus:
          case UnaryOp::kBitNot: return signed_of(e.operands[0]);
          default: return false;
        }
      case ExprKind::kBinary:
        switch (e.binary) {
          case BinaryOp::kAdd:
          case BinaryOp::kSub:
          case BinaryOp::kMul:
          case BinaryOp::kDiv:
          case BinaryOp::kMod:
          case BinaryOp::kBitAnd:
          case BinaryOp::kBitOr:
          case BinaryOp::kBitXor:
          case BinaryOp::kBitXnor: return signed_of(e.operands[0]) && signed_of(e.operands[1]);
          case BinaryOp::kShl:
          case BinaryOp::kShr:
          case BinaryOp::kAshl:
          case BinaryOp::kAshr: return signed_of(e.operands[0]);
          default: return false;
        }
      case ExprKind::kTernary: return signed_of(e.operands[1]) && signed_of(e.operands[2]);
      case ExprKind::kSignCast: return e.to_signed;
    }
    return false;
  }

  u64 self(const Expr& e) { return eval(e, width_of(e), signed_of(e)); }

  // Value of `e` evaluated in a context of width w and signedness s, as a
  // w-bit pattern.
  u64 eval(const Expr& e, int w, bool s) {
    const u64 m = mask(w);
    switch (e.kind) {
      case ExprKind::kLiteral: return widen(e.value, e.width, s) & m;
      case ExprKind::kRef: {
        const Var& v = vars_.at(e.name);
        return widen(v.value, v.width, s) & m;
      }
      case ExprKind::kBitSelect: {
        const Var& v = vars_.at(e.name);
        const u64 idx = self(e.operands[0]);
        if (idx < static_cast<u64>(v.lsb) || idx - static_cast<u64>(v.lsb) >= static_cast<u64>(v.width)) return 0;
        return (v.value >> (idx - static_cast<u64>(v.lsb))) & 1;
      }
      case ExprKind::kPartSelect: {
        const Var& v = vars_.at(e.name);
        const int lo = std::min(e.msb, e.lsb) - v.lsb;
        return (v.value >> lo) & mask(std::abs(e.msb - e.lsb) + 1);
      }
      case ExprKind::kConcat: {
        u64 acc = 0;
        for (const auto& o : e.operands) {
          const int ow = width_of(o);
          acc = (ow >= 64 ? 0 : acc << ow) | (self(o) & mask(ow));
        }
        return acc & m;
      }
      case ExprKind::kUnary: {
        const Expr& x = e.operands[0];
        switch (e.unary) {
          case UnaryOp::kPlus: return eval(x, w, s);
          case UnaryOp::kMinus: return (~eval(x, w, s) + 1) & m;
          case UnaryOp::kBitNot: return ~eval(x, w, s) & m;
          default: break;
        }
        const int xw = width_of(x);
        const u64 v = self(x) & mask(xw);
        const int ones = __builtin_popcountll(v);
        u64 r = 0;
        switch (e.unary) {
          case UnaryOp::kLogNot: r = v == 0; break;
          case UnaryOp::kRedAnd: r = v == mask(xw); break;
          case UnaryOp::kRedNand: r = v != mask(xw); break;
          case UnaryOp::kRedOr: r = v != 0; break;
          case UnaryOp::kRedNor: r = v == 0; break;
          case UnaryOp::kRedXor: r = ones & 1; break;
          case UnaryOp::kRedXnor: r = !(ones & 1); break;
          default: break;
        }
        return r;
      }
      case ExprKind::kBinary: return binary(e, w, s);
      case ExprKind::kTernary:
        return self(e.operands[0]) != 0 ? eval(e.operands[1], w, s) : eval(e.operands[2], w, s);
      case ExprKind::kSignCast: {
        const int xw = width_of(e.operands[0]);
        return widen(self(e.operands[0]), xw, s) & m;
      }
    }
    return 0;
  }

  static std::int64_t as_signed(u64 v, int w) { return static_cast<std::int64_t>(widen(v, w, true)); }

  u64 binary(const Expr& e, int w, bool s) {
    const Expr& l = e.operands[0];
    const Expr& r = e.operands[1];
    const u64 m = mask(w);
    switch (e.binary) {
      case BinaryOp::kLogAnd: return (self(l) != 0 && self(r) != 0) ? 1 : 0;
      case BinaryOp::kLogOr: return (self(l) != 0 || self(r) != 0) ? 1 : 0;
      case BinaryOp::kShl:
      case BinaryOp::kAshl:
      case BinaryOp::kShr:
      case BinaryOp::kAshr: {
        const u64 a = eval(l, w, s);
        const u64 n = self(r) & mask(width_of(r));
        if (e.binary == BinaryOp::kShl || e.binary == BinaryOp::kAshl) return n >= 64 ? 0 : (a << n) & m;
        if (e.binary == BinaryOp::kAshr && s) {
          const std::int64_t sv = as_signed(a, w);
          return static_cast<u64>(n >= 63 ? (sv < 0 ? -1 : 0) : (sv >> n)) & m;
        }
        return n >= 64 ? 0 : (a >> n) & m;
      }
      case BinaryOp::kEq:
      case BinaryOp::kNeq:
      case BinaryOp::kCaseEq:
      case BinaryOp::kCaseNeq:
      case BinaryOp::kLt:
      case BinaryOp::kLe:
      case BinaryOp::kGt:
      case BinaryOp::kGe: {
        const int cw = std::max(width_of(l), width_of(r));
        const bool cs = signed_of(l) && signed_of(r);
        const u64 a = eval(l, cw, cs), b = eval(r, cw, cs);
        int cmp;
        if (cs) {
          const auto x = as_signed(a, cw), y = as_signed(b, cw);
          cmp = x < y ? -1 : (x > y ? 1 : 0);
        } else {
          cmp = a < b ? -1 : (a > b ? 1 : 0);
        }
        switch (e.binary) {
          case BinaryOp::kEq:
          case BinaryOp::kCaseEq: return cmp == 0;
          case BinaryOp::kNeq:
          case BinaryOp::kCaseNeq: return cmp != 0;
          case BinaryOp::kLt: return cmp < 0;
          case BinaryOp::kLe: return cmp <= 0;
          case BinaryOp::kGt: return cmp > 0;
          default: return cmp >= 0;
        }
      }
      default: break;
    }
    const u64 a = eval(l, w, s), b = eval(r, w, s);
    switch (e.binary) {
      case BinaryOp::kAdd: return (a + b) & m;
      case BinaryOp::kSub: return (a - b) & m;
      case BinaryOp::kMul: return (a * b) & m;
      case BinaryOp::kBitAnd: return a & b;
      case BinaryOp::kBitOr: return a | b;
      case BinaryOp::kBitXor: return a ^ b;
      case BinaryOp::kBitXnor: return ~(a ^ b) & m;
      case BinaryOp::kDiv:
      case BinaryOp::kMod: {
        if (b == 0) return 0;
        if (!s) return (e.binary == BinaryOp::kDiv ? a / b : a % b) & m;
        const bool na = (a >> (w - 1)) & 1, nb = (b >> (w - 1)) & 1;
        const u64 ma = na ? (~widen(a, w, true) + 1) : a;
        const u64 mb = nb ? (~widen(b, w, true) + 1) : b;
        if (e.binary == BinaryOp::kDiv) {
          const u64 q = ma / mb;
          return (na != nb ? ~q + 1 : q) & m;
        }
        const u64 rem = ma % mb;
        return (na ? ~rem + 1 : rem) & m;
      }
      default: return 0;
    }
  }

  // --- statements ---------------------------------------------------------------

  int lvalue_width(const Expr& lv) const {
    switch (lv.kind) {
      case ExprKind::kRef: return vars_.at(lv.name).width;
      case ExprKind::kBitSelect: return 1;
      case ExprKind::kPartSelect: return std::abs(lv.msb - lv.lsb) + 1;
      case ExprKind::kConcat: {
        int w = 0;
        for (const auto& p : lv.operands) w += lvalue_width(p);
        return w;
      }
      default: throw std::runtime_error("reference: bad lvalue");
    }
  }

  void write(const std::string& name, int off, int width, u64 v) {
    Var& var = vars_.at(name);
    if (off < 0 || off >= var.width) return;
    const int w = std::min(width, var.width - off);
    const u64 field = mask(w) << off;
    var.value = (var.value & ~field) | ((v << off) & field);
  }

  // Slices `v` over the lvalue parts, rightmost part first.
  void store(const Expr& lv, u64 v, bool nba) {
    std::vector<const Expr*> parts;
    if (lv.kind == ExprKind::kConcat) {
      for (const auto& p : lv.operands) parts.push_back(&p);
    } else {
      parts.push_back(&lv);
    }
    for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
      const Expr& p = **it;
      const int pw = lvalue_width(p);
      const Var& var = vars_.at(p.name);
      int off = 0;
      if (p.kind == ExprKind::kBitSelect) {
        const u64 idx = self(p.operands[0]);
        off = (idx < static_cast<u64>(var.lsb) || idx - static_cast<u64>(var.lsb) >= 64)
                  ? -1
                  : static_cast<int>(idx - static_cast<u64>(var.lsb));
      } else if (p.kind == ExprKind::kPartSelect) {
        off = std::min(p.msb, p.lsb) - var.lsb;
      }
      const u64 chunk = v & mask(pw);
      v = pw >= 64 ? 0 : v >> pw;
      if (nba) {
        nba_.push_back({p.name, off, pw, chunk});
      } else {
        write(p.name, off, pw, chunk);
      }
    }
  }

  void assign(const Expr& lhs, const Expr& rhs, bool nba) {
    const int lw = lvalue_width(lhs);
    const int w = std::max(lw, width_of(rhs));
    store(lhs, eval(rhs, w, signed_of(rhs)) & mask(lw), nba);
  }

  void exec(const Stmt& s) {
    switch (s.kind) {
      case StmtKind::kBlockingAssign: assign(s.lhs, s.rhs, false); return;
      case StmtKind::kNonBlockingAssign: assign(s.lhs, s.rhs, true); return;
      case StmtKind::kIf:
        if (self(s.cond) != 0) {
          exec(s.body[0]);
        } else if (s.body.size() > 1) {
          exec(s.body[1]);
        }
        return;
      case StmtKind::kCase: {
        int cw = width_of(s.cond);
        bool cs = signed_of(s.cond);
        for (const auto& labels : s.case_labels)
          for (const auto& l : labels) {
            cw = std::max(cw, width_of(l));
            cs = cs && signed_of(l);
          }
        const u64 subj = eval(s.cond, cw, cs);
        int dflt = -1;
        for (std::size_t i = 0; i < s.body.size(); ++i) {
          if (s.case_labels[i].empty()) {
            dflt = static_cast<int>(i);
            continue;
          }
          for (const auto& l : s.case_labels[i])
            if (eval(l, cw, cs) == subj) {
              exec(s.body[i]);
              return;
            }
        }
        if (dflt >= 0) exec(s.body[static_cast<std::size_t>(dflt)]);
        return;
      }
      case StmtKind::kFor: {
        assign(s.lhs, s.rhs, false);
        for (int n = 0; self(s.cond) != 0; ++n) {
          if (n > 100000) throw std::runtime_error("reference: runaway loop");
          exec(s.body[0]);
          assign(s.lhs, s.step, false);
        }
        return;
      }
      case StmtKind::kBeginEnd:
        for (const auto& k : s.body) exec(k);
        return;
    }
  }

  const ModuleAst& m_;
  std::map<std::string, Var> vars_;
  std::vector<Nba> nba_;
};

}  // namespace

Trace run(const ModuleAst& design, const TestbenchAst& tb) { return Interp(design).run(tb); }

}  // namespace refsim
