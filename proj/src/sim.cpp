#include "hdlmutant/sim.hpp"

#include <algorithm>
#include <unordered_map>

#include "hdlmutant/errors.hpp"
#include "hdlmutant/parser.hpp"
#include "hdlmutant/semantics.hpp"

namespace hdlmutant {

namespace {

enum class Op : std::uint8_t {
  kConst,
  kSig,
  kBit,
  kPart,
  kConcat,
  kUnary,
  kSelfUnary,  // reductions and !
  kLogical,
  kCompare,
  kShift,
  kArith,
  kTernary,
  kCast,
};

struct CExpr {
  Op op = Op::kConst;
  int w = 1;       // result width in this context
  bool s = false;  // context signedness
  std::uint64_t value = 0;
  int sig = -1;
  int sig_w = 1;
  int off = 0;  // bit offset of the select (msb/lsb adjusted) or cast source width
  int part_w = 1;
  int cw = 1;  // compare operand width
  bool cs = false;
  UnaryOp uop = UnaryOp::kPlus;
  BinaryOp bop = BinaryOp::kAdd;
  NodeId cond_id = kNoNode;  // ternary condition
  std::vector<CExpr> kids;
};

struct LPart {
  enum Kind { kWhole, kBit, kPart } kind = kWhole;
  int sig = -1;
  int width = 1;  // bits taken from the assigned value
  int lsb = 0;    // declared lsb of the signal (kBit)
  int off = 0;    // kPart offset
  CExpr index;    // kBit
};

struct LValue {
  std::vector<LPart> parts;  // MSB part first, as written
  int width = 0;
};

struct CStmt {
  StmtKind kind = StmtKind::kBeginEnd;
  NodeId id = kNoNode;
  LValue lhs;
  CExpr rhs;
  int rhs_w = 1;
  bool rhs_s = false;
  CExpr cond;
  CExpr step;
  int step_w = 1;
  bool step_s = false;
  std::vector<std::vector<CExpr>> labels;
  std::vector<NodeId> label_ids;  // flattened, matches label order
  NodeId cond_id = kNoNode;
  int default_arm = -1;
  int arm_base = 0;
  std::vector<CStmt> kids;
};

enum class ProcKind { kAssign, kComb, kEdge, kInitial };

struct Proc {
  ProcKind kind = ProcKind::kAssign;
  NodeId id = kNoNode;
  LValue lhs;
  CExpr rhs;
  int rhs_w = 1;
  bool rhs_s = false;
  CStmt body;
  std::vector<std::pair<int, Edge>> events;
};

struct Signal {
  std::string name;
  int width = 1;
  int lsb = 0;
  bool is_signed = false;
  bool is_input = false;
  bool is_output = false;
};

struct NbaWrite {
  int sig;
  int off;
  int width;
  std::uint64_t value;
};

struct Model {
  std::vector<Signal> sigs;
  std::unordered_map<std::string, int> index;
  std::vector<Proc> procs;
  std::vector<std::vector<int>> readers;  // signal -> comb/assign procs
  NodeId max_id = 0;
  std::vector<NodeId> stmt_ids;
  std::vector<NodeId> block_ids;
  std::vector<NodeId> cond_ids;
  std::vector<ArmKey> arms;
};

class Compiler {
 public:
  explicit Compiler(const ModuleAst& ast) : ast_(ast), table_(signal_table(ast)) {}

  Model run() {
    for (const auto& p : ast_.ports) {
      add_signal(p.name, p.width(), std::min(p.msb, p.lsb), p.is_signed,
                 p.dir == Direction::kInput, p.dir == Direction::kOutput);
    }
    for (const auto& n : ast_.nets)
      add_signal(n.name, n.width(), std::min(n.msb, n.lsb), n.is_signed, false, false);
    m_.readers.resize(m_.sigs.size());
    for (const auto& item : ast_.items) {
      Proc p;
      p.id = item.id;
      note_id(item.id);
      std::vector<std::string> reads;
      switch (item.kind) {
        case ItemKind::kContinuousAssign: {
          p.kind = ProcKind::kAssign;
          m_.stmt_ids.push_back(item.id);
          p.lhs = lvalue(item.lhs);
          p.rhs_w = std::max(p.lhs.width, self_width(item.rhs, table_));
          p.rhs_s = self_signed(item.rhs, table_);
          p.rhs = expr(item.rhs, p.rhs_w, p.rhs_s);
          collect_reads(item.rhs, reads);
          if (item.lhs.kind == ExprKind::kBitSelect) collect_reads(item.lhs.operands[0], reads);
          if (item.lhs.kind == ExprKind::kConcat)
            for (const auto& part : item.lhs.operands)
              if (part.kind == ExprKind::kBitSelect) collect_reads(part.operands[0], reads);
          break;
        }
        case ItemKind::kAlways:
          p.kind = item.star ? ProcKind::kComb : ProcKind::kEdge;
          p.body = stmt(item.body);
          for (const auto& ev : item.events) p.events.emplace_back(sig(ev.signal), ev.edge);
          if (item.star) collect_reads(item.body, reads);
          break;
        case ItemKind::kInitial:
          p.kind = ProcKind::kInitial;
          p.body = stmt(item.body);
          break;
      }
      const int pi = static_cast<int>(m_.procs.size());
      std::sort(reads.begin(), reads.end());
      reads.erase(std::unique(reads.begin(), reads.end()), reads.end());
      for (const auto& r : reads) m_.readers[static_cast<std::size_t>(sig(r))].push_back(pi);
      m_.procs.push_back(std::move(p));
    }
    return std::move(m_);
  }

 private:
  void add_signal(const std::string& name, int width, int lsb, bool is_signed,
                  bool in, bool out) {
    m_.index[name] = static_cast<int>(m_.sigs.size());
    m_.sigs.push_back(Signal{name, width, lsb, is_signed, in, out});
  }

  int sig(const std::string& name) const {
    auto it = m_.index.find(name);
    if (it == m_.index.end()) throw UndeclaredIdentifier(name, 0);
    return it->second;
  }

  void note_id(NodeId id) { m_.max_id = std::max(m_.max_id, id); }

  CExpr self(const Expr& e) {
    return expr(e, self_width(e, table_), self_signed(e, table_));
  }

  CExpr expr(const Expr& e, int w, bool s) {
    note_id(e.id);
    CExpr c;
    c.w = w;
    c.s = s;
    switch (e.kind) {
      case ExprKind::kLiteral:
        c.op = Op::kConst;
        c.value = extend(e.value, e.width, s) & width_mask(w);
        break;
      case ExprKind::kRef: {
        c.op = Op::kSig;
        c.sig = sig(e.name);
        c.sig_w = m_.sigs[static_cast<std::size_t>(c.sig)].width;
        break;
      }
      case ExprKind::kBitSelect: {
        c.op = Op::kBit;
        c.sig = sig(e.name);
        const auto& info = m_.sigs[static_cast<std::size_t>(c.sig)];
        c.sig_w = info.width;
        c.off = info.lsb;
        c.kids.push_back(self(e.operands[0]));
        break;
      }
      case ExprKind::kPartSelect: {
        c.op = Op::kPart;
        c.sig = sig(e.name);
        const auto& info = m_.sigs[static_cast<std::size_t>(c.sig)];
        c.off = std::min(e.msb, e.lsb) - info.lsb;
        c.part_w = std::abs(e.msb - e.lsb) + 1;
        break;
      }
      case ExprKind::kConcat:
        c.op = Op::kConcat;
        for (const auto& op : e.operands) c.kids.push_back(self(op));
        break;
      case ExprKind::kUnary:
        c.uop = e.unary;
        if (is_reduction(e.unary) || e.unary == UnaryOp::kLogNot) {
          c.op = Op::kSelfUnary;
          c.kids.push_back(self(e.operands[0]));
        } else {
          c.op = Op::kUnary;
          c.kids.push_back(expr(e.operands[0], w, s));
        }
        break;
      case ExprKind::kBinary: {
        c.bop = e.binary;
        const auto& l = e.operands[0];
        const auto& r = e.operands[1];
        if (is_logical(e.binary)) {
          c.op = Op::kLogical;
          c.kids.push_back(self(l));
          c.kids.push_back(self(r));
        } else if (is_comparison(e.binary)) {
          c.op = Op::kCompare;
          c.cw = std::max(self_width(l, table_), self_width(r, table_));
          c.cs = self_signed(l, table_) && self_signed(r, table_);
          c.kids.push_back(expr(l, c.cw, c.cs));
          c.kids.push_back(expr(r, c.cw, c.cs));
        } else if (is_shift(e.binary)) {
          c.op = Op::kShift;
          c.kids.push_back(expr(l, w, s));
          c.kids.push_back(self(r));
        } else {
          c.op = Op::kArith;
          c.kids.push_back(expr(l, w, s));
          c.kids.push_back(expr(r, w, s));
        }
        break;
      }
      case ExprKind::kTernary:
        c.op = Op::kTernary;
        c.cond_id = e.operands[0].id;
        m_.cond_ids.push_back(c.cond_id);
        c.kids.push_back(self(e.operands[0]));
        c.kids.push_back(expr(e.operands[1], w, s));
        c.kids.push_back(expr(e.operands[2], w, s));
        break;
      case ExprKind::kSignCast:
        c.op = Op::kCast;
        c.off = self_width(e.operands[0], table_);
        c.kids.push_back(self(e.operands[0]));
        break;
    }
    return c;
  }

  void lvalue_parts(const Expr& e, LValue& out) {
    note_id(e.id);
    if (e.kind == ExprKind::kConcat) {
      for (const auto& p : e.operands) lvalue_parts(p, out);
      return;
    }
    LPart part;
    part.sig = sig(e.name);
    const auto& info = m_.sigs[static_cast<std::size_t>(part.sig)];
    switch (e.kind) {
      case ExprKind::kRef:
        part.kind = LPart::kWhole;
        part.width = info.width;
        break;
      case ExprKind::kBitSelect:
        part.kind = LPart::kBit;
        part.width = 1;
        part.lsb = info.lsb;
        part.index = self(e.operands[0]);
        break;
      case ExprKind::kPartSelect:
        part.kind = LPart::kPart;
        part.width = std::abs(e.msb - e.lsb) + 1;
        part.off = std::min(e.msb, e.lsb) - info.lsb;
        break;
      default:
        throw SemanticError("invalid assignment target");
    }
    out.width += part.width;
    out.parts.push_back(std::move(part));
  }

  LValue lvalue(const Expr& e) {
    LValue lv;
    lvalue_parts(e, lv);
    return lv;
  }

  CStmt stmt(const Stmt& s) {
    note_id(s.id);
    CStmt c;
    c.kind = s.kind;
    c.id = s.id;
    m_.stmt_ids.push_back(s.id);
    switch (s.kind) {
      case StmtKind::kBlockingAssign:
      case StmtKind::kNonBlockingAssign:
        c.lhs = lvalue(s.lhs);
        c.rhs_w = std::max(c.lhs.width, self_width(s.rhs, table_));
        c.rhs_s = self_signed(s.rhs, table_);
        c.rhs = expr(s.rhs, c.rhs_w, c.rhs_s);
        break;
      case StmtKind::kIf:
        m_.cond_ids.push_back(s.cond.id);
        c.cond_id = s.cond.id;
        c.cond = self(s.cond);
        c.arm_base = static_cast<int>(m_.arms.size());
        m_.arms.push_back(ArmKey{s.id, 0});
        m_.arms.push_back(ArmKey{s.id, 1});
        break;
      case StmtKind::kCase: {
        int cw = self_width(s.cond, table_);
        bool cs = self_signed(s.cond, table_);
        for (const auto& labels : s.case_labels) {
          for (const auto& l : labels) {
            cw = std::max(cw, self_width(l, table_));
            cs = cs && self_signed(l, table_);
          }
        }
        c.cond = expr(s.cond, cw, cs);
        c.arm_base = static_cast<int>(m_.arms.size());
        for (std::size_t i = 0; i < s.case_labels.size(); ++i) {
          std::vector<CExpr> ls;
          for (const auto& l : s.case_labels[i]) {
            ls.push_back(expr(l, cw, cs));
            c.label_ids.push_back(l.id);
            m_.cond_ids.push_back(l.id);
          }
          if (s.case_labels[i].empty() && c.default_arm < 0)
            c.default_arm = static_cast<int>(i);
          c.labels.push_back(std::move(ls));
          m_.arms.push_back(ArmKey{s.id, static_cast<int>(i)});
        }
        if (c.default_arm < 0)
          m_.arms.push_back(ArmKey{s.id, static_cast<int>(s.body.size())});
        break;
      }
      case StmtKind::kFor:
        c.lhs = lvalue(s.lhs);
        c.rhs_w = std::max(c.lhs.width, self_width(s.rhs, table_));
        c.rhs_s = self_signed(s.rhs, table_);
        c.rhs = expr(s.rhs, c.rhs_w, c.rhs_s);
        c.cond = self(s.cond);
        c.step_w = std::max(c.lhs.width, self_width(s.step, table_));
        c.step_s = self_signed(s.step, table_);
        c.step = expr(s.step, c.step_w, c.step_s);
        break;
      case StmtKind::kBeginEnd:
        m_.block_ids.push_back(s.id);
        break;
    }
    for (const auto& child : s.body) c.kids.push_back(stmt(child));
    return c;
  }

  const ModuleAst& ast_;
  SignalTable table_;
  Model m_;
};

class Engine {
 public:
  Engine(const Model& m, const SimLimits& limits) : m_(m), limits_(limits) {
    values_.assign(m.sigs.size(), 0);
    hits_.assign(m.max_id + 1, 0);
    cond_true_.assign(m.max_id + 1, 0);
    cond_false_.assign(m.max_id + 1, 0);
    arm_hits_.assign(m.arms.size(), 0);
    pending_.assign(m.procs.size(), 0);
  }

  SimResult run(const TestbenchAst& tb) {
    std::vector<int> driven_sig;
    for (std::size_t idx : tb.driven) driven_sig.push_back(sig_of(tb.ports[idx].name));
    const int clock_sig =
        tb.clock >= 0 ? sig_of(tb.ports[static_cast<std::size_t>(tb.clock)].name) : -1;
    std::vector<int> out_sig;
    SimResult result;
    for (const auto& p : tb.ports) {
      if (p.dir != Direction::kOutput) continue;
      out_sig.push_back(sig_of(p.name));
      result.trace.ports.push_back(p.name);
    }
    result.trace.values.resize(out_sig.size());

    const long half = tb.clock_half_period > 0 ? tb.clock_half_period : 0;
    std::size_t next_sched = 0;
    long t = 0;
    bool first = true;
    for (;;) {
      now_ = t;
      std::vector<std::pair<int, std::uint64_t>> changes;
      const bool sample = next_sched < tb.schedule.size() &&
                          tb.schedule[next_sched].time == t;
      if (sample) {
        const auto& step = tb.schedule[next_sched];
        for (std::size_t j = 0; j < driven_sig.size(); ++j)
          changes.emplace_back(driven_sig[j], step.values[j]);
      }
      if (clock_sig >= 0 && half > 0 && t > 0 && t % half == 0)
        changes.emplace_back(clock_sig, values_[static_cast<std::size_t>(clock_sig)] ^ 1);

      std::vector<char> fired(m_.procs.size(), 0);
      for (auto [sg, v] : changes) {
        const auto su = static_cast<std::size_t>(sg);
        const std::uint64_t old = values_[su];
        v &= width_mask(m_.sigs[su].width);
        if (old == v) continue;
        values_[su] = v;
        trigger_readers(sg, -1);
        const bool rose = !(old & 1) && (v & 1);
        const bool fell = (old & 1) && !(v & 1);
        for (std::size_t pi = 0; pi < m_.procs.size(); ++pi) {
          for (const auto& [esig, edge] : m_.procs[pi].events) {
            if (esig == sg && ((edge == Edge::kPos && rose) || (edge == Edge::kNeg && fell)))
              fired[pi] = 1;
          }
        }
      }
      if (first) {
        for (std::size_t pi = 0; pi < m_.procs.size(); ++pi) {
          if (m_.procs[pi].kind == ProcKind::kInitial) run_proc(static_cast<int>(pi));
        }
        for (std::size_t pi = 0; pi < m_.procs.size(); ++pi) {
          const auto k = m_.procs[pi].kind;
          if (k == ProcKind::kAssign || k == ProcKind::kComb) pending_[pi] = 1;
        }
        first = false;
      }
      settle();
      for (std::size_t pi = 0; pi < m_.procs.size(); ++pi)
        if (fired[pi]) run_proc(static_cast<int>(pi));
      settle();
      int rounds = 0;
      while (!nba_.empty()) {
        if (++rounds > limits_.max_deltas) throw CombinationalLoop(t);
        std::vector<NbaWrite> batch;
        batch.swap(nba_);
        for (const auto& w : batch) write_bits(w.sig, w.off, w.width, w.value, -1);
        settle();
      }
      if (sample) {
        result.trace.sample_times.push_back(t);
        for (std::size_t p = 0; p < out_sig.size(); ++p)
          result.trace.values[p].push_back(values_[static_cast<std::size_t>(out_sig[p])]);
        ++next_sched;
      }
      // Next event time.
      long next = tb.finish_time + 1;
      if (next_sched < tb.schedule.size()) next = std::min(next, tb.schedule[next_sched].time);
      if (clock_sig >= 0 && half > 0) next = std::min(next, (t / half + 1) * half);
      if (next > tb.finish_time) break;
      t = next;
    }
    result.trace.final_time = tb.finish_time;
    result.coverage = coverage();
    return result;
  }

  CoverageReport coverage() const {
    CoverageReport r;
    for (NodeId id : m_.stmt_ids) r.line_hits[id] = hits_[id];
    for (NodeId id : m_.block_ids) r.blocks.insert(id);
    for (NodeId id : m_.cond_ids)
      r.condition_outcomes[id] = ConditionOutcome{cond_true_[id] != 0, cond_false_[id] != 0};
    for (std::size_t i = 0; i < m_.arms.size(); ++i) r.branch_taken[m_.arms[i]] = arm_hits_[i];
    return r;
  }

 private:
  int sig_of(const std::string& name) const {
    auto it = m_.index.find(name);
    if (it == m_.index.end()) throw ShapeMismatch("testbench port '" + name + "' not in design");
    return it->second;
  }

  void trigger_readers(int sg, int self_proc) {
    for (int pi : m_.readers[static_cast<std::size_t>(sg)])
      if (pi != self_proc) pending_[static_cast<std::size_t>(pi)] = 1;
  }

  void settle() {
    int rounds = 0;
    std::vector<int> batch;
    for (;;) {
      batch.clear();
      for (std::size_t pi = 0; pi < pending_.size(); ++pi) {
        if (pending_[pi]) {
          batch.push_back(static_cast<int>(pi));
          pending_[pi] = 0;
        }
      }
      if (batch.empty()) return;
      if (++rounds > limits_.max_deltas) throw CombinationalLoop(now_);
      for (int pi : batch) run_proc(pi);
    }
  }

  void count_step() {
    if (++steps_ > limits_.max_steps)
      throw StepLimitExceeded("more than " + std::to_string(limits_.max_steps) +
                              " activations");
  }

  void run_proc(int pi) {
    count_step();
    const Proc& p = m_.procs[static_cast<std::size_t>(pi)];
    current_ = pi;
    if (p.kind == ProcKind::kAssign) {
      ++hits_[p.id];
      assign(p.lhs, eval(p.rhs), false);
    } else {
      exec(p.body);
    }
    current_ = -1;
  }

  void write_bits(int sg, int off, int width, std::uint64_t v, int self_proc) {
    const auto su = static_cast<std::size_t>(sg);
    const int sw = m_.sigs[su].width;
    if (off < 0 || off >= sw) return;
    const int w = std::min(width, sw - off);
    const std::uint64_t field = width_mask(w) << off;
    const std::uint64_t nv = (values_[su] & ~field) | ((v << off) & field);
    if (nv == values_[su]) return;
    values_[su] = nv;
    trigger_readers(sg, self_proc);
  }

  void assign(const LValue& lv, std::uint64_t v, bool nba) {
    for (auto it = lv.parts.rbegin(); it != lv.parts.rend(); ++it) {
      const LPart& part = *it;
      int off = 0;
      switch (part.kind) {
        case LPart::kWhole: off = 0; break;
        case LPart::kPart: off = part.off; break;
        case LPart::kBit: {
          const std::uint64_t idx = eval(part.index);
          off = idx > 64 + static_cast<std::uint64_t>(part.lsb) ? -1
                                                                : static_cast<int>(idx) - part.lsb;
          break;
        }
      }
      const std::uint64_t chunk = v & width_mask(part.width);
      v = part.width >= 64 ? 0 : v >> part.width;
      if (nba) {
        nba_.push_back(NbaWrite{part.sig, off, part.width, chunk});
      } else {
        write_bits(part.sig, off, part.width, chunk, current_);
      }
    }
  }

  void exec(const CStmt& s) {
    ++hits_[s.id];
    switch (s.kind) {
      case StmtKind::kBlockingAssign:
      case StmtKind::kNonBlockingAssign:
        assign(s.lhs, eval(s.rhs), s.kind == StmtKind::kNonBlockingAssign);
        return;
      case StmtKind::kIf: {
        const bool c = eval(s.cond) != 0;
        (c ? cond_true_ : cond_false_)[s.cond_id] = 1;
        ++arm_hits_[static_cast<std::size_t>(s.arm_base + (c ? 0 : 1))];
        if (c) exec(s.kids[0]);
        else if (s.kids.size() > 1) exec(s.kids[1]);
        return;
      }
      case StmtKind::kCase: {
        const std::uint64_t subj = eval(s.cond);
        int matched = -1;
        std::size_t flat = 0;
        for (std::size_t i = 0; i < s.labels.size() && matched < 0; ++i) {
          for (const auto& l : s.labels[i]) {
            const bool eq = eval(l) == subj;
            (eq ? cond_true_ : cond_false_)[s.label_ids[flat++]] = 1;
            if (eq) {
              matched = static_cast<int>(i);
              break;
            }
          }
        }
        if (matched < 0) matched = s.default_arm;
        if (matched < 0) {
          ++arm_hits_[static_cast<std::size_t>(s.arm_base) + s.kids.size()];
          return;
        }
        ++arm_hits_[static_cast<std::size_t>(s.arm_base + matched)];
        exec(s.kids[static_cast<std::size_t>(matched)]);
        return;
      }
      case StmtKind::kFor: {
        assign(s.lhs, eval(s.rhs), false);
        int n = 0;
        while (eval(s.cond) != 0) {
          if (++n > kMaxLoopIterations) throw StepLimitExceeded("for loop bound exceeded");
          count_step();
          exec(s.kids[0]);
          assign(s.lhs, eval(s.step), false);
        }
        return;
      }
      case StmtKind::kBeginEnd:
        for (const auto& k : s.kids) exec(k);
        return;
    }
  }

  std::uint64_t eval(const CExpr& e) {
    const std::uint64_t m = width_mask(e.w);
    switch (e.op) {
      case Op::kConst:
        return e.value;
      case Op::kSig:
        return extend(values_[static_cast<std::size_t>(e.sig)], e.sig_w, e.s) & m;
      case Op::kBit: {
        const std::uint64_t idx = eval(e.kids[0]);
        const std::int64_t off = static_cast<std::int64_t>(idx) - e.off;
        if (idx > (std::uint64_t{1} << 62) || off < 0 || off >= e.sig_w) return 0;
        return (values_[static_cast<std::size_t>(e.sig)] >> off) & 1;
      }
      case Op::kPart: {
        const std::uint64_t v =
            (values_[static_cast<std::size_t>(e.sig)] >> e.off) & width_mask(e.part_w);
        return extend(v, e.part_w, e.s) & m;
      }
      case Op::kConcat: {
        std::uint64_t acc = 0;
        for (const auto& k : e.kids) {
          const std::uint64_t v = eval(k);
          acc = (k.w >= 64 ? 0 : acc << k.w) | (v & width_mask(k.w));
        }
        return acc & m;
      }
      case Op::kUnary:
        return apply_unary(e.uop, eval(e.kids[0]), e.w);
      case Op::kSelfUnary:
        return apply_unary(e.uop, eval(e.kids[0]), e.kids[0].w);
      case Op::kLogical: {
        const bool a = eval(e.kids[0]) != 0;
        const bool b = eval(e.kids[1]) != 0;
        return (e.bop == BinaryOp::kLogAnd ? (a && b) : (a || b)) ? 1 : 0;
      }
      case Op::kCompare:
        return apply_compare(e.bop, eval(e.kids[0]), eval(e.kids[1]), e.cw, e.cs) ? 1 : 0;
      case Op::kShift:
        return apply_shift(e.bop, eval(e.kids[0]), eval(e.kids[1]), e.w, e.s);
      case Op::kArith:
        return apply_arith(e.bop, eval(e.kids[0]), eval(e.kids[1]), e.w, e.s);
      case Op::kTernary: {
        const bool c = eval(e.kids[0]) != 0;
        (c ? cond_true_ : cond_false_)[e.cond_id] = 1;
        return eval(e.kids[c ? 1 : 2]);
      }
      case Op::kCast:
        return extend(eval(e.kids[0]), e.off, e.s) & m;
    }
    return 0;
  }

  const Model& m_;
  SimLimits limits_;
  std::vector<std::uint64_t> values_;
  std::vector<std::uint64_t> hits_;
  std::vector<std::uint8_t> cond_true_;
  std::vector<std::uint8_t> cond_false_;
  std::vector<std::uint64_t> arm_hits_;
  std::vector<char> pending_;
  std::vector<NbaWrite> nba_;
  std::uint64_t steps_ = 0;
  long now_ = 0;
  int current_ = -1;
};

}  // namespace

SimResult simulate(const ModuleAst& design, const TestbenchAst& tb,
                   const SimLimits& limits) {
  const Model model = Compiler(design).run();
  return Engine(model, limits).run(tb);
}

CoverageReport empty_coverage(const ModuleAst& design) {
  const Model model = Compiler(design).run();
  return Engine(model, SimLimits{}).coverage();
}

CoverageSummary coverage_summary(const CoverageReport& report) {
  CoverageSummary s;
  std::size_t lines = 0, lines_hit = 0;
  for (const auto& [id, hits] : report.line_hits) {
    if (report.blocks.count(id)) continue;
    ++lines;
    if (hits > 0) ++lines_hit;
  }
  std::size_t conds_hit = 0;
  for (const auto& [id, o] : report.condition_outcomes)
    if (o.saw_true && o.saw_false) ++conds_hit;
  std::size_t arms_hit = 0;
  for (const auto& [key, hits] : report.branch_taken)
    if (hits > 0) ++arms_hit;
  auto pct = [](std::size_t num, std::size_t den) {
    return den == 0 ? 100.0 : 100.0 * static_cast<double>(num) / static_cast<double>(den);
  };
  s.line_pct = pct(lines_hit, lines);
  s.condition_pct = pct(conds_hit, report.condition_outcomes.size());
  s.branch_pct = pct(arms_hit, report.branch_taken.size());
  return s;
}

nlohmann::json coverage_to_json(const CoverageReport& report) {
  nlohmann::json j;
  j["lines"] = nlohmann::json::array();
  for (const auto& [id, hits] : report.line_hits)
    j["lines"].push_back({{"id", id}, {"hits", hits}});
  j["conditions"] = nlohmann::json::array();
  for (const auto& [id, o] : report.condition_outcomes)
    j["conditions"].push_back({{"id", id}, {"saw_true", o.saw_true}, {"saw_false", o.saw_false}});
  j["branches"] = nlohmann::json::array();
  for (const auto& [key, hits] : report.branch_taken)
    j["branches"].push_back({{"owner", key.owner}, {"arm", key.arm}, {"hits", hits}});
  return j;
}

Verdict compare_traces(const Trace& a, const Trace& b) {
  if (a.ports != b.ports) throw ShapeMismatch("traces have different ports");
  if (a.sample_times != b.sample_times)
    throw ShapeMismatch("traces have different sample times");
  Verdict v;
  const std::size_t n = a.sample_times.size();
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t p = 0; p < a.ports.size(); ++p) {
      if (a.values[p].size() != n || b.values[p].size() != n)
        throw ShapeMismatch("trace length differs from sample count");
      if (a.values[p][k] != b.values[p][k] && v.equivalent) {
        v.equivalent = false;
        v.first_time = a.sample_times[k];
        v.port = a.ports[p];
        v.value_a = a.values[p][k];
        v.value_b = b.values[p][k];
      }
    }
  }
  if (!v.equivalent) {
    for (std::size_t p = 0; p < a.ports.size(); ++p)
      if (a.values[p] != b.values[p]) v.diverging_ports.push_back(a.ports[p]);
  }
  return v;
}

}  // namespace hdlmutant
