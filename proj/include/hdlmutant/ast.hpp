#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hdlmutant {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = 0;
inline constexpr int kMaxWidth = 64;

struct SourceSpan {
  int line = 0;
  int col = 0;
  int end_line = 0;
  int end_col = 0;
};

enum class UnaryOp {
  kPlus,
  kMinus,
  kLogNot,
  kBitNot,
  kRedAnd,
  kRedOr,
  kRedXor,
  kRedNand,
  kRedNor,
  kRedXnor,
};

enum class BinaryOp {
  kAdd,
  kSub,
  kMul,
  kDiv,
  kMod,
  kLogAnd,
  kLogOr,
  kBitAnd,
  kBitOr,
  kBitXor,
  kBitXnor,
  kEq,
  kNeq,
  kCaseEq,
  kCaseNeq,
  kLt,
  kLe,
  kGt,
  kGe,
  kShl,
  kShr,
  kAshl,
  kAshr,
};

enum class ExprKind {
  kLiteral,
  kRef,
  kBitSelect,   // name[operands[0]]
  kPartSelect,  // name[msb:lsb], constant bounds
  kConcat,
  kUnary,
  kBinary,
  kTernary,     // operands: cond, then, else
  kSignCast,    // $signed / $unsigned
};

struct Expr {
  ExprKind kind = ExprKind::kLiteral;
  NodeId id = kNoNode;
  SourceSpan span;

  // kLiteral
  std::uint64_t value = 0;
  int width = 32;
  bool is_signed = false;
  bool sized = true;

  // kRef, kBitSelect, kPartSelect
  std::string name;
  int msb = 0;
  int lsb = 0;

  UnaryOp unary = UnaryOp::kPlus;
  BinaryOp binary = BinaryOp::kAdd;
  bool to_signed = true;  // kSignCast

  std::vector<Expr> operands;

  static Expr literal(std::uint64_t value, int width, bool is_signed = false);
  static Expr unsized(std::uint64_t value);
  static Expr ref(std::string name);
  static Expr unary_op(UnaryOp op, Expr operand);
  static Expr binary_op(BinaryOp op, Expr lhs, Expr rhs);
  static Expr ternary(Expr cond, Expr then_e, Expr else_e);
  static Expr bit_select(std::string name, Expr index);
  static Expr part_select(std::string name, int msb, int lsb);
  static Expr concat(std::vector<Expr> parts);
  static Expr sign_cast(bool to_signed, Expr operand);
};

enum class StmtKind {
  kBlockingAssign,
  kNonBlockingAssign,
  kIf,
  kCase,
  kFor,
  kBeginEnd,
};

/// Procedural statement.
///
/// `body` holds child statements for every control kind:
///   kIf       body[0] = then, body[1] = else (optional)
///   kCase     body[i] = arm i; case_labels[i] lists its labels, empty = default
///   kFor      body[0] = loop body; lhs = loop variable, rhs = init, cond, step
///   kBeginEnd the statement list
/// Arms, loop bodies and always/initial bodies are always kBeginEnd after
/// parsing; bare statements are wrapped.
struct Stmt {
  StmtKind kind = StmtKind::kBeginEnd;
  NodeId id = kNoNode;
  SourceSpan span;
  Expr lhs;
  Expr rhs;
  Expr cond;
  Expr step;
  std::vector<std::vector<Expr>> case_labels;
  std::vector<Stmt> body;

  bool is_assign() const {
    return kind == StmtKind::kBlockingAssign ||
           kind == StmtKind::kNonBlockingAssign;
  }
  bool has_else() const { return kind == StmtKind::kIf && body.size() > 1; }

  static Stmt assign(bool blocking, Expr lhs, Expr rhs);
  static Stmt if_else(Expr cond, Stmt then_s, std::optional<Stmt> else_s);
  static Stmt block(std::vector<Stmt> stmts);
};

enum class ItemKind { kContinuousAssign, kAlways, kInitial };
enum class Edge { kPos, kNeg };

struct EdgeEvent {
  Edge edge = Edge::kPos;
  std::string signal;
};

struct ModuleItem {
  ItemKind kind = ItemKind::kContinuousAssign;
  NodeId id = kNoNode;
  SourceSpan span;
  Expr lhs;  // continuous assign
  Expr rhs;
  bool star = false;              // always @*
  std::vector<EdgeEvent> events;  // always @(posedge a or negedge b)
  Stmt body;                      // always / initial

  bool is_combinational() const { return kind == ItemKind::kAlways && star; }
  bool is_edge_triggered() const { return kind == ItemKind::kAlways && !star; }
};

enum class Direction { kInput, kOutput };
enum class NetKind { kWire, kReg, kInteger };

struct PortDecl {
  std::string name;
  Direction dir = Direction::kInput;
  int msb = 0;
  int lsb = 0;
  bool is_signed = false;
  bool is_reg = false;
  int width() const { return (msb >= lsb ? msb - lsb : lsb - msb) + 1; }
};

struct NetDecl {
  std::string name;
  NetKind kind = NetKind::kWire;
  int msb = 0;
  int lsb = 0;
  bool is_signed = false;
  int width() const { return (msb >= lsb ? msb - lsb : lsb - msb) + 1; }
};

struct ModuleAst {
  std::string name;
  std::vector<PortDecl> ports;
  std::vector<NetDecl> nets;
  std::vector<ModuleItem> items;
};

struct SignalInfo {
  int width = 1;
  int msb = 0;
  int lsb = 0;
  bool is_signed = false;
  bool is_port = false;
  Direction dir = Direction::kInput;
  bool is_reg = false;  // procedural target
};

using SignalTable = std::map<std::string, SignalInfo>;

SignalTable signal_table(const ModuleAst& ast);

// --- traversal -------------------------------------------------------------

/// Location of a statement inside the module: the owning item and the chain
/// of (statement, child index) pairs leading to it.
struct StmtPath {
  std::size_t item = 0;
  std::vector<std::size_t> indices;  // child indices below item.body
};

void for_each_stmt(const ModuleAst& ast,
                   const std::function<void(const Stmt&, const StmtPath&)>& fn);
void for_each_expr(const Stmt& stmt, const std::function<void(const Expr&)>& fn);
void for_each_expr(const Expr& expr, const std::function<void(const Expr&)>& fn);
void for_each_expr(const ModuleAst& ast,
                   const std::function<void(const Expr&)>& fn);

std::optional<StmtPath> find_stmt(const ModuleAst& ast, NodeId id);
Stmt& stmt_at(ModuleAst& ast, const StmtPath& path);
const Stmt& stmt_at(const ModuleAst& ast, const StmtPath& path);

/// Deletes the statement at `path`: dropped from a begin-end list, an else
/// arm disappears, any other arm or body becomes an empty begin-end. An item
/// body (empty path) is emptied.
void remove_stmt(ModuleAst& ast, const StmtPath& path);

/// Assigns fresh pre-order NodeIds (starting at 1) to every item, statement
/// and expression. Parsing ends with this, so ids survive emit/parse.
void renumber(ModuleAst& ast);

/// Equality ignoring NodeIds and spans.
bool structurally_equal(const Expr& a, const Expr& b);
bool structurally_equal(const Stmt& a, const Stmt& b);
bool structurally_equal(const ModuleAst& a, const ModuleAst& b);

enum class NodeClass { kLeaf, kParent };
NodeClass classify_node(NodeId id, const ModuleAst& ast);
NodeClass classify_stmt(const Stmt& stmt);

/// Number of procedural statements (all kinds) plus continuous assigns.
std::size_t statement_count(const ModuleAst& ast);

/// Signals read anywhere inside `stmt` (including index expressions).
void collect_reads(const Stmt& stmt, std::vector<std::string>& out);
void collect_reads(const Expr& expr, std::vector<std::string>& out);
/// Signals written by assignments inside `stmt` (for-loop variables included).
void collect_writes(const Stmt& stmt, std::vector<std::string>& out);

std::string to_string(UnaryOp op);
std::string to_string(BinaryOp op);

}  // namespace hdlmutant
