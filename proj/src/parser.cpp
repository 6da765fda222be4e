#include "hdlmutant/parser.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "hdlmutant/errors.hpp"
#include "hdlmutant/semantics.hpp"

namespace hdlmutant {

namespace {

enum class Tok { kIdent, kSysIdent, kNumber, kSymbol, kEnd };

struct Token {
  Tok kind = Tok::kEnd;
  std::string text;
  int line = 1;
  int col = 1;
  int end_line = 1;
  int end_col = 1;
  // kNumber
  std::uint64_t value = 0;
  int width = 32;
  bool is_signed = true;
  bool sized = false;
};

bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space_and_comments();
      if (pos_ >= src_.size()) break;
      out.push_back(next());
    }
    Token end;
    end.kind = Tok::kEnd;
    end.line = end.end_line = line_;
    end.col = end.end_col = col_;
    out.push_back(end);
    return out;
  }

 private:
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space_and_comments() {
    while (pos_ < src_.size()) {
      const char c = peek();
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '/' && peek(1) == '/') {
        while (pos_ < src_.size() && peek() != '\n') advance();
      } else if (c == '/' && peek(1) == '*') {
        advance();
        advance();
        while (pos_ < src_.size() && !(peek() == '*' && peek(1) == '/'))
          advance();
        if (pos_ >= src_.size())
          throw SyntaxError(line_, col_, "'*/'", "end of file");
        advance();
        advance();
      } else if (c == '(' && peek(1) == '*' && peek(2) != ')') {
        // attribute instance (* ... *)
        advance();
        advance();
        while (pos_ < src_.size() && !(peek() == '*' && peek(1) == ')'))
          advance();
        if (pos_ >= src_.size())
          throw SyntaxError(line_, col_, "'*)'", "end of file");
        advance();
        advance();
      } else if (c == '`') {
        // compiler directives (`timescale, `default_nettype) are ignored
        std::size_t start = pos_ + 1;
        std::size_t end = start;
        while (end < src_.size() && ident_char(src_[end])) ++end;
        const auto name = src_.substr(start, end - start);
        if (name == "define" || name == "ifdef" || name == "ifndef" ||
            name == "include")
          throw UnsupportedConstruct("`" + std::string(name), line_);
        while (pos_ < src_.size() && peek() != '\n') advance();
      } else {
        break;
      }
    }
  }

  Token make(Tok kind, std::size_t start, int line, int col) {
    Token t;
    t.kind = kind;
    t.text = std::string(src_.substr(start, pos_ - start));
    t.line = line;
    t.col = col;
    t.end_line = line_;
    t.end_col = col_;
    return t;
  }

  Token next() {
    const std::size_t start = pos_;
    const int line = line_;
    const int col = col_;
    const char c = peek();
    if (ident_start(c)) {
      while (pos_ < src_.size() && ident_char(peek())) advance();
      return make(Tok::kIdent, start, line, col);
    }
    if (c == '\\') throw UnsupportedConstruct("escaped identifier", line);
    if (c == '$') {
      advance();
      while (pos_ < src_.size() && ident_char(peek())) advance();
      return make(Tok::kSysIdent, start, line, col);
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '\'') {
      return number(start, line, col);
    }
    static const char* kSymbols[] = {
        "<<<", ">>>", "===", "!==", "<<", ">>", "<=", ">=", "==", "!=",
        "&&",  "||",  "~&",  "~|",  "~^", "^~", "**", "+:", "-:",
    };
    for (const char* sym : kSymbols) {
      const std::size_t n = std::char_traits<char>::length(sym);
      if (src_.substr(pos_, n) == sym) {
        for (std::size_t i = 0; i < n; ++i) advance();
        return make(Tok::kSymbol, start, line, col);
      }
    }
    static const std::string kSingle = "()[]{};:,.=+-*/%!~&|^<>?@#";
    if (kSingle.find(c) != std::string::npos) {
      advance();
      return make(Tok::kSymbol, start, line, col);
    }
    throw SyntaxError(line, col, "token", std::string(1, c));
  }

  Token number(std::size_t start, int line, int col) {
    std::string size_digits;
    while (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '_') {
      if (peek() != '_') size_digits.push_back(peek());
      advance();
    }
    // Optional whitespace between size and base.
    std::size_t save_pos = pos_;
    int save_line = line_;
    int save_col = col_;
    while (peek() == ' ' || peek() == '\t') advance();
    if (peek() != '\'') {
      pos_ = save_pos;
      line_ = save_line;
      col_ = save_col;
      Token t = make(Tok::kNumber, start, line, col);
      t.value = parse_digits(size_digits, 10, line);
      if (t.value > 0xffffffffULL)
        throw UnsupportedConstruct("unsized literal wider than 32 bits", line);
      t.width = 32;
      t.is_signed = true;
      t.sized = false;
      return t;
    }
    advance();  // '
    bool is_signed = false;
    if (peek() == 's' || peek() == 'S') {
      is_signed = true;
      advance();
    }
    const char base_ch = static_cast<char>(std::tolower(peek()));
    int base = 0;
    switch (base_ch) {
      case 'b': base = 2; break;
      case 'o': base = 8; break;
      case 'd': base = 10; break;
      case 'h': base = 16; break;
      default:
        throw SyntaxError(line_, col_, "number base", std::string(1, peek()));
    }
    advance();
    while (peek() == ' ' || peek() == '\t') advance();
    std::string digits;
    while (std::isxdigit(static_cast<unsigned char>(peek())) || peek() == '_' ||
           peek() == 'x' || peek() == 'X' || peek() == 'z' || peek() == 'Z' ||
           peek() == '?') {
      const char d = static_cast<char>(std::tolower(peek()));
      if (d == 'x' || d == 'z' || d == '?')
        throw UnsupportedConstruct("4-state literal", line);
      if (d != '_') digits.push_back(d);
      advance();
    }
    if (digits.empty()) throw SyntaxError(line_, col_, "digits", "");
    Token t = make(Tok::kNumber, start, line, col);
    t.is_signed = is_signed;
    if (size_digits.empty()) {
      t.width = 32;
      t.sized = false;
    } else {
      const auto w = parse_digits(size_digits, 10, line);
      if (w == 0) throw SemanticError("zero-width literal");
      if (w > static_cast<std::uint64_t>(kMaxWidth))
        throw UnsupportedConstruct("literal wider than 64 bits", line);
      t.width = static_cast<int>(w);
      t.sized = true;
    }
    t.value = parse_digits(digits, base, line) & width_mask(t.width);
    return t;
  }

  static std::uint64_t parse_digits(const std::string& digits, int base,
                                    int line) {
    unsigned __int128 v = 0;
    for (char d : digits) {
      int x = std::isdigit(static_cast<unsigned char>(d)) ? d - '0'
                                                          : 10 + (d - 'a');
      if (x >= base) throw SyntaxError(line, 0, "base-" + std::to_string(base) +
                                                    " digit",
                                       std::string(1, d));
      v = v * base + x;
      if (v >> 64) v &= ~std::uint64_t{0};  // truncate silently like tools do
    }
    return static_cast<std::uint64_t>(v);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

const std::unordered_set<std::string>& keywords() {
  static const std::unordered_set<std::string> kw = {
      "module",   "endmodule", "input",    "output",    "inout",
      "wire",     "reg",       "integer",  "signed",    "assign",
      "always",   "initial",   "begin",    "end",       "if",
      "else",     "case",      "casez",    "casex",     "endcase",
      "default",  "for",       "while",    "repeat",    "forever",
      "posedge",  "negedge",   "or",       "localparam", "parameter",
      "function", "endfunction", "task",   "endtask",   "generate",
      "endgenerate", "genvar", "tri",      "supply0",   "supply1",
      "real",     "time",      "logic",    "always_ff", "always_comb",
  };
  return kw;
}

struct ParamValue {
  Expr literal;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  ModuleAst parse_module() {
    ModuleAst ast;
    expect_kw("module");
    ast.name = expect_ident();
    if (is_sym("#")) throw UnsupportedConstruct("module parameter list", cur().line);
    std::vector<std::string> non_ansi;
    if (accept_sym("(")) {
      if (!is_sym(")")) {
        if (is_kw("input") || is_kw("output") || is_kw("inout")) {
          parse_ansi_ports(ast);
        } else {
          do {
            non_ansi.push_back(expect_ident());
          } while (accept_sym(","));
        }
      }
      expect_sym(")");
    }
    expect_sym(";");
    for (const auto& name : non_ansi) {
      PortDecl p;
      p.name = name;
      pending_ports_.push_back(p);
      pending_seen_[name] = false;
    }
    while (!is_kw("endmodule")) {
      if (cur().kind == Tok::kEnd)
        throw SyntaxError(cur().line, cur().col, "'endmodule'", "end of file");
      parse_item(ast);
    }
    advance();
    if (cur().kind != Tok::kEnd) {
      if (is_kw("module")) throw UnsupportedConstruct("multiple modules", cur().line);
      fail("end of file");
    }
    if (!pending_ports_.empty()) {
      for (auto& p : pending_ports_) {
        if (!pending_seen_[p.name])
          throw SemanticError("port '" + p.name + "' has no direction");
      }
      ast.ports.insert(ast.ports.begin(), pending_ports_.begin(),
                       pending_ports_.end());
    }
    return ast;
  }

 private:
  const Token& cur() const { return toks_[pos_]; }
  const Token& prev() const { return toks_[pos_ > 0 ? pos_ - 1 : 0]; }
  const Token& look(std::size_t n) const {
    return toks_[std::min(pos_ + n, toks_.size() - 1)];
  }
  void advance() {
    if (pos_ + 1 < toks_.size()) ++pos_;
  }

  [[noreturn]] void fail(const std::string& expected) const {
    const auto& t = cur();
    throw SyntaxError(t.line, t.col, expected,
                      t.kind == Tok::kEnd ? "end of file" : t.text);
  }

  bool is_sym(const char* s) const {
    return cur().kind == Tok::kSymbol && cur().text == s;
  }
  bool is_kw(const char* s) const {
    return cur().kind == Tok::kIdent && cur().text == s;
  }
  bool accept_sym(const char* s) {
    if (!is_sym(s)) return false;
    advance();
    return true;
  }
  bool accept_kw(const char* s) {
    if (!is_kw(s)) return false;
    advance();
    return true;
  }
  void expect_sym(const char* s) {
    if (!accept_sym(s)) fail(std::string("'") + s + "'");
  }
  void expect_kw(const char* s) {
    if (!accept_kw(s)) fail(std::string("'") + s + "'");
  }
  std::string expect_ident() {
    if (cur().kind != Tok::kIdent || keywords().count(cur().text)) fail("identifier");
    std::string name = cur().text;
    advance();
    return name;
  }

  SourceSpan span_from(const Token& first) const {
    const Token& last = prev();
    return SourceSpan{first.line, first.col, last.end_line, last.end_col};
  }

  // --- declarations --------------------------------------------------------

  struct Range {
    int msb = 0;
    int lsb = 0;
  };

  std::optional<Range> parse_range() {
    if (!accept_sym("[")) return std::nullopt;
    const int line = prev().line;
    Range r;
    r.msb = const_int(parse_expr(), line);
    expect_sym(":");
    r.lsb = const_int(parse_expr(), line);
    expect_sym("]");
    if (r.msb < r.lsb) throw UnsupportedConstruct("ascending range", line);
    if (r.lsb < 0) throw UnsupportedConstruct("negative range bound", line);
    if (r.msb - r.lsb + 1 > kMaxWidth)
      throw UnsupportedConstruct("signal wider than 64 bits", line);
    return r;
  }

  int const_int(const Expr& e, int line) {
    auto v = fold_constant(e, SignalTable{});
    if (!v) throw SemanticError("non-constant expression at line " + std::to_string(line));
    const std::int64_t s = self_signed(e, SignalTable{})
                               ? sign_extend(*v, self_width(e, SignalTable{}))
                               : static_cast<std::int64_t>(*v);
    if (s < INT32_MIN || s > INT32_MAX)
      throw SemanticError("constant out of range at line " + std::to_string(line));
    return static_cast<int>(s);
  }

  void parse_ansi_ports(ModuleAst& ast) {
    PortDecl proto;
    bool have_proto = false;
    do {
      if (is_kw("input") || is_kw("output") || is_kw("inout")) {
        if (is_kw("inout")) throw UnsupportedConstruct("inout port", cur().line);
        proto = PortDecl{};
        proto.dir = is_kw("input") ? Direction::kInput : Direction::kOutput;
        advance();
        if (accept_kw("reg")) {
          if (proto.dir == Direction::kInput)
            throw SemanticError("input port declared reg");
          proto.is_reg = true;
        } else {
          accept_kw("wire");
        }
        if (is_kw("integer")) throw UnsupportedConstruct("integer port", cur().line);
        proto.is_signed = accept_kw("signed");
        auto r = parse_range();
        proto.msb = r ? r->msb : 0;
        proto.lsb = r ? r->lsb : 0;
        have_proto = true;
      } else if (!have_proto) {
        fail("port direction");
      }
      PortDecl p = proto;
      p.name = expect_ident();
      declare(p.name);
      ast.ports.push_back(p);
    } while (accept_sym(","));
  }

  void declare(const std::string& name) {
    if (!declared_.insert(name).second)
      throw SemanticError("duplicate declaration of '" + name + "'");
  }

  void parse_port_decl(ModuleAst&) {
    const int line = cur().line;
    if (pending_ports_.empty()) throw SemanticError("port declaration without non-ANSI port list");
    const Direction dir = is_kw("input") ? Direction::kInput : Direction::kOutput;
    if (is_kw("inout")) throw UnsupportedConstruct("inout port", line);
    advance();
    bool is_reg = false;
    if (accept_kw("reg")) is_reg = true;
    else accept_kw("wire");
    if (is_reg && dir == Direction::kInput) throw SemanticError("input port declared reg");
    const bool is_signed = accept_kw("signed");
    auto r = parse_range();
    do {
      const std::string name = expect_ident();
      auto it = pending_seen_.find(name);
      if (it == pending_seen_.end())
        throw SemanticError("'" + name + "' is not in the port list");
      if (it->second) throw SemanticError("duplicate port declaration of '" + name + "'");
      it->second = true;
      declare(name);
      for (auto& p : pending_ports_) {
        if (p.name != name) continue;
        p.dir = dir;
        p.is_reg = is_reg;
        p.is_signed = is_signed;
        p.msb = r ? r->msb : 0;
        p.lsb = r ? r->lsb : 0;
      }
    } while (accept_sym(","));
    expect_sym(";");
  }

  PortDecl* pending_port(const std::string& name) {
    for (auto& p : pending_ports_)
      if (p.name == name) return &p;
    return nullptr;
  }

  void parse_net_decl(ModuleAst& ast) {
    const int line = cur().line;
    NetKind kind = NetKind::kWire;
    if (accept_kw("reg")) kind = NetKind::kReg;
    else if (accept_kw("integer")) kind = NetKind::kInteger;
    else expect_kw("wire");
    bool is_signed = false;
    std::optional<Range> r;
    if (kind == NetKind::kInteger) {
      is_signed = true;
      r = Range{31, 0};
    } else {
      is_signed = accept_kw("signed");
      r = parse_range();
    }
    do {
      const Token& first = cur();
      const std::string name = expect_ident();
      if (is_sym("[")) throw UnsupportedConstruct("memory array", line);
      if (PortDecl* p = pending_port(name)) {
        // non-ANSI: `output y; reg y;`
        if (r && (r->msb != p->msb || r->lsb != p->lsb))
          throw SemanticError("range of '" + name + "' conflicts with its port");
        if (kind == NetKind::kInteger) throw UnsupportedConstruct("integer port", line);
        if (kind == NetKind::kReg) {
          if (p->dir == Direction::kInput) throw SemanticError("input port declared reg");
          p->is_reg = true;
        }
        if (is_signed) p->is_signed = true;
      } else {
        declare(name);
        NetDecl n;
        n.name = name;
        n.kind = kind;
        n.is_signed = is_signed;
        n.msb = r ? r->msb : 0;
        n.lsb = r ? r->lsb : 0;
        ast.nets.push_back(n);
      }
      if (accept_sym("=")) {
        if (kind != NetKind::kWire)
          throw UnsupportedConstruct("variable initializer", line);
        ModuleItem item;
        item.kind = ItemKind::kContinuousAssign;
        item.lhs = Expr::ref(name);
        item.lhs.span = SourceSpan{first.line, first.col, first.end_line, first.end_col};
        item.rhs = parse_expr();
        item.span = span_from(first);
        ast.items.push_back(std::move(item));
      }
    } while (accept_sym(","));
    expect_sym(";");
  }

  void parse_param(bool) {
    advance();
    const int line = prev().line;
    bool is_signed = accept_kw("signed");
    if (is_kw("integer")) {
      advance();
      is_signed = true;
    }
    auto r = parse_range();
    do {
      const std::string name = expect_ident();
      expect_sym("=");
      Expr value = parse_expr();
      auto v = fold_constant(value, SignalTable{});
      if (!v) throw SemanticError("non-constant parameter '" + name + "'");
      Expr lit;
      if (r) {
        const int w = r->msb - r->lsb + 1;
        const int vw = self_width(value, SignalTable{});
        lit = Expr::literal(extend(*v, vw, self_signed(value, SignalTable{})), w,
                            is_signed);
      } else if (value.kind == ExprKind::kLiteral && !value.sized) {
        lit = value;
      } else {
        lit = Expr::literal(*v, self_width(value, SignalTable{}),
                            is_signed || self_signed(value, SignalTable{}));
      }
      if (params_.count(name) || declared_.count(name))
        throw SemanticError("duplicate declaration of '" + name + "' (line " +
                            std::to_string(line) + ")");
      params_[name] = ParamValue{lit};
    } while (accept_sym(","));
    expect_sym(";");
  }

  // --- items ---------------------------------------------------------------

  void parse_item(ModuleAst& ast) {
    const Token& first = cur();
    if (first.kind != Tok::kIdent) fail("module item");
    const std::string& kw = first.text;
    if (kw == "input" || kw == "output" || kw == "inout") {
      parse_port_decl(ast);
    } else if (kw == "wire" || kw == "reg" || kw == "integer") {
      parse_net_decl(ast);
    } else if (kw == "localparam" || kw == "parameter") {
      parse_param(kw == "localparam");
    } else if (kw == "assign") {
      advance();
      do {
        const Token& start = cur();
        ModuleItem item;
        item.kind = ItemKind::kContinuousAssign;
        item.lhs = parse_lvalue();
        expect_sym("=");
        item.rhs = parse_expr();
        item.span = span_from(start);
        ast.items.push_back(std::move(item));
      } while (accept_sym(","));
      expect_sym(";");
    } else if (kw == "always") {
      advance();
      ModuleItem item;
      item.kind = ItemKind::kAlways;
      parse_event_control(item);
      item.body = as_block(parse_stmt());
      item.span = span_from(first);
      ast.items.push_back(std::move(item));
    } else if (kw == "initial") {
      advance();
      ModuleItem item;
      item.kind = ItemKind::kInitial;
      item.body = as_block(parse_stmt());
      item.span = span_from(first);
      ast.items.push_back(std::move(item));
    } else if (kw == "function" || kw == "task" || kw == "generate" ||
               kw == "genvar" || kw == "always_ff" || kw == "always_comb" ||
               kw == "real" || kw == "time" || kw == "tri" || kw == "supply0" ||
               kw == "supply1" || kw == "logic") {
      throw UnsupportedConstruct(kw, first.line);
    } else if (!keywords().count(kw) && look(1).kind == Tok::kIdent) {
      throw UnsupportedConstruct("module instantiation", first.line);
    } else if (!keywords().count(kw) && look(1).kind == Tok::kSymbol &&
               look(1).text == "#") {
      throw UnsupportedConstruct("module instantiation", first.line);
    } else {
      fail("module item");
    }
  }

  void parse_event_control(ModuleItem& item) {
    expect_sym("@");
    if (accept_sym("*")) {
      item.star = true;
      return;
    }
    expect_sym("(");
    if (accept_sym("*")) {
      expect_sym(")");
      item.star = true;
      return;
    }
    do {
      EdgeEvent ev;
      if (accept_kw("posedge")) ev.edge = Edge::kPos;
      else if (accept_kw("negedge")) ev.edge = Edge::kNeg;
      else throw UnsupportedConstruct("level-sensitive event list", cur().line);
      ev.signal = expect_ident();
      item.events.push_back(ev);
    } while (accept_kw("or") || accept_sym(","));
    expect_sym(")");
  }

  // --- statements ----------------------------------------------------------

  static Stmt as_block(Stmt s) {
    if (s.kind == StmtKind::kBeginEnd) return s;
    Stmt b;
    b.kind = StmtKind::kBeginEnd;
    b.span = s.span;
    b.body.push_back(std::move(s));
    return b;
  }

  Stmt parse_stmt() {
    const Token& first = cur();
    if (accept_sym(";")) {
      Stmt s;
      s.kind = StmtKind::kBeginEnd;
      s.span = span_from(first);
      return s;
    }
    if (first.kind == Tok::kSymbol && (first.text == "#" || first.text == "@"))
      throw UnsupportedConstruct("timing control in statement", first.line);
    if (first.kind == Tok::kSysIdent)
      throw UnsupportedConstruct("system task " + first.text, first.line);
    if (first.kind != Tok::kIdent && !(first.kind == Tok::kSymbol && first.text == "{"))
      fail("statement");
    const std::string kw = first.text;
    if (kw == "begin") {
      advance();
      if (accept_sym(":")) expect_ident();
      Stmt s;
      s.kind = StmtKind::kBeginEnd;
      while (!is_kw("end")) {
        if (cur().kind == Tok::kEnd) fail("'end'");
        if (is_kw("reg") || is_kw("integer") || is_kw("wire"))
          throw UnsupportedConstruct("block-local declaration", cur().line);
        s.body.push_back(parse_stmt());
      }
      advance();
      s.span = span_from(first);
      return s;
    }
    if (kw == "if") {
      advance();
      expect_sym("(");
      Stmt s;
      s.kind = StmtKind::kIf;
      s.cond = parse_expr();
      expect_sym(")");
      s.body.push_back(as_block(parse_stmt()));
      if (accept_kw("else")) s.body.push_back(as_block(parse_stmt()));
      s.span = span_from(first);
      return s;
    }
    if (kw == "case" || kw == "casez" || kw == "casex") {
      if (kw != "case") throw UnsupportedConstruct(kw, first.line);
      advance();
      expect_sym("(");
      Stmt s;
      s.kind = StmtKind::kCase;
      s.cond = parse_expr();
      expect_sym(")");
      bool seen_default = false;
      while (!is_kw("endcase")) {
        if (cur().kind == Tok::kEnd) fail("'endcase'");
        std::vector<Expr> labels;
        if (accept_kw("default")) {
          if (seen_default) throw SemanticError("multiple default arms");
          seen_default = true;
          accept_sym(":");
        } else {
          do {
            labels.push_back(parse_expr());
          } while (accept_sym(","));
          expect_sym(":");
        }
        s.case_labels.push_back(std::move(labels));
        s.body.push_back(as_block(parse_stmt()));
      }
      advance();
      s.span = span_from(first);
      return s;
    }
    if (kw == "for") {
      advance();
      expect_sym("(");
      Stmt s;
      s.kind = StmtKind::kFor;
      const Token& var_tok = cur();
      s.lhs = Expr::ref(expect_ident());
      s.lhs.span = SourceSpan{var_tok.line, var_tok.col, var_tok.end_line, var_tok.end_col};
      expect_sym("=");
      s.rhs = parse_expr();
      expect_sym(";");
      s.cond = parse_expr();
      expect_sym(";");
      const std::string step_var = expect_ident();
      if (step_var != s.lhs.name)
        throw UnsupportedConstruct("for step assigns a different variable", first.line);
      expect_sym("=");
      s.step = parse_expr();
      expect_sym(")");
      s.body.push_back(as_block(parse_stmt()));
      s.span = span_from(first);
      return s;
    }
    if (kw == "while" || kw == "repeat" || kw == "forever" || kw == "wait" ||
        kw == "disable" || kw == "fork")
      throw UnsupportedConstruct(kw, first.line);
    if (first.kind == Tok::kIdent && keywords().count(kw)) fail("statement");
    Stmt s;
    s.lhs = parse_lvalue();
    if (accept_sym("=")) {
      s.kind = StmtKind::kBlockingAssign;
    } else if (accept_sym("<=")) {
      s.kind = StmtKind::kNonBlockingAssign;
    } else {
      if (is_sym("(")) throw UnsupportedConstruct("task call", first.line);
      fail("'=' or '<='");
    }
    if (is_sym("#") || is_sym("@"))
      throw UnsupportedConstruct("intra-assignment delay", cur().line);
    s.rhs = parse_expr();
    expect_sym(";");
    s.span = span_from(first);
    return s;
  }

  Expr parse_lvalue() {
    const Token& first = cur();
    if (accept_sym("{")) {
      std::vector<Expr> parts;
      do {
        parts.push_back(parse_lvalue());
      } while (accept_sym(","));
      expect_sym("}");
      Expr e = Expr::concat(std::move(parts));
      e.span = span_from(first);
      return e;
    }
    const std::string name = expect_ident();
    if (params_.count(name)) throw SemanticError("assignment to parameter '" + name + "'");
    Expr e = parse_select(name, first);
    return e;
  }

  // --- expressions ---------------------------------------------------------

  static int binary_prec(const Token& t) {
    if (t.kind != Tok::kSymbol) return -1;
    const std::string& s = t.text;
    if (s == "*" || s == "/" || s == "%") return 10;
    if (s == "+" || s == "-") return 9;
    if (s == "<<" || s == ">>" || s == "<<<" || s == ">>>") return 8;
    if (s == "<" || s == "<=" || s == ">" || s == ">=") return 7;
    if (s == "==" || s == "!=" || s == "===" || s == "!==") return 6;
    if (s == "&") return 5;
    if (s == "^" || s == "~^" || s == "^~") return 4;
    if (s == "|") return 3;
    if (s == "&&") return 2;
    if (s == "||") return 1;
    return -1;
  }

  static BinaryOp binary_of(const std::string& s) {
    static const std::unordered_map<std::string, BinaryOp> m = {
        {"*", BinaryOp::kMul},     {"/", BinaryOp::kDiv},
        {"%", BinaryOp::kMod},     {"+", BinaryOp::kAdd},
        {"-", BinaryOp::kSub},     {"<<", BinaryOp::kShl},
        {">>", BinaryOp::kShr},    {"<<<", BinaryOp::kAshl},
        {">>>", BinaryOp::kAshr},  {"<", BinaryOp::kLt},
        {"<=", BinaryOp::kLe},     {">", BinaryOp::kGt},
        {">=", BinaryOp::kGe},     {"==", BinaryOp::kEq},
        {"!=", BinaryOp::kNeq},    {"===", BinaryOp::kCaseEq},
        {"!==", BinaryOp::kCaseNeq}, {"&", BinaryOp::kBitAnd},
        {"^", BinaryOp::kBitXor},  {"~^", BinaryOp::kBitXnor},
        {"^~", BinaryOp::kBitXnor}, {"|", BinaryOp::kBitOr},
        {"&&", BinaryOp::kLogAnd}, {"||", BinaryOp::kLogOr},
    };
    return m.at(s);
  }

  Expr parse_expr() {
    const Token& first = cur();
    Expr cond = parse_binary(1);
    if (!accept_sym("?")) return cond;
    Expr then_e = parse_expr();
    expect_sym(":");
    Expr else_e = parse_expr();
    Expr e = Expr::ternary(std::move(cond), std::move(then_e), std::move(else_e));
    e.span = span_from(first);
    return e;
  }

  Expr parse_binary(int min_prec) {
    const Token& first = cur();
    Expr lhs = parse_unary();
    for (;;) {
      if (is_sym("**")) throw UnsupportedConstruct("power operator", cur().line);
      const int prec = binary_prec(cur());
      if (prec < min_prec) break;
      const BinaryOp op = binary_of(cur().text);
      advance();
      Expr rhs = parse_binary(prec + 1);
      lhs = Expr::binary_op(op, std::move(lhs), std::move(rhs));
      lhs.span = span_from(first);
    }
    return lhs;
  }

  Expr parse_unary() {
    const Token& first = cur();
    if (first.kind == Tok::kSymbol) {
      static const std::unordered_map<std::string, UnaryOp> m = {
          {"+", UnaryOp::kPlus},     {"-", UnaryOp::kMinus},
          {"!", UnaryOp::kLogNot},   {"~", UnaryOp::kBitNot},
          {"&", UnaryOp::kRedAnd},   {"|", UnaryOp::kRedOr},
          {"^", UnaryOp::kRedXor},   {"~&", UnaryOp::kRedNand},
          {"~|", UnaryOp::kRedNor},  {"~^", UnaryOp::kRedXnor},
          {"^~", UnaryOp::kRedXnor},
      };
      auto it = m.find(first.text);
      if (it != m.end()) {
        advance();
        Expr operand = parse_unary();
        Expr e = Expr::unary_op(it->second, std::move(operand));
        e.span = span_from(first);
        return e;
      }
    }
    return parse_primary();
  }

  Expr parse_primary() {
    const Token& first = cur();
    if (first.kind == Tok::kNumber) {
      advance();
      Expr e;
      e.kind = ExprKind::kLiteral;
      e.value = first.value;
      e.width = first.width;
      e.is_signed = first.is_signed;
      e.sized = first.sized;
      e.span = span_from(first);
      return e;
    }
    if (first.kind == Tok::kSysIdent) {
      if (first.text != "$signed" && first.text != "$unsigned")
        throw UnsupportedConstruct("system function " + first.text, first.line);
      advance();
      expect_sym("(");
      Expr operand = parse_expr();
      expect_sym(")");
      Expr e = Expr::sign_cast(first.text == "$signed", std::move(operand));
      e.span = span_from(first);
      return e;
    }
    if (accept_sym("(")) {
      Expr e = parse_expr();
      expect_sym(")");
      return e;
    }
    if (accept_sym("{")) {
      Expr first_part = parse_expr();
      if (is_sym("{")) {
        // replication {n{...}}
        const int n = const_int(first_part, first.line);
        if (n <= 0) throw SemanticError("non-positive replication count");
        advance();
        std::vector<Expr> inner;
        do {
          inner.push_back(parse_expr());
        } while (accept_sym(","));
        expect_sym("}");
        expect_sym("}");
        std::vector<Expr> parts;
        for (int i = 0; i < n; ++i)
          for (const auto& p : inner) parts.push_back(p);
        Expr e = Expr::concat(std::move(parts));
        e.span = span_from(first);
        return e;
      }
      std::vector<Expr> parts;
      parts.push_back(std::move(first_part));
      while (accept_sym(",")) parts.push_back(parse_expr());
      expect_sym("}");
      Expr e = Expr::concat(std::move(parts));
      e.span = span_from(first);
      return e;
    }
    if (first.kind == Tok::kIdent && !keywords().count(first.text)) {
      advance();
      if (is_sym("(")) throw UnsupportedConstruct("function call", first.line);
      auto pit = params_.find(first.text);
      if (pit != params_.end()) {
        if (is_sym("[")) throw UnsupportedConstruct("select on parameter", first.line);
        Expr e = pit->second.literal;
        e.span = span_from(first);
        return e;
      }
      return parse_select(first.text, first);
    }
    fail("expression");
  }

  Expr parse_select(const std::string& name, const Token& first) {
    if (!accept_sym("[")) {
      Expr e = Expr::ref(name);
      e.span = span_from(first);
      return e;
    }
    Expr index = parse_expr();
    if (is_sym("+:") || is_sym("-:"))
      throw UnsupportedConstruct("indexed part-select", cur().line);
    if (accept_sym(":")) {
      Expr lsb = parse_expr();
      expect_sym("]");
      Expr e = Expr::part_select(name, const_int(index, first.line),
                                 const_int(lsb, first.line));
      e.span = span_from(first);
      return e;
    }
    expect_sym("]");
    if (is_sym("[")) throw UnsupportedConstruct("multi-dimensional select", cur().line);
    Expr e = Expr::bit_select(name, std::move(index));
    e.span = span_from(first);
    return e;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::unordered_set<std::string> declared_;
  std::unordered_map<std::string, ParamValue> params_;
  std::vector<PortDecl> pending_ports_;
  std::unordered_map<std::string, bool> pending_seen_;
};

// --- validation --------------------------------------------------------------

class Validator {
 public:
  explicit Validator(const ModuleAst& ast) : ast_(ast), sigs_(signal_table(ast)) {}

  void run() {
    for (const auto& p : ast_.ports) check_width(p.name, p.width());
    for (const auto& n : ast_.nets) check_width(n.name, n.width());
    std::set<std::string> cont_driven;
    std::map<std::string, std::size_t> proc_driver;
    for (std::size_t i = 0; i < ast_.items.size(); ++i) {
      const auto& item = ast_.items[i];
      const int line = item.span.line;
      if (item.kind == ItemKind::kContinuousAssign) {
        check_expr(item.rhs, line);
        check_lvalue(item.lhs, line, /*procedural=*/false);
        std::vector<std::string> targets;
        lvalue_targets(item.lhs, targets);
        for (const auto& t : targets) {
          if (!cont_driven.insert(t).second)
            throw SemanticError("'" + t + "' has multiple continuous drivers");
        }
        continue;
      }
      for (const auto& ev : item.events) {
        auto it = sigs_.find(ev.signal);
        if (it == sigs_.end()) throw UndeclaredIdentifier(ev.signal, line);
        if (!it->second.is_port || it->second.dir != Direction::kInput)
          throw UnsupportedConstruct("edge event on non-input '" + ev.signal + "'", line);
      }
      check_stmt(item.body);
      std::vector<std::string> writes;
      collect_writes(item.body, writes);
      for (const auto& w : writes) {
        auto [it, inserted] = proc_driver.emplace(w, i);
        if (!inserted && it->second != i) {
          const auto& other = ast_.items[it->second];
          if (other.kind == ItemKind::kAlways && item.kind == ItemKind::kAlways)
            throw SemanticError("'" + w + "' is assigned from multiple always blocks");
          if (other.kind == ItemKind::kInitial) it->second = i;
        }
      }
    }
    for (const auto& name : cont_driven)
      if (proc_driver.count(name))
        throw SemanticError("'" + name + "' is driven both continuously and procedurally");
  }

 private:
  void check_width(const std::string& name, int w) {
    if (w < 1 || w > kMaxWidth)
      throw UnsupportedConstruct("width of '" + name + "' outside 1..64");
  }

  const SignalInfo& lookup(const std::string& name, int line) {
    auto it = sigs_.find(name);
    if (it == sigs_.end()) throw UndeclaredIdentifier(name, line);
    return it->second;
  }

  int line_of(const Expr& e, int fallback) const {
    return e.span.line > 0 ? e.span.line : fallback;
  }

  void check_expr(const Expr& e, int line) {
    line = line_of(e, line);
    switch (e.kind) {
      case ExprKind::kRef:
        lookup(e.name, line);
        break;
      case ExprKind::kBitSelect: {
        const auto& info = lookup(e.name, line);
        if (auto v = fold_constant(e.operands[0], sigs_)) {
          const std::int64_t idx =
              self_signed(e.operands[0], sigs_)
                  ? sign_extend(*v, self_width(e.operands[0], sigs_))
                  : static_cast<std::int64_t>(*v);
          if (idx < info.lsb || idx > info.msb)
            throw SemanticError("bit-select " + e.name + "[" + std::to_string(idx) +
                                "] out of range at line " + std::to_string(line));
        }
        break;
      }
      case ExprKind::kPartSelect: {
        const auto& info = lookup(e.name, line);
        if (e.msb < e.lsb || e.lsb < info.lsb || e.msb > info.msb)
          throw SemanticError("part-select " + e.name + "[" + std::to_string(e.msb) +
                              ":" + std::to_string(e.lsb) + "] out of range at line " +
                              std::to_string(line));
        break;
      }
      default:
        break;
    }
    for (const auto& op : e.operands) check_expr(op, line);
    if (self_width(e, sigs_) > kMaxWidth)
      throw UnsupportedConstruct("expression wider than 64 bits", line);
  }

  void lvalue_targets(const Expr& lhs, std::vector<std::string>& out) {
    if (lhs.kind == ExprKind::kConcat) {
      for (const auto& p : lhs.operands) lvalue_targets(p, out);
    } else {
      out.push_back(lhs.name);
    }
  }

  void check_lvalue(const Expr& lhs, int line, bool procedural) {
    line = line_of(lhs, line);
    switch (lhs.kind) {
      case ExprKind::kConcat:
        if (lhs.operands.empty()) throw SemanticError("empty concatenation target");
        for (const auto& p : lhs.operands) check_lvalue(p, line, procedural);
        return;
      case ExprKind::kRef:
      case ExprKind::kBitSelect:
      case ExprKind::kPartSelect:
        break;
      default:
        throw SemanticError("invalid assignment target at line " + std::to_string(line));
    }
    check_expr(lhs, line);
    const auto& info = lookup(lhs.name, line);
    if (info.is_port && info.dir == Direction::kInput)
      throw SemanticError("assignment to input '" + lhs.name + "'");
    if (procedural && !info.is_reg)
      throw SemanticError("procedural assignment to wire '" + lhs.name + "' at line " +
                          std::to_string(line));
    if (!procedural && info.is_reg)
      throw SemanticError("continuous assignment to reg '" + lhs.name + "' at line " +
                          std::to_string(line));
  }

  void check_stmt(const Stmt& s) {
    const int line = s.span.line;
    switch (s.kind) {
      case StmtKind::kBlockingAssign:
      case StmtKind::kNonBlockingAssign:
        check_lvalue(s.lhs, line, true);
        check_expr(s.rhs, line);
        break;
      case StmtKind::kIf:
        check_expr(s.cond, line);
        if (s.body.empty() || s.body.size() > 2) throw SemanticError("malformed if");
        break;
      case StmtKind::kCase:
        check_expr(s.cond, line);
        if (s.case_labels.size() != s.body.size()) throw SemanticError("malformed case");
        for (const auto& labels : s.case_labels) {
          for (const auto& l : labels) {
            check_expr(l, line);
            if (!fold_constant(l, sigs_))
              throw UnsupportedConstruct("non-constant case label", line_of(l, line));
          }
        }
        break;
      case StmtKind::kFor: {
        check_lvalue(s.lhs, line, true);
        check_expr(s.rhs, line);
        check_expr(s.cond, line);
        check_expr(s.step, line);
        if (s.body.size() != 1) throw SemanticError("malformed for");
        std::vector<std::string> writes;
        collect_writes(s.body[0], writes);
        for (const auto& w : writes)
          if (w == s.lhs.name)
            throw UnsupportedConstruct("for body assigns its loop variable", line);
        static_trip_count(s, sigs_);
        break;
      }
      case StmtKind::kBeginEnd:
        break;
    }
    for (const auto& child : s.body) check_stmt(child);
  }

  const ModuleAst& ast_;
  SignalTable sigs_;
};

}  // namespace

int static_trip_count(const Stmt& s, const SignalTable& sigs) {
  const int line = s.span.line;
  auto it = sigs.find(s.lhs.name);
  if (it == sigs.end()) throw UndeclaredIdentifier(s.lhs.name, line);
  const int width = it->second.width;
  ConstEnv env;
  auto init = fold_assignment(s.rhs, width, sigs, &env);
  if (!init) throw UnsupportedConstruct("non-constant for initializer", line);
  env[s.lhs.name] = *init;
  int count = 0;
  for (;;) {
    auto c = fold_constant(s.cond, sigs, &env);
    if (!c) throw UnsupportedConstruct("for condition is not static", line);
    if (*c == 0) break;
    if (++count > kMaxLoopIterations)
      throw UnsupportedConstruct("for loop exceeds " + std::to_string(kMaxLoopIterations) +
                                     " iterations",
                                 line);
    auto next = fold_assignment(s.step, width, sigs, &env);
    if (!next) throw UnsupportedConstruct("for step is not static", line);
    env[s.lhs.name] = *next;
  }
  return count;
}

void validate(const ModuleAst& ast) { Validator(ast).run(); }

ModuleAst parse(std::string_view source) {
  Lexer lexer(source);
  Parser parser(lexer.run());
  ModuleAst ast = parser.parse_module();
  validate(ast);
  renumber(ast);
  return ast;
}

ModuleAst parse_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

}  // namespace hdlmutant
