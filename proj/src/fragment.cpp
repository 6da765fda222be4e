#include "hdlmutant/fragment.hpp"

#include <algorithm>
#include <fstream>

#include "hdlmutant/errors.hpp"
#include "hdlmutant/parser.hpp"
#include "hdlmutant/semantics.hpp"

namespace hdlmutant {

const std::map<std::string, double>& default_weights() {
  static const std::map<std::string, double> w = [] {
    std::map<std::string, double> m;
    for (const char* z : {"u+", "u-", "!", "~", "r&", "r|", "r^", "r~&", "r~|", "r~^"}) m[z] = 1;
    for (const char* z : {"+", "-", "*", "/", "%"}) m[z] = 2;
    for (const char* z : {"&&", "||"}) m[z] = 2;
    for (const char* z : {"&", "|", "^", "~^"}) m[z] = 2;
    for (const char* z : {"==", "!="}) m[z] = 2;
    for (const char* z : {"===", "!=="}) m[z] = 3;
    for (const char* z : {"<", "<=", ">", ">="}) m[z] = 3;
    for (const char* z : {"<<", ">>", "<<<", ">>>"}) m[z] = 3;
    m["?:"] = 4;
    m["if-else"] = 4;
    m["case"] = 4;
    m["for"] = 5;
    return m;
  }();
  return w;
}

bool is_control_element(const std::string& z) {
  return z == "if-else" || z == "case" || z == "for";
}

namespace {

std::string unary_element(UnaryOp op) {
  switch (op) {
    case UnaryOp::kPlus: return "u+";
    case UnaryOp::kMinus: return "u-";
    case UnaryOp::kLogNot: return "!";
    case UnaryOp::kBitNot: return "~";
    default: return "r" + to_string(op);
  }
}

std::optional<UnaryOp> unary_of(const std::string& z) {
  static const std::map<std::string, UnaryOp> m = {
      {"u+", UnaryOp::kPlus},     {"u-", UnaryOp::kMinus},  {"!", UnaryOp::kLogNot},
      {"~", UnaryOp::kBitNot},    {"r&", UnaryOp::kRedAnd}, {"r|", UnaryOp::kRedOr},
      {"r^", UnaryOp::kRedXor},   {"r~&", UnaryOp::kRedNand}, {"r~|", UnaryOp::kRedNor},
      {"r~^", UnaryOp::kRedXnor},
  };
  auto it = m.find(z);
  if (it == m.end()) return std::nullopt;
  return it->second;
}

std::optional<BinaryOp> binary_of(const std::string& z) {
  static const std::map<std::string, BinaryOp> m = [] {
    std::map<std::string, BinaryOp> r;
    for (int i = 0; i <= static_cast<int>(BinaryOp::kAshr); ++i) {
      const auto op = static_cast<BinaryOp>(i);
      r[to_string(op)] = op;
    }
    return r;
  }();
  auto it = m.find(z);
  if (it == m.end()) return std::nullopt;
  return it->second;
}

void linearize_expr(const Expr& e, std::vector<std::string>& out) {
  switch (e.kind) {
    case ExprKind::kUnary: out.push_back(unary_element(e.unary)); break;
    case ExprKind::kBinary: out.push_back(to_string(e.binary)); break;
    case ExprKind::kTernary: out.push_back("?:"); break;
    default: break;
  }
  for (const auto& op : e.operands) linearize_expr(op, out);
}

void linearize_lvalue(const Expr& lhs, std::vector<std::string>& out) {
  if (lhs.kind == ExprKind::kConcat) {
    for (const auto& p : lhs.operands) linearize_lvalue(p, out);
  } else if (lhs.kind == ExprKind::kBitSelect) {
    linearize_expr(lhs.operands[0], out);
  }
}

void linearize_stmt(const Stmt& s, std::vector<std::string>& out) {
  switch (s.kind) {
    case StmtKind::kBlockingAssign:
    case StmtKind::kNonBlockingAssign:
      linearize_lvalue(s.lhs, out);
      linearize_expr(s.rhs, out);
      break;
    case StmtKind::kIf:
      out.push_back("if-else");
      linearize_expr(s.cond, out);
      break;
    case StmtKind::kCase:
      out.push_back("case");
      linearize_expr(s.cond, out);
      for (const auto& labels : s.case_labels)
        for (const auto& l : labels) linearize_expr(l, out);
      break;
    case StmtKind::kFor:
      out.push_back("for");
      linearize_expr(s.rhs, out);
      linearize_expr(s.cond, out);
      linearize_expr(s.step, out);
      break;
    case StmtKind::kBeginEnd:
      break;
  }
  for (const auto& k : s.body) linearize_stmt(k, out);
}

template <typename Map>
typename Map::key_type draw(const Map& weights, SplitMix64& rng) {
  double total = 0;
  for (const auto& [k, w] : weights) total += w;
  double x = rng.uniform() * total;
  typename Map::key_type last{};
  for (const auto& [k, w] : weights) {
    if (w <= 0) continue;
    last = k;
    if (x < w) return k;
    x -= w;
  }
  return last;
}

}  // namespace

std::vector<std::string> linearize(const Stmt& stmt) {
  std::vector<std::string> out;
  linearize_stmt(stmt, out);
  return out;
}

std::vector<std::string> linearize(const ModuleAst& ast) {
  std::vector<std::string> out;
  for (const auto& item : ast.items) {
    if (item.kind == ItemKind::kContinuousAssign) {
      linearize_lvalue(item.lhs, out);
      linearize_expr(item.rhs, out);
    } else {
      linearize_stmt(item.body, out);
    }
  }
  return out;
}

std::vector<std::filesystem::path> list_verilog_files(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".v") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

CorpusStats ingest_corpus(const std::vector<std::filesystem::path>& paths) {
  CorpusStats stats;
  for (const auto& p : paths) {
    try {
      const ModuleAst ast = parse_file(p);
      stats.sequences.push_back(linearize(ast));
      stats.files.push_back(p);
      ++stats.files_ingested;
    } catch (const Error&) {
      ++stats.files_rejected;
    }
  }
  if (stats.files_ingested == 0) throw EmptyCorpus();
  return stats;
}

FragmentModel build_model(const CorpusStats& stats, int max_len_L) {
  FragmentModel m;
  m.weight = default_weights();
  m.max_len_L = max_len_L;
  for (const auto& seq : stats.sequences) {
    for (std::size_t i = 0; i < seq.size(); ++i) {
      m.freq[seq[i]] += 1;
      if (!m.weight.count(seq[i])) m.weight[seq[i]] = 1;
      if (i + 1 < seq.size()) m.transitions[{seq[i], seq[i + 1]}] += 1;
    }
  }
  m.threshold_T = median_conditional(m);
  return m;
}

std::map<std::string, double> element_probability(const FragmentModel& model) {
  double total = 0;
  for (const auto& [z, f] : model.freq) {
    auto it = model.weight.find(z);
    total += (it == model.weight.end() ? 1.0 : it->second) * f;
  }
  if (!(total > 0)) throw EmptyModel();
  std::map<std::string, double> p;
  for (const auto& [z, f] : model.freq) {
    if (f <= 0) continue;
    auto it = model.weight.find(z);
    p[z] = (it == model.weight.end() ? 1.0 : it->second) * f / total;
  }
  return p;
}

namespace {

double successor_total(const FragmentModel& model, const std::string& prev) {
  double total = 0;
  for (auto it = model.transitions.lower_bound({prev, std::string()});
       it != model.transitions.end() && it->first.first == prev; ++it)
    total += it->second;
  return total;
}

}  // namespace

double transition_probability(const FragmentModel& model, const std::string& next,
                              const std::string& prev) {
  const double total = successor_total(model, prev);
  if (!(total > 0)) throw UnseenContext(prev);
  auto it = model.transitions.find({prev, next});
  return it == model.transitions.end() ? 0.0 : it->second / total;
}

double transition_probability_bayes(const FragmentModel& model, const std::string& next,
                                    const std::string& prev) {
  double n = 0;
  double into_next = 0;
  for (const auto& [key, c] : model.transitions) {
    n += c;
    if (key.second == next) into_next += c;
  }
  const double out_of_prev = successor_total(model, prev);
  if (!(out_of_prev > 0)) throw UnseenContext(prev);
  auto it = model.transitions.find({prev, next});
  const double joint = it == model.transitions.end() ? 0.0 : it->second;
  if (into_next == 0) return 0.0;
  const double p_prev_given_next = joint / into_next;
  const double p_next = into_next / n;
  const double p_prev = out_of_prev / n;
  return p_prev_given_next * p_next / p_prev;
}

double median_conditional(const FragmentModel& model) {
  std::vector<double> probs;
  for (const auto& [key, c] : model.transitions) {
    if (c <= 0) continue;
    probs.push_back(c / successor_total(model, key.first));
  }
  if (probs.empty()) return 0.0;
  std::sort(probs.begin(), probs.end());
  const std::size_t n = probs.size();
  return n % 2 ? probs[n / 2] : 0.5 * (probs[n / 2 - 1] + probs[n / 2]);
}

std::vector<std::string> sample_elements(const FragmentModel& model, SplitMix64& rng) {
  const auto start = element_probability(model);
  std::vector<std::string> seq{draw(start, rng)};
  while (static_cast<int>(seq.size()) < model.max_len_L) {
    const std::string& prev = seq.back();
    const double total = successor_total(model, prev);
    if (!(total > 0)) break;
    std::map<std::string, double> cands;
    for (auto it = model.transitions.lower_bound({prev, std::string()});
         it != model.transitions.end() && it->first.first == prev; ++it) {
      if (it->second > 0 && it->second / total >= model.threshold_T)
        cands[it->first.second] = it->second;
    }
    if (cands.empty()) break;
    seq.push_back(draw(cands, rng));
  }
  return seq;
}

namespace {

class Realizer {
 public:
  Realizer(const std::vector<ScopeSignal>& scope, SplitMix64& rng, const FragmentOptions& opts,
           Fragment& out)
      : scope_(scope), rng_(rng), opts_(opts), out_(out) {
    for (const auto& s : scope) {
      SignalInfo info;
      info.width = s.width;
      info.msb = s.width - 1;
      info.is_signed = s.is_signed;
      table_[s.name] = info;
    }
  }

  std::vector<Stmt> run(const std::vector<std::string>& elems) {
    elems_ = &elems;
    pos_ = 0;
    std::vector<Stmt> list;
    while (pos_ < elems.size()) {
      if (auto s = unit(0)) list.push_back(std::move(*s));
    }
    if (list.empty()) list.push_back(temp_assign(leaf()));
    return list;
  }

 private:
  bool at_operator() const {
    return pos_ < elems_->size() && !is_control_element((*elems_)[pos_]);
  }

  std::vector<std::string> take_run(std::size_t limit) {
    std::vector<std::string> run;
    while (at_operator() && run.size() < limit) run.push_back((*elems_)[pos_++]);
    return run;
  }

  // One statement from the next element(s); nullopt if a control element was
  // dropped at the depth cap.
  std::optional<Stmt> unit(int depth) {
    if (pos_ >= elems_->size()) return temp_assign(leaf());
    const std::string& z = (*elems_)[pos_];
    if (!is_control_element(z)) return temp_assign(build(take_run(SIZE_MAX)));
    ++pos_;
    if (depth >= opts_.max_depth) return std::nullopt;
    if (z == "if-else") {
      Expr cond = at_operator() ? build(take_run(2)) : leaf();
      Stmt then_s = Stmt::block({body(depth + 1)});
      Stmt else_s = Stmt::block({temp_assign(leaf())});
      return Stmt::if_else(std::move(cond), std::move(then_s), std::move(else_s));
    }
    if (z == "case") {
      const ScopeSignal& subj = pick();
      Stmt s;
      s.kind = StmtKind::kCase;
      s.cond = Expr::ref(subj.name);
      s.case_labels.push_back({Expr::literal(rng_.next(), subj.width)});
      s.body.push_back(Stmt::block({body(depth + 1)}));
      s.case_labels.push_back({});
      s.body.push_back(Stmt::block({temp_assign(leaf())}));
      return s;
    }
    // for
    const std::string var = fresh(8);
    Stmt s;
    s.kind = StmtKind::kFor;
    s.lhs = Expr::ref(var);
    s.rhs = Expr::literal(0, 8);
    s.cond = Expr::binary_op(BinaryOp::kLt, Expr::ref(var),
                             Expr::literal(1 + rng_.below(4), 8));
    s.step = Expr::binary_op(BinaryOp::kAdd, Expr::ref(var), Expr::literal(1, 8));
    s.body.push_back(Stmt::block({body(depth + 1)}));
    return s;
  }

  Stmt body(int depth) {
    while (pos_ < elems_->size()) {
      if (auto s = unit(depth)) return std::move(*s);
    }
    return temp_assign(leaf());
  }

  const ScopeSignal& pick() { return scope_[rng_.below(scope_.size())]; }

  Expr leaf() {
    const ScopeSignal& s = pick();
    if (rng_.coin(0.2)) return Expr::literal(rng_.next() & width_mask(s.width), s.width);
    return Expr::ref(s.name);
  }

  Expr build(const std::vector<std::string>& ops, std::size_t i = 0) {
    if (i >= ops.size()) return leaf();
    const std::string& z = ops[i];
    if (auto u = unary_of(z)) return Expr::unary_op(*u, build(ops, i + 1));
    if (z == "?:") return Expr::ternary(leaf(), build(ops, i + 1), leaf());
    if (auto b = binary_of(z)) return Expr::binary_op(*b, leaf(), build(ops, i + 1));
    return build(ops, i + 1);
  }

  std::string fresh(int width, bool is_signed = false) {
    std::string name;
    do {
      name = opts_.temp_prefix + std::to_string(next_index()++);
    } while ((opts_.taken && opts_.taken->count(name)) || table_.count(name));
    if (opts_.taken) opts_.taken->insert(name);
    NetDecl d;
    d.name = name;
    d.kind = NetKind::kReg;
    d.msb = width - 1;
    d.lsb = 0;
    d.is_signed = is_signed;
    out_.temps.push_back(d);
    SignalInfo info;
    info.width = width;
    info.msb = width - 1;
    info.is_signed = is_signed;
    info.is_reg = true;
    table_[name] = info;
    return name;
  }

  Stmt temp_assign(Expr rhs) {
    const int w = std::clamp(self_width(rhs, table_), 1, kMaxWidth);
    const std::string name = fresh(w, self_signed(rhs, table_));
    return Stmt::assign(!opts_.nonblocking, Expr::ref(name), std::move(rhs));
  }

  const std::vector<ScopeSignal>& scope_;
  SplitMix64& rng_;
  const FragmentOptions& opts_;
  Fragment& out_;
  SignalTable table_;
  const std::vector<std::string>* elems_ = nullptr;
  std::size_t pos_ = 0;
  std::size_t& next_index() { return opts_.next_temp ? *opts_.next_temp : counter_; }

  std::size_t counter_ = 0;
};

}  // namespace

Fragment sample_fragment(const FragmentModel& model, const std::vector<ScopeSignal>& scope,
                         SplitMix64& rng, const FragmentOptions& opts) {
  if (scope.empty()) throw NoViableFragment("no signals in scope");
  Fragment f;
  f.elements = sample_elements(model, rng);
  f.stmts = Realizer(scope, rng, opts, f).run(f.elements);
  return f;
}

FragmentModel feedback_update(const FragmentModel& model,
                              const std::vector<FeedbackOutcome>& outcomes, double eta,
                              double c_min) {
  FragmentModel m = model;
  for (const auto& o : outcomes) {
    std::set<std::string> distinct(o.elements.begin(), o.elements.end());
    for (const auto& z : distinct) {
      auto [it, inserted] = m.weight.emplace(z, 1.0);
      if (o.success) {
        it->second *= 1.0 + eta;
      } else {
        it->second = std::max(c_min, it->second * (1.0 - eta));
      }
    }
    if (o.success) {
      for (std::size_t i = 0; i + 1 < o.elements.size(); ++i)
        m.transitions[{o.elements[i], o.elements[i + 1]}] += 1;
    }
  }
  return m;
}

nlohmann::json model_to_json(const FragmentModel& model) {
  nlohmann::json j;
  j["version"] = 1;
  std::set<std::string> names;
  for (const auto& [z, w] : model.weight) names.insert(z);
  for (const auto& [z, f] : model.freq) names.insert(z);
  j["elements"] = nlohmann::json::array();
  for (const auto& z : names) {
    auto f = model.freq.find(z);
    auto w = model.weight.find(z);
    j["elements"].push_back({{"name", z},
                             {"freq", f == model.freq.end() ? 0.0 : f->second},
                             {"weight", w == model.weight.end() ? 1.0 : w->second}});
  }
  j["transitions"] = nlohmann::json::array();
  for (const auto& [key, c] : model.transitions)
    j["transitions"].push_back({{"prev", key.first}, {"next", key.second}, {"count", c}});
  j["threshold_T"] = model.threshold_T;
  j["max_len_L"] = model.max_len_L;
  return j;
}

FragmentModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != 1) throw ConfigError("unsupported model version");
    FragmentModel m;
    for (const auto& e : j.at("elements")) {
      const auto name = e.at("name").get<std::string>();
      const double f = e.at("freq").get<double>();
      if (f > 0) m.freq[name] = f;
      m.weight[name] = e.at("weight").get<double>();
    }
    for (const auto& t : j.at("transitions"))
      m.transitions[{t.at("prev").get<std::string>(), t.at("next").get<std::string>()}] =
          t.at("count").get<double>();
    m.threshold_T = j.at("threshold_T").get<double>();
    m.max_len_L = j.at("max_len_L").get<int>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed fragment model: ") + e.what());
  }
}

void save_model(const FragmentModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw WorkdirError("cannot write " + path.string());
  out << model_to_json(model).dump(2) << "\n";
}

FragmentModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read fragment model " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed fragment model: ") + e.what());
  }
  return model_from_json(j);
}

}  // namespace hdlmutant
