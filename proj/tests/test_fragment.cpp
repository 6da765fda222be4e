#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "hdlmutant/emitter.hpp"
#include "hdlmutant/errors.hpp"
#include "hdlmutant/fragment.hpp"
#include "hdlmutant/parser.hpp"

using namespace hdlmutant;
namespace fs = std::filesystem;

namespace {

FragmentModel from_sequences(std::vector<std::vector<std::string>> seqs) {
  CorpusStats st;
  st.files_ingested = seqs.size();
  st.sequences = std::move(seqs);
  return build_model(st);
}

double total(const std::map<std::string, double>& p) {
  double s = 0;
  for (const auto& [z, v] : p) s += v;
  return s;
}

fs::path temp_dir(const std::string& name) {
  auto d = fs::temp_directory_path() / ("hdlmutant-test-" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("weights follow the complexity table") {
  const auto& w = default_weights();
  for (const char* z : {"u+", "u-", "!", "~"}) CHECK(w.at(z) == 1);
  for (const char* z : {"+", "-", "*", "/", "%", "&&", "||", "&", "^", "==", "!="}) CHECK(w.at(z) == 2);
  for (const char* z : {"===", "!==", "<", "<=", ">", ">=", "<<", ">>"}) CHECK(w.at(z) == 3);
  CHECK(w.at("?:") == 4);
  CHECK(w.at("if-else") == 4);
  CHECK(w.at("case") == 4);
  CHECK(w.at("for") == 5);
  CHECK(is_control_element("for"));
  CHECK_FALSE(is_control_element("+"));
}

TEST_CASE("linearization by hand") {
  auto ast = parse(R"(
module m(input [3:0] a, input [3:0] b, output reg [3:0] y);
  always @* if (a < b) y = a + b; else y = 0;
endmodule
)");
  CHECK(linearize(ast) == std::vector<std::string>{"if-else", "<", "+"});
}

TEST_CASE("corpus ingestion counts and rejects") {
  auto d = temp_dir("corpus");
  std::ofstream(d / "a.v") << "module a(input x, input z, output y); assign y = x + z; endmodule\n";
  std::ofstream(d / "b.v")
      << "module b(input [3:0] a, input [3:0] b, output reg [3:0] y);\n"
         "  always @* if (a < b) y = a + b; else y = 0;\nendmodule\n";
  std::ofstream(d / "c.v") << "module c(input x; garbage\n";
  auto files = list_verilog_files(d);
  REQUIRE(files.size() == 3);
  auto st = ingest_corpus(files);
  CHECK(st.files_ingested == 2);
  CHECK(st.files_rejected == 1);
  auto m = build_model(st);
  CHECK(m.freq.at("+") == 2);
  CHECK(m.freq.at("if-else") == 1);
  CHECK(m.freq.at("<") == 1);
  CHECK(m.transitions.size() == 2);
  CHECK(m.transitions.at({"if-else", "<"}) == 1);
  CHECK(m.transitions.at({"<", "+"}) == 1);

  std::ofstream(d / "a.v") << "not verilog";
  std::ofstream(d / "b.v") << "not verilog";
  CHECK_THROWS_AS(ingest_corpus(files), EmptyCorpus);
  fs::remove_all(d);
}

TEST_CASE("element probability by hand") {
  auto m = from_sequences({{"+", "+", "+", "if-else"}});
  auto p = element_probability(m);
  CHECK(p.at("+") == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(p.at("if-else") == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(std::abs(total(p) - 1.0) < 1e-12);

  auto single = element_probability(from_sequences({{"*"}}));
  CHECK(single.at("*") == 1.0);

  CHECK_THROWS_AS(element_probability(FragmentModel{}), EmptyModel);
}

TEST_CASE("transition probability and Bayes form on a hand-counted sequence") {
  auto m = from_sequences({{"+", "if-else", "+", "<<"}});
  CHECK(transition_probability(m, "+", "if-else") == 1.0);
  CHECK(transition_probability(m, "if-else", "+") == 0.5);
  CHECK(transition_probability(m, "<<", "+") == 0.5);
  for (const auto& [k, c] : m.transitions)
    CHECK(std::abs(transition_probability(m, k.second, k.first) -
                   transition_probability_bayes(m, k.second, k.first)) < 1e-9);
  for (const char* prev : {"+", "if-else"}) {
    double s = 0;
    for (const auto& [z, f] : m.freq) s += transition_probability(m, z, prev);
    CHECK(std::abs(s - 1.0) < 1e-12);
  }
  CHECK_THROWS_AS(transition_probability(m, "+", "<<"), UnseenContext);
  // Observed conditionals are {1, 0.5, 0.5}.
  CHECK(median_conditional(m) == 0.5);
  CHECK(m.threshold_T == 0.5);
}

TEST_CASE("start elements follow element_probability") {
  auto m = from_sequences({{"+", "+", "+", "if-else"}});
  m.transitions.clear();
  SplitMix64 rng(5);
  int plus = 0;
  const int n = 1000;
  for (int i = 0; i < n; ++i) {
    auto seq = sample_elements(m, rng);
    REQUIRE(!seq.empty());
    CHECK(seq.size() == 1);
    if (seq[0] == "+") ++plus;
  }
  CHECK(std::abs(plus / double(n) - 0.6) < 0.04);
}

TEST_CASE("threshold of one ends the sequence after the start element") {
  auto m = from_sequences({{"+", "-", "+", "*", "+", "-"}});
  m.threshold_T = 1.0;
  SplitMix64 rng(1);
  for (int i = 0; i < 50; ++i) {
    auto seq = sample_elements(m, rng);
    if (seq[0] == "+") CHECK(seq.size() == 1);
    CHECK(seq.size() <= static_cast<std::size_t>(m.max_len_L));
  }
}

TEST_CASE("fragments are deterministic, scoped and re-parse") {
  auto m = from_sequences({{"if-else", "+", "<", "?:", "case", "&", "for", "^", ">>"},
                           {"+", "-", "if-else", "==", "*"}});
  std::vector<ScopeSignal> scope{{"a", 4, false}, {"b", 8, true}};
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    SplitMix64 r1(seed), r2(seed);
    auto f1 = sample_fragment(m, scope, r1);
    auto f2 = sample_fragment(m, scope, r2);
    CHECK(f1.elements == f2.elements);
    REQUIRE(f1.stmts.size() == f2.stmts.size());
    for (std::size_t i = 0; i < f1.stmts.size(); ++i) CHECK(structurally_equal(f1.stmts[i], f2.stmts[i]));

    ModuleAst host;
    host.name = "host";
    host.ports = {{"a", Direction::kInput, 3, 0, false, false},
                  {"b", Direction::kInput, 7, 0, true, false},
                  {"y", Direction::kOutput, 0, 0, false, false}};
    ModuleItem keep;
    keep.kind = ItemKind::kContinuousAssign;
    keep.lhs = Expr::ref("y");
    keep.rhs = Expr::literal(0, 1);
    host.items.push_back(keep);
    for (const auto& t : f1.temps) host.nets.push_back(t);
    ModuleItem blk;
    blk.kind = ItemKind::kAlways;
    blk.star = true;
    blk.body = Stmt::block(f1.stmts);
    host.items.push_back(blk);
    INFO(emit(host));
    ModuleAst back;
    CHECK_NOTHROW(back = parse(emit(host)));

    std::set<std::string> temps;
    for (const auto& t : f1.temps) temps.insert(t.name);
    for (const auto& s : f1.stmts)
      for_each_expr(s, [&](const Expr& e) {
        if (e.kind == ExprKind::kRef || e.kind == ExprKind::kBitSelect || e.kind == ExprKind::kPartSelect)
          CHECK((e.name == "a" || e.name == "b" || temps.count(e.name)));
      });
  }
  SplitMix64 rng(0);
  CHECK_THROWS_AS(sample_fragment(m, {}, rng), NoViableFragment);
}

TEST_CASE("feedback update") {
  auto m = from_sequences({{"+", "-", "if-else", "+"}});
  CHECK(feedback_update(m, {}) == m);

  auto up = feedback_update(m, {{{"+"}, true}});
  CHECK(up.weight.at("+") == doctest::Approx(2.2).epsilon(1e-12));
  CHECK(up.weight.at("-") == m.weight.at("-"));
  auto p0 = element_probability(m);
  auto p1 = element_probability(up);
  CHECK(p1.at("+") / p1.at("-") > p0.at("+") / p0.at("-"));
  CHECK(std::abs(total(p1) - 1.0) < 1e-12);

  auto down = feedback_update(m, {{{"+"}, false}});
  CHECK(down.weight.at("+") == doctest::Approx(1.8));
  FragmentModel floor = m;
  for (int i = 0; i < 100; ++i) floor = feedback_update(floor, {{{"-"}, false}});
  CHECK(floor.weight.at("-") == doctest::Approx(0.1));

  auto tr = feedback_update(m, {{{"+", "-"}, true}});
  CHECK(tr.transitions.at({"+", "-"}) == m.transitions.at({"+", "-"}) + 1);
}

TEST_CASE("model JSON round trip") {
  auto m = from_sequences({{"+", "if-else", "+", "<<"}});
  m.weight["+"] = 2.2;
  CHECK(model_from_json(model_to_json(m)) == m);
  auto d = temp_dir("model");
  save_model(m, d / "model.json");
  CHECK(load_model(d / "model.json") == m);
  auto j = model_to_json(m);
  CHECK(j.at("version") == 1);
  fs::remove_all(d);
}
