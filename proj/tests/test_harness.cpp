#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cases.hpp"
#include "hdlmutant/config.hpp"
#include "hdlmutant/design_gen.hpp"
#include "hdlmutant/emitter.hpp"
#include "hdlmutant/errors.hpp"
#include "hdlmutant/harness.hpp"
#include "hdlmutant/parser.hpp"

using namespace hdlmutant;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  auto d = fs::temp_directory_path() / ("hdlmutant-harness-" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

SideOutcome side(SynthStatus st, std::optional<Trace> tr = std::nullopt, std::string log = {}) {
  SideOutcome s;
  s.synth.status = st;
  s.synth.log_excerpt = std::move(log);
  s.trace = std::move(tr);
  return s;
}

Trace trace(std::vector<std::uint64_t> x, std::vector<std::uint64_t> y) {
  Trace t;
  t.ports = {"x", "y"};
  for (std::size_t i = 0; i < x.size(); ++i) t.sample_times.push_back(static_cast<long>(i) * 10);
  t.values = {std::move(x), std::move(y)};
  return t;
}

std::vector<NamedDesign> seeds(std::uint64_t seed, int n, int max_statements = 30) {
  SplitMix64 rng(seed);
  DesignGenOptions opts;
  opts.max_statements = max_statements;
  std::vector<NamedDesign> out;
  for (int i = 0; i < n; ++i) {
    const std::string name = "seed" + std::to_string(i);
    out.push_back({name, generate_design(name, rng, opts)});
  }
  return out;
}

CampaignConfig campaign(const fs::path& out, ToolSpec tool, std::uint64_t iterations) {
  CampaignConfig cfg;
  cfg.tools = {std::move(tool)};
  cfg.rng_seed = 1234;
  cfg.max_iterations = iterations;
  cfg.output_dir = out;
  cfg.stimulus.vector_count = 30;
  cfg.reduce = false;
  return cfg;
}

ToolSpec builtin(ToolKind k, const std::string& name, const std::string& profile = "") {
  ToolSpec t;
  t.name = name;
  t.kind = k;
  t.fault_profile = profile;
  t.timeout_secs = 1;
  return t;
}

std::string read_all(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("identify_bug priority") {
  auto a = trace({1, 2}, {0, 0});
  auto b = trace({1, 3}, {0, 1});
  CHECK_FALSE(identify_bug(side(SynthStatus::kOk, a), side(SynthStatus::kOk, a)));
  CHECK_FALSE(identify_bug(side(SynthStatus::kOk), side(SynthStatus::kOk, a)));

  auto m = identify_bug(side(SynthStatus::kOk, a), side(SynthStatus::kOk, b));
  REQUIRE(m);
  CHECK(m->cls == BugClass::kMismatch);
  CHECK(m->divergence->time == 10);
  CHECK(m->divergence->port == "x");
  CHECK(m->divergence->ports == std::vector<std::string>{"x", "y"});

  auto c = identify_bug(side(SynthStatus::kOk, a), side(SynthStatus::kCrash, std::nullopt, "segfault"));
  REQUIRE(c);
  CHECK(c->cls == BugClass::kCrash);
  CHECK(c->log_excerpt == "segfault");

  auto h = identify_bug(side(SynthStatus::kCrash), side(SynthStatus::kHang));
  REQUIRE(h);
  CHECK(h->cls == BugClass::kHang);
  auto h2 = identify_bug(side(SynthStatus::kHang), side(SynthStatus::kCrash));
  REQUIRE(h2);
  CHECK(h2->cls == BugClass::kHang);
}

TEST_CASE("fingerprints and log signatures") {
  CHECK(normalize_log_signature("start\nERROR: /tmp/x/y.v:12: bad 0xdeadbeef\n\n") ==
        "ERROR: <path>:N: bad <hex>");
  Finding c1{BugClass::kCrash, std::nullopt, "abort at /a/b.v line 3"};
  Finding c2{BugClass::kCrash, std::nullopt, "abort at /c/d.v line 77"};
  CHECK(fingerprint(c1, "t") == fingerprint(c2, "t"));
  CHECK(fingerprint(c1, "t") != fingerprint(c1, "u"));
  Finding h{BugClass::kHang, std::nullopt, "x"};
  CHECK(fingerprint(h, "t") == "H|t");
  Finding m1{BugClass::kMismatch, Divergence{10, "a", {"a", "b"}}, ""};
  Finding m2{BugClass::kMismatch, Divergence{30, "b", {"a", "b"}}, ""};
  Finding m3{BugClass::kMismatch, Divergence{10, "a", {"a"}}, ""};
  CHECK(fingerprint(m1, "t") == fingerprint(m2, "t"));
  CHECK(fingerprint(m1, "t") != fingerprint(m3, "t"));
  for (auto k : {BugClass::kHang, BugClass::kCrash, BugClass::kMismatch})
    CHECK(bug_class_from_string(to_string(k)) == k);
}

TEST_CASE("seed pool") {
  auto ds = seeds(5, 4);
  SeedPool pool;
  pool.capacity = 3;
  pool = update_seed_pool(pool, ds[0].ast, "a");
  pool = update_seed_pool(pool, ds[0].ast, "dup");
  CHECK(pool.entries.size() == 1);
  pool = update_seed_pool(pool, ds[1].ast, "b");
  pool = update_seed_pool(pool, ds[2].ast, "c");
  CHECK(pool.entries.size() == 3);
  CHECK(pool.contains(content_hash(ds[1].ast)));

  // pick: fewest variants, oldest first.
  CHECK(pool.entries[pool.pick()].name == "a");
  pool.find(content_hash(ds[0].ast))->variants = 5;
  CHECK(pool.entries[pool.pick()].name == "b");

  // Eviction: lowest yield, oldest on ties. a has 0/5, b and c 0/1.
  pool.find(content_hash(ds[1].ast))->bugs = 1;
  pool = update_seed_pool(pool, ds[3].ast, "d");
  CHECK(pool.entries.size() == 3);
  CHECK_FALSE(pool.contains(content_hash(ds[0].ast)));
  CHECK(pool.contains(content_hash(ds[1].ast)));
  pool = update_seed_pool(pool, ds[0].ast, "a2");
  CHECK_FALSE(pool.contains(content_hash(ds[2].ast)));

  Variant unverified;
  unverified.ast = seeds(77, 1)[0].ast;
  unverified.equivalence = Equivalence::kFailed;
  const auto before = pool.entries.size();
  pool = update_seed_pool(pool, unverified, "u");
  CHECK(pool.entries.size() == before);
  CHECK_FALSE(pool.contains(content_hash(unverified.ast)));

  CHECK(content_hash(ds[0].ast).size() == 16);
}

TEST_CASE("reduction of constructed cases") {
  auto root = temp_dir("reduce");
  auto ds = seeds(31, 12, 24);
  int done = 0;
  int n = 0;
  for (const char* tool : {"trig_m", "trig_h", "trig_c"}) {
    for (int i = 0; i < 2; ++i) {
      cases::Case c;
      const auto dir = root / ("case" + std::to_string(n++));
      if (!cases::build_case(ds[static_cast<std::size_t>(n)].ast, tool, 99 + static_cast<std::uint64_t>(n), dir, c))
        continue;
      PipelineOptions opts;
      opts.synth = cases::trigger_synth;
      CHECK(reproduce(c.record, c.tool, dir / "repro", opts));
      auto red = reduce_case(c.record, c.tool, dir / "red", {60, 5000}, opts);
      CHECK_FALSE(red.timed_out);
      CHECK(red.reduced_statements <= red.original_statements);
      CHECK(cases::still_buggy(c, red.design, dir / "chk"));
      for (const auto& cand : deletion_candidates(red.design)) {
        ModuleAst p;
        try {
          p = parse(emit(cand));
        } catch (const Error&) {
          continue;
        }
        CHECK_FALSE(cases::still_buggy(c, p, dir / "chk"));
      }
      ++done;
    }
  }
  CHECK(done >= 5);
  fs::remove_all(root);
}

TEST_CASE("reduce_design stops at the check budget") {
  auto ast = seeds(8, 1, 30)[0].ast;
  std::size_t calls = 0;
  auto r = reduce_design(ast, [&](const ModuleAst&) { return ++calls % 2 == 0; }, {60, 3});
  CHECK(r.timed_out);
  CHECK(r.checks == 3);
  CHECK(calls == 3);
}

TEST_CASE("flaky adapter does not reproduce") {
  auto root = temp_dir("flaky");
  cases::Case c;
  REQUIRE(cases::build_case(seeds(3, 1)[0].ast, "trig_c", 5, root / "c", c));
  int calls = 0;
  PipelineOptions opts;
  opts.synth = [&](const ToolSpec& t, const fs::path& d, const fs::path& w) {
    ++calls;
    // Crashes only on the first invocation.
    if (calls == 1) return cases::trigger_synth(t, d, w);
    return cases::trigger_synth(cases::trigger_tool("identity"), d, w);
  };
  c.record.variant_index = -1;
  CHECK(reproduce(c.record, c.tool, root / "r1", opts));
  CHECK_FALSE(reproduce(c.record, c.tool, root / "r2", opts));
  fs::remove_all(root);
}

TEST_CASE("missing artifacts") {
  auto root = temp_dir("missing");
  CHECK_THROWS_AS(load_bug_record(root), ArtifactsMissing);
  BugRecord r;
  r.dir = root;
  CHECK_THROWS_AS(reproduce(r, builtin(ToolKind::kIdentity, "id"), root / "w"), ArtifactsMissing);
  fs::remove_all(root);
}

TEST_CASE("config validation") {
  CampaignConfig cfg;
  cfg.tools = {builtin(ToolKind::kIdentity, "id")};
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);  // no stop condition
  cfg.max_iterations = 3;
  CHECK_NOTHROW(validate_config(cfg));
  cfg.wall_clock_budget_secs = 10;
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);  // both
  cfg.wall_clock_budget_secs.reset();
  cfg.workers = 0;
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);
  cfg.workers = 1;
  cfg.tools.push_back(builtin(ToolKind::kHang, "id"));
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);  // duplicate names
  cfg.tools.clear();
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);

  nlohmann::json j = {{"seeds_dir", "seeds"},
                      {"tools", {{{"name", "id"}, {"kind", "builtin_identity"}}}},
                      {"rng_seed", 7},
                      {"max_iterations", 2}};
  auto parsed = config_from_json(j, "/base");
  CHECK(parsed.seeds_dir == fs::path("/base/seeds"));
  CHECK(parsed.rng_seed == 7);
  CHECK(parsed.variants_per_seed == 5);
  CHECK(parsed.tools[0].kind == ToolKind::kIdentity);
  auto back = config_from_json(config_to_json(parsed));
  CHECK(back.rng_seed == 7);
  CHECK(*back.max_iterations == 2);
  j["colour"] = "blue";
  CHECK_THROWS_AS(config_from_json(j), ConfigError);

  CampaignConfig w;
  w.output_dir = "/o";
  CHECK(resolve_workdir(w) == fs::path("/o/work"));
  w.workdir = "/scratch";
  CHECK(resolve_workdir(w) == fs::path("/scratch"));
}

TEST_CASE("identity campaign finds nothing") {
  auto root = temp_dir("identity");
  auto cfg = campaign(root, builtin(ToolKind::kIdentity, "id"), 8);
  auto res = run_campaign(cfg, seeds(9, 4));
  CHECK(res.bugs.empty());
  CHECK(res.stats.iterations == 8);
  CHECK(res.stats.variants == 40);
  CHECK(res.stats.findings == 0);
  CHECK(fs::exists(root / "campaign.json"));
  CHECK(fs::exists(root / "mutations.jsonl"));
  CHECK(fs::is_empty(root / "bugs"));
  fs::remove_all(root);
}

TEST_CASE("faulty campaign records reproducible, deduplicated bugs") {
  auto root = temp_dir("faulty");
  auto cfg = campaign(root, builtin(ToolKind::kFaulty, "f", "and_to_or"), 12);
  cfg.reduce = true;
  cfg.reduce_budget_secs = 20;
  auto res = run_campaign(cfg, seeds(10, 4));
  REQUIRE(!res.bugs.empty());
  std::set<std::string> fps;
  for (const auto& b : res.bugs) {
    CHECK(fps.insert(b.fingerprint).second);
    CHECK(b.reproduced);
    for (const char* f : {"seed.v", "variant.v", "testbench.v", "tool.log", "metadata.json", "reduced.v"})
      CHECK(fs::exists(b.dir / f));
    auto loaded = load_bug_record(b.dir);
    CHECK(loaded.fingerprint == b.fingerprint);
    CHECK(loaded.cls == b.cls);
    CHECK(loaded.reduced_statements <= loaded.variant_statements);
    CHECK(reproduce(loaded, b.tool, root / "again" / b.id));
  }
  CHECK(res.stats.duplicates + res.bugs.size() + res.stats.flaky == res.stats.findings);
  fs::remove_all(root);
}

TEST_CASE("seed-side hang and crash") {
  for (auto kind : {ToolKind::kHang, ToolKind::kCrash}) {
    auto root = temp_dir("seedside");
    auto cfg = campaign(root, builtin(kind, "b"), 1);
    auto res = run_campaign(cfg, seeds(12, 1));
    REQUIRE(res.bugs.size() == 1);
    CHECK(res.bugs[0].cls == (kind == ToolKind::kHang ? BugClass::kHang : BugClass::kCrash));
    CHECK(res.bugs[0].variant_index == -1);
    CHECK(res.stats.seed_side == 1);
    fs::remove_all(root);
  }
}

TEST_CASE("campaigns are deterministic across worker counts") {
  auto run = [](int workers, const std::string& tag) {
    auto root = temp_dir("det-" + tag);
    auto cfg = campaign(root, builtin(ToolKind::kFaulty, "f", "off_by_one_shift"), 10);
    cfg.workers = workers;
    auto res = run_campaign(cfg, seeds(13, 3));
    std::vector<std::string> fps;
    for (const auto& b : res.bugs) fps.push_back(b.fingerprint + "@" + std::to_string(b.iteration));
    auto log = read_all(root / "mutations.jsonl");
    fs::remove_all(root);
    return std::make_pair(fps, log);
  };
  auto a = run(1, "a");
  auto b = run(1, "b");
  auto c = run(4, "c");
  CHECK(a == b);
  CHECK(a == c);
  CHECK(!a.second.empty());
}

#include "hdlmutant/report.hpp"

TEST_CASE("report from a campaign directory") {
  auto root = temp_dir("report");
  auto cfg = campaign(root, builtin(ToolKind::kFaulty, "f", "and_to_or"), 6);
  auto res = run_campaign(cfg, seeds(10, 3));
  const std::string md = render_report(root);
  CHECK(md.find("| ") != std::string::npos);
  for (const auto& b : res.bugs) CHECK(md.find(b.id) != std::string::npos);
  fs::remove_all(root);
}
