#include "hdlmutant/harness.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "hdlmutant/emitter.hpp"
#include "hdlmutant/errors.hpp"
#include "hdlmutant/fragment.hpp"
#include "hdlmutant/parser.hpp"
#include "hdlmutant/rng.hpp"
#include "hdlmutant/zombie.hpp"

namespace hdlmutant {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

std::string to_string(BugClass c) {
  switch (c) {
    case BugClass::kHang: return "H";
    case BugClass::kCrash: return "C";
    case BugClass::kMismatch: return "M";
  }
  return "?";
}

BugClass bug_class_from_string(const std::string& s) {
  if (s == "H") return BugClass::kHang;
  if (s == "C") return BugClass::kCrash;
  if (s == "M") return BugClass::kMismatch;
  throw ConfigError("unknown bug class '" + s + "'");
}

std::optional<Finding> identify_bug(const SideOutcome& seed, const SideOutcome& variant) {
  for (SynthStatus st : {SynthStatus::kHang, SynthStatus::kCrash}) {
    for (const SideOutcome* side : {&variant, &seed}) {
      if (side->synth.status != st) continue;
      Finding f;
      f.cls = st == SynthStatus::kHang ? BugClass::kHang : BugClass::kCrash;
      f.log_excerpt = side->synth.log_excerpt;
      return f;
    }
  }
  if (!seed.trace || !variant.trace) return std::nullopt;
  Divergence d;
  try {
    const Verdict v = compare_traces(*seed.trace, *variant.trace);
    if (v.equivalent) return std::nullopt;
    d.time = v.first_time;
    d.port = v.port;
    d.ports = v.diverging_ports;
  } catch (const ShapeMismatch&) {
    d.port = "<shape>";
    d.ports = {"<shape>"};
  }
  std::sort(d.ports.begin(), d.ports.end());
  Finding f;
  f.cls = BugClass::kMismatch;
  f.divergence = std::move(d);
  f.log_excerpt = variant.synth.log_excerpt;
  return f;
}

std::string normalize_log_signature(const std::string& log) {
  std::string last;
  std::istringstream in(log);
  for (std::string line; std::getline(in, line);) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) last = line;
  }
  static const std::regex kPath(R"((/[^\s:'"]+)+)");
  static const std::regex kHex(R"(0x[0-9a-fA-F]+)");
  static const std::regex kNum(R"([0-9]+)");
  static const std::regex kSpace(R"(\s+)");
  last = std::regex_replace(last, kPath, "<path>");
  last = std::regex_replace(last, kHex, "<hex>");
  last = std::regex_replace(last, kNum, "N");
  last = std::regex_replace(last, kSpace, " ");
  const auto b = last.find_first_not_of(' ');
  const auto e = last.find_last_not_of(' ');
  return b == std::string::npos ? std::string() : last.substr(b, e - b + 1);
}

std::string fingerprint(const Finding& f, const std::string& tool) {
  std::string fp = to_string(f.cls) + "|" + tool;
  if (f.cls == BugClass::kCrash) fp += "|" + normalize_log_signature(f.log_excerpt);
  if (f.cls == BugClass::kMismatch && f.divergence) {
    fp += "|";
    for (std::size_t i = 0; i < f.divergence->ports.size(); ++i) {
      if (i) fp += ",";
      fp += f.divergence->ports[i];
    }
  }
  return fp;
}

namespace {

SynthesizeFn synth_or_default(const SynthesizeFn& fn) {
  return fn ? fn : SynthesizeFn(synthesize);
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::trunc);
  if (!out) throw WorkdirError("cannot write " + p.string());
  out << text;
}

// `<time> <port> <hex>` lines written by an external resimulation hook.
Trace read_hook_trace(const fs::path& p, const TestbenchAst& tb) {
  std::ifstream in(p);
  if (!in) throw SimulationFailed("netlist", "hook wrote no trace at " + p.string());
  std::map<long, std::map<std::string, std::uint64_t>> rows;
  long time = 0;
  std::string port, hex;
  while (in >> time >> port >> hex) rows[time][port] = std::stoull(hex, nullptr, 16);
  Trace t;
  for (const auto& ps : tb.ports)
    if (ps.dir == Direction::kOutput) t.ports.push_back(ps.name);
  t.values.assign(t.ports.size(), {});
  for (const auto& [tm, vals] : rows) {
    t.sample_times.push_back(tm);
    for (std::size_t i = 0; i < t.ports.size(); ++i) {
      auto it = vals.find(t.ports[i]);
      t.values[i].push_back(it == vals.end() ? 0 : it->second);
    }
  }
  t.final_time = tb.finish_time;
  return t;
}

}  // namespace

SideOutcome run_side(const ToolSpec& tool, const ModuleAst& design, const TestbenchAst& tb,
                     const fs::path& workdir, const PipelineOptions& opts) {
  std::error_code ec;
  fs::create_directories(workdir, ec);
  if (ec) throw WorkdirError("cannot create " + workdir.string() + ": " + ec.message());
  const fs::path design_path = workdir / "design.v";
  write_file(design_path, emit(design));
  SideOutcome out;
  out.synth = synth_or_default(opts.synth)(tool, design_path, workdir);
  if (out.synth.status != SynthStatus::kOk) return out;
  if (out.synth.netlist) {
    try {
      out.trace = simulate(*out.synth.netlist, tb, opts.limits).trace;
    } catch (const Error& e) {
      out.note = std::string("netlist simulation failed: ") + e.what();
    }
  } else if (!tool.resim_template.empty()) {
    const fs::path tb_path = workdir / "testbench.v";
    const fs::path trace_path = workdir / "trace.txt";
    write_file(tb_path, emit_testbench(tb));
    fs::remove(trace_path, ec);
    const auto argv = split_command(tool.resim_template, {{"{netlist}", out.synth.netlist_path.string()},
                                                          {"{testbench}", tb_path.string()},
                                                          {"{trace}", trace_path.string()}});
    const ProcessResult pr = run_process(argv, workdir / "resim.log", tool.timeout_secs);
    if (pr.timed_out || pr.exit_code != 0 || pr.term_signal != 0) {
      out.note = "resimulation hook failed";
    } else {
      try {
        out.trace = read_hook_trace(trace_path, tb);
      } catch (const Error& e) {
        out.note = e.what();
      }
    }
  } else {
    out.note = "opaque netlist";
  }
  return out;
}

// --- records ------------------------------------------------------------------

namespace {

nlohmann::json stimulus_json(const StimulusConfig& s) {
  return {{"vector_count", s.vector_count},
          {"step_delay", s.step_delay},
          {"clock_half_period", s.clock_half_period},
          {"margin", s.margin},
          {"reset_steps", s.reset_steps}};
}

nlohmann::json log_json(const std::vector<MutationLogEntry>& log) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& e : log)
    a.push_back({{"site", e.site}, {"action", to_string(e.action)}, {"summary", e.summary}});
  return a;
}

MutationAction action_from_string(const std::string& s) {
  for (auto a : {MutationAction::kPruneLeaf, MutationAction::kPruneSubtree,
                 MutationAction::kInsertBefore, MutationAction::kInsertAfter})
    if (to_string(a) == s) return a;
  throw ArtifactsMissing("unknown mutation action '" + s + "'");
}

std::string iso_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

nlohmann::json record_to_json(const BugRecord& r) {
  nlohmann::json j{
      {"id", r.id},
      {"class", to_string(r.cls)},
      {"tool", tool_to_json(r.tool)},
      {"fingerprint", r.fingerprint},
      {"reproduced", r.reproduced},
      {"seed_name", r.seed_name},
      {"iteration", r.iteration},
      {"variant_index", r.variant_index},
      {"rng", {{"campaign_seed", r.campaign_seed},
               {"stimulus_seed", r.stimulus_seed},
               {"mutation_seed", r.mutation_seed}}},
      {"stimulus", stimulus_json(r.stimulus)},
      {"mutation_log", log_json(r.log)},
      {"statements", {{"variant", r.variant_statements}, {"reduced", r.reduced_statements}}},
      {"files", {"seed.v", "variant.v", "testbench.v", "tool.log", "metadata.json"}},
  };
  if (r.first_divergence) {
    j["first_divergence"] = {{"time", r.first_divergence->time},
                             {"port", r.first_divergence->port},
                             {"ports", r.first_divergence->ports}};
  } else {
    j["first_divergence"] = nullptr;
  }
  if (r.reduced_ref) {
    j["reduced"] = r.reduced_ref->filename().string();
    j["files"].push_back("reduced.v");
  } else {
    j["reduced"] = nullptr;
  }
  return j;
}

BugRecord load_bug_record(const fs::path& dir) {
  const fs::path meta = dir / "metadata.json";
  for (const char* f : {"metadata.json", "seed.v", "variant.v"})
    if (!fs::exists(dir / f)) throw ArtifactsMissing(fmt::format("{} missing in {}", f, dir.string()));
  BugRecord r;
  try {
    std::ifstream in(meta);
    const auto j = nlohmann::json::parse(in);
    r.id = j.at("id").get<std::string>();
    r.cls = bug_class_from_string(j.at("class").get<std::string>());
    r.tool = tool_from_json(j.at("tool"));
    r.fingerprint = j.at("fingerprint").get<std::string>();
    r.reproduced = j.at("reproduced").get<bool>();
    r.seed_name = j.at("seed_name").get<std::string>();
    r.iteration = j.at("iteration").get<std::uint64_t>();
    r.variant_index = j.at("variant_index").get<int>();
    const auto& rng = j.at("rng");
    r.campaign_seed = rng.at("campaign_seed").get<std::uint64_t>();
    r.stimulus_seed = rng.at("stimulus_seed").get<std::uint64_t>();
    r.mutation_seed = rng.at("mutation_seed").get<std::uint64_t>();
    const auto& s = j.at("stimulus");
    r.stimulus.vector_count = s.at("vector_count").get<int>();
    r.stimulus.step_delay = s.at("step_delay").get<long>();
    r.stimulus.clock_half_period = s.at("clock_half_period").get<long>();
    r.stimulus.margin = s.at("margin").get<long>();
    r.stimulus.reset_steps = s.at("reset_steps").get<int>();
    for (const auto& e : j.at("mutation_log"))
      r.log.push_back({e.at("site").get<NodeId>(), action_from_string(e.at("action").get<std::string>()),
                       e.at("summary").get<std::string>()});
    if (!j.at("first_divergence").is_null()) {
      const auto& d = j.at("first_divergence");
      r.first_divergence = Divergence{d.at("time").get<long>(), d.at("port").get<std::string>(),
                                      d.at("ports").get<std::vector<std::string>>()};
    }
    if (!j.at("reduced").is_null()) r.reduced_ref = dir / j.at("reduced").get<std::string>();
    r.variant_statements = j.at("statements").at("variant").get<std::size_t>();
    r.reduced_statements = j.at("statements").at("reduced").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ArtifactsMissing("malformed " + meta.string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ArtifactsMissing("malformed " + meta.string() + ": " + e.what());
  }
  r.dir = dir;
  return r;
}

TestbenchAst record_testbench(const BugRecord& r, const ModuleAst& seed) {
  StimulusConfig cfg = r.stimulus;
  cfg.rng_seed = r.stimulus_seed;
  return generate_testbench(extract_ports(seed), cfg, seed.name);
}

namespace {

struct StoredCase {
  ModuleAst seed;
  ModuleAst variant;
  TestbenchAst tb;
};

StoredCase load_case(const BugRecord& r) {
  for (const char* f : {"seed.v", "variant.v"})
    if (!fs::exists(r.dir / f)) throw ArtifactsMissing(fmt::format("{} missing in {}", f, r.dir.string()));
  StoredCase c;
  try {
    c.seed = parse_file(r.dir / "seed.v");
    c.variant = parse_file(r.dir / "variant.v");
  } catch (const Error& e) {
    throw ArtifactsMissing(std::string("stored design does not parse: ") + e.what());
  }
  c.tb = record_testbench(r, c.seed);
  return c;
}

}  // namespace

bool reproduce(const BugRecord& r, const ToolSpec& tool, const fs::path& workdir,
               const PipelineOptions& opts) {
  const StoredCase c = load_case(r);
  std::optional<Finding> f;
  if (r.variant_index < 0) {
    const SideOutcome side = run_side(tool, c.variant, c.tb, workdir / "single", opts);
    f = identify_bug(side, side);
  } else {
    const SideOutcome s = run_side(tool, c.seed, c.tb, workdir / "seed", opts);
    const SideOutcome v = run_side(tool, c.variant, c.tb, workdir / "variant", opts);
    f = identify_bug(s, v);
  }
  return f && f->cls == r.cls;
}

// --- reduction ----------------------------------------------------------------

std::vector<ModuleAst> deletion_candidates(const ModuleAst& ast) {
  std::vector<ModuleAst> out;
  for (std::size_t i = 0; i < ast.items.size(); ++i) {
    ModuleAst c = ast;
    c.items.erase(c.items.begin() + static_cast<std::ptrdiff_t>(i));
    out.push_back(std::move(c));
  }
  std::vector<StmtPath> paths;
  for_each_stmt(ast, [&](const Stmt&, const StmtPath& p) {
    if (!p.indices.empty()) paths.push_back(p);
  });
  for (const auto& p : paths) {
    ModuleAst c = ast;
    remove_stmt(c, p);
    if (structurally_equal(c, ast)) continue;
    out.push_back(std::move(c));
  }
  return out;
}

ReductionResult reduce_design(const ModuleAst& original, const ReductionOracle& oracle,
                              const ReductionBudget& budget) {
  const auto start = Clock::now();
  ReductionResult res;
  res.design = original;
  res.original_statements = statement_count(original);
  auto exhausted = [&] {
    return res.checks >= budget.max_checks ||
           std::chrono::duration<double>(Clock::now() - start).count() >= budget.secs;
  };
  bool progress = true;
  while (progress) {
    progress = false;
    auto cands = deletion_candidates(res.design);
    std::size_t idx = 0;
    while (idx < cands.size()) {
      if (exhausted()) {
        res.timed_out = true;
        res.reduced_statements = statement_count(res.design);
        return res;
      }
      ModuleAst parsed;
      try {
        parsed = parse(emit(cands[idx]));
      } catch (const Error&) {
        ++idx;
        continue;
      }
      ++res.checks;
      if (oracle(parsed)) {
        res.design = std::move(parsed);
        cands = deletion_candidates(res.design);
        progress = true;
      } else {
        ++idx;
      }
    }
  }
  res.reduced_statements = statement_count(res.design);
  return res;
}

ReductionResult reduce_case(const BugRecord& r, const ToolSpec& tool, const fs::path& workdir,
                            const ReductionBudget& budget, const PipelineOptions& opts) {
  const StoredCase c = load_case(r);
  const fs::path cand_dir = workdir / "candidate";
  ReductionOracle oracle;
  if (r.variant_index < 0) {
    oracle = [&](const ModuleAst& cand) {
      const SideOutcome side = run_side(tool, cand, c.tb, cand_dir, opts);
      const auto f = identify_bug(side, side);
      return f && f->cls == r.cls;
    };
  } else {
    const SideOutcome seed_side = run_side(tool, c.seed, c.tb, workdir / "seed", opts);
    oracle = [&, seed_side](const ModuleAst& cand) {
      if (r.cls == BugClass::kMismatch) {
        try {
          if (!check_equivalence(c.seed, cand, c.tb, opts.limits)) return false;
        } catch (const SimulationFailed&) {
          return false;
        } catch (const ShapeMismatch&) {
          return false;
        }
      }
      const SideOutcome side = run_side(tool, cand, c.tb, cand_dir, opts);
      const auto f = identify_bug(seed_side, side);
      if (!f || f->cls != r.cls) return false;
      if (r.cls == BugClass::kMismatch && r.first_divergence)
        return f->divergence && f->divergence->ports == r.first_divergence->ports;
      return true;
    };
  }
  return reduce_design(c.variant, oracle, budget);
}

// --- seed pool ----------------------------------------------------------------

std::string content_hash(const ModuleAst& ast) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : emit(ast)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

bool SeedPool::contains(const std::string& hash) const {
  return std::any_of(entries.begin(), entries.end(), [&](const SeedEntry& e) { return e.hash == hash; });
}

SeedEntry* SeedPool::find(const std::string& hash) {
  for (auto& e : entries)
    if (e.hash == hash) return &e;
  return nullptr;
}

std::size_t SeedPool::pick() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < entries.size(); ++i) {
    const auto& a = entries[i];
    const auto& b = entries[best];
    if (a.variants < b.variants || (a.variants == b.variants && a.order < b.order)) best = i;
  }
  return best;
}

SeedPool update_seed_pool(SeedPool pool, const ModuleAst& design, const std::string& name) {
  const std::string hash = content_hash(design);
  if (pool.contains(hash)) return pool;
  if (pool.capacity == 0) return pool;
  if (pool.entries.size() >= pool.capacity) {
    auto victim = pool.entries.begin();
    for (auto it = pool.entries.begin(); it != pool.entries.end(); ++it) {
      const double y = it->yield(), vy = victim->yield();
      if (y < vy || (y == vy && it->order < victim->order)) victim = it;
    }
    pool.entries.erase(victim);
  }
  SeedEntry e;
  e.hash = hash;
  e.name = name;
  e.ast = design;
  e.order = pool.next_order++;
  pool.entries.push_back(std::move(e));
  return pool;
}

SeedPool update_seed_pool(SeedPool pool, const Variant& variant, const std::string& name) {
  if (variant.equivalence != Equivalence::kVerified) return pool;
  return update_seed_pool(std::move(pool), variant.ast, name);
}

nlohmann::json stats_to_json(const CampaignStats& s) {
  return {{"iterations", s.iterations},
          {"variants", s.variants},
          {"synth_calls", s.synth_calls},
          {"findings", s.findings},
          {"duplicates", s.duplicates},
          {"flaky", s.flaky},
          {"seed_side", s.seed_side},
          {"adapter_errors", s.adapter_errors},
          {"unverified_variants", s.unverified_variants},
          {"seeds_dropped", s.seeds_dropped},
          {"mutation",
           {{"attempts", s.mutation.attempts},
            {"invalid", s.mutation.invalid},
            {"not_equivalent", s.mutation.not_equivalent},
            {"verified", s.mutation.verified},
            {"degenerate", s.mutation.degenerate}}},
          {"feedback", {{"success", s.feedback_success}, {"failure", s.feedback_failure}}},
          {"coverage",
           {{"line_pct", s.line_pct}, {"condition_pct", s.condition_pct}, {"branch_pct", s.branch_pct}}}};
}

// --- campaign -----------------------------------------------------------------

namespace {

template <class F>
void parallel_for(int n, int workers, F&& f) {
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (int i = 0; i < n; ++i) f(i);
}

struct SideSlot {
  std::optional<SideOutcome> outcome;
  std::string error;
  fs::path dir;
};

struct VariantTask {
  std::uint64_t mutation_seed = 0;
  Variant variant;
  MutationStats stats;
  std::string error;
  std::optional<CoverageSummary> coverage;
  std::vector<SideSlot> sides;
};

std::string base_name(const std::string& name) {
  const auto dot = name.find('.');
  return dot == std::string::npos ? name : name.substr(0, dot);
}

void copy_log(const SideSlot& slot, const fs::path& dest) {
  std::error_code ec;
  const fs::path src = slot.dir / "tool.log";
  if (fs::exists(src)) {
    fs::copy_file(src, dest, fs::copy_options::overwrite_existing, ec);
    if (!ec) return;
  }
  write_file(dest, slot.outcome ? slot.outcome->synth.log_excerpt : std::string());
}

bool coverage_gain(const CoverageSummary& v, const CoverageSummary& s) {
  return v.line_pct > s.line_pct || v.condition_pct > s.condition_pct || v.branch_pct > s.branch_pct;
}

}  // namespace

CampaignResult run_campaign(const CampaignConfig& cfg, const CampaignHooks& hooks) {
  validate_config(cfg);
  if (cfg.seeds_dir.empty()) throw ConfigError("seeds_dir not set");
  if (!fs::is_directory(cfg.seeds_dir)) throw ConfigError("seeds_dir " + cfg.seeds_dir.string() + " is not a directory");
  std::vector<NamedDesign> seeds;
  for (const auto& p : list_verilog_files(cfg.seeds_dir)) {
    try {
      seeds.push_back({p.stem().string(), parse_file(p)});
    } catch (const Error& e) {
      if (hooks.log) hooks.log(fmt::format("skipping seed {}: {}", p.string(), e.what()));
    }
  }
  return run_campaign(cfg, seeds, hooks);
}

CampaignResult run_campaign(const CampaignConfig& cfg, const std::vector<NamedDesign>& seeds,
                            const CampaignHooks& hooks) {
  validate_config(cfg);
  if (seeds.empty()) throw ConfigError("no usable seeds");
  const auto start = Clock::now();
  const std::string started_at = iso_now();
  auto log = [&](const std::string& msg) {
    if (hooks.log) hooks.log(msg);
  };
  PipelineOptions popts;
  popts.synth = synth_or_default(hooks.synth);

  std::optional<FragmentModel> model;
  if (!cfg.fragment_model_path.empty()) {
    try {
      model = load_model(cfg.fragment_model_path);
    } catch (const Error& e) {
      throw ConfigError(std::string("fragment model: ") + e.what());
    }
  }

  SeedPool pool;
  pool.capacity = cfg.seed_pool_capacity;
  for (const auto& s : seeds) {
    ModuleAst a = s.ast;
    renumber(a);
    pool = update_seed_pool(std::move(pool), a, s.name);
  }

  const fs::path out_dir = cfg.output_dir;
  const fs::path bugs_dir = out_dir / "bugs";
  const fs::path work = resolve_workdir(cfg);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  fs::remove_all(bugs_dir, ec);
  fs::create_directories(bugs_dir, ec);
  fs::create_directories(work, ec);
  if (!fs::is_directory(bugs_dir) || !fs::is_directory(work))
    throw WorkdirError("cannot create output directories under " + out_dir.string());
  std::ofstream mutlog(out_dir / "mutations.jsonl", std::ios::trunc);

  MutationConfig mcfg;
  mcfg.variants_per_seed = cfg.variants_per_seed;
  mcfg.max_retries = cfg.max_retries;
  const ReductionBudget rbudget{cfg.reduce_budget_secs, cfg.reduce_max_checks};

  CampaignResult result;
  CampaignStats& st = result.stats;
  std::set<std::string> reported;
  const int T = static_cast<int>(cfg.tools.size());
  const int V = cfg.variants_per_seed;
  double cov_line = 0, cov_cond = 0, cov_branch = 0;
  std::uint64_t cov_n = 0;

  for (std::uint64_t it = 0;; ++it) {
    if (cfg.max_iterations && it >= *cfg.max_iterations) break;
    if (cfg.wall_clock_budget_secs &&
        std::chrono::duration<double>(Clock::now() - start).count() >= *cfg.wall_clock_budget_secs)
      break;
    if (pool.entries.empty()) {
      log("seed pool exhausted");
      break;
    }
    ++st.iterations;
    const SeedEntry entry = pool.entries[pool.pick()];
    const std::uint64_t iseed = derive_seed(cfg.rng_seed, it);
    StimulusConfig scfg = cfg.stimulus;
    scfg.rng_seed = derive_seed(iseed, 1);

    TestbenchAst tb;
    CoverageReport seed_cov;
    CoverageSummary seed_summary;
    try {
      tb = generate_testbench(extract_ports(entry.ast), scfg, entry.ast.name);
      seed_cov = simulate(entry.ast, tb, mcfg.limits).coverage;
      seed_summary = coverage_summary(seed_cov);
    } catch (const Error& e) {
      log(fmt::format("dropping seed {}: {}", entry.name, e.what()));
      ++st.seeds_dropped;
      std::erase_if(pool.entries, [&](const SeedEntry& x) { return x.hash == entry.hash; });
      continue;
    }
    cov_line += seed_summary.line_pct;
    cov_cond += seed_summary.condition_pct;
    cov_branch += seed_summary.branch_pct;
    ++cov_n;

    const fs::path itdir = work / fmt::format("it{}", it);

    // Seed side, one slot per tool.
    std::vector<SideSlot> seed_sides(T);
    parallel_for(T, cfg.workers, [&](int k) {
      seed_sides[k].dir = itdir / cfg.tools[k].name / "seed";
      try {
        seed_sides[k].outcome = run_side(cfg.tools[k], entry.ast, tb, seed_sides[k].dir, popts);
      } catch (const std::exception& e) {
        seed_sides[k].error = e.what();
      }
    });
    std::vector<bool> tool_live(T);
    for (int k = 0; k < T; ++k)
      tool_live[k] = seed_sides[k].outcome && seed_sides[k].outcome->synth.status == SynthStatus::kOk;

    // Variants: generation, design-side coverage, synthesis per live tool.
    std::vector<VariantTask> tasks(V);
    parallel_for(V, cfg.workers, [&](int j) {
      VariantTask& t = tasks[j];
      t.mutation_seed = derive_seed(iseed, 100 + static_cast<std::uint64_t>(j));
      t.sides.resize(T);
      try {
        SplitMix64 rng(t.mutation_seed);
        t.variant = gen_variant(entry.ast, seed_cov, model ? &*model : nullptr, mcfg, tb, rng, &t.stats);
      } catch (const std::exception& e) {
        t.error = e.what();
        return;
      }
      if (t.variant.log.empty()) return;
      try {
        t.coverage = coverage_summary(simulate(t.variant.ast, tb, mcfg.limits).coverage);
      } catch (const Error&) {
      }
      for (int k = 0; k < T; ++k) {
        if (!tool_live[k]) continue;
        t.sides[k].dir = itdir / cfg.tools[k].name / fmt::format("v{}", j);
        try {
          t.sides[k].outcome = run_side(cfg.tools[k], t.variant.ast, tb, t.sides[k].dir, popts);
        } catch (const std::exception& e) {
          t.sides[k].error = e.what();
        }
      }
    });

    // Serial merge in (tool, variant) order.
    std::uint64_t new_bugs = 0;
    auto handle = [&](const Finding& f, int k, int j, const ModuleAst& variant,
                      const std::vector<MutationLogEntry>& mlog, std::uint64_t mseed,
                      const SideSlot& slot) -> bool {
      ++st.findings;
      const ToolSpec& tool = cfg.tools[k];
      const std::string fp = fingerprint(f, tool.name);
      if (reported.count(fp)) {
        ++st.duplicates;
        return false;
      }
      BugRecord r;
      r.id = fmt::format("bug-{:04d}", result.bugs.size() + 1);
      r.cls = f.cls;
      r.tool = tool;
      r.fingerprint = fp;
      r.first_divergence = f.divergence;
      r.dir = bugs_dir / r.id;
      r.seed_name = entry.name;
      r.iteration = it;
      r.variant_index = j;
      r.campaign_seed = cfg.rng_seed;
      r.stimulus_seed = scfg.rng_seed;
      r.mutation_seed = mseed;
      r.stimulus = cfg.stimulus;
      r.log = mlog;
      r.variant_statements = statement_count(variant);
      r.reduced_statements = r.variant_statements;
      fs::create_directories(r.dir, ec);
      write_file(r.dir / "seed.v", emit(entry.ast));
      write_file(r.dir / "variant.v", emit(variant));
      write_file(r.dir / "testbench.v", emit_testbench(tb));
      copy_log(slot, r.dir / "tool.log");
      const auto t0 = Clock::now();
      try {
        r.reproduced = reproduce(r, tool, itdir / "repro" / r.id, popts);
      } catch (const std::exception& e) {
        log(fmt::format("reproduction of {} failed: {}", r.id, e.what()));
      }
      if (!r.reproduced) {
        ++st.flaky;
        fs::remove_all(r.dir, ec);
        return false;
      }
      const double repro_secs = std::chrono::duration<double>(Clock::now() - t0).count();
      double reduce_secs = 0;
      bool reduce_timed_out = false;
      if (cfg.reduce) {
        const auto t1 = Clock::now();
        try {
          const ReductionResult red = reduce_case(r, tool, itdir / "reduce" / r.id, rbudget, popts);
          write_file(r.dir / "reduced.v", emit(red.design));
          r.reduced_ref = r.dir / "reduced.v";
          r.reduced_statements = red.reduced_statements;
          reduce_timed_out = red.timed_out;
        } catch (const std::exception& e) {
          log(fmt::format("reduction of {} failed: {}", r.id, e.what()));
        }
        reduce_secs = std::chrono::duration<double>(Clock::now() - t1).count();
      }
      nlohmann::json meta = record_to_json(r);
      meta["timestamps"] = {{"campaign_started", started_at},
                            {"recorded_at", iso_now()},
                            {"synth_elapsed_secs", slot.outcome ? slot.outcome->synth.elapsed_secs : 0.0},
                            {"reproduce_secs", repro_secs},
                            {"reduce_secs", reduce_secs},
                            {"reduce_timed_out", reduce_timed_out}};
      write_file(r.dir / "metadata.json", meta.dump(2) + "\n");
      log(fmt::format("{}: class {} on {} ({})", r.id, to_string(r.cls), tool.name, entry.name));
      reported.insert(fp);
      result.bugs.push_back(std::move(r));
      ++new_bugs;
      return true;
    };

    for (int k = 0; k < T; ++k) {
      const SideSlot& s = seed_sides[k];
      if (!s.outcome) {
        ++st.adapter_errors;
        log(fmt::format("tool {} on seed {}: {}", cfg.tools[k].name, entry.name, s.error));
        continue;
      }
      ++st.synth_calls;
      if (tool_live[k]) continue;
      ++st.seed_side;
      if (auto f = identify_bug(*s.outcome, *s.outcome)) handle(*f, k, -1, entry.ast, {}, 0, s);
    }

    std::vector<FeedbackOutcome> feedback;
    std::vector<std::pair<ModuleAst, std::string>> fresh;
    for (int j = 0; j < V; ++j) {
      VariantTask& t = tasks[j];
      if (!t.error.empty()) {
        log(fmt::format("variant {} of {}: {}", j, entry.name, t.error));
        continue;
      }
      ++st.variants;
      st.mutation += t.stats;
      if (t.variant.equivalence != Equivalence::kVerified) {
        ++st.unverified_variants;
        continue;
      }
      nlohmann::json line{{"iteration", it},
                          {"seed", entry.name},
                          {"seed_hash", entry.hash},
                          {"variant", j},
                          {"mutation_seed", t.mutation_seed},
                          {"equivalence", "verified"},
                          {"hash", content_hash(t.variant.ast)},
                          {"log", log_json(t.variant.log)}};
      mutlog << line.dump() << "\n";
      if (t.variant.log.empty()) continue;
      bool discrepancy = false;
      for (int k = 0; k < T; ++k) {
        if (!tool_live[k]) continue;
        const SideSlot& vs = t.sides[k];
        if (!vs.outcome) {
          ++st.adapter_errors;
          log(fmt::format("tool {} on variant {} of {}: {}", cfg.tools[k].name, j, entry.name, vs.error));
          continue;
        }
        ++st.synth_calls;
        if (auto f = identify_bug(*seed_sides[k].outcome, *vs.outcome)) {
          discrepancy = true;
          handle(*f, k, j, t.variant.ast, t.variant.log, t.mutation_seed, vs);
        }
      }
      const bool success = discrepancy || (t.coverage && coverage_gain(*t.coverage, seed_summary));
      for (const auto& frag : t.variant.fragments) {
        feedback.push_back({frag, success});
        ++(success ? st.feedback_success : st.feedback_failure);
      }
      if (cfg.max_seed_statements == 0 || statement_count(t.variant.ast) <= cfg.max_seed_statements)
        fresh.emplace_back(t.variant.ast, fmt::format("{}.i{}v{}", base_name(entry.name), it, j));
    }

    if (SeedEntry* e = pool.find(entry.hash)) {
      e->variants += static_cast<std::uint64_t>(V);
      e->bugs += new_bugs;
    }
    for (auto& [ast, name] : fresh) pool = update_seed_pool(std::move(pool), ast, name);
    if (model && !feedback.empty()) model = feedback_update(*model, feedback);
    if (!cfg.keep_workdir) fs::remove_all(itdir, ec);
  }

  if (cov_n) {
    st.line_pct = cov_line / static_cast<double>(cov_n);
    st.condition_pct = cov_cond / static_cast<double>(cov_n);
    st.branch_pct = cov_branch / static_cast<double>(cov_n);
  }
  st.elapsed_secs = std::chrono::duration<double>(Clock::now() - start).count();
  result.pool_size = pool.entries.size();

  nlohmann::json bugs = nlohmann::json::array();
  for (const auto& b : result.bugs) bugs.push_back(record_to_json(b));
  nlohmann::json summary{{"config", config_to_json(cfg)},
                         {"stats", stats_to_json(st)},
                         {"pool_size", result.pool_size},
                         {"bugs", bugs},
                         {"timestamps", {{"started", started_at},
                                         {"finished", iso_now()},
                                         {"elapsed_secs", st.elapsed_secs}}}};
  write_file(out_dir / "campaign.json", summary.dump(2) + "\n");
  if (model) save_model(*model, out_dir / "model.json");
  return result;
}

}  // namespace hdlmutant
