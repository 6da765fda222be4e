// hdlmutant: mine, fuzz, reduce, report, gen-seeds.
#include <unistd.h>

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "hdlmutant/config.hpp"
#include "hdlmutant/design_gen.hpp"
#include "hdlmutant/emitter.hpp"
#include "hdlmutant/errors.hpp"
#include "hdlmutant/fragment.hpp"
#include "hdlmutant/harness.hpp"
#include "hdlmutant/report.hpp"

namespace fs = std::filesystem;
using namespace hdlmutant;

namespace {

constexpr int kOk = 0;
constexpr int kBugsFound = 1;
constexpr int kUsage = 2;

struct FuzzArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<double> timeout_secs;
  std::optional<int> variants_per_seed;
  std::optional<std::string> out;
  std::optional<std::uint64_t> max_iterations;
  std::optional<double> wall_clock;
  bool quiet = false;
};

int run_mine(const std::string& corpus, const std::string& out, int max_len) {
  const auto files = list_verilog_files(corpus);
  const CorpusStats stats = ingest_corpus(files);
  const FragmentModel model = build_model(stats, max_len);
  save_model(model, out);
  fmt::print("mined {} files ({} rejected): {} elements, {} transitions, T = {:.4f} -> {}\n",
             stats.files_ingested, stats.files_rejected, model.freq.size(), model.transitions.size(),
             model.threshold_T, out);
  return kOk;
}

int run_fuzz(const FuzzArgs& a) {
  CampaignConfig cfg = load_config(a.config);
  if (a.seed) cfg.rng_seed = *a.seed;
  if (a.workers) cfg.workers = *a.workers;
  if (a.timeout_secs)
    for (auto& t : cfg.tools) t.timeout_secs = *a.timeout_secs;
  if (a.variants_per_seed) cfg.variants_per_seed = *a.variants_per_seed;
  if (a.out) cfg.output_dir = *a.out;
  if (a.max_iterations) {
    cfg.max_iterations = a.max_iterations;
    cfg.wall_clock_budget_secs.reset();
  }
  if (a.wall_clock) {
    cfg.wall_clock_budget_secs = a.wall_clock;
    cfg.max_iterations.reset();
  }
  validate_config(cfg);
  CampaignHooks hooks;
  if (!a.quiet) hooks.log = [](const std::string& m) { std::cerr << m << "\n"; };
  const CampaignResult r = run_campaign(cfg, hooks);
  fmt::print("{} iterations, {} variants, {} bugs -> {}\n", r.stats.iterations, r.stats.variants,
             r.bugs.size(), (cfg.output_dir / "bugs").string());
  return r.bugs.empty() ? kOk : kBugsFound;
}

int run_reduce(const std::string& dir, double budget_secs, std::size_t max_checks) {
  BugRecord r = load_bug_record(dir);
  fs::path work;
  if (const char* env = std::getenv("HDLMUTANT_WORKDIR"); env && *env) {
    work = fs::path(env) / fmt::format("reduce-{}-{}", r.id, getpid());
  } else {
    work = fs::temp_directory_path() / fmt::format("hdlmutant-reduce-{}-{}", r.id, getpid());
  }
  const ReductionResult red = reduce_case(r, r.tool, work, {budget_secs, max_checks});
  std::error_code ec;
  fs::remove_all(work, ec);
  {
    std::ofstream out(fs::path(dir) / "reduced.v");
    out << emit(red.design);
  }
  const fs::path meta_path = fs::path(dir) / "metadata.json";
  nlohmann::json meta;
  {
    std::ifstream in(meta_path);
    meta = nlohmann::json::parse(in);
  }
  r.reduced_ref = fs::path(dir) / "reduced.v";
  r.reduced_statements = red.reduced_statements;
  nlohmann::json updated = record_to_json(r);
  if (meta.contains("timestamps")) updated["timestamps"] = meta["timestamps"];
  std::ofstream(meta_path) << updated.dump(2) << "\n";
  fmt::print("{}: {} -> {} statements in {} checks{}\n", r.id, red.original_statements,
             red.reduced_statements, red.checks, red.timed_out ? " (budget exhausted)" : "");
  return kOk;
}

int run_report(const std::string& dir, const std::string& out) {
  const std::string md = render_report(fs::path(dir));
  if (out.empty() || out == "-") {
    std::cout << md;
  } else {
    std::ofstream f(out);
    if (!f) throw WorkdirError("cannot write " + out);
    f << md;
  }
  return kOk;
}

int run_gen_seeds(const std::string& dir, int count, std::uint64_t seed, int max_statements, bool styled) {
  fs::create_directories(dir);
  SplitMix64 rng(seed);
  DesignGenOptions opts;
  opts.max_statements = max_statements;
  for (int i = 0; i < count; ++i) {
    const std::string name = fmt::format("seed_{:04d}", i);
    const ModuleAst ast = generate_design(name, rng, opts);
    std::ofstream out(fs::path(dir) / (name + ".v"));
    out << (styled ? emit_styled(ast, rng) : emit(ast));
  }
  fmt::print("wrote {} designs to {}\n", count, dir);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equivalence-modulo-inputs fuzzer for HDL synthesis tools"};
  app.require_subcommand(1);

  std::string mine_corpus, mine_out = "model.json";
  int mine_len = 8;
  auto* mine = app.add_subcommand("mine", "Mine a Verilog corpus into a fragment model");
  mine->add_option("corpus_dir", mine_corpus, "Directory of .v files")->required()->check(CLI::ExistingDirectory);
  mine->add_option("-o,--output", mine_out, "Model path");
  mine->add_option("--max-len", mine_len, "Maximum fragment length L")->check(CLI::PositiveNumber);

  FuzzArgs fa;
  auto* fuzz = app.add_subcommand("fuzz", "Run a fuzzing campaign");
  fuzz->add_option("-c,--config", fa.config, "Campaign config (JSON)")->required();
  fuzz->add_option("--seed", fa.seed, "Override rng_seed");
  fuzz->add_option("--workers", fa.workers, "Override worker count");
  fuzz->add_option("--timeout-secs", fa.timeout_secs, "Override every tool timeout");
  fuzz->add_option("--variants-per-seed", fa.variants_per_seed, "Override variants per seed");
  fuzz->add_option("--out", fa.out, "Override output directory");
  fuzz->add_option("--max-iterations", fa.max_iterations, "Stop after N iterations");
  fuzz->add_option("--wall-clock", fa.wall_clock, "Stop after this many seconds");
  fuzz->add_flag("-q,--quiet", fa.quiet, "No progress log");

  std::string reduce_dir;
  double reduce_secs = 60.0;
  std::size_t reduce_checks = 2000;
  auto* reduce = app.add_subcommand("reduce", "Reduce a recorded bug");
  reduce->add_option("bug_dir", reduce_dir, "bugs/<id> directory")->required();
  reduce->add_option("--budget-secs", reduce_secs, "Time budget");
  reduce->add_option("--max-checks", reduce_checks, "Oracle call budget");

  std::string report_dir = "hdlmutant-out", report_out;
  auto* report = app.add_subcommand("report", "Markdown summary of a campaign");
  report->add_option("campaign_dir,--out", report_dir, "Campaign output directory");
  report->add_option("-o,--output", report_out, "Report path (stdout if omitted)");

  std::string gen_dir;
  int gen_count = 100, gen_max = 40;
  std::uint64_t gen_seed = 1;
  bool gen_styled = false;
  auto* gen = app.add_subcommand("gen-seeds", "Write random seed designs");
  gen->add_option("dir", gen_dir, "Output directory")->required();
  gen->add_option("--count", gen_count, "Number of designs")->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--max-statements", gen_max, "Statement cap per design")->check(CLI::PositiveNumber);
  gen->add_flag("--styled", gen_styled, "Loose text style instead of canonical output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*mine) return run_mine(mine_corpus, mine_out, mine_len);
    if (*fuzz) return run_fuzz(fa);
    if (*reduce) return run_reduce(reduce_dir, reduce_secs, reduce_checks);
    if (*report) return run_report(report_dir, report_out);
    if (*gen) return run_gen_seeds(gen_dir, gen_count, gen_seed, gen_max, gen_styled);
  } catch (const std::exception& e) {
    std::cerr << "hdlmutant: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
