#include "hdlmutant/synth.hpp"

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

#include "hdlmutant/emitter.hpp"
#include "hdlmutant/errors.hpp"
#include "hdlmutant/parser.hpp"
#include "hdlmutant/rng.hpp"
#include "hdlmutant/semantics.hpp"

extern char** environ;

namespace hdlmutant {

std::string to_string(ToolKind k) {
  switch (k) {
    case ToolKind::kExternal: return "external";
    case ToolKind::kIdentity: return "builtin_identity";
    case ToolKind::kFaulty: return "builtin_faulty";
    case ToolKind::kHang: return "builtin_hang";
    case ToolKind::kCrash: return "builtin_crash";
  }
  return "?";
}

ToolKind tool_kind_from_string(const std::string& s) {
  if (s == "external") return ToolKind::kExternal;
  if (s == "builtin_identity") return ToolKind::kIdentity;
  if (s == "builtin_faulty") return ToolKind::kFaulty;
  if (s == "builtin_hang") return ToolKind::kHang;
  if (s == "builtin_crash") return ToolKind::kCrash;
  throw ConfigError("unknown tool kind '" + s + "'");
}

std::string to_string(SynthStatus s) {
  switch (s) {
    case SynthStatus::kOk: return "ok";
    case SynthStatus::kCrash: return "crash";
    case SynthStatus::kHang: return "hang";
  }
  return "?";
}

namespace {

bool known_profile(const std::string& p) {
  return p == "and_to_or" || p == "drop_signed" || p == "off_by_one_shift";
}

}  // namespace

void validate_tool(const ToolSpec& tool) {
  if (tool.name.empty()) throw ConfigError("tool without a name");
  if (!(tool.timeout_secs > 0)) throw ConfigError("tool '" + tool.name + "': timeout must be > 0");
  if (tool.kind == ToolKind::kExternal) {
    const auto& t = tool.command_template;
    if (t.find("{input}") == std::string::npos || t.find("{output}") == std::string::npos)
      throw ConfigError("tool '" + tool.name + "': template needs {input} and {output}");
  }
  if (tool.kind == ToolKind::kFaulty && !known_profile(tool.fault_profile))
    throw ConfigError("tool '" + tool.name + "': unknown fault profile '" + tool.fault_profile + "'");
}

ToolSpec tool_from_json(const nlohmann::json& j) {
  try {
    ToolSpec t;
    t.name = j.at("name").get<std::string>();
    t.kind = tool_kind_from_string(j.at("kind").get<std::string>());
    t.command_template = j.value("command_template", std::string());
    t.timeout_secs = j.value("timeout_secs", 60.0);
    t.fault_profile = j.value("fault_profile", std::string());
    t.fault_seed = j.value("fault_seed", std::uint64_t{0});
    t.resim_template = j.value("resim_template", std::string());
    validate_tool(t);
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed tool spec: ") + e.what());
  }
}

nlohmann::json tool_to_json(const ToolSpec& t) {
  nlohmann::json j{{"name", t.name}, {"kind", to_string(t.kind)}, {"timeout_secs", t.timeout_secs}};
  if (!t.command_template.empty()) j["command_template"] = t.command_template;
  if (!t.fault_profile.empty()) {
    j["fault_profile"] = t.fault_profile;
    j["fault_seed"] = t.fault_seed;
  }
  if (!t.resim_template.empty()) j["resim_template"] = t.resim_template;
  return j;
}

namespace {

using ExprVisitor = std::function<void(Expr&)>;


void walk_expr(Expr& e, const ExprVisitor& fn) {
  fn(e);
  for (auto& op : e.operands) walk_expr(op, fn);
}

void walk_stmt(Stmt& s, const ExprVisitor& fn) {
  switch (s.kind) {
    case StmtKind::kBlockingAssign:
    case StmtKind::kNonBlockingAssign:
      walk_expr(s.lhs, fn);
      walk_expr(s.rhs, fn);
      break;
    case StmtKind::kIf:
      walk_expr(s.cond, fn);
      break;
    case StmtKind::kCase:
      walk_expr(s.cond, fn);
      for (auto& labels : s.case_labels)
        for (auto& l : labels) walk_expr(l, fn);
      break;
    case StmtKind::kFor:
      walk_expr(s.lhs, fn);
      walk_expr(s.rhs, fn);
      walk_expr(s.cond, fn);
      walk_expr(s.step, fn);
      break;
    case StmtKind::kBeginEnd:
      break;
  }
  for (auto& k : s.body) walk_stmt(k, fn);
}

void walk_module(ModuleAst& ast, const ExprVisitor& fn) {
  for (auto& item : ast.items) {
    if (item.kind == ItemKind::kContinuousAssign) {
      walk_expr(item.lhs, fn);
      walk_expr(item.rhs, fn);
    } else {
      walk_stmt(item.body, fn);
    }
  }
}

bool matches(const Expr& e, const std::string& profile) {
  if (profile == "and_to_or") return e.kind == ExprKind::kBinary && e.binary == BinaryOp::kBitAnd;
  if (profile == "drop_signed") return e.kind == ExprKind::kSignCast && e.to_signed;
  if (profile == "off_by_one_shift") return e.kind == ExprKind::kBinary && is_shift(e.binary);
  return false;
}

}  // namespace

std::size_t fault_sites(const ModuleAst& ast, const std::string& profile) {
  if (!known_profile(profile)) throw ConfigError("unknown fault profile '" + profile + "'");
  ModuleAst copy = ast;
  std::size_t n = 0;
  walk_module(copy, [&](Expr& e) { n += matches(e, profile) ? 1 : 0; });
  return n;
}

ModuleAst apply_fault(const ModuleAst& ast, const std::string& profile, std::uint64_t seed) {
  const std::size_t count = fault_sites(ast, profile);
  ModuleAst out = ast;
  if (count == 0) return out;
  const std::size_t target = SplitMix64(seed).next() % count;
  std::size_t n = 0;
  bool done = false;
  walk_module(out, [&](Expr& e) {
    if (done || !matches(e, profile)) return;
    if (n++ != target) return;
    done = true;
    if (profile == "and_to_or") {
      e.binary = BinaryOp::kBitOr;
    } else if (profile == "drop_signed") {
      Expr inner = std::move(e.operands[0]);
      e = std::move(inner);
    } else {
      Expr amount = std::move(e.operands[1]);
      e.operands[1] = Expr::binary_op(BinaryOp::kAdd, std::move(amount), Expr::unsized(1));
    }
  });
  return out;
}

std::vector<std::string> split_command(const std::string& templ,
                                       const std::vector<std::pair<std::string, std::string>>& subst) {
  std::vector<std::string> out;
  std::string cur;
  bool in_quotes = false;
  bool have = false;
  for (char c : templ) {
    if (c == '"') {
      in_quotes = !in_quotes;
      have = true;
    } else if (!in_quotes && (c == ' ' || c == '\t' || c == '\n')) {
      if (have) out.push_back(cur);
      cur.clear();
      have = false;
    } else {
      cur.push_back(c);
      have = true;
    }
  }
  if (have) out.push_back(cur);
  for (auto& arg : out) {
    for (const auto& [key, value] : subst) {
      std::size_t pos = 0;
      while ((pos = arg.find(key, pos)) != std::string::npos) {
        arg.replace(pos, key.size(), value);
        pos += value.size();
      }
    }
  }
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Polls `pid` until it exits or `timeout_secs` passes, then SIGKILLs it.
ProcessResult watch(pid_t pid, Clock::time_point start, double timeout_secs) {
  ProcessResult r;
  int status = 0;
  for (;;) {
    const pid_t w = waitpid(pid, &status, WNOHANG);
    if (w == pid) break;
    if (w < 0 && errno != EINTR) break;
    if (seconds_since(start) >= timeout_secs) {
      kill(pid, SIGKILL);
      while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
      }
      r.timed_out = true;
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  r.elapsed_secs = seconds_since(start);
  if (!r.timed_out) {
    if (WIFEXITED(status)) r.exit_code = WEXITSTATUS(status);
    if (WIFSIGNALED(status)) r.term_signal = WTERMSIG(status);
  }
  return r;
}

std::string tail_of(const std::filesystem::path& p, std::size_t max_bytes = 2048) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return {};
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string s = ss.str();
  if (s.size() > max_bytes) s = s.substr(s.size() - max_bytes);
  return s;
}

void append_log(const std::filesystem::path& p, const std::string& line) {
  std::ofstream out(p, std::ios::app);
  out << line << "\n";
}

// Runs `body` in a forked child. Only async-signal-safe work happens there.
ProcessResult run_forked(int log_fd, double timeout_secs, bool crash) {
  const auto start = Clock::now();
  const pid_t pid = fork();
  if (pid < 0) throw WorkdirError(std::string("fork failed: ") + std::strerror(errno));
  if (pid == 0) {
    if (crash) {
      static const char kMsg[] = "builtin_crash: fatal internal error, aborting\n";
      ssize_t ignored = write(log_fd, kMsg, sizeof(kMsg) - 1);
      (void)ignored;
      struct rlimit no_core {0, 0};
      setrlimit(RLIMIT_CORE, &no_core);
      signal(SIGABRT, SIG_DFL);
      abort();
    }
    for (;;) pause();
  }
  return watch(pid, start, timeout_secs);
}

}  // namespace

ProcessResult run_process(const std::vector<std::string>& argv,
                          const std::filesystem::path& log_path, double timeout_secs) {
  if (argv.empty()) throw ToolNotFound("empty command");
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, log_path.c_str(),
                                   O_WRONLY | O_CREAT | O_APPEND, 0644);
  posix_spawn_file_actions_adddup2(&actions, STDOUT_FILENO, STDERR_FILENO);
  posix_spawn_file_actions_addopen(&actions, STDIN_FILENO, "/dev/null", O_RDONLY, 0);
  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);
  const auto start = Clock::now();
  pid_t pid = 0;
  const int rc = posix_spawnp(&pid, args[0], &actions, nullptr, args.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) throw ToolNotFound("cannot start '" + argv[0] + "': " + std::strerror(rc));
  return watch(pid, start, timeout_secs);
}

SynthResult synthesize(const ToolSpec& tool, const std::filesystem::path& design_path,
                       const std::filesystem::path& workdir) {
  std::error_code ec;
  std::filesystem::create_directories(workdir, ec);
  if (ec || !std::filesystem::is_directory(workdir))
    throw WorkdirError("cannot create workdir " + workdir.string());
  const auto log_path = workdir / "tool.log";
  const auto netlist_path = workdir / "netlist.v";
  {
    std::ofstream probe(log_path, std::ios::trunc);
    if (!probe) throw WorkdirError("workdir not writable: " + workdir.string());
  }
  SynthResult res;
  const auto start = Clock::now();

  auto builtin_netlist = [&](const ModuleAst& ast) {
    std::ofstream out(netlist_path);
    out << emit(ast);
    res.netlist = ast;
    res.netlist_path = netlist_path;
  };

  switch (tool.kind) {
    case ToolKind::kIdentity: {
      builtin_netlist(parse_file(design_path));
      append_log(log_path, "builtin_identity: ok");
      break;
    }
    case ToolKind::kFaulty: {
      const ModuleAst ast = parse_file(design_path);
      const std::size_t sites = fault_sites(ast, tool.fault_profile);
      builtin_netlist(apply_fault(ast, tool.fault_profile, tool.fault_seed));
      append_log(log_path, "builtin_faulty(" + tool.fault_profile + "): " + std::to_string(sites) +
                               " candidate sites");
      break;
    }
    case ToolKind::kHang:
    case ToolKind::kCrash: {
      const int fd = ::open(log_path.c_str(), O_WRONLY | O_APPEND | O_CLOEXEC);
      if (fd < 0) throw WorkdirError("cannot open " + log_path.string());
      ProcessResult pr;
      try {
        pr = run_forked(fd, tool.timeout_secs, tool.kind == ToolKind::kCrash);
      } catch (...) {
        ::close(fd);
        throw;
      }
      ::close(fd);
      res.exit_code = pr.exit_code;
      res.term_signal = pr.term_signal;
      if (pr.timed_out) {
        res.status = SynthStatus::kHang;
        append_log(log_path, "killed after timeout");
      } else {
        res.status = SynthStatus::kCrash;
      }
      break;
    }
    case ToolKind::kExternal: {
      const auto top = [&] {
        try {
          return parse_file(design_path).name;
        } catch (const Error&) {
          return design_path.stem().string();
        }
      }();
      const auto argv = split_command(tool.command_template, {{"{input}", design_path.string()},
                                                              {"{output}", netlist_path.string()},
                                                              {"{top}", top}});
      const ProcessResult pr = run_process(argv, log_path, tool.timeout_secs);
      res.exit_code = pr.exit_code;
      res.term_signal = pr.term_signal;
      res.netlist_path = netlist_path;
      if (pr.timed_out) {
        res.status = SynthStatus::kHang;
        append_log(log_path, "killed after timeout");
      } else if (pr.exit_code != 0 || pr.term_signal != 0 || !std::filesystem::exists(netlist_path)) {
        res.status = SynthStatus::kCrash;
      } else {
        try {
          res.netlist = parse_file(netlist_path);
        } catch (const Error&) {
          // Structural netlists outside the subset stay opaque files.
        }
      }
      break;
    }
  }
  res.elapsed_secs = seconds_since(start);
  res.log_excerpt = tail_of(log_path);
  return res;
}

}  // namespace hdlmutant
