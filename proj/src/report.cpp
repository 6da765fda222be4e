#include "hdlmutant/report.hpp"

#include <fmt/format.h>

#include <fstream>
#include <map>
#include <set>

#include "hdlmutant/errors.hpp"

namespace hdlmutant {

std::string render_report(const nlohmann::json& c) {
  std::string out = "# Campaign report\n\n";
  const auto& stats = c.at("stats");
  const auto& bugs = c.at("bugs");

  std::map<std::string, std::map<std::string, int>> by_tool;
  std::set<std::string> tools;
  if (c.contains("config"))
    for (const auto& t : c.at("config").at("tools")) tools.insert(t.at("name").get<std::string>());
  for (const auto& b : bugs) {
    const auto tool = b.at("tool").at("name").get<std::string>();
    tools.insert(tool);
    ++by_tool[tool][b.at("class").get<std::string>()];
  }
  out += "## Bugs by class and tool\n\n| tool | H | C | M | total |\n|---|---|---|---|---|\n";
  int th = 0, tc = 0, tm = 0;
  for (const auto& t : tools) {
    auto& m = by_tool[t];
    out += fmt::format("| {} | {} | {} | {} | {} |\n", t, m["H"], m["C"], m["M"], m["H"] + m["C"] + m["M"]);
    th += m["H"];
    tc += m["C"];
    tm += m["M"];
  }
  out += fmt::format("| **all** | {} | {} | {} | {} |\n\n", th, tc, tm, th + tc + tm);

  const auto& cov = stats.at("coverage");
  out += "## Seed coverage (mean over iterations)\n\n| metric | value |\n|---|---|\n";
  out += fmt::format("| line | {:.2f}% |\n", cov.at("line_pct").get<double>());
  out += fmt::format("| condition | {:.2f}% |\n", cov.at("condition_pct").get<double>());
  out += fmt::format("| branch | {:.2f}% |\n\n", cov.at("branch_pct").get<double>());

  const auto& mu = stats.at("mutation");
  const auto attempts = mu.at("attempts").get<std::uint64_t>();
  const auto verified = mu.at("verified").get<std::uint64_t>();
  out += "## Campaign\n\n| counter | value |\n|---|---|\n";
  out += fmt::format("| iterations | {} |\n", stats.at("iterations").get<std::uint64_t>());
  out += fmt::format("| variants | {} |\n", stats.at("variants").get<std::uint64_t>());
  out += fmt::format("| mutation attempts | {} |\n", attempts);
  out += fmt::format("| verified | {} ({:.1f}%) |\n", verified,
                     attempts ? 100.0 * static_cast<double>(verified) / static_cast<double>(attempts) : 0.0);
  out += fmt::format("| invalid | {} |\n", mu.at("invalid").get<std::uint64_t>());
  out += fmt::format("| not equivalent | {} |\n", mu.at("not_equivalent").get<std::uint64_t>());
  out += fmt::format("| degenerate (seed returned) | {} |\n", mu.at("degenerate").get<std::uint64_t>());
  out += fmt::format("| synthesis calls | {} |\n", stats.at("synth_calls").get<std::uint64_t>());
  out += fmt::format("| findings | {} |\n", stats.at("findings").get<std::uint64_t>());
  out += fmt::format("| duplicates | {} |\n", stats.at("duplicates").get<std::uint64_t>());
  out += fmt::format("| not reproduced | {} |\n", stats.at("flaky").get<std::uint64_t>());
  out += fmt::format("| adapter errors | {} |\n", stats.at("adapter_errors").get<std::uint64_t>());
  if (c.contains("pool_size")) out += fmt::format("| seed pool size | {} |\n", c.at("pool_size").get<std::uint64_t>());
  out += "\n";

  if (!bugs.empty()) {
    out += "## Bugs\n\n| id | class | tool | seed | divergence | statements (variant / reduced) |\n"
           "|---|---|---|---|---|---|\n";
    for (const auto& b : bugs) {
      std::string div = "-";
      if (!b.at("first_divergence").is_null()) {
        const auto& d = b.at("first_divergence");
        div = fmt::format("t={} on {}", d.at("time").get<long>(), d.at("port").get<std::string>());
      }
      out += fmt::format("| {} | {} | {} | {} | {} | {} / {} |\n", b.at("id").get<std::string>(),
                         b.at("class").get<std::string>(), b.at("tool").at("name").get<std::string>(),
                         b.at("seed_name").get<std::string>(), div,
                         b.at("statements").at("variant").get<std::size_t>(),
                         b.at("statements").at("reduced").get<std::size_t>());
    }
  }
  return out;
}

std::string render_report(const std::filesystem::path& dir) {
  const auto path = dir / "campaign.json";
  std::ifstream in(path);
  if (!in) throw ArtifactsMissing("no campaign.json in " + dir.string());
  try {
    return render_report(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ArtifactsMissing("malformed " + path.string() + ": " + e.what());
  }
}

}  // namespace hdlmutant
