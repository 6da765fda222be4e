#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

namespace hdlmutant {

/// Markdown summary of a campaign.json document: bugs by class and tool,
/// seed coverage, mutation statistics and the bug list.
std::string render_report(const nlohmann::json& campaign);

/// Reads <campaign_dir>/campaign.json. Throws ArtifactsMissing.
std::string render_report(const std::filesystem::path& campaign_dir);

}  // namespace hdlmutant
