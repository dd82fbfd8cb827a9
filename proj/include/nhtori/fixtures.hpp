#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>

namespace nhtori {

/// Directory holding the shipped fixtures; NHTORI_FIXTURES overrides the
/// build-time default.
std::filesystem::path fixture_dir();

/// Loads fixtures/<name>.json; throws std::runtime_error when missing.
nlohmann::json load_fixture(const std::string& name);

nlohmann::json load_json_file(const std::filesystem::path& path);
void save_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace nhtori
