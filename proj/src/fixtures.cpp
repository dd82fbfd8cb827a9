#include "nhtori/fixtures.hpp"

#include <cstdlib>
#include <fstream>
#include <stdexcept>

#ifndef NHTORI_FIXTURE_DIR
#define NHTORI_FIXTURE_DIR "fixtures"
#endif

namespace nhtori {

std::filesystem::path fixture_dir() {
  if (const char* env = std::getenv("NHTORI_FIXTURES")) return env;
  return NHTORI_FIXTURE_DIR;
}

nlohmann::json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return nlohmann::json::parse(in);
}

void save_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

nlohmann::json load_fixture(const std::string& name) {
  auto path = fixture_dir() / (name + ".json");
  if (!std::filesystem::exists(path)) throw std::runtime_error("fixture not found: " + name);
  return load_json_file(path);
}

}  // namespace nhtori
