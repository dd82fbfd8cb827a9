#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace nhtori {

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
  /// Soft checks are reported but do not decide the scenario verdict.
  bool soft = false;
};

struct ScenarioReport {
  std::string name;
  std::string title;
  std::vector<Check> checks;
  std::vector<std::string> notes;
  nlohmann::json artifacts = nlohmann::json::object();
  /// Set when a step threw; later steps were not run.
  std::string aborted;

  bool pass() const;
  void add(const std::string& name, bool pass, const std::string& detail = "", bool soft = false);
  const Check* find(const std::string& name) const;
  /// Deterministic: no timings, floats at fixed precision.
  nlohmann::json to_json() const;
  std::string summary() const;
};

struct ScenarioOptions {
  /// Bits for the outward-rounded interval replays (0 = exact rationals).
  unsigned precision = 256;
  int threads = 1;
  std::uint64_t seed = 1;
  /// Run the numerical stages (cycles, tori).
  bool simulate = true;
  /// Run the eps-sweep of the torus stage (the slowest step).
  bool sweep = true;
};

std::vector<std::string> scenario_names();

/// Loads fixtures/scenario_<name>.json (std::runtime_error when missing) and
/// runs its pipeline against the golden data in that fixture.
ScenarioReport reproduce(const std::string& name, const ScenarioOptions& opts = {});

/// Fixed-precision formatting used in reports.
std::string fixed(double x, int digits = 6);
std::string sci(double x, int digits = 6);

}  // namespace nhtori
