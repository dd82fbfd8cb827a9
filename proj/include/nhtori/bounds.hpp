#pragma once

#include <json.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <utility>

namespace nhtori {

struct BoundEntry {
  std::int64_t tau = 0;
  /// "seed", "CL-lift(k, m0)" or "monotonicity".
  std::string provenance;
  int k = 0;
  int m0 = 0;
};

struct BoundTable {
  std::map<int, BoundEntry> entries;

  std::map<int, std::int64_t> values() const;
  nlohmann::json to_json() const;
};

/// (2^k (m0 + 2) - 2, 8^k tau0).
std::pair<int, std::int64_t> christopher_lloyd(int m0, std::int64_t tau0, int k);

/// Fixed point of tau_m = max(seed_m, tau_{m-1} + 1, 8^k tau_{m0} over all lifts
/// landing on m) for m from the smallest seed up to m_max. Ties keep the
/// earlier source in the order seed, lift with the largest k, monotonicity.
BoundTable bound_table(const std::map<int, std::int64_t>& seeds, int m_max);

}  // namespace nhtori
