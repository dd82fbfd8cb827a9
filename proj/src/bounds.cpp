#include "nhtori/bounds.hpp"

#include <limits>
#include <stdexcept>

namespace nhtori {

std::map<int, std::int64_t> BoundTable::values() const {
  std::map<int, std::int64_t> out;
  for (const auto& [m, e] : entries) out[m] = e.tau;
  return out;
}

nlohmann::json BoundTable::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [m, e] : entries) rows.push_back({{"m", m}, {"tau", e.tau}, {"provenance", e.provenance}});
  return {{"entries", rows}};
}

std::pair<int, std::int64_t> christopher_lloyd(int m0, std::int64_t tau0, int k) {
  if (m0 < 2 || tau0 < 1 || k < 1) throw std::invalid_argument("christopher_lloyd: need m0 >= 2, tau0 >= 1, k >= 1");
  if (k > 20) throw std::overflow_error("christopher_lloyd: k too large");
  const std::int64_t scale = std::int64_t{1} << (3 * k);
  if (tau0 > std::numeric_limits<std::int64_t>::max() / scale) throw std::overflow_error("christopher_lloyd: bound overflows");
  const std::int64_t m = (std::int64_t{1} << k) * (m0 + 2) - 2;
  if (m > std::numeric_limits<int>::max()) throw std::overflow_error("christopher_lloyd: degree overflows");
  return {static_cast<int>(m), scale * tau0};
}

BoundTable bound_table(const std::map<int, std::int64_t>& seeds, int m_max) {
  if (seeds.empty()) throw std::invalid_argument("bound_table: no seeds");
  const int m_min = seeds.begin()->first;
  if (m_min < 2) throw std::invalid_argument("bound_table: seeds must have m >= 2");
  BoundTable t;
  for (bool changed = true; changed;) {
    changed = false;
    for (int m = m_min; m <= m_max; ++m) {
      BoundEntry best;
      best.tau = -1;
      if (auto it = seeds.find(m); it != seeds.end()) {
        best.tau = it->second;
        best.provenance = "seed";
      }
      // Lifts landing on m, largest k first.
      for (int k = 30; k >= 1; --k) {
        const std::int64_t num = m + 2, den = std::int64_t{1} << k;
        if (den > num || num % den != 0) continue;
        const int m0 = static_cast<int>(num / den) - 2;
        auto src = t.entries.find(m0);
        if (m0 < 2 || src == t.entries.end()) continue;
        const std::int64_t v = christopher_lloyd(m0, src->second.tau, k).second;
        if (v > best.tau) {
          best.tau = v;
          best.provenance = "CL-lift(" + std::to_string(k) + ", " + std::to_string(m0) + ")";
          best.k = k;
          best.m0 = m0;
        }
      }
      if (auto prev = t.entries.find(m - 1); prev != t.entries.end() && prev->second.tau + 1 > best.tau) {
        best.tau = prev->second.tau + 1;
        best.provenance = "monotonicity";
        best.k = best.m0 = 0;
      }
      if (best.tau < 0) continue;
      auto cur = t.entries.find(m);
      if (cur == t.entries.end() || cur->second.tau != best.tau || cur->second.provenance != best.provenance) {
        t.entries[m] = best;
        changed = true;
      }
    }
  }
  return t;
}

}  // namespace nhtori
