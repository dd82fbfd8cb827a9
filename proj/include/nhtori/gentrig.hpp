#pragma once

#include "nhtori/const_scalar.hpp"
#include "nhtori/poly.hpp"

#include <map>
#include <mutex>
#include <utility>

namespace nhtori {

/// Period of Cs, Sn for Andreev number n (n <= 3 stays in the constant basis).
ConstScalar period(int n);

/// I(p, q) = integral over one period of Sn^p * Cs^q.
ConstScalar moment(int n, int p, int q);

/// Closed Beta/Gamma form of I(p, q) for even p, q; used as a cross-check.
ConstScalar moment_closed_form(int n, int p, int q);

/// Memo of moments for one Andreev number; concurrent fills are idempotent.
class MomentTable {
 public:
  explicit MomentTable(int n);
  int n() const { return n_; }
  const ConstScalar& period() const { return period_; }
  ConstScalar get(int p, int q);

 private:
  int n_;
  ConstScalar period_;
  std::mutex mutex_;
  std::map<std::pair<int, int>, ConstScalar> cache_;
};

struct CsSn {
  double cs;
  double sn;
};

/// Numeric Cs(theta), Sn(theta): u' = -v, v' = u^(2n-1), u(0) = 1, v(0) = 0.
CsSn gentrig_eval(int n, double theta);

/// Advances (u, v) = (Cs, Sn) by h with a high-order Taylor step.
CsSn gentrig_advance(int n, CsSn state, double h);

double period_value(int n);

}  // namespace nhtori
