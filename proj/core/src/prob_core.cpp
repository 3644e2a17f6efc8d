#include "contention/prob_core.hpp"

#include <cmath>
#include <sstream>

#include "contention/errors.hpp"

namespace contention {
namespace {

double ipow(double x, int n) {
  double result = 1.0;
  while (n > 0) {
    if (n & 1) result *= x;
    x *= x;
    n >>= 1;
  }
  return result;
}

std::string describe(const Region& r) {
  std::ostringstream os;
  os << "region (" << r.lower << ", " << r.upper << "] with N=" << r.users;
  return os.str();
}

}  // namespace

Region make_region(double lower, double upper, int users) {
  Region r{lower, upper, users};
  validate(r);
  return r;
}

void validate(const Region& r) {
  if (r.users < 2) throw DomainError("region needs N >= 2: " + describe(r));
  if (!std::isfinite(r.lower) || !std::isfinite(r.upper) || r.lower < 0.0 ||
      r.upper > 1.0 || r.lower > r.upper) {
    throw DomainError("invalid " + describe(r) + " (need 0 <= a <= b <= 1)");
  }
}

double power_difference(double x, double y, int m) {
  if (m <= 0) return 0.0;
  // S_1 = 1, S_{j+1} = x^j + y S_j, S_m = (x^m - y^m) / (x - y).
  double s = 1.0;
  double xp = 1.0;
  for (int j = 1; j < m; ++j) {
    xp *= x;
    s = xp + y * s;
  }
  return (x - y) * s;
}

double success_probability(const Region& r, double y) {
  validate(r);
  if (!(y >= r.lower && y <= r.upper)) {
    std::ostringstream os;
    os << "threshold " << y << " outside " << describe(r);
    throw DomainError(os.str());
  }
  return r.users * (r.upper - y) * power_difference(y, r.lower, r.users - 1);
}

double region_mass(const Region& r) {
  validate(r);
  if (r.empty()) return 0.0;
  const int n = r.users;
  const double a = r.lower;
  const double b = r.upper;
  if (r.anchored()) return ipow(b, n);
  // (b - a)^2 * sum_{k=1}^{N-1} a^{N-1-k} S_k(b, a), every term non-negative.
  double s = 1.0;  // S_1
  double bp = 1.0;
  double total = 0.0;
  for (int k = 1; k <= n - 1; ++k) {
    total = total * a + s;
    bp *= b;
    s = bp + a * s;  // S_{k+1}
  }
  const double w = b - a;
  return w * w * total;
}

double threshold_objective(const Region& r, double y) {
  return (r.upper - y) * power_difference(y, r.lower, r.users - 1);
}

double threshold_objective_slope(const Region& r, double y) {
  const int n = r.users;
  return -power_difference(y, r.lower, n - 1) + (r.upper - y) * (n - 1) * ipow(y, n - 2);
}

double solve_stationary_point(const Region& r) {
  validate(r);
  if (r.empty()) throw DomainError("no stationary point in empty " + describe(r));
  double lo = r.lower;
  double hi = r.upper;
  for (int it = 0; it < 4096; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (threshold_objective_slope(r, mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo + 0.5 * (hi - lo);
}

double optimal_threshold(const Region& r) {
  validate(r);
  if (r.empty()) throw DomainError("no threshold in empty " + describe(r));
  if (r.anchored()) return r.upper * (1.0 - 1.0 / r.users);
  if (r.users == 2) return 0.5 * (r.lower + r.upper);
  return solve_stationary_point(r);
}

Region collision_child(const Region& r, double y) { return Region{y, r.upper, r.users}; }

Region idle_child(const Region& r, double y) { return Region{r.lower, y, r.users}; }

}  // namespace contention
