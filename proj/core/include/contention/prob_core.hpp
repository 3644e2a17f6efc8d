#pragma once

// Order-statistic probabilities for N i.i.d. Uniform[0,1] samples.
//
// A Region (a, b] is the base station's knowledge about the two largest
// samples Y_{N-1} <= Y_N during contention resolution:
//   a == 0 : every sample is <= b                      {Y_N <= b}
//   a  > 0 : every sample is <= b and at least two exceed a
//                                                      {Y_{N-1} > a, Y_N <= b}
// All probabilities are unconditional (not normalised by the region mass).
// Dividing by a positive constant does not move an argmax, so the optimal
// threshold of the conditional and unconditional forms coincide.

#include <functional>

namespace contention {

struct Region {
  double lower = 0.0;
  double upper = 1.0;
  int users = 2;

  /// True for the a == 0 form, which carries no constraint on Y_{N-1}.
  bool anchored() const { return lower == 0.0; }
  bool empty() const { return !(lower < upper); }

  friend bool operator==(const Region&, const Region&) = default;
};

/// Validating constructor: 0 <= a <= b <= 1, N >= 2. a == b is an empty
/// region of mass zero.
Region make_region(double lower, double upper, int users);

/// Throws DomainError if the region violates its invariants.
void validate(const Region& region);

/// Pr(Y_{N-1} <= y < Y_N, Y_N <= b, Y_{N-1} > a) = N (b - y)(y^{N-1} - a^{N-1}).
double success_probability(const Region& region, double y);

/// Probability of the knowledge state itself: b^N when a == 0, otherwise
/// b^N - a^N - N a^{N-1} (b - a). Zero for an empty region.
double region_mass(const Region& region);

/// (b - y)(y^{N-1} - a^{N-1}); proportional to success_probability.
double threshold_objective(const Region& region, double y);

/// d/dy of threshold_objective.
double threshold_objective_slope(const Region& region, double y);

/// Bisection on threshold_objective_slope over (a, b). Runs to full double
/// resolution; no closed-form shortcuts.
double solve_stationary_point(const Region& region);

/// The success-maximising threshold for the region. Uses the closed forms
/// y = b (1 - 1/N) when a == 0 and y = (a + b) / 2 when N == 2, and
/// solve_stationary_point otherwise.
double optimal_threshold(const Region& region);

/// Knowledge after a collision on the probe (y, b].
Region collision_child(const Region& region, double y);
/// Knowledge after an idle probe (y, b]. Keeps a == 0 semantics.
Region idle_child(const Region& region, double y);

/// Pluggable threshold choice; used by the perturbation studies and by the
/// verification suite's fault injection.
using ThresholdRule = std::function<double(const Region&)>;

/// x^m - y^m computed as (x - y) * sum x^k y^{m-1-k}, stable when x ~ y.
double power_difference(double x, double y, int m);

}  // namespace contention
