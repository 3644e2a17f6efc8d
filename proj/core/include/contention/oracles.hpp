#pragma once

// Ground truth that does not go through the codebook or the batch engine:
// closed forms for two users, a seeded Monte-Carlo event counter, and an
// exhaustive replay of deterministic strategies over discrete channels.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "contention/channel.hpp"
#include "contention/protocol.hpp"

namespace contention {

/// Mean delay when every region is split at the same relative position x:
/// D = 2x(1-x) + (1 + D)(1 - 2x(1-x)), i.e. D = 1 / (2x(1-x)).
double n2_delay(double x);

/// Threshold entropy (bits) of the same self-similar two-user code:
/// [-s log2 s - x^2 log2 x^2 - (1-x)^2 log2 (1-x)^2] / s with s = 2x(1-x).
double n2_entropy(double x);

struct MonteCarloEstimate {
  double frequency = 0.0;
  double standard_error = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t hits = 0;
};

using SamplePredicate = std::function<bool(const SlotSample&)>;

/// Deterministic per seed (same block-stream scheme as run_batch).
MonteCarloEstimate mc_event_frequency(const SamplePredicate& event, const ChannelModel& channel,
                                      std::uint64_t trials, std::uint64_t seed);

struct DiscreteDelayReport {
  /// Minislots per channel state, declarations included; aligned with
  /// channel.states().
  std::vector<int> per_state_depth;
  std::vector<bool> declared;
  double expected_delay = 0.0;
};

/// Replays a fresh strategy against every state of a discrete channel.
/// Throws DivergenceError if a replay exceeds depth_bound probes without
/// success or declaration.
DiscreteDelayReport discrete_exact_delay(const ChannelModel& channel, const StrategyFactory& make,
                                         int depth_bound = 1024);

}  // namespace contention
