#pragma once

// Per-slot channel gain generators.
//
// Continuous fading is reduced to Uniform[0,1] by the CDF transform
// X = F(H), so iid_uniform stands for any i.i.d. continuous channel.
// constant(N) gives every user the same gain; contention then runs on
// auxiliary Uniform[0,1] draws that the users pick themselves.
// discrete_joint is a finite joint table of raw gain tuples (no transform;
// values are whatever the table holds).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace contention {

using RandomStream = std::mt19937_64;

/// Slots are grouped into fixed blocks; each block draws from its own
/// stream seeded with seed_seq{seed_lo, seed_hi, block_lo, block_hi}. A slot's
/// randomness therefore depends only on (seed, slot index), whatever the
/// number of workers.
inline constexpr std::uint64_t kSlotsPerStream = 1024;
RandomStream block_stream(std::uint64_t seed, std::uint64_t block);

struct SlotSample {
  std::vector<double> gains;
  /// Sorted copy of gains, Y_1 <= ... <= Y_N.
  std::vector<double> order_stats;
  /// Constant channel only: the users' auxiliary contention draws.
  std::vector<double> auxiliary;
  /// Discrete channel only: index of the drawn state.
  std::optional<std::size_t> state;

  /// The values the users contend with: auxiliary draws when present,
  /// gains otherwise.
  std::span<const double> contention_values() const {
    return auxiliary.empty() ? std::span<const double>(gains) : std::span<const double>(auxiliary);
  }
};

SlotSample make_sample(std::vector<double> gains);

class ChannelModel {
 public:
  enum class Kind { iid_uniform, constant, discrete_joint };

  static ChannelModel iid_uniform(int users);
  static ChannelModel constant(int users);
  /// probs must be non-negative and sum to 1 within 1e-12; every state
  /// needs a unique maximiser.
  static ChannelModel discrete_joint(std::vector<std::vector<double>> states,
                                     std::vector<double> probs);

  Kind kind() const { return kind_; }
  int users() const { return users_; }
  const std::vector<std::vector<double>>& states() const { return states_; }
  const std::vector<double>& probabilities() const { return probs_; }
  /// "iid", "constant" or "discrete".
  std::string name() const;

 private:
  Kind kind_ = Kind::iid_uniform;
  int users_ = 2;
  std::vector<std::vector<double>> states_;
  std::vector<double> probs_;
};

/// Two-user chain of k states: state j has gains {2j+4, 2j+2}, the larger
/// gain alternating between the users, probabilities 1/k - (k-1-j) eps for
/// j < k-1 and 1/k + eps k(k-1)/2 for the last. k = 7 is the seven-state
/// correlated example {(4,2), (4,6), (8,6), ..., (16,14)}.
ChannelModel chain_channel(std::size_t k, double epsilon);

/// The seven-state correlated two-user example.
ChannelModel correlated_example_channel(double epsilon);

SlotSample sample_slot(const ChannelModel& channel, RandomStream& rng);

/// Index of the largest entry (first one on ties).
std::size_t argmax(std::span<const double> values);

}  // namespace contention
