#pragma once

// Contention resolution policies. Each one is a small state machine that
// maps the feedback history to the next probe (or a declaration).

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "contention/channel.hpp"
#include "contention/mpa_codebook.hpp"
#include "contention/prob_core.hpp"
#include "contention/protocol.hpp"

namespace contention {

// ---------------------------------------------------------------------------
// Opportunistic splitting (OSA).

struct OsaState {
  int users = 2;
  double y_low = 0.0;
  double y_min = 0.5;
  double y_max = 1.0;

  friend bool operator==(const OsaState&, const OsaState&) = default;
};

OsaState osa_initial(int users);
/// Probe (y_min, y_max].
Probe osa_probe(const OsaState& state);
/// e: y_low = y_min, y_min = (y_min + y_max) / 2.
/// 0: y_max = y_min, then y_min = (y_low + y_max) / 2 if y_low != 0,
///    otherwise y_min = y_max (1 - 1/N).
OsaState osa_step(OsaState state, Feedback feedback);

class OsaStrategy final : public Strategy {
 public:
  explicit OsaStrategy(int users) : state_(osa_initial(users)) {}
  Action begin() override { return osa_probe(state_); }
  Action next(Feedback f) override;
  const OsaState& state() const { return state_; }

 private:
  OsaState state_;
};

// ---------------------------------------------------------------------------
// MPA tree descent: optimal threshold for the current region at every step.

struct MpaState {
  Region region;
  int depth = 0;
};

MpaState mpa_initial(int users);
/// Probe (optimal_threshold(region), b].
Probe mpa_probe(const MpaState& state);
/// e: region -> (y, b]; 0: region -> (a, y].
MpaState mpa_step(MpaState state, Feedback feedback);

/// Walks a prebuilt codebook tree while it can and falls back to solving
/// thresholds on the fly below the enumerated frontier.
class MpaStrategy final : public Strategy {
 public:
  explicit MpaStrategy(int users, std::shared_ptr<const Codebook> tree = nullptr);
  Action begin() override;
  Action next(Feedback f) override;
  double current_threshold() const;
  const MpaState& state() const { return state_; }

 private:
  std::shared_ptr<const Codebook> tree_;
  std::int32_t node_ = -1;
  MpaState state_;
};

// ---------------------------------------------------------------------------
// Two-sided leader election for the constant channel: an isolated user in
// the upper interval (y_min, y_max] or, after an upper collision, in the
// lower interval [y_low, y_min) wins.

struct TwoSidedState {
  enum class Phase { upper, lower };
  int users = 3;
  double y_low = 0.0;
  double y_min = 2.0 / 3.0;
  double y_max = 1.0;
  Phase phase = Phase::upper;
};

/// N must be 2 or 3: with N >= 4 a lower-interval collision becomes
/// possible and the restart rule no longer covers every case.
TwoSidedState two_sided_initial(int users);
Probe two_sided_probe(const TwoSidedState& state);
/// upper e -> probe lower next; upper 0 -> y_max = y_min and restart inside
/// [y_low, y_max]; lower 0 -> y_low = y_min and restart inside [y_low, y_max].
/// A restart puts y_min at y_low + (y_max - y_low)(1 - 1/N). Lower e throws
/// std::logic_error (unreachable for N <= 3).
TwoSidedState two_sided_step(TwoSidedState state, Feedback feedback);

class TwoSidedStrategy final : public Strategy {
 public:
  explicit TwoSidedStrategy(int users) : state_(two_sided_initial(users)) {}
  Action begin() override { return two_sided_probe(state_); }
  Action next(Feedback f) override;
  const TwoSidedState& state() const { return state_; }

 private:
  TwoSidedState state_;
};

// ---------------------------------------------------------------------------
// Discrete joint channels. The base station knows the joint table and
// probes upper sets (t, +inf) with t on the threshold ladder.

/// Shared, read-only view of a discrete channel.
class DiscreteModel {
 public:
  explicit DiscreteModel(const ChannelModel& channel);

  const ChannelModel& channel() const { return channel_; }
  std::size_t state_count() const { return channel_.states().size(); }
  /// Midpoints between adjacent distinct gain values, ascending.
  const std::vector<double>& ladder() const { return ladder_; }
  /// Feedback of state s for threshold ladder[t].
  Feedback feedback(std::size_t state, std::size_t threshold) const {
    return feedback_[state * ladder_.size() + threshold];
  }
  std::size_t winner(std::size_t state) const { return winners_[state]; }

 private:
  ChannelModel channel_;
  std::vector<double> ladder_;
  std::vector<Feedback> feedback_;
  std::vector<std::size_t> winners_;
};

class Posterior {
 public:
  explicit Posterior(std::shared_ptr<const DiscreteModel> model);
  /// Drops every state whose feedback on ladder[threshold] disagrees.
  void observe(std::size_t threshold, Feedback f);
  std::size_t alive_count() const;
  bool alive(std::size_t state) const { return alive_[state]; }
  /// Normalised posterior probability.
  double probability(std::size_t state) const;
  std::optional<std::size_t> single_state() const;
  const DiscreteModel& model() const { return *model_; }

 private:
  std::shared_ptr<const DiscreteModel> model_;
  std::vector<bool> alive_;
};

/// Greedy: probe the ladder threshold with the largest posterior success
/// mass (ties go to the higher threshold); declare once one state remains.
class DiscreteMpaStrategy final : public Strategy {
 public:
  explicit DiscreteMpaStrategy(std::shared_ptr<const DiscreteModel> model);
  Action begin() override { return decide(); }
  Action next(Feedback f) override;
  const Posterior& posterior() const { return posterior_; }
  /// Ladder index of the last probe.
  std::optional<std::size_t> last_threshold() const { return last_; }

 private:
  Action decide();
  Posterior posterior_;
  std::optional<std::size_t> last_;
};

/// Binary search on the ladder: start at the median, collision -> upper
/// half, idle -> lower half, stop on success. Declares only when the
/// search range is exhausted and the posterior holds a single state.
class DiscreteBisectStrategy final : public Strategy {
 public:
  explicit DiscreteBisectStrategy(std::shared_ptr<const DiscreteModel> model);
  Action begin() override { return decide(); }
  Action next(Feedback f) override;
  const Posterior& posterior() const { return posterior_; }

 private:
  Action decide();
  Posterior posterior_;
  std::ptrdiff_t lo_ = 0;
  std::ptrdiff_t hi_ = -1;
  std::optional<std::size_t> last_;
};

// ---------------------------------------------------------------------------

/// "osa", "mpa", "two-sided", "discrete-mpa", "discrete-bisect".
const std::vector<std::string>& strategy_names();

/// Builds a per-slot factory for the named strategy on the given channel.
/// "mpa" shares one codebook tree across slots (built here unless given).
NamedStrategy make_strategy(std::string_view name, const ChannelModel& channel,
                            std::shared_ptr<const Codebook> tree = nullptr);

}  // namespace contention
